"""One pass/fail line per acceptance criterion, printed at the end of the run."""

LINES: dict = {}


def record(number: int, passed: bool, detail: str) -> bool:
    line = f"{'PASS' if passed else 'FAIL'} criterion {number:2d}: {detail}"
    LINES[number] = line
    print(line)
    return passed
