"""Command-line entry point: ``spintempo verify | fields | simulate | export``.

Exit codes are 0 when every check passes, 1 when a check fails and 2 for
usage or configuration errors.  Machine-readable JSON reports go to
``<out-dir>/<command>-report.json`` when ``--out-dir`` is given and to
stdout otherwise; a short human summary goes to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, docio

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

EXPORT_TARGETS = ("H", "H_FW", "T", "T2", "xdot1", "xdot2", "xdot3", "quadform")

# --fixture names; a group expands to several checks
FIXTURE_GROUPS = {
    "hamiltonian": ("H", "H_self_adjoint"),
    "commutator": ("p1p2",),
    "fw": ("UHU", "H_FW"),
    "beta": ("transformed_beta",),
    "tempo": ("tempo",),
    "tempo2": ("tempo_squared",),
    "velocity": ("xdot1", "xdot2", "xdot3"),
    "central": ("central",),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    from .fw import CHECK_NAMES

    p = _Parser(prog="spintempo", description="Symbolic verification and wavepacket simulation of quantum proper time.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="YAML file with defaults for the options below")
    p.add_argument("--out-dir", help="directory for reports and CSV files")
    p.add_argument("--deterministic", action="store_true", default=None, help="single-threaded, fixed seeds, byte-identical output")
    p.add_argument("--threads", type=int, help="FFT worker threads (default 1)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="check the symbolic identities and algebra properties")
    v.add_argument("--no-rewrites", action="store_true", help="disable the field-equation and gauge rewrites (negative control)")
    v.add_argument("--fixture", action="append", choices=sorted(set(FIXTURE_GROUPS) | set(CHECK_NAMES)),
                   help="restrict to a fixture or group (repeatable)")
    v.add_argument("--min-mpow", type=int, help="truncation override: keep terms down to m^MIN_MPOW (default -2)")
    v.add_argument("--flat", action="store_true", help="evaluate every identity at zero field")
    v.add_argument("--skip-properties", action="store_true", help="omit the randomised algebra checks")

    f = sub.add_parser("fields", help="check field equations and gauge conditions of a field file")
    f.add_argument("file")
    f.add_argument("--samples", type=int)
    f.add_argument("--tolerance", type=float)
    f.add_argument("--seed", type=int)

    s = sub.add_parser("simulate", help="run a scenario file")
    s.add_argument("file")
    s.add_argument("--compare-classical", action="store_true", default=None, help="add tau_cl columns from the geodesic")
    s.add_argument("--csv", help="CSV path (default <out-dir>/<scenario>.csv)")

    e = sub.add_parser("export", help="print an operator in the DSL")
    e.add_argument("what", choices=EXPORT_TARGETS)
    e.add_argument("--flat", action="store_true", help="set all fields to zero")
    e.add_argument("--no-rewrites", action="store_true", help="skip the field-equation and gauge rewrites")
    return p


def _load_config(path) -> dict:
    if not path:
        return {}
    data, _ = docio.load(path, "config")
    return data


def _settings(args, config: dict) -> dict:
    def pick(flag, key, default):
        return flag if flag is not None else config.get(key, default)

    out = {
        "out_dir": pick(args.out_dir, "out_dir", None),
        "deterministic": bool(pick(args.deterministic, "deterministic", False)),
        "threads": int(pick(args.threads, "threads", 1)),
    }
    if out["threads"] < 1:
        raise UsageError("--threads must be at least 1")
    if out["deterministic"]:
        out["threads"] = 1
    return out


def _environment() -> dict:
    import platform

    import scipy
    import sympy

    return {"spintempo": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "sympy": sympy.__version__}


def _report(command: str, config: dict, results: list, wall: float, **extra) -> dict:
    status = extra.pop("status", None) or ("pass" if all(r["passed"] for r in results) else "fail")
    rep = {
        "command": command,
        "version": __version__,
        "status": status,
        "config": config,
        "results": results,
        "timings": {"wall_seconds": wall},
        "environment": _environment(),
    }
    rep.update(extra)
    docio.validate(rep, "report")
    return rep


def _emit(rep: dict, settings: dict, human: list[str]):
    text = json.dumps(rep, indent=2, sort_keys=True) + "\n"
    if settings["out_dir"]:
        out = Path(settings["out_dir"])
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{rep['command']}-report.json"
        path.write_text(text)
        human = human + [f"report: {path}"]
    else:
        sys.stdout.write(text)
    for line in human:
        print(line, file=sys.stderr)


def _exit_code(rep: dict) -> int:
    return EXIT_PASS if rep["status"] == "pass" else EXIT_FAIL


# -- verify -------------------------------------------------------------------------

def cmd_verify(args, settings: dict, config: dict) -> int:
    from .fw import CHECK_NAMES, verify_central_identity
    from .opcore import DEFAULT_RULES, NO_RULES, Window
    from .opcore.selfcheck import property_checks

    opts = config.get("verify", {})
    t0 = time.perf_counter()
    only = None
    if args.fixture:
        only = []
        for name in args.fixture:
            only.extend(FIXTURE_GROUPS.get(name, (name,)))
        only = tuple(dict.fromkeys(only))
    min_mpow = args.min_mpow if args.min_mpow is not None else opts.get("min_mpow", -2)
    if min_mpow > -1:
        raise UsageError("--min-mpow must be -1 or lower")
    rules = NO_RULES if args.no_rewrites else DEFAULT_RULES
    report = verify_central_identity(rules=rules, window=Window(min_mpow=min_mpow), flat=args.flat, strict=False, only=only)
    exact = "exact: the normal-form difference must be the empty expression"
    results = []
    for c in report.checks:
        r = {"name": c.name, "group": "identity", "passed": c.passed, "value": c.terms, "tolerance": 0,
             "tolerance_source": exact, "comparison": "==", "note": "value counts the terms of the difference"}
        if not c.passed:
            r["difference"] = c.difference
        results.append(r)
    if not args.skip_properties:
        seed = int(opts.get("seed", 0))
        for pc in property_checks(seed=seed, samples=int(opts.get("property_samples", 25))):
            r = {"name": pc.name, "group": "property", "passed": pc.passed, "value": None, "tolerance": 0,
                 "tolerance_source": f"exact: must hold on every one of {pc.cases} seeded cases (seed {seed})", "comparison": "none"}
            if pc.detail:
                r["note"] = pc.detail
            results.append(r)
    wall = time.perf_counter() - t0
    cfg = {"rules": list(rules.names), "min_mpow": min_mpow, "flat": args.flat,
           "checks": list(only or CHECK_NAMES), "properties": not args.skip_properties, **settings}
    summary = {k: v for k, v in report.to_dict().items() if k not in ("checks", "passed")}
    rep = _report("verify", cfg, results, wall, summary=summary)
    human = [f"{'PASS' if r['passed'] else 'FAIL'} {r['group']:8s} {r['name']}" + ("" if r["passed"] else f" ({r['value']} terms)") for r in results]
    human.append(f"verify: {rep['status']} in {wall:.2f}s")
    _emit(rep, settings, human)
    return _exit_code(rep)


# -- fields -------------------------------------------------------------------------

def cmd_fields(args, settings: dict, config: dict) -> int:
    from .geometry import check_field_equations, check_gauge, load_field, sample_points

    t0 = time.perf_counter()
    doc = load_field(args.file)
    opts = config.get("fields", {})

    def pick(flag, key):
        if flag is not None:
            return flag, f"command line --{key}"
        if key in opts:
            return opts[key], f"config {args.config}: fields.{key}"
        if key in doc.explicit_checks:
            return doc.checks[key], f"field file {args.file}: checks.{key}"
        return doc.checks[key], "default"

    samples, _ = pick(args.samples, "samples")
    tol, tol_src = pick(args.tolerance, "tolerance")
    seed, _ = pick(args.seed, "seed")
    pts = sample_points(doc.model, int(samples), np.random.default_rng(int(seed)), tuple(doc.checks["shell"]))
    results = []
    for res in (check_field_equations(doc.model, pts), check_gauge(doc.model, pts)):
        results.append({
            "name": res.name, "group": "residual", "passed": res.passed(float(tol)), "value": res.relative,
            "tolerance": float(tol), "tolerance_source": tol_src, "comparison": "<=",
            "note": f"relative residual; absolute {res.absolute:.6g}",
            "details": {"absolute": res.absolute, "samples": res.samples, "per_component": res.per_component},
        })
    wall = time.perf_counter() - t0
    cfg = {"file": str(args.file), "family": doc.model.family, "samples": int(samples), "seed": int(seed),
           "description": doc.description, **settings}
    rep = _report("fields", cfg, results, wall)
    human = [f"{'PASS' if r['passed'] else 'FAIL'} {r['name']}: relative {r['value']:.3g}, absolute {r['details']['absolute']:.6g} (tol {tol:g})"
             for r in results]
    _emit(rep, settings, human)
    return _exit_code(rep)


# -- simulate -----------------------------------------------------------------------

_ERROR_PATHS = {
    "WavepacketError": ["packet"],
    "BoundaryError": ["integrator"],
    "StabilityError": ["integrator", "dt"],
    "SolverError": ["integrator", "rtol"],
    "OperatorError": ["grid"],
}


def cmd_simulate(args, settings: dict, config: dict) -> int:
    from .dynamics import DynamicsError, load_scenario, run_scenario, set_workers

    t0 = time.perf_counter()
    sc = load_scenario(args.file)
    text = Path(args.file).read_text()
    set_workers(settings["threads"])
    compare = args.compare_classical if args.compare_classical is not None else config.get("simulate", {}).get("compare_classical")
    cfg = {"file": str(args.file), "scenario": sc.raw, **settings}
    try:
        res = run_scenario(sc, compare_classical=compare)
    except DynamicsError as exc:
        kind = type(exc).__name__
        path = _ERROR_PATHS.get(kind, [])
        line = docio.line_of(text, path) if path else None
        where = f"{args.file}:{line}" if line else str(args.file)
        msg = f"{where}: {kind}: {exc}"
        if kind in ("WavepacketError", "StabilityError", "OperatorError"):
            print(f"spintempo: error: {msg}", file=sys.stderr)
            return EXIT_USAGE
        results = [{"name": "run", "passed": False, "value": None, "tolerance": None,
                    "tolerance_source": "run must complete", "comparison": "none", "note": msg}]
        rep = _report("simulate", cfg, results, time.perf_counter() - t0)
        _emit(rep, settings, [f"FAIL {msg}"])
        return EXIT_FAIL
    out_dir = Path(settings["out_dir"] or ".")
    csv = Path(args.csv) if args.csv else out_dir / f"{Path(args.file).stem}.csv"
    csv.parent.mkdir(parents=True, exist_ok=True)
    res.to_csv(csv)
    wall = time.perf_counter() - t0
    results = [dict(c, group=sc.kind) for c in res.checks]
    timings = {"wall_seconds": wall}
    runs = res.metadata()
    for name, meta in runs.items():
        timings[f"{name}_seconds"] = meta.pop("wall_seconds")
    rep = _report("simulate", cfg, results, wall, status=res.status, notes=res.notes,
                  summary={"kind": sc.kind, "runs": runs}, outputs={"csv": str(csv)})
    rep["timings"] = timings
    docio.validate(rep, "report")
    human = [f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}: {c['value']:.6g}" + (f" (tol {c['tolerance']:g})" if c["tolerance"] is not None else "")
             for c in results]
    human += list(res.notes) + [f"simulate: {rep['status']} in {wall:.1f}s; csv: {csv}"]
    _emit(rep, settings, human)
    return _exit_code(rep)


# -- export -------------------------------------------------------------------------

def export_operator(what: str, flat: bool = False, rewrites: bool = True):
    """The canonical expression behind an export target."""
    from .fw import build_hamiltonian, fw_reduce, quadratic_form, tempo_operator, tempo_squared, velocity_operator
    from .opcore import DEFAULT_RULES, NO_RULES, apply_rewrites, zero_fields

    if what not in EXPORT_TARGETS:
        raise UsageError(f"unknown export target {what!r}; choose from {', '.join(EXPORT_TARGETS)}")
    rules = DEFAULT_RULES if rewrites else NO_RULES
    H = build_hamiltonian()
    if what == "H":
        e = H
    else:
        fw = fw_reduce(H, 4)
        H_fw = fw.two_component
        T = tempo_operator(fw)
        if what == "H_FW":
            e = H_fw
        elif what == "T":
            e = T
        elif what == "T2":
            e = tempo_squared(T, rules)
        elif what.startswith("xdot"):
            e = velocity_operator(H_fw, int(what[-1]))
        else:
            e = quadratic_form([velocity_operator(H_fw, i) for i in (1, 2, 3)], rules)
    # canonical form: normal form reduced by the rewrite rules
    e = apply_rewrites(e, rules)
    return zero_fields(e) if flat else e


def cmd_export(args, settings: dict, config: dict) -> int:
    from .opcore import to_dsl

    t0 = time.perf_counter()
    text = to_dsl(export_operator(args.what, args.flat, not args.no_rewrites)) + "\n"
    sys.stdout.write(text)
    if settings["out_dir"]:
        cfg = {"what": args.what, "flat": args.flat, "rewrites": not args.no_rewrites, **settings}
        results = [{"name": f"export {args.what}", "passed": True, "value": len(text.splitlines()), "tolerance": None,
                    "tolerance_source": "informational", "comparison": "none", "note": "value counts output lines"}]
        out = Path(settings["out_dir"])
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.what}.dsl").write_text(text)
        rep = _report("export", cfg, results, time.perf_counter() - t0, outputs={"dsl": str(out / f"{args.what}.dsl")})
        (out / "export-report.json").write_text(json.dumps(rep, indent=2, sort_keys=True) + "\n")
    return EXIT_PASS


COMMANDS = {"verify": cmd_verify, "fields": cmd_fields, "simulate": cmd_simulate, "export": cmd_export}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = _load_config(args.config)
        settings = _settings(args, config)
        return COMMANDS[args.command](args, settings, config)
    except UsageError as exc:
        print(f"spintempo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except docio.ConfigError as exc:
        print(f"spintempo: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
