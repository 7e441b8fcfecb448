"""Randomised algebraic property checks run by ``spintempo verify``.

The test suite checks the same properties with hypothesis; this module
gives the command-line tool a fast, seeded version with no test dependency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dirac
from .coeff import GaussQ
from .dsl import parse_operator, to_dsl
from .expr import (
    BASES,
    DEFAULT_WINDOW,
    MEASURES,
    OperatorExpr,
    Window,
    adjoint,
    commutator,
    deriv_op,
    field,
    field_op,
    mass,
    matrix_op,
    scalar,
)
from .rewrite import DEFAULT_RULES, apply_rewrites


@dataclass
class PropertyCheck:
    name: str
    passed: bool
    cases: int
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "cases": self.cases, "detail": self.detail}


def random_field(rng: np.random.Generator):
    base = BASES[rng.integers(len(BASES))]
    axes = [int(a) for a in rng.integers(1, 4, size=rng.integers(0, 3))]
    return field(base, *axes)


def random_atom(rng: np.random.Generator, window: Window = DEFAULT_WINDOW) -> OperatorExpr:
    kind = rng.integers(5)
    if kind == 0:
        c = GaussQ(int(rng.integers(-3, 4)), int(rng.integers(-2, 3)))
        return scalar(c if c else GaussQ(1), window)
    if kind == 1:
        # only non-positive powers of m: positive ones would resurrect truncated terms
        return mass(-1, window)
    if kind == 2:
        return field_op(random_field(rng), window)
    if kind == 3:
        return matrix_op(int(rng.integers(16)), window)
    return deriv_op(int(rng.integers(1, 4)), window=window)


def random_expr(rng: np.random.Generator, terms: int = 3, length: int = 3, window: Window = DEFAULT_WINDOW) -> OperatorExpr:
    """A sum of ``terms`` products of up to ``length`` random atoms."""
    out = scalar(0, window)
    for _ in range(terms):
        prod = scalar(1, window)
        for _ in range(rng.integers(1, length + 1)):
            prod = prod * random_atom(rng, window)
        out = out + prod
    return out


def _dirac_table() -> PropertyCheck:
    bad = []
    for a in range(16):
        for b in range(16):
            c, k = dirac.product(a, b)
            got = complex(c) * dirac.MATRICES[k]
            if not np.array_equal(got, dirac.MATRICES[a] @ dirac.MATRICES[b]):
                bad.append(f"{dirac.NAMES[a]}*{dirac.NAMES[b]}")
    return PropertyCheck("dirac_table", not bad, 256, ", ".join(bad[:5]))


def property_checks(seed: int = 0, samples: int = 25) -> list[PropertyCheck]:
    """Multiplication table, associativity, Leibniz rule, adjoint involution,
    rewrite idempotence and DSL round trip on seeded random expressions."""
    rng = np.random.default_rng(seed)
    results = [_dirac_table()]

    def run(name, pred):
        failures = []
        for i in range(samples):
            ok, what = pred()
            if not ok:
                failures.append(f"case {i}: {what}")
        results.append(PropertyCheck(name, not failures, samples, "; ".join(failures[:3])))

    def assoc():
        a, b, c = (random_expr(rng, 2, 2) for _ in range(3))
        return (a * b) * c == a * (b * c), to_dsl(a)

    def leibniz():
        f = random_field(rng)
        j = int(rng.integers(1, 4))
        got = commutator(deriv_op(j), field_op(f))
        return got == field_op(f.differentiate(j)), str(f)

    def involution():
        e = random_expr(rng)
        name = MEASURES[rng.integers(len(MEASURES))]
        twice = adjoint(adjoint(e, name), name)
        return apply_rewrites(twice - e, DEFAULT_RULES) == 0 if name != "flat" else twice == e, f"{name}: {to_dsl(e)}"

    def idempotent():
        e = random_expr(rng)
        once = apply_rewrites(e, DEFAULT_RULES)
        return apply_rewrites(once, DEFAULT_RULES) == once, to_dsl(e)

    def roundtrip():
        e = random_expr(rng)
        text = to_dsl(e)
        return parse_operator(text) == e and to_dsl(parse_operator(text)) == text, text

    run("associativity", assoc)
    run("leibniz", leibniz)
    run("adjoint_involution", involution)
    run("rewrite_idempotence", idempotent)
    run("dsl_round_trip", roundtrip)
    return results

