"""Field-equation and gauge rewriting.

The rules are linear relations among field derivatives:

* laplacian:   sum_l d_l d_l F = 0 for every field F (static vacuum equations)
* divergence:  sum_j d_j g_j = 0
* trace:       sum_j d_j h_ij + (1/2) d_i h = 0
* trace_definition (off by default): h = 2 phi - h11 - h22 - h33

Every relation is homogeneous in derivative order, so for each order ``n`` we
collect all derivatives of all enabled relations that land at order ``n``,
row-reduce them exactly, and replace each pivot symbol by its combination of
non-pivot symbols.  The result is one canonical representative per class, so
the rewrite is confluent and idempotent by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

from .coeff import GaussQ
from .expr import BASES, FieldSymbol, OperatorExpr, TermKey, metric_h


@dataclass(frozen=True)
class RewriteRuleSet:
    laplacian: bool = True
    divergence: bool = True
    trace: bool = True
    trace_definition: bool = False

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n in ("laplacian", "divergence", "trace", "trace_definition") if getattr(self, n))


DEFAULT_RULES = RewriteRuleSet()
NO_RULES = RewriteRuleSet(False, False, False, False)


def _multi_indices(n: int):
    return [(a, b, n - a - b) for a in range(n, -1, -1) for b in range(n - a, -1, -1)]


def _shift(alpha, axis, by=1):
    a = list(alpha)
    a[axis - 1] += by
    return tuple(a)


def _relations(order: int, rules: RewriteRuleSet) -> list[dict]:
    rows = []
    if rules.laplacian and order >= 2:
        for base in BASES:
            for beta in _multi_indices(order - 2):
                rows.append({FieldSymbol(base, _shift(beta, l, 2)): Fraction(1) for l in (1, 2, 3)})
    if rules.divergence and order >= 1:
        for beta in _multi_indices(order - 1):
            rows.append({FieldSymbol(f"g{j}", _shift(beta, j)): Fraction(1) for j in (1, 2, 3)})
    if rules.trace and order >= 1:
        for beta in _multi_indices(order - 1):
            for i in (1, 2, 3):
                row = {FieldSymbol(metric_h(i, j), _shift(beta, j)): Fraction(1) for j in (1, 2, 3)}
                row[FieldSymbol("h", _shift(beta, i))] = Fraction(1, 2)
                rows.append(row)
    if rules.trace_definition:
        for beta in _multi_indices(order):
            row = {FieldSymbol("h", beta): Fraction(1), FieldSymbol("phi", beta): Fraction(-2)}
            for i in (1, 2, 3):
                row[FieldSymbol(f"h{i}{i}", beta)] = Fraction(1)
            rows.append(row)
    return rows


def _priority(sym: FieldSymbol, rules: RewriteRuleSet):
    base, alpha = sym
    if rules.trace_definition and base == "h":
        rank = -1
    elif alpha[0] >= 2:
        rank = 0
    elif base == "g1" and alpha[0] >= 1:
        rank = 1
    elif base in ("h11", "h22", "h33") and alpha[int(base[1]) - 1] >= 1:
        rank = 2
    elif base == "h":
        rank = 9
    elif base == "phi":
        rank = 8
    else:
        rank = 4
    return (rank, BASES.index(base), tuple(-a for a in alpha))


@lru_cache(maxsize=None)
def _reduction_table(order: int, rules: RewriteRuleSet) -> dict:
    rows = _relations(order, rules)
    if not rows:
        return {}
    columns = sorted({s for r in rows for s in r}, key=lambda s: _priority(s, rules))
    col_index = {s: k for k, s in enumerate(columns)}
    mat = [[Fraction(0)] * len(columns) for _ in rows]
    for r, row in enumerate(rows):
        for s, v in row.items():
            mat[r][col_index[s]] = v
    pivots = []
    r = 0
    for c in range(len(columns)):
        sel = next((k for k in range(r, len(mat)) if mat[k][c]), None)
        if sel is None:
            continue
        mat[r], mat[sel] = mat[sel], mat[r]
        piv = mat[r][c]
        mat[r] = [v / piv for v in mat[r]]
        for k in range(len(mat)):
            if k != r and mat[k][c]:
                f = mat[k][c]
                mat[k] = [a - f * b for a, b in zip(mat[k], mat[r])]
        pivots.append((r, c))
        r += 1
        if r == len(mat):
            break
    table = {}
    for r, c in pivots:
        table[columns[c]] = {columns[k]: -v for k, v in enumerate(mat[r]) if v and k != c}
    return table


def reduce_symbol(sym: FieldSymbol, rules: RewriteRuleSet = DEFAULT_RULES) -> dict:
    """Canonical combination ``{symbol: coefficient}`` equal to ``sym`` modulo the rules."""
    table = _reduction_table(sym.order, rules)
    if sym in table:
        return dict(table[sym])
    return {sym: Fraction(1)}


def apply_rewrites(e: OperatorExpr, rules: RewriteRuleSet = DEFAULT_RULES) -> OperatorExpr:
    """Reduce every field factor to its canonical representative."""
    if not rules.names:
        return e
    out: dict = {}
    for key, c in e.items():
        options = [reduce_symbol(f, rules).items() for f in key.fields]
        for combo in product(*options):
            mult = Fraction(1)
            for _, v in combo:
                mult *= v
            fs = tuple(sorted(s for s, _ in combo))
            k2 = TermKey(key.mpow, key.coords, fs, key.matrix, key.derivs)
            out[k2] = out.get(k2, GaussQ(0)) + c * mult
    return OperatorExpr(out, e.window)
