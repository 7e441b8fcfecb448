"""Canonical operator expressions.

An expression is a finite sum of normal-ordered terms::

    coeff * m^mpow * x^coords * F_1 ... F_n * M * d^derivs

where the ``F`` are (differentiated) metric-perturbation fields, ``M`` is one of
the 16 Dirac basis matrices, and ``d^derivs`` is a monomial of right-acting
spatial derivatives.  Terms are keyed by everything except the coefficient, so
a dict keyed that way *is* the canonical form once zero coefficients and
out-of-window terms are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterable, Mapping, NamedTuple

from . import dirac
from .coeff import GaussQ, I, ONE

BASES = ("phi", "g1", "g2", "g3", "h11", "h12", "h13", "h22", "h23", "h33", "h")
_BASE_SET = frozenset(BASES)
NO_DERIV = (0, 0, 0)


class TruncationError(ValueError):
    pass


class CoordinateLeakError(ValueError):
    pass


class FieldSymbol(NamedTuple):
    """A metric-perturbation field with a sorted multi-index of derivatives.

    ``deriv`` stores derivative counts per axis, so ``d1 d2 phi`` and
    ``d2 d1 phi`` are the same symbol.
    """

    base: str
    deriv: tuple = NO_DERIV

    @property
    def order(self) -> int:
        return sum(self.deriv)

    def differentiate(self, axis: int) -> "FieldSymbol":
        d = list(self.deriv)
        d[axis - 1] += 1
        return FieldSymbol(self.base, tuple(d))

    def __str__(self):
        text = self.base
        for axis in (3, 2, 1):
            for _ in range(self.deriv[axis - 1]):
                text = f"D({axis},{text})"
        return text


def field(base: str, *axes: int) -> FieldSymbol:
    """Build a field symbol; ``field("h21", 1)`` is ``D(1, h12)``."""
    if base.startswith("h") and len(base) == 3:
        a, b = sorted(base[1:])
        base = f"h{a}{b}"
    if base not in _BASE_SET:
        raise ValueError(f"unknown field {base!r}")
    d = [0, 0, 0]
    for axis in axes:
        if axis not in (1, 2, 3):
            raise ValueError(f"axis must be 1..3, got {axis}")
        d[axis - 1] += 1
    return FieldSymbol(base, tuple(d))


def metric_h(i: int, j: int) -> str:
    a, b = sorted((i, j))
    return f"h{a}{b}"


@dataclass(frozen=True)
class Window:
    """Truncation window: drop terms below ``m^min_mpow`` or above ``max_hdeg`` fields."""

    min_mpow: int = -2
    max_hdeg: int = 1


DEFAULT_WINDOW = Window()


class TermKey(NamedTuple):
    mpow: int
    coords: tuple
    fields: tuple
    matrix: int
    derivs: tuple


class OperatorTerm(NamedTuple):
    coeff: GaussQ
    mpow: int
    fields: tuple
    matrix: int
    derivs: tuple
    coords: tuple

    @property
    def hdeg(self) -> int:
        return len(self.fields)


def _add_idx(a, b):
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


@lru_cache(maxsize=None)
def _differentiate_product(beta: tuple, coords: tuple, fields: tuple):
    """Expand ``d^beta (x^coords * prod fields)`` as ``[(mult, coords, fields)]``."""
    state = {(coords, fields): 1}
    for axis in (1, 2, 3):
        for _ in range(beta[axis - 1]):
            nxt: dict = {}
            for (cs, fs), mult in state.items():
                n = cs[axis - 1]
                if n:
                    c2 = list(cs)
                    c2[axis - 1] -= 1
                    key = (tuple(c2), fs)
                    nxt[key] = nxt.get(key, 0) + mult * n
                for k in range(len(fs)):
                    f2 = list(fs)
                    f2[k] = f2[k].differentiate(axis)
                    key = (cs, tuple(sorted(f2)))
                    nxt[key] = nxt.get(key, 0) + mult
            state = {k: v for k, v in nxt.items() if v}
    return tuple((mult, cs, fs) for (cs, fs), mult in state.items())


@lru_cache(maxsize=None)
def _leibniz(derivs: tuple, coords: tuple, fields: tuple):
    """Move ``d^derivs`` right past a function: ``[(mult, coords, fields, rest)]``."""
    if derivs == NO_DERIV or (not fields and coords == NO_DERIV):
        return ((1, coords, fields, derivs),)
    out: dict = {}
    for b1 in range(derivs[0] + 1):
        for b2 in range(derivs[1] + 1):
            for b3 in range(derivs[2] + 1):
                beta = (b1, b2, b3)
                binom = comb(derivs[0], b1) * comb(derivs[1], b2) * comb(derivs[2], b3)
                rest = (derivs[0] - b1, derivs[1] - b2, derivs[2] - b3)
                for mult, cs, fs in _differentiate_product(beta, coords, fields):
                    key = (cs, fs, rest)
                    out[key] = out.get(key, 0) + binom * mult
    return tuple((mult, cs, fs, rest) for (cs, fs, rest), mult in out.items() if mult)


class OperatorExpr:
    """An immutable, canonical sum of operator terms.

    Arithmetic: ``+``, ``-``, ``*`` (operator composition; numbers act as
    scalars).  Equality is canonical-form equality.
    """

    __slots__ = ("_terms", "window", "_hash")

    def __init__(self, terms: Mapping[TermKey, GaussQ] | None = None, window: Window = DEFAULT_WINDOW):
        self.window = window
        clean = {}
        if terms:
            for key, c in terms.items():
                if not c:
                    continue
                if key.mpow < window.min_mpow or len(key.fields) > window.max_hdeg:
                    continue
                clean[key] = c
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict, window: Window) -> "OperatorExpr":
        obj = cls.__new__(cls)
        obj.window = window
        obj._terms = {k: c for k, c in terms.items() if c}
        obj._hash = None
        return obj

    # -- views -----------------------------------------------------------------
    def items(self):
        return sorted(self._terms.items(), key=lambda kv: _sort_key(kv[0]))

    def terms(self) -> list[OperatorTerm]:
        return [OperatorTerm(c, k.mpow, k.fields, k.matrix, k.derivs, k.coords) for k, c in self.items()]

    def __iter__(self):
        return iter(self.terms())

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def coefficient(self, key: TermKey) -> GaussQ:
        return self._terms.get(key, GaussQ(0))

    def keys(self):
        return self._terms.keys()

    def has_coordinates(self) -> bool:
        return any(k.coords != NO_DERIV for k in self._terms)

    def field_bases(self) -> set[str]:
        return {f.base for k in self._terms for f in k.fields}

    def matrices(self) -> set[int]:
        return {k.matrix for k in self._terms}

    def max_deriv_order(self) -> int:
        return max((sum(k.derivs) for k in self._terms), default=0)

    # -- arithmetic ------------------------------------------------------------
    def _check(self, other: "OperatorExpr"):
        if other.window != self.window:
            raise ValueError(f"truncation windows differ: {self.window} vs {other.window}")

    def _lift(self, other) -> "OperatorExpr":
        if isinstance(other, OperatorExpr):
            self._check(other)
            return other
        return scalar(other, self.window)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out[k] + c if k in out else c
        return OperatorExpr._raw(out, self.window)

    __radd__ = __add__

    def __neg__(self):
        return OperatorExpr._raw({k: -c for k, c in self._terms.items()}, self.window)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def scale(self, c) -> "OperatorExpr":
        c = GaussQ.coerce(c)
        return OperatorExpr._raw({k: v * c for k, v in self._terms.items()}, self.window)

    def __mul__(self, other):
        if isinstance(other, OperatorExpr):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __matmul__(self, other):
        return multiply(self, self._lift(other))

    def __truediv__(self, other):
        return self.scale(GaussQ(1) / GaussQ.coerce(other))

    def __eq__(self, other):
        if isinstance(other, OperatorExpr):
            return self._terms == other._terms
        if not self._terms and other == 0:
            return True
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __str__(self):
        from .dsl import to_dsl

        return to_dsl(self)

    def __repr__(self):
        return f"OperatorExpr({str(self)!r})"


def _sort_key(key: TermKey):
    return (-key.mpow, len(key.fields), key.fields, key.coords, key.matrix, sum(key.derivs), tuple(-a for a in key.derivs))


# -- constructors ---------------------------------------------------------------

def zero(window: Window = DEFAULT_WINDOW) -> OperatorExpr:
    return OperatorExpr({}, window)


def scalar(c=1, window: Window = DEFAULT_WINDOW) -> OperatorExpr:
    return OperatorExpr({TermKey(0, NO_DERIV, (), dirac.IDENTITY, NO_DERIV): GaussQ.coerce(c)}, window)


def mass(power: int = 1, window: Window = DEFAULT_WINDOW) -> OperatorExpr:
    return OperatorExpr({TermKey(power, NO_DERIV, (), dirac.IDENTITY, NO_DERIV): ONE}, window)


def field_op(f: FieldSymbol | str, window: Window = DEFAULT_WINDOW) -> OperatorExpr:
    if isinstance(f, str):
        f = field(f)
    return OperatorExpr({TermKey(0, NO_DERIV, (f,), dirac.IDENTITY, NO_DERIV): ONE}, window)


def matrix_op(index: int | str, window: Window = DEFAULT_WINDOW) -> OperatorExpr:
    if isinstance(index, str):
        index = dirac.INDEX[index]
    return OperatorExpr({TermKey(0, NO_DERIV, (), index, NO_DERIV): ONE}, window)


def deriv_op(*axes: int, window: Window = DEFAULT_WINDOW) -> OperatorExpr:
    d = [0, 0, 0]
    for a in axes:
        d[a - 1] += 1
    return OperatorExpr({TermKey(0, NO_DERIV, (), dirac.IDENTITY, tuple(d)): ONE}, window)


def coord_op(axis: int, window: Window = DEFAULT_WINDOW) -> OperatorExpr:
    c = [0, 0, 0]
    c[axis - 1] = 1
    return OperatorExpr({TermKey(0, tuple(c), (), dirac.IDENTITY, NO_DERIV): ONE}, window)


def momentum(j: int, window: Window = DEFAULT_WINDOW) -> OperatorExpr:
    """p_j = -i (delta_jk + h_jk / 2) d_k - (i/8) (d_j h), vierbein to linear order."""
    out = deriv_op(j, window=window).scale(-I)
    half = GaussQ(Fraction(-1, 2)) * I
    for k in (1, 2, 3):
        out = out + (field_op(metric_h(j, k), window) * deriv_op(k, window=window)).scale(half)
    out = out + field_op(field("h", j), window).scale(GaussQ(0, Fraction(-1, 8)))
    return out


def momentum_squared(window: Window = DEFAULT_WINDOW) -> OperatorExpr:
    out = zero(window)
    for j in (1, 2, 3):
        pj = momentum(j, window)
        out = out + pj * pj
    return out


# -- core operations -------------------------------------------------------------

def multiply(a: OperatorExpr, b: OperatorExpr) -> OperatorExpr:
    """Canonical composition ``a o b`` (derivatives in ``a`` act through ``b``)."""
    a._check(b)
    w = a.window
    out: dict = {}
    product = dirac.product
    for ka, ca in a._terms.items():
        for kb, cb in b._terms.items():
            mpow = ka.mpow + kb.mpow
            if mpow < w.min_mpow or len(ka.fields) + len(kb.fields) > w.max_hdeg:
                continue
            phase, mc = product(ka.matrix, kb.matrix)
            base = ca * cb * phase
            for mult, cs, fs, rest in _leibniz(ka.derivs, kb.coords, kb.fields):
                fields = ka.fields + fs if not ka.fields else tuple(sorted(ka.fields + fs))
                key = TermKey(mpow, _add_idx(ka.coords, cs), fields, mc, _add_idx(rest, kb.derivs))
                c = base if mult == 1 else base * mult
                prev = out.get(key)
                out[key] = c if prev is None else prev + c
    return OperatorExpr._raw(out, w)


def normal_form(e: OperatorExpr, allow_coordinates: bool = False) -> OperatorExpr:
    """Return the canonical representative; reject leftover coordinate factors."""
    canon = OperatorExpr(dict(e._terms), e.window)
    if not allow_coordinates and canon.has_coordinates():
        raise CoordinateLeakError(
            "expression still contains coordinate factors x^i; use commutator_with_coordinate"
        )
    return canon


def commutator(a: OperatorExpr, b: OperatorExpr) -> OperatorExpr:
    return multiply(a, b) - multiply(b, a)


def anticommutator(a: OperatorExpr, b: OperatorExpr) -> OperatorExpr:
    return multiply(a, b) + multiply(b, a)


def commutator_with_coordinate(e: OperatorExpr, axis: int) -> OperatorExpr:
    """[e, x^axis], using [d^a, x^i] = a_i d^(a - e_i) and [F, x^i] = [M, x^i] = 0."""
    out: dict = {}
    for k, c in e._terms.items():
        n = k.derivs[axis - 1]
        if not n:
            continue
        d = list(k.derivs)
        d[axis - 1] -= 1
        key = TermKey(k.mpow, k.coords, k.fields, k.matrix, tuple(d))
        out[key] = out.get(key, GaussQ(0)) + c * n
    return OperatorExpr._raw(out, e.window)


MEASURES = ("flat", "sqrt(-g)", "sqrt(-3g)")


def measure(name: str, window: Window = DEFAULT_WINDOW) -> OperatorExpr:
    """Volume weight to linear order: sqrt(-g) = 1 + h/2, sqrt(-3g) = sqrt(-g)/(1 + phi)."""
    if name == "flat":
        return scalar(1, window)
    half_h = field_op("h", window).scale(Fraction(1, 2))
    if name == "sqrt(-g)":
        return scalar(1, window) + half_h
    if name == "sqrt(-3g)":
        return scalar(1, window) + half_h - field_op("phi", window)
    raise ValueError(f"unknown measure {name!r}; expected one of {MEASURES}")


def _inverse_weight(mu: OperatorExpr) -> OperatorExpr:
    """Geometric series for 1/(1 + nu), exact up to the window's field degree."""
    w = mu.window
    nu = mu - scalar(1, w)
    out = scalar(1, w)
    power = scalar(1, w)
    for _ in range(w.max_hdeg):
        power = multiply(power, -nu)
        out = out + power
    return out


def adjoint(e: OperatorExpr, measure_name: str = "flat") -> OperatorExpr:
    """Formal adjoint under the chosen volume weight.

    Flat: matrices to their conjugate transpose, ``d_j -> -d_j`` moved back to
    the right by Leibniz, coefficients conjugated.  Weighted: ``mu^-1 A^+ mu``.
    """
    w = e.window
    out = zero(w)
    for k, c in e._terms.items():
        phase, mdag = dirac.dagger(k.matrix)
        body = OperatorExpr._raw({TermKey(k.mpow, k.coords, k.fields, mdag, NO_DERIV): c.conjugate() * phase}, w)
        order = sum(k.derivs)
        if order:
            d = OperatorExpr._raw({TermKey(0, NO_DERIV, (), dirac.IDENTITY, k.derivs): GaussQ((-1) ** order)}, w)
            body = multiply(d, body)
        out = out + body
    if measure_name == "flat":
        return out
    mu = measure(measure_name, w)
    return multiply(multiply(_inverse_weight(mu), out), mu)


def exp_conjugate(S: OperatorExpr, X: OperatorExpr, max_order: int = 64) -> OperatorExpr:
    """e^{iS} X e^{-iS} by the nested-commutator series.

    Requires every term of ``S`` to carry at most ``m^-1`` so each nested
    commutator drops one power of ``m`` and the series terminates inside the
    truncation window.
    """
    bad = [t for t in S.terms() if t.mpow > -1]
    if bad:
        raise TruncationError(
            f"generator is not small in 1/m: {len(bad)} term(s) with mpow > -1, e.g. "
            + str(OperatorExpr._raw({TermKey(bad[0].mpow, bad[0].coords, bad[0].fields, bad[0].matrix, bad[0].derivs): bad[0].coeff}, S.window))
        )
    iS = S.scale(I)
    result = X
    term = X
    for k in range(1, max_order + 1):
        term = commutator(iS, term).scale(Fraction(1, k))
        if not term:
            return result
        result = result + term
    raise TruncationError("nested-commutator series did not terminate")


# -- structural helpers ----------------------------------------------------------

def _filter(e: OperatorExpr, pred) -> OperatorExpr:
    return OperatorExpr._raw({k: c for k, c in e._terms.items() if pred(k)}, e.window)


def even_part(e: OperatorExpr) -> OperatorExpr:
    return _filter(e, lambda k: dirac.is_even(k.matrix))


def odd_part(e: OperatorExpr) -> OperatorExpr:
    return _filter(e, lambda k: not dirac.is_even(k.matrix))


def filter_terms(e: OperatorExpr, pred) -> OperatorExpr:
    """Keep the terms whose ``OperatorTerm`` view satisfies ``pred``."""
    return _filter(e, lambda k: pred(OperatorTerm(e._terms[k], k.mpow, k.fields, k.matrix, k.derivs, k.coords)))


def upper_block(e: OperatorExpr) -> OperatorExpr:
    """Upper-left 2x2 block of an even operator, as a two-component expression."""
    out: dict = {}
    for k, c in e._terms.items():
        if k.matrix not in dirac.UPPER_BLOCK:
            raise ValueError(f"odd matrix {dirac.NAMES[k.matrix]} has no upper-block reduction")
        phase, m2 = dirac.UPPER_BLOCK[k.matrix]
        key = TermKey(k.mpow, k.coords, k.fields, m2, k.derivs)
        out[key] = out.get(key, GaussQ(0)) + c * phase
    return OperatorExpr._raw(out, e.window)


def is_two_component(e: OperatorExpr) -> bool:
    return all(k.matrix in dirac.TWO_COMPONENT for k in e._terms)


def min_grade(e: OperatorExpr) -> int | None:
    """Smallest ``-mpow + hdeg`` over the terms (None for the zero expression).

    The combined grade counts both 1/m suppression and field strength; the
    mass-shifted term ``m beta phi`` makes plain 1/m counting too coarse.
    """
    return min((-k.mpow + len(k.fields) for k in e._terms), default=None)


def substitute(e: OperatorExpr, mapping: Mapping[str, Mapping[str, object]]) -> OperatorExpr:
    """Replace field bases by linear combinations of bases (derivatives carried).

    ``mapping = {"g1": {}, "h11": {"phi": 2}}`` sets g1 to zero and h11 to 2 phi.
    """
    w = e.window
    out: dict = {}
    for k, c in e._terms.items():
        expansions = [((), GaussQ(1))]
        for f in k.fields:
            if f.base in mapping:
                repl = [(FieldSymbol(b, f.deriv), GaussQ.coerce(v)) for b, v in mapping[f.base].items()]
            else:
                repl = [(f, GaussQ(1))]
            expansions = [(fs + (g,), cc * v) for fs, cc in expansions for g, v in repl]
        for fs, mult in expansions:
            key = TermKey(k.mpow, k.coords, tuple(sorted(fs)), k.matrix, k.derivs)
            out[key] = out.get(key, GaussQ(0)) + c * mult
    return OperatorExpr(out, w)


def zero_fields(e: OperatorExpr, bases: Iterable[str] | None = None) -> OperatorExpr:
    """Set the given field bases (default: all) to zero."""
    bases = BASES if bases is None else tuple(bases)
    return substitute(e, {b: {} for b in bases})


def with_window(e: OperatorExpr, window: Window) -> OperatorExpr:
    return OperatorExpr(dict(e._terms), window)
