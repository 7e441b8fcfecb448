"""Independent oracles shared by the tests.

``act`` applies a canonical expression to a concrete sympy spinor with
concrete polynomial fields; operators written out by hand (such as the
momentum) are applied with plain sympy calculus and compared to it.
``flat_symbol`` evaluates a field-free expression on a plane wave as a
dense matrix.
"""

from __future__ import annotations

import numpy as np
import sympy as sp

from spintempo.opcore import dirac

x1, x2, x3 = X = sp.symbols("x1 x2 x3", real=True)
eps, m = sp.symbols("epsilon m", positive=True)

# arbitrary polynomial field profiles; eps counts the h-degree
FIELDS = {
    "phi": x1 * x2 + 3 * x3**2 - x1,
    "g1": x2 * x3 + 2,
    "g2": x1**2 - x3,
    "g3": x1 * x2 * x3,
    "h11": x1 + x2**2,
    "h12": x3 * x1,
    "h13": 2 * x2 - x3**2,
    "h22": x1 * x3 + 1,
    "h23": x2**2 * x1,
    "h33": x3 - x1 * x2,
    "h": x1**2 + x2 * x3,
}


def field_value(sym) -> sp.Expr:
    expr = FIELDS[sym.base]
    for axis, n in enumerate(sym.deriv):
        if n:
            expr = sp.diff(expr, X[axis], n)
    return eps * expr


def test_spinor(n: int = 4) -> sp.Matrix:
    """A generic smooth spinor with independent components."""
    comps = [
        sp.exp(x1 / 3 - x2 / 5) * (1 + x3),
        sp.sin(x2) * x1 + x3**2,
        sp.cos(x1 + x3) - x2,
        x1 * x2 * x3 + sp.exp(x3 / 2),
    ]
    return sp.Matrix(comps[:n])


def _matrix(index: int, n: int) -> sp.Matrix:
    if n == 4:
        return sp.Matrix(dirac.MATRICES[index].tolist()).applyfunc(sp.nsimplify)
    pauli = {dirac.IDENTITY: np.eye(2)}
    pauli.update({dirac.SIGMA[k]: dirac.PAULI[k] for k in (1, 2, 3)})
    return sp.Matrix(pauli[index].tolist()).applyfunc(sp.nsimplify)


def _coeff(c) -> sp.Expr:
    return sp.Rational(c.re.numerator, c.re.denominator) + sp.I * sp.Rational(c.im.numerator, c.im.denominator)


def d(psi: sp.Matrix, *axes: int) -> sp.Matrix:
    out = psi
    for a in axes:
        out = out.diff(X[a - 1])
    return out


def act(expr, psi: sp.Matrix) -> sp.Matrix:
    """Apply a canonical expression term by term to ``psi``."""
    n = psi.shape[0]
    out = sp.zeros(n, 1)
    for t in expr.terms():
        v = psi
        for axis, k in enumerate(t.derivs, start=1):
            for _ in range(k):
                v = v.diff(X[axis - 1])
        v = _matrix(t.matrix, n) * v
        factor = _coeff(t.coeff) * m**t.mpow
        for f in t.fields:
            factor *= field_value(f)
        for axis, k in enumerate(t.coords, start=1):
            factor *= X[axis - 1] ** k
        out += factor * v
    return out


def first_order(vec: sp.Matrix) -> tuple:
    """(order-0, order-1) parts in ``eps`` of an expression vector."""
    v0 = vec.subs(eps, 0)
    v1 = vec.diff(eps).subs(eps, 0)
    return v0, v1


def same_to_first_order(a: sp.Matrix, b: sp.Matrix) -> bool:
    a0, a1 = first_order(a)
    b0, b1 = first_order(b)
    return all(sp.simplify(e) == 0 for e in list(a0 - b0) + list(a1 - b1))


def momentum_by_hand(j: int, psi: sp.Matrix) -> sp.Matrix:
    """p_j psi = -i (delta_jk + h_jk/2) d_k psi - (i/8) (d_j h) psi, written out directly."""
    def h(a, b):
        a, b = sorted((a, b))
        return eps * FIELDS[f"h{a}{b}"]

    out = -sp.I * d(psi, j)
    for k in (1, 2, 3):
        out += -sp.I * h(j, k) / 2 * d(psi, k)
    out += -sp.I / 8 * eps * sp.diff(FIELDS["h"], X[j - 1]) * psi
    return out


def flat_symbol(expr, k, mass: float) -> np.ndarray:
    """Matrix of a field-free expression on the plane wave exp(i k.x)."""
    k = np.asarray(k, dtype=float)
    out = np.zeros((4, 4), dtype=complex)
    for t in expr.terms():
        assert not t.fields and not any(t.coords)
        c = complex(t.coeff) * mass**t.mpow
        for axis, n in enumerate(t.derivs):
            c *= (1j * k[axis]) ** n
        out += c * dirac.MATRICES[t.matrix]
    return out
