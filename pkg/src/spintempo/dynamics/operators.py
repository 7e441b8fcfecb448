"""Numeric action of two-component operator expressions on grid spinors.

Each canonical term is ``coeff * m^k * fields * matrix * derivs``.  Terms are
grouped by derivative monomial; the monomials are applied spectrally and the
accumulated 2x2 field-valued coefficient acts pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft

from ..geometry import MetricModel
from ..opcore import OperatorExpr, dirac
from .grid import Grid, SpinorGridState

MAX_DERIVATIVE_ORDER = 2
_workers = 1


class OperatorError(ValueError):
    pass


def set_workers(n: int):
    """Threads used by the FFTs (results are identical for any count)."""
    global _workers
    _workers = max(1, int(n))


def fft(a: np.ndarray, axes) -> np.ndarray:
    return scipy.fft.fftn(a, axes=axes, workers=_workers)


def ifft(a: np.ndarray, axes) -> np.ndarray:
    return scipy.fft.ifftn(a, axes=axes, workers=_workers)


_PAULI2 = {dirac.IDENTITY: np.eye(2)}
_PAULI2.update({dirac.SIGMA[k]: dirac.PAULI[k] for k in (1, 2, 3)})


@dataclass(frozen=True, eq=False)
class CompiledOperator:
    """Per derivative monomial: its Fourier multiplier and 2x2 coefficient arrays."""

    grid: Grid
    blocks: tuple  # ((counts on active axes, multiplier or None, {(a, b): array}), ...)
    dropped_terms: int

    def apply(self, psi: np.ndarray) -> np.ndarray:
        axes = tuple(range(1, self.grid.dim + 1))
        out = np.zeros_like(psi, dtype=complex)
        psi_hat = None
        for _, multiplier, coeffs in self.blocks:
            if multiplier is not None:
                if psi_hat is None:
                    psi_hat = fft(psi, axes)
                d = ifft(multiplier * psi_hat, axes)
            else:
                d = psi
            for (a, b), c in coeffs.items():
                out[a] += c * d[b]
        return out


def _zero_inactive(grid: Grid, derivs) -> tuple | None:
    for axis in (1, 2, 3):
        if derivs[axis - 1] and axis not in grid.axes:
            return None
    return tuple(derivs[a - 1] for a in grid.axes)


@lru_cache(maxsize=64)
def compile_operator(expr: OperatorExpr, grid: Grid, model: MetricModel, mass: float) -> CompiledOperator:
    """Evaluate field coefficients on the grid once.

    Derivatives along absent axes act as zero (the state does not vary
    there), so such terms are dropped and counted in ``dropped_terms``.
    """
    if not model.admissible(grid.points.reshape(-1, 3)).all():
        raise OperatorError("grid contains points outside the field's admissible region")
    pts = grid.points
    blocks: dict = {}
    dropped = 0
    field_cache: dict = {}
    for t in expr.terms():
        if any(t.coords):
            raise OperatorError("expression contains coordinate factors")
        if t.matrix not in _PAULI2:
            raise OperatorError(f"{dirac.NAMES[t.matrix]} is not a two-component element")
        if sum(t.derivs) > MAX_DERIVATIVE_ORDER:
            raise OperatorError(f"derivative order {sum(t.derivs)} exceeds {MAX_DERIVATIVE_ORDER}")
        counts = _zero_inactive(grid, t.derivs)
        if counts is None:
            dropped += 1
            continue
        val = complex(t.coeff) * mass**t.mpow
        arr = val
        for f in t.fields:
            if f not in field_cache:
                field_cache[f] = model.base_value(f.base, pts, f.deriv)
            arr = arr * field_cache[f]
        mat = _PAULI2[t.matrix]
        slot = blocks.setdefault(counts, {})
        for a in range(2):
            for b in range(2):
                if mat[a, b] != 0:
                    slot[(a, b)] = slot.get((a, b), 0) + arr * mat[a, b]
    frozen = []
    for counts in sorted(blocks):
        coeffs = {}
        for ab, c in blocks[counts].items():
            c = np.broadcast_to(np.asarray(c, dtype=complex), grid.n)
            if np.any(c != 0):
                coeffs[ab] = np.ascontiguousarray(c)
        if coeffs:
            mult = grid.derivative_multiplier(counts) if any(counts) else None
            frozen.append((counts, mult, coeffs))
    return CompiledOperator(grid, tuple(frozen), dropped)


def apply_to_state(expr: OperatorExpr, s: SpinorGridState) -> np.ndarray:
    """``expr`` applied to ``s.psi`` (returns the new component array)."""
    return compile_operator(expr, s.grid, s.model, s.mass).apply(s.psi)


def expectation(expr: OperatorExpr, s: SpinorGridState) -> complex:
    """<s| expr s> / <s|s> under the sqrt(-3g)-weighted inner product."""
    return s.inner(s.psi, apply_to_state(expr, s)) / s.norm


def position_expectation(s: SpinorGridState) -> np.ndarray:
    rho = s.density()
    total = rho.sum()
    return np.array([float(np.sum(rho * x) / total) for x in s.grid.coords])
