"""Vierbein, connection coefficients and the pointwise Dirac Hamiltonian."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..opcore import OperatorExpr, dirac
from .metric import MetricModel

ETA = np.diag([1.0, -1.0, -1.0, -1.0])


@dataclass(frozen=True)
class FrameData:
    """Local geometry at one point.

    ``vierbein[i, mu]`` has the frame index as row.  ``christoffel[l, n, m]``
    is ``{^l_{n m}}`` and ``spin_connection[i, j, mu]`` is ``omega_{ij,mu}``,
    both to linear order in ``h``.  The determinants are exact.
    """

    x: np.ndarray
    metric: np.ndarray
    vierbein: np.ndarray
    christoffel: np.ndarray
    spin_connection: np.ndarray
    sqrt_g: float
    sqrt_3g: float

    def orthonormality_residual(self) -> float:
        """max |v_i^mu v_j^nu g_{mu nu} - eta_ij|, which is O(h^2)."""
        v = self.vierbein
        return float(np.abs(v @ self.metric @ v.T - ETA).max())


def vierbein(h: np.ndarray) -> np.ndarray:
    v = np.eye(4)
    v[0, 0] -= h[0, 0] / 2
    v[0, 1:] = h[0, 1:]
    v[1:, 1:] += h[1:, 1:] / 2
    return v


def christoffel(dh: np.ndarray) -> np.ndarray:
    # G[l, n, m] = 1/2 eta^{l r} (d_n h_{r m} + d_m h_{r n} - d_r h_{n m}), dh[r, a, b] = d_r h_ab
    lower = 0.5 * (np.einsum("nrm->rnm", dh) + np.einsum("mrn->rnm", dh) - dh)
    return np.einsum("lr,rnm->lnm", ETA, lower)


def frame_at(model: MetricModel, x) -> FrameData:
    x = np.asarray(x, dtype=float)
    model.require_admissible(x)
    h = model.h_matrix(x)
    dh = model.h_gradient(x)
    g = ETA + h
    return FrameData(
        x=x,
        metric=g,
        vierbein=vierbein(h),
        christoffel=christoffel(dh),
        spin_connection=spin_connection(dh),
        sqrt_g=float(np.sqrt(-np.linalg.det(g))),
        sqrt_3g=float(np.sqrt(-np.linalg.det(g[1:, 1:]))),
    )


def spin_connection(dh: np.ndarray) -> np.ndarray:
    """omega_{ij,mu} = d_mu h_ij + eta_{ir} d_mu e_j^r - (d_i h_{j mu} + d_mu h_{ij} - d_j h_{i mu}) / 2.

    ``e = v - 1`` is the vierbein perturbation; frame and coordinate indices
    coincide at this order.
    """
    # the vierbein is affine in h, so d_mu e = vierbein(d_mu h) - 1
    de = [vierbein(dh[mu]) - np.eye(4) for mu in range(4)]
    om = np.zeros((4, 4, 4))
    for i in range(4):
        for j in range(4):
            for mu in range(4):
                om[i, j, mu] = (
                    dh[mu, i, j]
                    + ETA[i, i] * de[mu][j, i]
                    - 0.5 * (dh[i, j, mu] + dh[mu, i, j] - dh[j, i, mu])
                )
    return om


@dataclass(frozen=True)
class DiracCoefficientTable:
    """``i A^mu d_mu + B`` at a point, and the solved ``H = C^k d_k + C^0``."""

    A: np.ndarray  # (4, 4, 4): A[mu]
    B: np.ndarray
    C: np.ndarray  # (4, 4, 4): C[0] is the zeroth-order part, C[k] multiplies d_k

    def as_dict(self) -> dict:
        return {(0, 0, 0): self.C[0], (1, 0, 0): self.C[1], (0, 1, 0): self.C[2], (0, 0, 1): self.C[3]}


def assemble_dirac_hamiltonian(model: MetricModel, x, m: float) -> DiracCoefficientTable:
    """Solve ``i gamma^j v_j^mu D_mu psi - m psi = 0`` for ``i d_t psi = H psi``."""
    fd = frame_at(model, x)
    gam = [dirac.gamma(a).astype(complex) for a in range(4)]
    A = np.einsum("jm,jab->mab", fd.vierbein, np.stack(gam))
    gen = np.stack([[dirac.lorentz_generator(k, l) for l in range(4)] for k in range(4)])
    Gamma = 0.5 * np.einsum("klm,klab->mab", fd.spin_connection, gen)
    B = 1j * np.einsum("mab,mbc->ac", A, Gamma) - m * np.eye(4)
    A0inv = np.linalg.inv(A[0])
    C = np.empty((4, 4, 4), dtype=complex)
    C[0] = -A0inv @ B
    for k in (1, 2, 3):
        C[k] = -1j * A0inv @ A[k]
    return DiracCoefficientTable(A, B, C)


def operator_coefficients(expr: OperatorExpr, model: MetricModel, x, m: float, block: str = "full") -> dict:
    """Numeric matrix coefficient of each derivative monomial at ``x``.

    Returns ``{deriv_counts: matrix}``; with ``block="upper"`` the
    upper-left 2x2 blocks are returned (for two-component operators).
    """
    x = np.asarray(x, dtype=float)
    out = {}
    for t in expr.terms():
        if any(t.coords):
            raise ValueError("expression still contains coordinate factors")
        val = complex(t.coeff) * m**t.mpow
        for f in t.fields:
            val *= float(model.base_value(f.base, x, f.deriv))
        mat = dirac.MATRICES[t.matrix]
        if block == "upper":
            mat = mat[:2, :2]
        out[t.derivs] = out.get(t.derivs, 0) + val * mat
    return out


def compare_with_printed(model: MetricModel, x, m: float, H: OperatorExpr) -> float:
    """max matrix-element difference between the assembled and printed Hamiltonians."""
    table = assemble_dirac_hamiltonian(model, x, m).as_dict()
    printed = operator_coefficients(H, model, x, m)
    keys = set(table) | set(printed)
    zero = np.zeros((4, 4))
    return max(float(np.abs(table.get(k, zero) - printed.get(k, zero)).max()) for k in keys)
