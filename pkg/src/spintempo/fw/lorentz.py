"""Which bilinear ``psi^dagger D psi`` is Lorentz and parity invariant.

Each sampled transformation carries its vector matrix ``Lambda`` and its
spinor matrix ``S``; the invariance condition ``S^dagger D S = D`` is linear
in the sixteen entries of ``D`` and is solved numerically as a nullspace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, null_space

from ..opcore import dirac

ETA = np.diag([1.0, -1.0, -1.0, -1.0])
NULL_TOL = 1e-10


@dataclass(frozen=True)
class LorentzTransform:
    kind: str  # "rotation" | "boost" | "parity"
    vector: np.ndarray
    spinor: np.ndarray


def _vector_generator(r: int, s: int) -> np.ndarray:
    # (J^{rs})^mu_nu = eta^{r mu} delta^s_nu - eta^{s mu} delta^r_nu
    J = np.zeros((4, 4))
    for mu in range(4):
        J[mu, s] += ETA[r, mu]
        J[mu, r] -= ETA[s, mu]
    return J


def _generated(kind: str, r: int, s: int, angle: float) -> LorentzTransform:
    # omega_{rs} = -omega_{sr} = angle, so (1/2) omega_{ab} M^{ab} = angle M^{rs}
    return LorentzTransform(
        kind,
        expm(angle * _vector_generator(r, s)),
        expm(angle * dirac.lorentz_generator(r, s)),
    )


def rotation(axis: int, angle: float) -> LorentzTransform:
    """Rotation about spatial ``axis`` (1..3)."""
    i, j = {1: (2, 3), 2: (3, 1), 3: (1, 2)}[axis]
    return _generated("rotation", i, j, angle)


def boost(axis: int, rapidity: float) -> LorentzTransform:
    return _generated("boost", 0, axis, rapidity)


def parity() -> LorentzTransform:
    return LorentzTransform("parity", ETA.copy(), dirac.gamma(0).astype(complex))


def standard_sample(seed: int = 0, include_parity: bool = True, include_boosts: bool = True) -> list:
    """Three rotations, three boosts and a reflection with random parameters."""
    rng = np.random.default_rng(seed)
    out = [rotation(a, rng.uniform(0.2, 1.5)) for a in (1, 2, 3)]
    if include_boosts:
        out += [boost(a, rng.uniform(0.2, 1.5)) for a in (1, 2, 3)]
    if include_parity:
        out.append(parity())
    return out


def covariance_error(t: LorentzTransform) -> float:
    """max |S^-1 gamma^mu S - Lambda^mu_nu gamma^nu| over mu."""
    Sinv = np.linalg.inv(t.spinor)
    err = 0.0
    for mu in range(4):
        lhs = Sinv @ dirac.gamma(mu) @ t.spinor
        rhs = sum(t.vector[mu, nu] * dirac.gamma(nu) for nu in range(4))
        err = max(err, float(np.abs(lhs - rhs).max()))
    return err


@dataclass(frozen=True)
class InvarianceResult:
    basis: tuple
    singular_values: np.ndarray
    conclusive: bool
    note: str

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def spans(self, matrix: np.ndarray, tol: float = 1e-8) -> bool:
        """Whether ``matrix`` lies in the solution space."""
        if not self.basis:
            return not np.any(np.abs(matrix) > tol)
        B = np.stack([b.ravel() for b in self.basis], axis=1)
        coef, *_ = np.linalg.lstsq(B, matrix.ravel(), rcond=None)
        return float(np.abs(B @ coef - matrix.ravel()).max()) < tol


def beta_invariance_space(sample) -> InvarianceResult:
    """Basis of {D : S^dagger D S = D for every S in ``sample``}.

    The conditions are stacked as a linear map on vec(D) and the nullspace is
    read off an SVD with relative threshold ``NULL_TOL``.  A dimension above
    one is reported as inconclusive rather than raised.
    """
    sample = list(sample)
    if not sample:
        raise ValueError("empty transformation sample")
    eye = np.eye(16)
    blocks = []
    for t in sample:
        S = np.asarray(t.spinor, dtype=complex)
        # row-major vec: vec(A D B) = (A kron B^T) vec(D)
        blocks.append(np.kron(S.conj().T, S.T) - eye)
    M = np.vstack(blocks)
    sv = np.linalg.svd(M, compute_uv=False)
    ns = null_space(M, rcond=NULL_TOL)
    basis = tuple(_canonical(ns))
    conclusive = len(basis) == 1
    if conclusive:
        D = basis[0]
        hermitian = bool(np.allclose(D, D.conj().T, atol=1e-10))
        note = "unique up to a constant; " + ("Hermitian, so the constant is real" if hermitian else "not Hermitian")
    else:
        note = f"inconclusive: solution space has dimension {len(basis)}"
    return InvarianceResult(basis, sv, conclusive, note)


def _canonical(ns: np.ndarray) -> list:
    # express the nullspace in the Dirac basis and row-reduce for readable output
    if ns.shape[1] == 0:
        return []
    coords = np.array([[np.trace(dirac.MATRICES[a].conj().T @ v.reshape(4, 4)) / 4 for a in range(16)] for v in ns.T])
    rank = ns.shape[1]
    # Gauss-Jordan on the coefficient rows
    Q = coords.copy()
    row = 0
    for col in range(16):
        if row == rank:
            break
        piv = row + int(np.argmax(np.abs(Q[row:, col])))
        if abs(Q[piv, col]) < 1e-9:
            continue
        Q[[row, piv]] = Q[[piv, row]]
        Q[row] /= Q[row, col]
        for r in range(rank):
            if r != row:
                Q[r] -= Q[r, col] * Q[row]
        row += 1
    Q[np.abs(Q) < 1e-12] = 0
    return [sum(c * dirac.MATRICES[a] for a, c in enumerate(q)) for q in Q]


def basis_names(result: InvarianceResult, tol: float = 1e-9) -> list:
    """Each basis matrix as a sum of Dirac basis names, e.g. ``['beta']``."""
    out = []
    for D in result.basis:
        parts = []
        for a in range(16):
            c = np.trace(dirac.MATRICES[a].conj().T @ D) / 4
            if abs(c) > tol:
                parts.append(dirac.NAMES[a] if abs(c - 1) < tol else f"({c:.3g})*{dirac.NAMES[a]}")
        out.append(" + ".join(parts))
    return out
