"""The 16-element basis of 4x4 Dirac matrices in the standard representation.

Every basis element is a tensor product ``tau_a (x) sigma_b`` of a 2x2 block
matrix with a Pauli matrix, so products close on the basis up to a phase in
``{1, -1, i, -i}``.  The names double as DSL text: ``"beta*alpha1"`` parses
to exactly the stored matrix, which keeps printing round-trip stable.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .coeff import GaussQ

PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

_I2 = PAULI[0]
_BETA = np.kron(PAULI[3], _I2)
_G5 = np.kron(PAULI[1], _I2)


def _sig(k):
    return np.kron(_I2, PAULI[k])


# name -> matrix; order fixes the basis index used in canonical keys
_ELEMENTS = [
    ("1", np.eye(4, dtype=complex)),
    ("beta", _BETA),
    ("sigma1", _sig(1)),
    ("sigma2", _sig(2)),
    ("sigma3", _sig(3)),
    ("beta*sigma1", _BETA @ _sig(1)),
    ("beta*sigma2", _BETA @ _sig(2)),
    ("beta*sigma3", _BETA @ _sig(3)),
    ("alpha1", _G5 @ _sig(1)),
    ("alpha2", _G5 @ _sig(2)),
    ("alpha3", _G5 @ _sig(3)),
    ("beta*alpha1", _BETA @ _G5 @ _sig(1)),
    ("beta*alpha2", _BETA @ _G5 @ _sig(2)),
    ("beta*alpha3", _BETA @ _G5 @ _sig(3)),
    ("gamma5", _G5),
    ("beta*gamma5", _BETA @ _G5),
]

NAMES = tuple(name for name, _ in _ELEMENTS)
MATRICES = tuple(mat for _, mat in _ELEMENTS)
INDEX = {name: k for k, name in enumerate(NAMES)}

IDENTITY = INDEX["1"]
BETA = INDEX["beta"]
GAMMA5 = INDEX["gamma5"]
SIGMA = (None, INDEX["sigma1"], INDEX["sigma2"], INDEX["sigma3"])
ALPHA = (None, INDEX["alpha1"], INDEX["alpha2"], INDEX["alpha3"])

_PHASES = {1: GaussQ(1), -1: GaussQ(-1), 1j: GaussQ(0, 1), -1j: GaussQ(0, -1)}


def _as_phase(z: complex) -> GaussQ:
    for value, phase in _PHASES.items():
        if abs(z - value) < 1e-12:
            return phase
    raise ValueError(f"not a unit phase: {z}")


def _decompose(mat: np.ndarray) -> tuple[GaussQ, int]:
    """Write a unitary basis-proportional matrix as phase * basis element."""
    for k, basis in enumerate(MATRICES):
        overlap = np.trace(basis.conj().T @ mat) / 4
        if abs(overlap) > 0.5:
            if not np.allclose(mat, overlap * basis):
                raise ValueError("matrix is not proportional to a basis element")
            return _as_phase(complex(overlap)), k
    raise ValueError("matrix has no basis component")


@lru_cache(maxsize=None)
def _tables():
    n = len(MATRICES)
    product = [[_decompose(MATRICES[a] @ MATRICES[b]) for b in range(n)] for a in range(n)]
    dagger = [_decompose(m.conj().T) for m in MATRICES]
    return product, dagger


def product(a: int, b: int) -> tuple[GaussQ, int]:
    """Return ``(phase, c)`` with ``M_a M_b = phase * M_c``."""
    return _tables()[0][a][b]


def dagger(a: int) -> tuple[GaussQ, int]:
    """Return ``(phase, c)`` with ``M_a^dagger = phase * M_c``."""
    return _tables()[1][a]


def is_even(a: int) -> bool:
    """Even elements commute with beta (block diagonal)."""
    return a in _EVEN


_EVEN = frozenset(
    k for k, m in enumerate(MATRICES) if np.allclose(m @ _BETA, _BETA @ m)
)

# upper-left 2x2 block of an even element, as (phase, two-component element)
UPPER_BLOCK = {
    IDENTITY: (GaussQ(1), IDENTITY),
    BETA: (GaussQ(1), IDENTITY),
    **{SIGMA[k]: (GaussQ(1), SIGMA[k]) for k in (1, 2, 3)},
    **{INDEX[f"beta*sigma{k}"]: (GaussQ(1), SIGMA[k]) for k in (1, 2, 3)},
}

TWO_COMPONENT = frozenset((IDENTITY, SIGMA[1], SIGMA[2], SIGMA[3]))


def gamma(mu: int) -> np.ndarray:
    """Dirac gamma^mu: gamma^0 = beta, gamma^k = beta alpha_k."""
    if mu == 0:
        return _BETA.copy()
    return _BETA @ MATRICES[ALPHA[mu]]


def lorentz_generator(i: int, j: int) -> np.ndarray:
    """S^{ij} = [gamma^i, gamma^j] / 4."""
    gi, gj = gamma(i), gamma(j)
    return (gi @ gj - gj @ gi) / 4
