"""Two-component operators used by the numeric layer, built once per session."""

from __future__ import annotations

from functools import lru_cache

from ..fw import build_hamiltonian, fw_reduce, tempo_operator, velocity_operator
from ..opcore import DEFAULT_WINDOW, OperatorExpr, dirac, filter_terms

SPIN_MATRICES = frozenset(dirac.SIGMA[1:])


def spin_part(e: OperatorExpr) -> OperatorExpr:
    return filter_terms(e, lambda t: t.matrix in SPIN_MATRICES)


def spinless_part(e: OperatorExpr) -> OperatorExpr:
    return filter_terms(e, lambda t: t.matrix not in SPIN_MATRICES)


def rest_mass_part(e: OperatorExpr) -> OperatorExpr:
    """The field-free ``m * 1`` term, evolved as a global phase."""
    return filter_terms(e, lambda t: t.mpow == 1 and not t.fields and not any(t.derivs) and t.matrix == dirac.IDENTITY)


@lru_cache(maxsize=None)
def standard_operators() -> dict:
    """``H_FW``, its spin-free part, ``T``, the spin terms of ``T`` and ``xdot1..3``."""
    fw = fw_reduce(build_hamiltonian(DEFAULT_WINDOW), 4)
    H = fw.two_component
    T = tempo_operator(fw)
    ops = {
        "H_FW": H,
        "H_FW_spinless": spinless_part(H),
        "T": T,
        "T_spin": spin_part(T),
    }
    for i in (1, 2, 3):
        ops[f"xdot{i}"] = velocity_operator(H, i)
    return ops
