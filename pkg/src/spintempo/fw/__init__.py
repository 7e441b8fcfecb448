"""Foldy-Wouthuysen reduction, the tempo operator and the central identity."""

from .fixtures import FIXTURES, fixture
from .lorentz import (
    InvarianceResult,
    LorentzTransform,
    basis_names,
    beta_invariance_space,
    boost,
    covariance_error,
    parity,
    rotation,
    standard_sample,
)
from .pipeline import (
    FWGradingError,
    FWResult,
    build_hamiltonian,
    fw_generator,
    fw_reduce,
    quadratic_form,
    rate_observable,
    tempo_operator,
    tempo_squared,
    transform_observable,
    velocity_operator,
)
from .verify import CHECK_NAMES, IdentityCheck, VerificationError, VerificationReport, compare, verify_central_identity

__all__ = [
    "FIXTURES",
    "fixture",
    "InvarianceResult",
    "LorentzTransform",
    "basis_names",
    "beta_invariance_space",
    "boost",
    "covariance_error",
    "parity",
    "rotation",
    "standard_sample",
    "FWGradingError",
    "FWResult",
    "build_hamiltonian",
    "fw_generator",
    "fw_reduce",
    "quadratic_form",
    "rate_observable",
    "tempo_operator",
    "tempo_squared",
    "transform_observable",
    "velocity_operator",
    "CHECK_NAMES",
    "IdentityCheck",
    "VerificationError",
    "VerificationReport",
    "compare",
    "verify_central_identity",
]
