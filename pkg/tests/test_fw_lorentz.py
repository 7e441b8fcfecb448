import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spintempo.fw import (
    basis_names,
    beta_invariance_space,
    boost,
    covariance_error,
    parity,
    rotation,
    standard_sample,
)
from spintempo.fw.lorentz import ETA
from spintempo.opcore import dirac

angles = st.floats(-3.0, 3.0, allow_nan=False)
rapidities = st.floats(-2.0, 2.0, allow_nan=False)


@given(st.integers(1, 3), angles)
def test_rotation_spinor_covariant(axis, angle):
    t = rotation(axis, angle)
    assert covariance_error(t) < 1e-10
    np.testing.assert_allclose(t.vector.T @ ETA @ t.vector, ETA, atol=1e-12)


@given(st.integers(1, 3), rapidities)
def test_boost_spinor_covariant(axis, rapidity):
    t = boost(axis, rapidity)
    assert covariance_error(t) < 1e-9 * np.cosh(rapidity) ** 2
    np.testing.assert_allclose(t.vector.T @ ETA @ t.vector, ETA, atol=1e-10 * np.cosh(rapidity) ** 2)


def test_parity_covariant():
    assert covariance_error(parity()) < 1e-14


def test_beta_invariant_under_every_sample():
    beta = dirac.MATRICES[dirac.BETA]
    for t in standard_sample(3):
        S = t.spinor
        np.testing.assert_allclose(S.conj().T @ beta @ S, beta, atol=1e-10)


def test_rotations_only_leave_large_space():
    r = beta_invariance_space(standard_sample(include_boosts=False, include_parity=False))
    assert r.dimension == 4 and not r.conclusive
    for name in ("1", "beta", "gamma5"):
        assert r.spans(dirac.MATRICES[dirac.INDEX[name]])


def test_boosts_and_rotations_leave_two():
    r = beta_invariance_space(standard_sample(include_parity=False))
    assert r.dimension == 2
    assert r.spans(dirac.MATRICES[dirac.BETA])
    assert not r.spans(np.eye(4))


def test_parity_pins_beta():
    r = beta_invariance_space(standard_sample())
    assert r.conclusive and r.dimension == 1
    assert basis_names(r) == ["beta"]
    assert "real" in r.note


@pytest.mark.parametrize("seed", [1, 2, 7])
def test_result_independent_of_sampled_parameters(seed):
    assert basis_names(beta_invariance_space(standard_sample(seed))) == ["beta"]


def test_empty_sample_rejected():
    with pytest.raises(ValueError):
        beta_invariance_space([])
