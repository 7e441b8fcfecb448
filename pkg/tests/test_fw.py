import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from spintempo.fw import (
    FIXTURES,
    FWGradingError,
    build_hamiltonian,
    fixture,
    fw_reduce,
    quadratic_form,
    rate_observable,
    tempo_operator,
    tempo_squared,
    transform_observable,
    velocity_operator,
    verify_central_identity,
    VerificationError,
)
from spintempo.opcore import (
    DEFAULT_RULES,
    NO_RULES,
    BASES,
    adjoint,
    apply_rewrites,
    commutator,
    even_part,
    filter_terms,
    field_op,
    matrix_op,
    momentum,
    odd_part,
    parse_operator,
    scalar,
    substitute,
    zero_fields,
)
from spintempo.opcore import dirac


def same(a, b):
    return apply_rewrites(a - b, DEFAULT_RULES) == 0


@pytest.fixture(scope="module")
def H():
    return build_hamiltonian()


@pytest.fixture(scope="module")
def fw(H):
    return fw_reduce(H, 4)


@pytest.fixture(scope="module")
def T(fw):
    return tempo_operator(fw)


# -- fixtures ---------------------------------------------------------------------

def test_fixtures_nonzero_and_distinct():
    parsed = {name: fixture(name) for name in FIXTURES}
    assert all(parsed.values())
    for a, b in itertools.combinations(parsed, 2):
        assert parsed[a] != parsed[b], (a, b)


# -- Hamiltonian -------------------------------------------------------------------

def test_hamiltonian_matches_fixture(H):
    assert same(H, fixture("H"))


def test_hamiltonian_flat_limit(H):
    assert zero_fields(H) == parse_operator("m*beta - i*sum[j](alpha(j)*d(j))")


def test_mass_shift_term(H):
    hits = [t for t in H.terms() if t.mpow == 1 and t.hdeg == 1]
    assert len(hits) == 1
    (t,) = hits
    assert t.matrix == dirac.BETA and t.fields[0].base == "phi" and t.coeff == 1


def test_hamiltonian_self_adjoint_on_spatial_measure(H):
    assert same(adjoint(H, "sqrt(-3g)"), H)


def test_hamiltonian_adjoint_residue_under_full_measure(H):
    # the lapse factor shifts the weight by phi; residue frozen from the algebra
    residue = apply_rewrites(adjoint(H, "sqrt(-g)") - H)
    assert residue == apply_rewrites(parse_operator("-i*sum[j](D(j,phi)*alpha(j))"))


def test_momentum_commutator_fixture():
    assert same(commutator(momentum(1), momentum(2)), fixture("p1p2"))


# -- reduction ----------------------------------------------------------------------

def test_reduction_metadata(fw):
    assert fw.iterations == 3
    assert fw.cleared_after == 3
    assert fw.odd_grades == (0, 1, 3, None)
    assert fw.residual_odd == 0
    assert len(fw.generators) == 3


def test_generators_are_small(fw):
    for S in fw.generators:
        assert all(t.mpow <= -1 for t in S.terms())


def test_even_part_commutes_with_beta(fw):
    beta = matrix_op("beta", fw.even_hamiltonian.window)
    assert beta * fw.even_hamiltonian * beta == fw.even_hamiltonian


def test_printed_forms(fw):
    assert same(fw.even_hamiltonian, fixture("UHU"))
    assert same(fw.two_component, fixture("H_FW"))


def test_even_odd_separation_each_step(H):
    beta = matrix_op("beta")
    for k in range(4):
        r = fw_reduce(H, k)
        full = r.transformed
        ev, od = even_part(full), odd_part(full)
        b = matrix_op("beta", full.window)
        assert b * ev * b == ev and b * od * b == -od
        assert ev + od == full


def test_odd_grade_rises_each_step(fw):
    grades = [g for g in fw.odd_grades if g is not None]
    assert all(b > a for a, b in zip(grades, grades[1:]))


def test_zero_iterations_keep_hamiltonian(H):
    r = fw_reduce(H, 0)
    assert r.iterations == 0 and not r.generators
    assert r.even_hamiltonian == even_part(H)
    assert r.residual_odd == odd_part(H)


def test_flat_reduction():
    r = fw_reduce(zero_fields(build_hamiltonian()), 4)
    assert r.even_hamiltonian == zero_fields(parse_operator("m*beta + beta*p^2/(2*m)"))
    assert r.two_component == zero_fields(parse_operator("m + p^2/(2*m)"))


def test_grading_violation_reported():
    # an odd term that does not shrink under conjugation
    bad = parse_operator("m*alpha1 + m*beta")
    with pytest.raises(FWGradingError):
        fw_reduce(bad, 4)


# -- observables --------------------------------------------------------------------

def test_identity_unchanged(fw):
    assert transform_observable(fw, scalar(1)) == scalar(1)


def test_transformed_rate_matches_fixture(fw):
    assert same(even_part(transform_observable(fw, rate_observable())), fixture("transformed_beta"))


def test_tempo_matches_fixture(T):
    assert same(T, fixture("tempo"))
    assert zero_fields(T) == zero_fields(parse_operator("1 - p^2/(2*m^2)"))


def test_flat_limits_match_exact_free_values(fw, T):
    # free FW: beta -> beta m/E and H -> beta E, expanded through 1/m^2
    flat_rate = zero_fields(even_part(transform_observable(fw, rate_observable())))
    flat_h = zero_fields(fw.even_hamiltonian)
    beta = dirac.MATRICES[dirac.BETA]
    for k in ([0.3, 0.1, -0.2], [0.05, 0.0, 0.4]):
        p2 = float(np.dot(k, k))
        for mval in (20.0, 40.0):
            E = np.sqrt(mval**2 + p2)
            np.testing.assert_allclose(oracles.flat_symbol(flat_rate, k, mval), beta * mval / E, atol=2 * p2**2 / mval**4)
            np.testing.assert_allclose(oracles.flat_symbol(flat_h, k, mval), beta * E, atol=2 * p2**2 / mval**3)


def test_tempo_point_mass_spin_terms_survive(T):
    pm = substitute(T, {"g1": {}, "g2": {}, "g3": {}, "h11": {"phi": 2}, "h22": {"phi": 2}, "h33": {"phi": 2},
                        "h12": {}, "h13": {}, "h23": {}, "h": {"phi": -4}})
    # (1/4m^2)(grad phi x sigma).p plus the h-term with h_il = 2 phi delta_il gives 3/4
    expected = parse_operator("(3/(4*m^2))*sum[j,k,l](eps(j,k,l)*D(j,phi)*sigma(k)*d(l))*(-i)")
    spin_part = filter_terms(apply_rewrites(pm), lambda t: t.matrix != dirac.IDENTITY)
    assert spin_part == apply_rewrites(expected)


def test_tempo_squared(T):
    T2 = tempo_squared(T)
    assert same(T2, fixture("tempo_squared"))
    assert zero_fields(T2) == zero_fields(parse_operator("1 - p^2/m^2"))
    # (i/m^2) sum_j (d_j phi) p_j is the only source of unit-matrix (d phi) d terms
    grad_terms = filter_terms(
        apply_rewrites(T2),
        lambda t: t.matrix == dirac.IDENTITY and t.hdeg == 1 and t.fields[0].base == "phi" and t.fields[0].order == 1,
    )
    assert grad_terms == parse_operator("(1/m^2)*sum[j](D(j,phi)*d(j))")


@pytest.mark.parametrize("i", [1, 2, 3])
def test_velocity(fw, i):
    v = velocity_operator(fw.two_component, i)
    assert same(v, fixture(f"xdot{i}"))
    assert zero_fields(v) == zero_fields(parse_operator(f"p{i}/m"))


def test_velocity_gravitomagnetic_leading_term(fw):
    only_g = zero_fields(fw.two_component, [b for b in BASES if not b.startswith("g")])
    v = velocity_operator(only_g, 2)
    lead = [t for t in v.terms() if t.mpow == 0]
    assert len(lead) == 1 and lead[0].fields[0].base == "g2" and lead[0].coeff == -1


def test_central_identity(fw, T):
    velocities = [velocity_operator(fw.two_component, i) for i in (1, 2, 3)]
    assert same(quadratic_form(velocities), tempo_squared(T))


def test_quadratic_form_flat():
    flat_v = [zero_fields(parse_operator(f"p{i}/m")) for i in (1, 2, 3)]
    assert zero_fields(quadratic_form(flat_v)) == zero_fields(parse_operator("1 - p^2/m^2"))


def test_central_identity_phi_only(fw, T):
    keep = {"phi", "h11", "h22", "h33", "h"}
    sub = {"g1": {}, "g2": {}, "g3": {}, "h12": {}, "h13": {}, "h23": {},
           "h11": {"phi": 2}, "h22": {"phi": 2}, "h33": {"phi": 2}, "h": {"phi": -4}}
    H_phi = substitute(fw.two_component, sub)
    velocities = [velocity_operator(H_phi, i) for i in (1, 2, 3)]
    Q = substitute(quadratic_form(velocities), sub)
    T2 = substitute(tempo_squared(T), sub)
    assert apply_rewrites(Q - T2) == 0
    assert apply_rewrites(T2).field_bases() <= keep


# -- verification driver ------------------------------------------------------------

def test_verify_full_pipeline():
    report = verify_central_identity()
    assert report.passed
    assert len(report.checks) == 12
    assert report.odd_cleared_after == 3
    assert set(report.tempo_adjoint_terms) == {"flat", "sqrt(-g)", "sqrt(-3g)"}


def test_verify_flat():
    assert verify_central_identity(flat=True).passed


def test_verify_without_rewrites_fails_with_laplacians():
    with pytest.raises(VerificationError):
        verify_central_identity(rules=NO_RULES)
    report = verify_central_identity(rules=NO_RULES, strict=False, only=["central"])
    (c,) = report.checks
    assert not c.passed
    # second derivatives of a single field along the same axis, i.e. pieces of a Laplacian
    assert any(f"D({a},D({a}," in c.difference for a in "123")


def test_verify_rejects_unknown_check():
    with pytest.raises(KeyError):
        verify_central_identity(only=["nope"])
