import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from spintempo.docio import ConfigError
from spintempo.fw import build_hamiltonian
from spintempo.geometry import (
    X,
    AdmissibilityError,
    FieldError,
    assemble_dirac_hamiltonian,
    check_field_equations,
    check_gauge,
    compare_with_printed,
    frame_at,
    load_field,
    make_field,
    parse_field,
    sample_points,
    zero_field,
)
from spintempo.dynamics.scenarios import data_path
from spintempo.opcore import dirac

CAP = 0.05


@pytest.fixture(scope="module")
def point_mass():
    return make_field("point-mass", {"mu": 0.05}, r_min=2.0)


@pytest.fixture(scope="module")
def dipole():
    return make_field("gravitomagnetic-dipole", {"S": [0, 0, 1], "kappa": 0.1}, r_min=2.0)


@pytest.fixture(scope="module")
def H():
    return build_hamiltonian()


# -- construction ---------------------------------------------------------------

def test_uniform_gradient_is_valid():
    model = make_field("harmonic-polynomial", {"phi": "1e-4*x3"}, domain=([-50] * 3, [50] * 3))
    pts = sample_points(model, 50)
    assert check_field_equations(model, pts).absolute == 0
    assert check_gauge(model, pts).absolute == 0


def test_point_mass_trace(point_mass):
    # h = h00 - sum h_ii = 2 phi - 6 phi
    assert sp.simplify(point_mass.base_expr("h") + 4 * point_mass.base_expr("phi")) == 0
    r = sp.sqrt(sum(x**2 for x in X))
    assert sp.simplify(point_mass.base_expr("phi") + sp.Rational(1, 20) / r) == 0


def test_point_mass_gauge_symbolic(point_mass):
    phi = point_mass.base_expr("phi")
    for i in range(3):
        res = sp.diff(2 * phi, X[i]) + sp.Rational(1, 2) * sp.diff(-4 * phi, X[i])
        assert sp.simplify(res) == 0


def test_dipole_oracle(dipole):
    # independent vector calculus on kappa (S x x) / r^3
    r = sp.sqrt(sum(x**2 for x in X))
    g = sp.Matrix([0, 0, 1]).cross(sp.Matrix(X)) * sp.Rational(1, 10) / r**3
    assert sp.simplify(sum(sp.diff(g[j], X[j]) for j in range(3))) == 0
    for j in range(3):
        assert sp.simplify(sum(sp.diff(g[j], x, 2) for x in X)) == 0
        assert sp.simplify(dipole.base_expr(f"g{j + 1}") - g[j]) == 0


@pytest.mark.parametrize("name", ["point_mass", "dipole"])
def test_singular_families_pass_checks(name, request):
    model = request.getfixturevalue(name)
    pts = sample_points(model, 100, np.random.default_rng(1))
    r = np.linalg.norm(pts, axis=1)
    assert r.min() >= 4.0 - 1e-12 and r.max() <= 20.0 + 1e-12
    assert check_field_equations(model, pts).relative <= 1e-12
    assert check_gauge(model, pts).relative <= 1e-12


def test_superposition_checks(point_mass, dipole):
    both = make_field("superposition", {"components": [point_mass, dipole]})
    pts = sample_points(both, 60)
    assert check_field_equations(both, pts).relative <= 1e-12
    assert check_gauge(both, pts).relative <= 1e-12


def test_non_harmonic_negative_control():
    model = make_field("harmonic-polynomial", {"phi": "x1**2", "h": {}}, domain=([-0.1] * 3, [0.1] * 3), strict=False)
    report = check_field_equations(model, sample_points(model, 20))
    assert report.absolute == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(FieldError, match="harmonic"):
        make_field("harmonic-polynomial", {"phi": "x1**2"}, domain=([-0.1] * 3, [0.1] * 3))


def test_zero_field_residuals():
    model = zero_field()
    pts = sample_points(model, 20)
    assert check_field_equations(model, pts).absolute == 0
    assert check_gauge(model, pts).absolute == 0


def test_construction_errors():
    with pytest.raises(FieldError, match="r_min"):
        make_field("point-mass", {"mu": 0.05}, r_min=0)
    with pytest.raises(FieldError, match="mu"):
        make_field("point-mass", {"mu": -1}, r_min=1.0)
    with pytest.raises(FieldError):
        make_field("point-mass", {"mu": 0.5}, r_min=2.0)  # |h| = 0.5 at r_min
    with pytest.raises(FieldError, match="unknown family"):
        make_field("kerr", {})
    with pytest.raises(FieldError):
        make_field("harmonic-polynomial", {"phi": "x1*x2", "g": ["x1", "0", "0"]})


def test_samples_inside_exclusion_rejected(point_mass):
    with pytest.raises(AdmissibilityError):
        check_field_equations(point_mass, [[0.5, 0, 0]])
    with pytest.raises(AdmissibilityError):
        frame_at(point_mass, [1.0, 0, 0])


# -- frames ------------------------------------------------------------------------

def test_flat_frame():
    fd = frame_at(zero_field(), [1.0, 2.0, 3.0])
    np.testing.assert_array_equal(fd.vierbein, np.eye(4))
    assert not fd.christoffel.any() and not fd.spin_connection.any()
    assert fd.sqrt_g == 1.0 and fd.sqrt_3g == 1.0


@pytest.mark.parametrize("r", [3.0, 7.5])
def test_point_mass_vierbein_diagonal(point_mass, r):
    fd = frame_at(point_mass, [r, 0, 0])
    phi = -0.05 / r
    assert fd.vierbein[0, 0] == pytest.approx(1 - phi, abs=1e-15)
    assert fd.vierbein[1, 1] == pytest.approx(1 + phi, abs=1e-15)


@pytest.mark.parametrize("name", ["point_mass", "dipole"])
def test_orthonormality_second_order(name, request):
    model = request.getfixturevalue(name)
    for x in sample_points(model, 100, np.random.default_rng(2), shell=(1.0, 10.0)):
        fd = frame_at(model, x)
        assert fd.orthonormality_residual() <= 10 * CAP**2
        hmax = np.abs(fd.metric - np.diag([1, -1, -1, -1])).max()
        assert fd.orthonormality_residual() <= 4 * hmax**2 + 1e-16


def test_christoffel_against_exact_metric(point_mass, dipole):
    both = make_field("superposition", {"components": [point_mass, dipole]})
    x0 = {X[0]: 2.5, X[1]: -1.5, X[2]: 1.0}
    g = sp.diag(1, -1, -1, -1) + sp.Matrix(4, 4, lambda a, b: both.h(a, b))
    coords = (None,) + tuple(X)

    def d(expr, axis):
        return 0 if axis == 0 else sp.diff(expr, coords[axis])

    ginv = g.subs(x0).evalf().inv()
    dg = [[[float(sp.sympify(d(g[a, b], c)).subs(x0)) for b in range(4)] for a in range(4)] for c in range(4)]
    dg = np.array(dg)  # dg[c, a, b] = d_c g_ab
    lower = 0.5 * (np.einsum("nrm->rnm", dg) + np.einsum("mrn->rnm", dg) - dg)
    exact = np.einsum("lr,rnm->lnm", np.array(ginv, dtype=float), lower)
    fd = frame_at(both, [2.5, -1.5, 1.0])
    hmax = float(np.abs(fd.metric - np.diag([1, -1, -1, -1])).max())
    assert np.abs(fd.christoffel - exact).max() <= 2 * hmax * np.abs(dg).max()
    assert np.abs(fd.christoffel).max() > 0


def test_spin_connection_antisymmetric(point_mass, dipole):
    both = make_field("superposition", {"components": [point_mass, dipole]})
    for x in sample_points(both, 10):
        om = frame_at(both, x).spin_connection
        np.testing.assert_allclose(om, -np.swapaxes(om, 0, 1), atol=1e-15)


def test_superposition_linearity(point_mass, dipole):
    both = make_field("superposition", {"components": [point_mass, dipole]})
    for x in sample_points(both, 10):
        a, b, ab = frame_at(point_mass, x), frame_at(dipole, x), frame_at(both, x)
        np.testing.assert_allclose(ab.vierbein, a.vierbein + b.vierbein - np.eye(4), atol=1e-15)
        np.testing.assert_allclose(ab.christoffel, a.christoffel + b.christoffel, atol=1e-15)
        np.testing.assert_allclose(ab.spin_connection, a.spin_connection + b.spin_connection, atol=1e-15)


@given(st.floats(2.1, 20.0), st.floats(0, np.pi), st.floats(0, 2 * np.pi))
def test_measure_identity(r, theta, az):
    model = make_field("point-mass", {"mu": 0.05}, r_min=2.0)
    x = r * np.array([np.sin(theta) * np.cos(az), np.sin(theta) * np.sin(az), np.cos(theta)])
    fd = frame_at(model, x)
    phi = -0.05 / r
    assert abs(fd.sqrt_g - (1 + phi) * fd.sqrt_3g) <= 4 * phi**2


# -- pointwise Hamiltonian ------------------------------------------------------------

def test_flat_assembly_is_free_dirac():
    table = assemble_dirac_hamiltonian(zero_field(), [0.0, 0.0, 0.0], 2.0)
    np.testing.assert_allclose(table.C[0], 2.0 * dirac.MATRICES[dirac.BETA], atol=1e-15)
    for k in (1, 2, 3):
        np.testing.assert_allclose(table.C[k], -1j * dirac.MATRICES[dirac.ALPHA[k]], atol=1e-15)


@pytest.mark.parametrize("name", ["point_mass", "dipole"])
def test_assembly_matches_printed(name, request, H):
    model = request.getfixturevalue(name)
    for x in sample_points(model, 20, np.random.default_rng(3), shell=(1.0, 10.0)):
        assert compare_with_printed(model, x, 1.0, H) <= 10 * CAP**2


def test_dipole_assembly_has_gravitomagnetic_pieces(dipole, H):
    x = [2.0, 1.0, 0.5]
    table = assemble_dirac_hamiltonian(dipole, x, 1.0)
    # the -g.p piece shows up as derivative coefficients beyond -i alpha_k
    g = [float(dipole.base_value(f"g{k}", np.array(x))) for k in (1, 2, 3)]
    for k in (1, 2, 3):
        extra = table.C[k] + 1j * dirac.MATRICES[dirac.ALPHA[k]]
        np.testing.assert_allclose(extra, 1j * g[k - 1] * np.eye(4), atol=10 * CAP**2)
    assert compare_with_printed(dipole, x, 1.0, H) <= 10 * CAP**2


# -- field files ----------------------------------------------------------------------

@pytest.mark.parametrize("name", ["point_mass", "dipole", "zero", "gradient"])
def test_shipped_field_files(name):
    doc = load_field(data_path(f"{name}.yaml"))
    pts = sample_points(doc.model, 30, np.random.default_rng(0), shell=tuple(doc.checks["shell"]))
    assert check_field_equations(doc.model, pts).passed(doc.checks["tolerance"])
    assert check_gauge(doc.model, pts).passed(doc.checks["tolerance"])


def test_field_file_schema_error_has_line():
    text = "family: point-mass\nparams:\n  mu: -1\nr_min: 2\n"
    with pytest.raises(ConfigError) as info:
        parse_field(text, "bad.yaml")
    assert info.value.line == 3
    assert "bad.yaml" in str(info.value)


def test_field_file_build_error_has_line():
    text = "family: harmonic-polynomial\nparams:\n  phi: x1**2\n"
    with pytest.raises(ConfigError) as info:
        parse_field(text)
    # points into the params block
    assert info.value.line == 3
    assert "harmonic" in str(info.value)


def test_field_file_unknown_key():
    with pytest.raises(ConfigError):
        parse_field("family: point-mass\nparams: {mu: 0.01}\nr_min: 2\ncolour: red\n")


def test_explicit_checks_recorded():
    doc = parse_field("family: harmonic-polynomial\nparams: {phi: 0}\nchecks: {samples: 5}\n")
    assert doc.explicit_checks == {"samples"}
    assert doc.checks["tolerance"] == 1e-12
