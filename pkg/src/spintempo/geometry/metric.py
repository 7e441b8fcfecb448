"""Static weak-field metric models with closed-form derivatives.

Every component ``h_{mu nu}(x)`` is a sympy expression in ``x1, x2, x3``.
Derivatives are taken symbolically and compiled with ``lambdify`` on first
use, so residual checks see exact zeros rather than discretisation noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import sympy as sp

X = sp.symbols("x1 x2 x3", real=True)
FAMILIES = ("harmonic-polynomial", "point-mass", "gravitomagnetic-dipole", "superposition")
DEFAULT_CAP = 0.05
DEFAULT_HALF_WIDTH = 100.0
MAX_POLY_DEGREE = 3


class FieldError(ValueError):
    """Invalid field parameters or a violated model invariant."""


class AdmissibilityError(FieldError):
    """A point lies inside an exclusion ball or outside the domain."""


def _key(mu: int, nu: int) -> tuple:
    return (mu, nu) if mu <= nu else (nu, mu)


@dataclass(frozen=True)
class Exclusion:
    center: tuple
    r_min: float


@dataclass(frozen=True, eq=False)
class MetricModel:
    """Static perturbation ``h_{mu nu}`` of the Minkowski metric.

    Build with :func:`make_field`; the constructor does not validate.
    ``domain`` is an axis-aligned box ``(lo, hi)``; ``exclusions`` lists the
    balls around singular sources that are not admissible.
    """

    family: str
    components: Mapping
    params: Mapping
    domain: tuple
    exclusions: tuple = ()
    weak_cap: float = DEFAULT_CAP
    _compiled: dict = field(default_factory=dict, repr=False, compare=False)

    def h(self, mu: int, nu: int) -> sp.Expr:
        return self.components.get(_key(mu, nu), sp.Integer(0))

    def base_expr(self, base: str) -> sp.Expr:
        """Symbolic value of an operator-algebra field name (``phi``, ``g2``, ``h13``, ``h``)."""
        if base == "phi":
            return self.h(0, 0) / 2
        if base in ("g1", "g2", "g3"):
            return -self.h(0, int(base[1]))
        if base == "h":
            return self.h(0, 0) - sum(self.h(i, i) for i in (1, 2, 3))
        if len(base) == 3 and base[0] == "h":
            return self.h(int(base[1]), int(base[2]))
        raise KeyError(f"unknown field {base!r}")

    def _function(self, kind, name, deriv):
        key = (kind, name, tuple(deriv))
        fn = self._compiled.get(key)
        if fn is None:
            expr = self.h(*name) if kind == "h" else self.base_expr(name)
            for axis, count in enumerate(deriv):
                if count:
                    expr = sp.diff(expr, X[axis], count)
            fn = (expr, sp.lambdify(X, expr, "numpy"))
            self._compiled[key] = fn
        return fn

    def _evaluate(self, kind, name, deriv, points):
        pts = np.asarray(points, dtype=float)
        expr, fn = self._function(kind, name, deriv)
        shape = pts.shape[:-1]
        if expr.is_zero:
            return np.zeros(shape)
        return np.broadcast_to(np.asarray(fn(pts[..., 0], pts[..., 1], pts[..., 2]), dtype=float), shape)

    def value(self, mu: int, nu: int, points, deriv=(0, 0, 0)) -> np.ndarray:
        """``d^deriv h_{mu nu}`` at ``points`` (shape ``(..., 3)``)."""
        return self._evaluate("h", _key(mu, nu), deriv, points)

    def base_value(self, base: str, points, deriv=(0, 0, 0)) -> np.ndarray:
        return self._evaluate("base", base, deriv, points)

    def h_matrix(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros((4, 4))
        for (mu, nu) in self.components:
            out[mu, nu] = out[nu, mu] = float(self.value(mu, nu, x))
        return out

    def h_gradient(self, x) -> np.ndarray:
        """``dh[rho, mu, nu] = d_rho h_{mu nu}`` with ``d_0 = 0`` (static)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros((4, 4, 4))
        for (mu, nu) in self.components:
            for a in (1, 2, 3):
                d = [0, 0, 0]
                d[a - 1] = 1
                out[a, mu, nu] = out[a, nu, mu] = float(self.value(mu, nu, x, d))
        return out

    def metric(self, x) -> np.ndarray:
        return np.diag([1.0, -1.0, -1.0, -1.0]) + self.h_matrix(x)

    def admissible(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        lo, hi = (np.asarray(b) for b in self.domain)
        ok = np.all((pts >= lo) & (pts <= hi), axis=-1)
        for ex in self.exclusions:
            ok &= np.linalg.norm(pts - np.asarray(ex.center), axis=-1) >= ex.r_min
        return ok

    def require_admissible(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        bad = ~self.admissible(pts)
        if np.any(bad):
            raise AdmissibilityError(f"{int(bad.sum())} point(s) not admissible, first {pts[bad][0].tolist()}")

    def max_abs_h(self, points) -> float:
        pts = np.asarray(points, dtype=float)
        return max((float(np.max(np.abs(self.value(mu, nu, pts)))) for (mu, nu) in self.components), default=0.0)


def _vector(v, name, length=3) -> tuple:
    try:
        arr = tuple(float(c) for c in v)
    except TypeError:
        raise FieldError(f"{name} must be a list of {length} numbers") from None
    if len(arr) != length:
        raise FieldError(f"{name} must have {length} entries, got {len(arr)}")
    return arr


def _domain(domain, default_half_width=DEFAULT_HALF_WIDTH) -> tuple:
    if domain is None:
        return ((-default_half_width,) * 3, (default_half_width,) * 3)
    if isinstance(domain, Mapping):
        lo, hi = domain["lo"], domain["hi"]
    else:
        lo, hi = domain
    lo, hi = _vector(lo, "domain.lo"), _vector(hi, "domain.hi")
    if not all(a < b for a, b in zip(lo, hi)):
        raise FieldError(f"domain lower corner {lo} must be below upper corner {hi}")
    return lo, hi


def _parse_poly(text, name) -> sp.Expr:
    if isinstance(text, (int, float)):
        text = str(text)
    try:
        # decimal literals become exact rationals so symbolic checks see exact zeros
        expr = sp.sympify(text, locals={f"x{i}": X[i - 1] for i in (1, 2, 3)}, rational=True)
    except (sp.SympifyError, SyntaxError, TypeError) as exc:
        raise FieldError(f"{name}: cannot parse {text!r}: {exc}") from None
    if expr.free_symbols - set(X):
        raise FieldError(f"{name}: unknown symbols {sorted(map(str, expr.free_symbols - set(X)))}; use x1, x2, x3")
    if not expr.is_polynomial(*X):
        raise FieldError(f"{name}: {text!r} is not a polynomial")
    deg = sp.Poly(expr, *X).total_degree() if expr != 0 else 0
    if deg > MAX_POLY_DEGREE:
        raise FieldError(f"{name}: degree {deg} exceeds {MAX_POLY_DEGREE}")
    return sp.expand(expr)


def laplacian(expr: sp.Expr) -> sp.Expr:
    return sum(sp.diff(expr, xi, 2) for xi in X)


def _harmonic_polynomial(params, strict) -> dict:
    if "phi" not in params:
        raise FieldError("harmonic-polynomial: parameter 'phi' is required")
    phi = _parse_poly(params["phi"], "phi")
    comps = {(0, 0): 2 * phi}
    g = params.get("g")
    if g is not None:
        if len(g) != 3:
            raise FieldError("harmonic-polynomial: 'g' needs three components")
        for j, gj in enumerate(g, start=1):
            comps[(0, j)] = -_parse_poly(gj, f"g{j}")
    h = params.get("h")
    for i in (1, 2, 3):
        for j in range(i, 4):
            if h is None:
                comps[(i, j)] = 2 * phi if i == j else sp.Integer(0)
            else:
                txt = h.get(f"{i}{j}", h.get(f"{j}{i}", 0))
                comps[(i, j)] = _parse_poly(txt, f"h{i}{j}")
    comps = {k: v for k, v in comps.items() if v != 0}
    if strict:
        for (mu, nu), expr in comps.items():
            lap = sp.expand(laplacian(expr))
            if lap != 0:
                raise FieldError(f"h{mu}{nu} = {expr} is not harmonic (Laplacian {lap})")
        for name, res in _gauge_expressions(comps).items():
            if sp.expand(res) != 0:
                raise FieldError(f"gauge condition {name} violated: residual {sp.expand(res)}")
    return comps


def _gauge_expressions(comps) -> dict:
    def h(mu, nu):
        return comps.get(_key(mu, nu), sp.Integer(0))

    trace = h(0, 0) - sum(h(i, i) for i in (1, 2, 3))
    out = {"div h0": sum(sp.diff(h(0, j), X[j - 1]) for j in (1, 2, 3))}
    for i in (1, 2, 3):
        out[f"spatial {i}"] = sum(sp.diff(h(i, j), X[j - 1]) for j in (1, 2, 3)) + sp.diff(trace, X[i - 1]) / 2
    return out


def _radius(center) -> sp.Expr:
    return sp.sqrt(sum((X[i] - center[i]) ** 2 for i in range(3)))


def _point_mass(params) -> tuple:
    mu = float(params.get("mu", 0))
    if not mu > 0:
        raise FieldError(f"point-mass: mu must be > 0, got {mu}")
    center = _vector(params.get("center", (0, 0, 0)), "center")
    phi = -sp.nsimplify(mu) / _radius(center)
    comps = {(0, 0): 2 * phi, (1, 1): 2 * phi, (2, 2): 2 * phi, (3, 3): 2 * phi}
    return comps, center


def _dipole(params) -> tuple:
    S = _vector(params.get("S", (0, 0, 1)), "S")
    kappa = float(params.get("kappa", 1.0))
    center = _vector(params.get("center", (0, 0, 0)), "center")
    if kappa == 0 or not any(S):
        raise FieldError("gravitomagnetic-dipole: kappa and S must be nonzero")
    r = _radius(center)
    d = [X[i] - center[i] for i in range(3)]
    Sv = [sp.nsimplify(s) for s in S]
    k = sp.nsimplify(kappa)
    cross = (Sv[1] * d[2] - Sv[2] * d[1], Sv[2] * d[0] - Sv[0] * d[2], Sv[0] * d[1] - Sv[1] * d[0])
    comps = {(0, j + 1): -k * cross[j] / r**3 for j in range(3) if cross[j] != 0}
    return comps, center


def _shell_points(ex: Exclusion, n: int = 64) -> np.ndarray:
    # Fibonacci sphere just outside the exclusion radius
    i = np.arange(n) + 0.5
    theta = np.arccos(1 - 2 * i / n)
    ang = np.pi * (1 + 5**0.5) * i
    unit = np.stack([np.sin(theta) * np.cos(ang), np.sin(theta) * np.sin(ang), np.cos(theta)], axis=-1)
    return np.asarray(ex.center) + ex.r_min * unit


def cap_probe_points(model: MetricModel, per_axis: int = 9) -> np.ndarray:
    """Lattice over the domain box plus points on every exclusion shell."""
    lo, hi = model.domain
    axes = [np.linspace(a, b, per_axis) for a, b in zip(lo, hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    pts = [grid]
    for ex in model.exclusions:
        pts.append(_shell_points(ex))
    pts = np.concatenate(pts)
    return pts[model.admissible(pts)]


def enforce_weak_cap(model: MetricModel) -> float:
    peak = model.max_abs_h(cap_probe_points(model))
    if peak > model.weak_cap:
        raise FieldError(f"weak-field cap exceeded: max |h| = {peak:.4g} > {model.weak_cap:g} on the declared domain")
    return peak


def make_field(
    family: str,
    params: Mapping | None = None,
    *,
    domain=None,
    r_min: float | None = None,
    weak_cap: float = DEFAULT_CAP,
    strict: bool = True,
) -> MetricModel:
    """Construct and validate a metric model.

    Parameters
    ----------
    family : str
        One of ``FAMILIES``.
    params : mapping
        ``harmonic-polynomial``: ``phi`` (polynomial in x1..x3), optional
        ``g`` (three polynomials) and ``h`` (mapping ``"ij"`` to polynomial;
        default ``2 phi delta_ij``).  ``point-mass``: ``mu``, ``center``.
        ``gravitomagnetic-dipole``: ``S``, ``kappa``, ``center``.
        ``superposition``: ``components``, a list of models.
    domain : (lo, hi) or mapping with ``lo``/``hi``
        Working box; defaults to a cube of half-width 100.
    r_min : float
        Exclusion radius, required for singular families.
    strict : bool
        With ``False`` polynomial inputs skip the harmonic and gauge checks
        (used to build deliberately broken fields).  The weak-field cap is
        enforced either way.
    """
    params = dict(params or {})
    exclusions = ()
    if family == "harmonic-polynomial":
        comps = _harmonic_polynomial(params, strict)
    elif family in ("point-mass", "gravitomagnetic-dipole"):
        if r_min is None or not r_min > 0:
            raise FieldError(f"{family}: r_min must be > 0, got {r_min}")
        comps, center = _point_mass(params) if family == "point-mass" else _dipole(params)
        exclusions = (Exclusion(center, float(r_min)),)
    elif family == "superposition":
        members = params.get("components") or []
        if not members:
            raise FieldError("superposition: 'components' must be a non-empty list of models")
        comps = {}
        for member in members:
            if not isinstance(member, MetricModel):
                raise FieldError("superposition components must be MetricModel instances")
            for k, v in member.components.items():
                comps[k] = comps.get(k, sp.Integer(0)) + v
            exclusions += member.exclusions
        if domain is None:
            domain = members[0].domain
    else:
        raise FieldError(f"unknown family {family!r}; expected one of {FAMILIES}")
    model = MetricModel(family, comps, params, _domain(domain), exclusions, float(weak_cap))
    enforce_weak_cap(model)
    return model


def zero_field(domain=None) -> MetricModel:
    return make_field("harmonic-polynomial", {"phi": 0}, domain=domain)


def sample_points(model: MetricModel, n: int, rng: np.random.Generator | None = None, shell=(2.0, 10.0)) -> np.ndarray:
    """Random admissible points.

    Singular families are sampled in spherical shells ``shell`` times the
    exclusion radius around a randomly chosen source; others uniformly in the
    domain box.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    out = []
    lo, hi = (np.asarray(b) for b in model.domain)
    while len(out) < n:
        if model.exclusions:
            ex = model.exclusions[rng.integers(len(model.exclusions))]
            u = rng.normal(size=3)
            u /= np.linalg.norm(u)
            p = np.asarray(ex.center) + ex.r_min * rng.uniform(*shell) * u
        else:
            p = rng.uniform(lo, hi)
        if model.admissible(p)[0]:
            out.append(p)
    return np.array(out)


@dataclass(frozen=True)
class ResidualReport:
    """Maximum residuals over a sample.

    ``relative`` divides each residual by the sum of magnitudes of the terms
    that cancel in it, so exact cancellation reads as roundoff (~1e-16).
    """

    name: str
    absolute: float
    relative: float
    samples: int
    per_component: dict

    def passed(self, tol: float = 1e-12) -> bool:
        return self.relative <= tol

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "absolute": self.absolute,
            "relative": self.relative,
            "samples": self.samples,
            "per_component": dict(self.per_component),
        }


def _rel(res: np.ndarray, scale: np.ndarray) -> float:
    res = np.abs(res)
    out = np.where(scale > 0, res / np.where(scale > 0, scale, 1.0), np.where(res > 0, np.inf, 0.0))
    return float(out.max()) if out.size else 0.0


def _second(axis):
    d = [0, 0, 0]
    d[axis] = 2
    return tuple(d)


def _first(axis):
    d = [0, 0, 0]
    d[axis] = 1
    return tuple(d)


POTENTIALS = ("phi", "g1", "g2", "g3", "h11", "h12", "h13", "h22", "h23", "h33")


def check_field_equations(model: MetricModel, samples) -> ResidualReport:
    """max |Laplacian| over samples of phi, g_j and h_ij.

    ``phi = h_00 / 2`` and ``g_j = -h_0j`` carry the same information as the
    time components of ``h``; residuals are quoted for the potentials.
    """
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    model.require_admissible(pts)
    per = {}
    abs_max, rel_max = 0.0, 0.0
    for name in POTENTIALS:
        if model.base_expr(name).is_zero:
            continue
        terms = [model.base_value(name, pts, _second(a)) for a in range(3)]
        res = sum(terms)
        scale = sum(np.abs(t) for t in terms)
        a, r = float(np.max(np.abs(res))), _rel(res, scale)
        per[name] = {"absolute": a, "relative": r}
        abs_max, rel_max = max(abs_max, a), max(rel_max, r)
    return ResidualReport("field-equations", abs_max, rel_max, len(pts), per)


def check_gauge(model: MetricModel, samples) -> ResidualReport:
    """Residuals of sum_j d_j h_0j = 0 and sum_j d_j h_ij + d_i h / 2 = 0."""
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    model.require_admissible(pts)
    per = {}
    terms = [model.value(0, j, pts, _first(j - 1)) for j in (1, 2, 3)]
    res = sum(terms)
    per["div h0"] = {"absolute": float(np.max(np.abs(res))), "relative": _rel(res, sum(np.abs(t) for t in terms))}
    for i in (1, 2, 3):
        terms = [model.value(i, j, pts, _first(j - 1)) for j in (1, 2, 3)]
        terms.append(0.5 * model.base_value("h", pts, _first(i - 1)))
        res = sum(terms)
        per[f"spatial {i}"] = {
            "absolute": float(np.max(np.abs(res))),
            "relative": _rel(res, sum(np.abs(t) for t in terms)),
        }
    return ResidualReport(
        "gauge",
        max(v["absolute"] for v in per.values()),
        max(v["relative"] for v in per.values()),
        len(pts),
        per,
    )
