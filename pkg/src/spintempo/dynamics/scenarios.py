"""Scenario documents and the runners behind ``spintempo simulate``.

A scenario names a field, a grid, a packet and an integrator, and pins the
tolerances its checks use.  Example::

    kind: redshift
    field: point_mass.yaml
    mass: 1.0
    grid: {axes: [1], lo: [10], hi: [90], n: [512], offsets: [0, 0, 0]}
    packet: {center: [50], width: [5], k: [0], spin: [0, 0, 1]}
    integrator: {scheme: cn, dt: 0.1, steps: 200, record_every: 1, rtol: 1.0e-12}
    tolerances: {relative: 1.0e-5, norm_drift_per_step: 1.0e-8, hermiticity: 1.0e-8}

``field`` is a path (relative to the scenario file, then to the shipped
data directory) or an inline field document.
"""

from __future__ import annotations

import platform
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .. import __version__, docio
from ..geometry import FieldDocument, field_from_dict, load_field
from ..geometry.metric import FieldError
from .classical import classical_proper_time
from .evolve import DynamicsError, Trajectory, _cumtrapz, evolve, init_wavepacket, spinor
from .gaussian import gaussian_expectation, gaussian_field_average
from .grid import Grid, GridError
from .library import standard_operators
from .operators import OperatorError, compile_operator

KINDS = ("run", "dilation", "redshift", "ehrenfest", "spin-contrast")

DEFAULT_TOLERANCES = {
    "norm_drift_per_step": 1e-8,
    "hermiticity": 1e-10,
    "boundary": 1e-8,
    "relative": 1e-5,
    "min_crossings": 10.0,
    "ehrenfest": 1e-5,
    "min_order": 1.8,
    "noise_factor": 10.0,
    "classical": 1e-4,
}

# roundoff allowance per unit time in the spin-contrast noise floor
ROUNDOFF_RATE = 1e-13


def data_path(name: str) -> Path:
    """Path of a file shipped in ``spintempo/data``."""
    return Path(str(resources.files("spintempo").joinpath("data", name)))


@dataclass
class Scenario:
    kind: str
    field: FieldDocument
    mass: float
    grid: Grid
    packet: dict
    integrator: dict
    tolerances: dict
    compare_classical: bool = False
    description: str = ""
    source: str | None = None
    raw: dict = field(default_factory=dict)

    def tolerance(self, key: str) -> tuple[float, str]:
        """(value, provenance) for a tolerance key."""
        if key in self.tolerances:
            return float(self.tolerances[key]), f"scenario {self.source or '<inline>'}: tolerances.{key}"
        return DEFAULT_TOLERANCES[key], "default"

    def initial_state(self, spin=None):
        p = self.packet
        return init_wavepacket(
            self.grid, self.field.model, self.mass, p["center"], p["width"],
            p.get("k", 0.0), p.get("spin", [0, 0, 1]) if spin is None else spin,
        )

    def _embed(self, value) -> np.ndarray:
        v = np.ravel(np.asarray(value, dtype=float))
        v = np.full(self.grid.dim, v[0]) if v.size == 1 else v
        out = np.zeros(3)
        for a, axis in enumerate(self.grid.axes):
            out[axis - 1] = v[a]
        return out

    def embedded_center(self) -> np.ndarray:
        """Packet center as a 3-vector (absent axes at the grid offsets)."""
        x = self._embed(self.packet["center"])
        for axis in (1, 2, 3):
            if axis not in self.grid.axes:
                x[axis - 1] = self.grid.offsets[axis - 1]
        return x

    def momentum(self) -> np.ndarray:
        """Mean momentum as a 3-vector."""
        return self._embed(self.packet.get("k", 0.0))

    def widths(self) -> np.ndarray:
        w = np.ravel(np.asarray(self.packet["width"], dtype=float))
        return np.full(self.grid.dim, w[0]) if w.size == 1 else w


def _resolve_field(ref, source: str | None, text: str | None) -> FieldDocument:
    if isinstance(ref, dict):
        try:
            docio.validate(ref, "field")
        except Exception as exc:  # jsonschema.ValidationError
            raise docio.ConfigError(f"field: {getattr(exc, 'message', exc)}", source, docio.line_of(text, ["field"]) if text else None) from None
        return field_from_dict(ref, source)
    base = Path(source).parent if source else Path.cwd()
    for cand in (base / ref, Path(ref), data_path(ref)):
        if cand.is_file():
            return load_field(cand)
    raise docio.ConfigError(f"field file {ref!r} not found", source, docio.line_of(text, ["field"]) if text else None)


def scenario_from_dict(data: dict, source: str | None = None, text: str | None = None) -> Scenario:
    def where(*path):
        return docio.line_of(text, list(path)) if text else None

    fdoc = _resolve_field(data["field"], source, text)
    g = data["grid"]
    try:
        grid = Grid.build(g["axes"], g["lo"], g["hi"], g["n"], g.get("offsets", [0, 0, 0]))
    except GridError as exc:
        raise docio.ConfigError(str(exc), source, where("grid")) from None
    integ = {"scheme": "cn", "record_every": 1, "rtol": 1e-12}
    integ.update(data["integrator"])
    return Scenario(
        kind=data["kind"],
        field=fdoc,
        mass=float(data.get("mass", 1.0)),
        grid=grid,
        packet=dict(data["packet"]),
        integrator=integ,
        tolerances=dict(data.get("tolerances") or {}),
        compare_classical=bool(data.get("compare_classical", False)),
        description=data.get("description", ""),
        source=source,
        raw=data,
    )


def parse_scenario(text: str, source: str | None = None) -> Scenario:
    return scenario_from_dict(docio.parse(text, "scenario", source), source, text)


def load_scenario(path) -> Scenario:
    data, text = docio.load(path, "scenario")
    return scenario_from_dict(data, str(path), text)


@dataclass
class ScenarioResult:
    """Checks, trajectories and CSV columns of one scenario run."""

    kind: str
    status: str  # "pass" | "fail" | "inconclusive"
    checks: list
    trajectory: Trajectory
    columns: dict = field(default_factory=dict)
    runs: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def check(self, name: str) -> dict:
        return next(c for c in self.checks if c["name"] == name)

    def metadata(self) -> dict:
        return {name: _jsonable(tr.metadata) for name, tr in self.runs.items()}

    def to_dict(self) -> dict:
        return {"kind": self.kind, "status": self.status, "checks": self.checks, "notes": self.notes, "runs": self.metadata()}

    def to_csv(self, path):
        self.trajectory.to_csv(path, self.columns)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def _check(sc: Scenario, name: str, value: float, key: str, *, expected=None, mode="max", note: str = "") -> dict:
    """A numeric check carrying its tolerance and the tolerance's provenance."""
    tol, src = sc.tolerance(key)
    value = float(value)
    passed = value <= tol if mode == "max" else value >= tol
    out = {"name": name, "value": value, "tolerance": tol, "tolerance_source": src, "comparison": "<=" if mode == "max" else ">=", "passed": bool(passed)}
    if expected is not None:
        out["expected"] = float(expected)
    if note:
        out["note"] = note
    return out


def _info(name: str, value: float, note: str = "") -> dict:
    out = {"name": name, "value": float(value), "tolerance": None, "tolerance_source": "informational", "comparison": "none", "passed": True}
    if note:
        out["note"] = note
    return out


def _health_checks(sc: Scenario, label: str, tr: Trajectory) -> list:
    rel_im = float(np.max(np.abs(tr.tempo.imag) / np.abs(tr.tempo.real)))
    return [
        _check(sc, f"{label}norm_drift_per_step", tr.metadata["max_norm_drift_per_step"], "norm_drift_per_step"),
        _check(sc, f"{label}hermiticity_tempo", rel_im, "hermiticity", note="max |Im<T>| / |Re<T>|"),
    ]


def _run(sc: Scenario, state, H, *, dt=None, steps=None, record_every=None, tempo=None, observables=None) -> Trajectory:
    it = sc.integrator
    support_tol, _ = sc.tolerance("boundary")
    return evolve(
        state, H,
        float(it["dt"] if dt is None else dt),
        int(it["steps"] if steps is None else steps),
        scheme=it["scheme"],
        record_every=int(it["record_every"] if record_every is None else record_every),
        rtol=float(it["rtol"]),
        tempo=tempo,
        support_tol=support_tol,
        observables=observables,
    )


def width_correction(sc: Scenario) -> float:
    """Zero-point kinetic contribution sum_j 1/(8 m^2 w_j^2) to -d tau/dt."""
    return float(np.sum(1.0 / (8 * sc.mass**2 * sc.widths() ** 2)))


def _rate(tr: Trajectory) -> float:
    return float(tr.tau[-1] / (tr.t[-1] - tr.t[0]))


def _dilation(sc: Scenario, ops) -> ScenarioResult:
    tr = _run(sc, sc.initial_state(), ops["H_FW"])
    v = float(np.linalg.norm(sc.momentum()) / sc.mass)
    corr = width_correction(sc)
    expected = 1 - v**2 / 2
    measured = _rate(tr) + corr
    crossings = (tr.t[-1] - tr.t[0]) * v / float(np.min(sc.widths())) if v else 0.0
    checks = [
        _check(sc, "dilation_rate", abs(measured - expected) / expected, "relative", expected=expected,
               note=f"tau/t + width correction {corr:.6g} against 1 - v^2/2"),
        _check(sc, "crossing_times", crossings, "min_crossings", mode="min", note="duration * v / w"),
        _info("tau_over_t", _rate(tr)),
        _info("width_correction", corr),
    ]
    return ScenarioResult("dilation", "", checks + _health_checks(sc, "", tr), tr, runs={"main": tr})


def _redshift(sc: Scenario, ops) -> ScenarioResult:
    if sc.grid.dim != 1:
        raise DynamicsError("redshift scenarios use a one-dimensional grid (the Gaussian oracle is 1D)")
    tr = _run(sc, sc.initial_state(), ops["H_FW"])
    axis = sc.grid.axes[0]
    c = float(np.ravel(sc.packet["center"])[0])
    w = float(sc.widths()[0])
    k = float(np.ravel(np.asarray(sc.packet.get("k", 0.0), dtype=float))[0])
    spin = sc.packet.get("spin", [0, 0, 1])
    oracle = gaussian_expectation(ops["T"], sc.field.model, sc.mass, axis, sc.grid.offsets, c, w, k, spin).real
    phi_avg = gaussian_field_average(sc.field.model, "phi", axis, sc.grid.offsets, c, w)
    measured = _rate(tr)
    checks = [
        _check(sc, "redshift_rate", abs(measured - oracle) / oracle, "relative", expected=oracle,
               note="tau/t against the Gaussian-oracle <T> of the initial packet"),
        _info("tau_over_t", measured),
        _info("one_plus_mean_phi", 1 + phi_avg),
        _info("width_correction", 1 + phi_avg - oracle, note="1 + <phi> - <T>_oracle"),
    ]
    return ScenarioResult("redshift", "", checks + _health_checks(sc, "", tr), tr, runs={"main": tr})


def ehrenfest_error(tr: Trajectory) -> float:
    """max_n,i |(x_{n+1} - x_n)/dt - (v_n + v_{n+1})/2| over consecutive samples."""
    dt = np.diff(tr.t)[:, None]
    dx = np.diff(tr.x, axis=0) / dt
    vbar = 0.5 * (tr.v[1:] + tr.v[:-1])
    return float(np.max(np.abs(dx - vbar)))


def _ehrenfest(sc: Scenario, ops) -> ScenarioResult:
    state = sc.initial_state()
    dt, steps = float(sc.integrator["dt"]), int(sc.integrator["steps"])
    coarse = _run(sc, state, ops["H_FW"], record_every=1)
    fine = _run(sc, state, ops["H_FW"], dt=dt / 2, steps=2 * steps, record_every=1)
    e1, e2 = ehrenfest_error(coarse), ehrenfest_error(fine)
    order = float(np.log2(e1 / e2)) if e2 > 0 else float("inf")
    checks = [
        _check(sc, "ehrenfest_dt", e1, "ehrenfest", note="|d<x>/dt - <xdot>| at dt"),
        _check(sc, "ehrenfest_dt_half", e2, "ehrenfest", note="same at dt/2"),
        _check(sc, "convergence_order", order, "min_order", mode="min", note="log2 of the error ratio under dt halving"),
    ]
    checks += _health_checks(sc, "", coarse) + _health_checks(sc, "half_dt_", fine)
    return ScenarioResult("ehrenfest", "", checks, coarse, runs={"dt": coarse, "dt_half": fine})


def _flip(chi: np.ndarray) -> np.ndarray:
    return np.array([-np.conj(chi[1]), np.conj(chi[0])])


def _spin_contrast(sc: Scenario, ops) -> ScenarioResult:
    spin = np.asarray(sc.packet.get("spin", [0, 0, 1]), dtype=float)
    plus = _run(sc, sc.initial_state(spin), ops["H_FW"])
    minus = _run(sc, sc.initial_state(-spin), ops["H_FW"])
    delta = plus.tau - minus.tau

    # prediction: spin terms of T on the spin-free trajectory, for both spins
    chi_p = spinor(spin)
    chi_m = _flip(chi_p)
    T_spin = compile_operator(ops["T_spin"], sc.grid, sc.field.model, sc.mass)

    def spin_tempo(chi):
        def f(s):
            amp = np.tensordot(np.conj(chi_p), s.psi, axes=(0, 0))
            psi = chi[:, None] * amp.reshape(1, -1)
            psi = psi.reshape(s.psi.shape)
            return s.inner(psi, T_spin.apply(psi)) / s.inner(psi, psi)
        return f

    base = _run(sc, sc.initial_state(spin), ops["H_FW_spinless"],
                observables={"T_spin_plus": spin_tempo(chi_p), "T_spin_minus": spin_tempo(chi_m)})
    pred = _cumtrapz(base.t, (base.observables["T_spin_plus"] - base.observables["T_spin_minus"]).real)

    span = plus.t[-1] - plus.t[0]
    noise = (
        float(_cumtrapz(plus.t, np.abs(plus.tempo.imag))[-1] + _cumtrapz(minus.t, np.abs(minus.tempo.imag))[-1])
        + ROUNDOFF_RATE * span
    )
    factor, factor_src = sc.tolerance("noise_factor")
    measured, predicted = float(delta[-1]), float(pred[-1])
    checks = [
        _info("delta_tau", measured),
        _info("delta_tau_predicted", predicted),
        _info("noise_floor", noise, note="integrated |Im<T>| of both runs plus roundoff"),
    ]
    notes = []
    status = None
    if abs(measured) <= factor * noise:
        notes.append(f"contrast {measured:.3g} is within {factor:g} x noise floor {noise:.3g}: inconclusive")
        checks.append({"name": "above_noise", "value": abs(measured), "tolerance": factor * noise,
                       "tolerance_source": factor_src, "comparison": ">", "passed": False})
        status = "inconclusive"
    else:
        checks.append({"name": "above_noise", "value": abs(measured), "tolerance": factor * noise,
                       "tolerance_source": factor_src, "comparison": ">", "passed": True})
        rel = abs(measured - predicted) / abs(predicted) if predicted else float("inf")
        checks.append(_check(sc, "contrast_agreement", rel, "relative", expected=predicted,
                             note="|delta_tau - predicted| / |predicted|"))
    checks += _health_checks(sc, "plus_", plus) + _health_checks(sc, "minus_", minus)
    columns = {"tau_minus": minus.tau, "delta_tau": delta, "delta_tau_pred": pred}
    res = ScenarioResult("spin-contrast", status or "", checks, plus, columns, {"plus": plus, "minus": minus, "spin_free": base}, notes)
    return res


def _plain(sc: Scenario, ops) -> ScenarioResult:
    tr = _run(sc, sc.initial_state(), ops["H_FW"])
    checks = [_info("tau_over_t", _rate(tr))] + _health_checks(sc, "", tr)
    return ScenarioResult("run", "", checks, tr, runs={"main": tr})


_RUNNERS = {"run": _plain, "dilation": _dilation, "redshift": _redshift, "ehrenfest": _ehrenfest, "spin-contrast": _spin_contrast}


def classical_columns(sc: Scenario, tr: Trajectory) -> tuple[dict, list]:
    """tau_cl along the point-particle track starting at the packet center."""
    t = tr.t - tr.t[0]
    if len(t) > 2 and not np.allclose(np.diff(t), t[1] - t[0], rtol=1e-9):
        raise DynamicsError("classical comparison needs uniformly spaced samples")
    track = classical_proper_time(sc.field.model, sc.embedded_center(), sc.momentum() / sc.mass, float(t[-1]), samples=len(t))
    corr = width_correction(sc)
    gap = abs(tr.tau[-1] - track.tau[-1] + corr * t[-1]) / t[-1]
    check = _check(sc, "quantum_classical", gap, "classical",
                   note=f"|tau - tau_cl + {corr:.3g} t| / t; O(h^2, v^4, 1/m^3) terms remain")
    return {"tau_cl": track.tau, "x1_cl": track.x[:, 0], "x2_cl": track.x[:, 1], "x3_cl": track.x[:, 2]}, [check]


def run_scenario(sc: Scenario, compare_classical: bool | None = None) -> ScenarioResult:
    """Run a scenario; errors from the numeric layer surface as ``DynamicsError``."""
    ops = standard_operators()
    try:
        res = _RUNNERS[sc.kind](sc, ops)
    except (OperatorError, FieldError) as exc:
        raise DynamicsError(str(exc)) from None
    if compare_classical or (compare_classical is None and sc.compare_classical):
        cols, checks = classical_columns(sc, res.trajectory)
        res.columns.update(cols)
        res.checks.extend(checks)
    if not res.status:
        res.status = "pass" if all(c["passed"] for c in res.checks) else "fail"
    return res


def environment() -> dict:
    import scipy
    import sympy

    return {
        "spintempo": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "sympy": sympy.__version__,
    }
