"""Wavepacket preparation, time stepping and proper-time accumulation."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from ..fw import velocity_operator
from ..geometry import MetricModel
from ..opcore import OperatorExpr
from .grid import Grid, SpinorGridState, measure_weight, reduction_leak
from .library import rest_mass_part, standard_operators
from .operators import compile_operator, fft, ifft, position_expectation

SUPPORT_WIDTHS = 6.0
MAX_PHASE_PER_CELL = np.pi / 4
RK4_STABILITY = 2.8  # just inside the imaginary-axis limit 2*sqrt(2)


class DynamicsError(RuntimeError):
    pass


class WavepacketError(DynamicsError, ValueError):
    pass


class StabilityError(DynamicsError):
    pass


class SolverError(DynamicsError):
    pass


class BoundaryError(DynamicsError):
    pass


def _per_axis(value, d: int, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        arr = np.full(d, float(arr[0]))
    if arr.size != d:
        raise WavepacketError(f"{name} needs 1 or {d} entries, got {arr.size}")
    return arr


def spinor(direction) -> np.ndarray:
    """(cos(theta/2), e^{i phi} sin(theta/2)) for the unit vector along ``direction``."""
    n = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(n)
    if n.shape != (3,) or norm == 0:
        raise WavepacketError(f"spin direction must be a nonzero 3-vector, got {direction}")
    n = n / norm
    theta = np.arccos(np.clip(n[2], -1, 1))
    phi = np.arctan2(n[1], n[0])
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def init_wavepacket(
    grid: Grid,
    model: MetricModel,
    mass: float,
    center,
    width,
    k=0.0,
    spin=(0.0, 0.0, 1.0),
    margin_cells: int = 2,
) -> SpinorGridState:
    """Gaussian packet exp(-(x-x0)^2/(4w^2) + i k.x) times a spin state.

    ``center``, ``width`` and ``k`` refer to the active axes.  The packet must
    fit ``SUPPORT_WIDTHS`` widths either side of its center inside the grid
    (less ``margin_cells``), and ``|k_i| dx_i`` may not exceed pi/4.
    """
    d = grid.dim
    x0, w, kv = _per_axis(center, d, "center"), _per_axis(width, d, "width"), _per_axis(k, d, "k")
    if np.any(w <= 0):
        raise WavepacketError("widths must be positive")
    for a in range(d):
        h = grid.spacing[a]
        lo = grid.lo[a] + margin_cells * h
        hi = grid.hi[a] - (margin_cells + 1) * h
        if x0[a] - SUPPORT_WIDTHS * w[a] < lo or x0[a] + SUPPORT_WIDTHS * w[a] > hi:
            raise WavepacketError(
                f"axis x{grid.axes[a]}: support [{x0[a] - SUPPORT_WIDTHS * w[a]:.4g}, "
                f"{x0[a] + SUPPORT_WIDTHS * w[a]:.4g}] leaves the grid [{lo:.4g}, {hi:.4g}]"
            )
        if abs(kv[a]) * h > MAX_PHASE_PER_CELL:
            raise WavepacketError(f"axis x{grid.axes[a]}: |k| dx = {abs(kv[a]) * h:.3g} exceeds pi/4; refine the grid")
    xs = [grid.coords[axis - 1] for axis in grid.axes]
    phase = sum(-((x - c) ** 2) / (4 * ww**2) + 1j * kk * x for x, c, ww, kk in zip(xs, x0, w, kv))
    env = np.exp(phase)
    psi = spinor(spin)[:, None] * env.reshape(1, -1)
    psi = psi.reshape((2,) + grid.n)
    weight = measure_weight(model, grid)
    state = SpinorGridState(grid, model, float(mass), psi, weight, 0.0)
    return state.with_psi(psi / np.sqrt(state.norm))


@dataclass
class Trajectory:
    """Samples of an evolution.  ``tempo`` is complex; tau uses its real part."""

    t: np.ndarray
    tempo: np.ndarray
    norm: np.ndarray
    x: np.ndarray
    v: np.ndarray
    tau: np.ndarray
    final: SpinorGridState
    metadata: dict = field(default_factory=dict)
    observables: dict = field(default_factory=dict)

    CSV_HEADER = ("t", "tau", "tempo_re", "tempo_im", "norm", "x1", "x2", "x3", "v1", "v2", "v3")

    def rows(self):
        for i in range(len(self.t)):
            yield (
                self.t[i],
                self.tau[i],
                self.tempo[i].real,
                self.tempo[i].imag,
                self.norm[i],
                *self.x[i],
                *self.v[i],
            )

    def to_csv(self, path, extra_columns: dict | None = None):
        header = list(self.CSV_HEADER)
        extra = extra_columns or {}
        header += list(extra)
        with open(path, "w") as fh:
            fh.write(",".join(header) + "\n")
            for i, row in enumerate(self.rows()):
                vals = list(row) + [extra[c][i] for c in extra]
                fh.write(",".join(f"{v:.17g}" for v in vals) + "\n")


def _cumtrapz(t, rate) -> np.ndarray:
    tau = np.zeros_like(t)
    if len(t) > 1:
        tau[1:] = np.cumsum(0.5 * (rate[1:] + rate[:-1]) * np.diff(t))
    return tau


def proper_time(traj, tempo=None) -> np.ndarray:
    """tau(t) = integral of Re<T> dt by the trapezoid rule, tau(t0) = 0.

    Accepts a ``Trajectory`` or arrays ``(t, tempo)``.  The local error per
    interval is dt^3 |d^2<T>/dt^2| / 12, so the global error is O(dt^2).
    """
    t = traj.t if tempo is None else traj
    tempo = traj.tempo if tempo is None else tempo
    t = np.asarray(t, dtype=float)
    if len(t) > 2:
        dt = np.diff(t)
        if not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
            raise ValueError("proper_time needs uniformly spaced samples")
    return _cumtrapz(t, np.real(np.asarray(tempo)))


def spectral_radius(op, shape, iters: int = 30, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    lam = 0.0
    for _ in range(iters):
        w = op.apply(v)
        lam = np.linalg.norm(w) / np.linalg.norm(v)
        v = w / np.linalg.norm(w)
    return float(lam)


class _Stepper:
    def __init__(self, state: SpinorGridState, H: OperatorExpr, dt: float, scheme: str, rtol: float):
        self.grid = state.grid
        self.shape = state.psi.shape
        self.dt = dt
        self.scheme = scheme
        self.rtol = rtol
        self.op = compile_operator(H, state.grid, state.model, state.mass)
        self.iterations = []
        if scheme == "cn":
            ksq = sum(k**2 for k in self.grid.wavenumbers)
            self._precond = 1.0 / (1 + 0.5j * dt * ksq / (2 * state.mass))
            n = state.psi.size
            self._A = LinearOperator((n, n), matvec=self._lhs, dtype=complex)
            self._M = LinearOperator((n, n), matvec=self._prec, dtype=complex)
        elif scheme != "rk4":
            raise ValueError(f"unknown scheme {scheme!r}; use 'cn' or 'rk4'")

    def _H(self, v):
        return self.op.apply(v.reshape(self.shape))

    def _lhs(self, v):
        return (v.reshape(self.shape) + 0.5j * self.dt * self._H(v)).ravel()

    def _prec(self, v):
        axes = tuple(range(1, self.grid.dim + 1))
        return ifft(self._precond * fft(v.reshape(self.shape), axes), axes).ravel()

    def step(self, psi):
        if self.scheme == "rk4":
            f = lambda y: -1j * self.op.apply(y)  # noqa: E731
            k1 = f(psi)
            k2 = f(psi + 0.5 * self.dt * k1)
            k3 = f(psi + 0.5 * self.dt * k2)
            k4 = f(psi + self.dt * k3)
            return psi + self.dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        rhs = (psi - 0.5j * self.dt * self.op.apply(psi)).ravel()
        count = [0]

        def cb(_):
            count[0] += 1

        x, info = gmres(
            self._A, rhs, x0=psi.ravel(), rtol=self.rtol, atol=0.0, M=self._M,
            restart=40, maxiter=50, callback=cb, callback_type="pr_norm",
        )
        if info != 0:
            raise SolverError(f"GMRES did not reach rtol={self.rtol:g} (info={info})")
        self.iterations.append(count[0])
        return x.reshape(self.shape)


def evolve(
    state: SpinorGridState,
    H: OperatorExpr,
    dt: float,
    n_steps: int,
    *,
    scheme: str = "cn",
    record_every: int = 1,
    tempo: OperatorExpr | None = None,
    velocities=None,
    rtol: float = 1e-12,
    support_tol: float = 1e-8,
    support_cells: int = 2,
    observables: dict | None = None,
) -> Trajectory:
    """Integrate i d_t psi = H psi and record tempo, norm, position and velocity.

    ``H`` is a two-component Hamiltonian; its field-free ``m`` term is split
    off as the global phase exp(-i m t) and not stepped.  The default scheme
    is Crank-Nicolson (unconditionally stable, second order) solved by
    preconditioned GMRES; ``"rk4"`` requires dt * rho(H) <= 2.8.

    ``observables`` maps names to callables ``f(state) -> complex`` sampled
    alongside the built-in records and returned in ``Trajectory.observables``.
    """
    if dt <= 0 or n_steps < 0 or record_every < 1:
        raise ValueError("need dt > 0, n_steps >= 0 and record_every >= 1")
    ops = standard_operators()
    tempo = ops["T"] if tempo is None else tempo
    if velocities is None:
        velocities = [velocity_operator(H, i) for i in (1, 2, 3)]
    rest = rest_mass_part(H)
    H_step = H - rest
    stepper = _Stepper(state, H_step, dt, scheme, rtol)
    rho = spectral_radius(stepper.op, state.psi.shape)
    if scheme == "rk4" and dt * rho > RK4_STABILITY:
        raise StabilityError(f"RK4 needs dt * rho(H) <= {RK4_STABILITY}; got {dt * rho:.3g} (rho ~ {rho:.3g})")

    observables = dict(observables or {})
    samples = {"t": [], "tempo": [], "norm": [], "x": [], "v": []}
    extra = {name: [] for name in observables}
    vel_imag = 0.0
    tempo_c = compile_operator(tempo, state.grid, state.model, state.mass)
    vel_c = [compile_operator(v, state.grid, state.model, state.mass) for v in velocities]

    def record(s: SpinorGridState):
        nonlocal vel_imag
        bp = s.boundary_probability(support_cells)
        if bp > support_tol:
            raise BoundaryError(
                f"t={s.t:.6g}: probability {bp:.3g} within {support_cells} cells of the boundary exceeds {support_tol:g}"
            )
        nrm = s.norm
        samples["t"].append(s.t)
        samples["norm"].append(nrm)
        samples["tempo"].append(s.inner(s.psi, tempo_c.apply(s.psi)) / nrm)
        vs = [s.inner(s.psi, c.apply(s.psi)) / nrm for c in vel_c]
        vel_imag = max(vel_imag, max(abs(v.imag) for v in vs))
        samples["v"].append([v.real for v in vs])
        samples["x"].append(position_expectation(s))
        for name, f in observables.items():
            extra[name].append(f(s))

    wall = time.perf_counter()
    s = state
    record(s)
    psi = s.psi
    for n in range(1, n_steps + 1):
        psi = stepper.step(psi)
        if n % record_every == 0 or n == n_steps:
            s = state.with_psi(psi, state.t + n * dt)
            record(s)
    s = state.with_psi(psi, state.t + n_steps * dt)
    t = np.array(samples["t"])
    tempo_arr = np.array(samples["tempo"])
    meta = {
        "scheme": scheme,
        "dt": dt,
        "steps": n_steps,
        "record_every": record_every,
        "rtol": rtol,
        "mass": state.mass,
        "rest_phase_rate": state.mass if rest else 0.0,
        "spectral_radius": rho,
        "dt_times_radius": dt * rho,
        "solver_iterations_max": max(stepper.iterations, default=0),
        "max_norm_drift_per_step": _max_drift(samples["norm"], record_every),
        "max_imag_velocity": vel_imag,
        "max_imag_tempo": float(np.max(np.abs(tempo_arr.imag))) if len(tempo_arr) else 0.0,
        "reduction_leak": reduction_leak(state.model, state.grid),
        "wall_seconds": time.perf_counter() - wall,
        "grid": {"axes": state.grid.axes, "lo": state.grid.lo, "hi": state.grid.hi, "n": state.grid.n},
    }
    tau = _cumtrapz(t, tempo_arr.real)
    return Trajectory(
        t, tempo_arr, np.array(samples["norm"]), np.array(samples["x"]), np.array(samples["v"]), tau, s, meta,
        {name: np.array(vals) for name, vals in extra.items()},
    )


def _max_drift(norms, record_every) -> float:
    if len(norms) < 2:
        return 0.0
    return float(np.max(np.abs(np.diff(norms))) / record_every)
