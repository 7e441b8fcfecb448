"""Point-particle geodesics and their proper time at linear order in h."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from ..geometry import AdmissibilityError, MetricModel
from ..geometry.frame import frame_at
from .evolve import DynamicsError


@dataclass(frozen=True)
class ClassicalTrack:
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    tau: np.ndarray

    @property
    def rate(self) -> np.ndarray:
        """d tau_cl / dt at the samples."""
        return np.gradient(self.tau, self.t)


def _rhs(model: MetricModel):
    def f(t, y):
        x, v = y[:3], y[3:6]
        fd = frame_at(model, x)
        G = fd.christoffel
        u = np.concatenate([[1.0], v])
        quad = np.einsum("lnm,n,m->l", G, u, u)
        acc = -quad[1:] + quad[0] * v
        rate = np.sqrt(max(u @ fd.metric @ u, 0.0))
        return np.concatenate([v, acc, [rate]])

    return f


def classical_proper_time(model: MetricModel, x0, v0, duration: float, samples: int = 201, rtol: float = 1e-10) -> ClassicalTrack:
    """Integrate the coordinate-time geodesic equations with RK45.

    d^2 x^i/dt^2 = -G^i_{mn} u^m u^n + G^0_{mn} u^m u^n v^i with u = (1, v),
    and tau_cl = integral of sqrt(g_{mn} u^m u^n) dt.
    """
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    model.require_admissible(x0)
    t_eval = np.linspace(0.0, duration, samples)

    def leave(t, y):
        return 1.0 if model.admissible(y[:3])[0] else -1.0

    leave.terminal = True
    try:
        sol = solve_ivp(
            _rhs(model), (0.0, duration), np.concatenate([x0, v0, [0.0]]),
            method="RK45", t_eval=t_eval, rtol=rtol, atol=1e-12, events=leave,
        )
    except AdmissibilityError as exc:
        # a trial stage stepped outside before the event fired
        raise DynamicsError(f"classical trajectory left the admissible region: {exc}") from None
    if sol.status == 1 or not sol.success:
        raise DynamicsError(f"classical trajectory left the admissible region near t={sol.t[-1]:.4g}")
    return ClassicalTrack(sol.t, sol.y[:3].T, sol.y[3:6].T, sol.y[6])
