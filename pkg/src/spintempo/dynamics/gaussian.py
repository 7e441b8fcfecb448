"""Quadrature expectations on an analytic one-dimensional Gaussian packet.

This evaluates operator expectations without the grid: field coefficients
come from the closed-form model and derivatives of the packet are taken
analytically, so it checks the spectral realisation independently.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from ..geometry import MetricModel
from ..geometry.frame import operator_coefficients
from ..opcore import OperatorExpr
from .evolve import spinor


def _packet_derivatives(x, x0, w, k):
    """psi, psi', psi'' for exp(-(x-x0)^2/(4w^2) + i k x) (unnormalised)."""
    psi = np.exp(-((x - x0) ** 2) / (4 * w**2) + 1j * k * x)
    a = -(x - x0) / (2 * w**2) + 1j * k
    return psi, a * psi, (a * a - 1 / (2 * w**2)) * psi


def gaussian_expectation(
    expr: OperatorExpr,
    model: MetricModel,
    mass: float,
    axis: int,
    offsets,
    center: float,
    width: float,
    k: float = 0.0,
    spin=(0.0, 0.0, 1.0),
    span: float = 10.0,
) -> complex:
    """<expr> for a packet along ``axis`` with the other coordinates fixed.

    Derivatives along the other axes act as zero, matching the dimension
    reduction of the grid.  Uses the sqrt(-3g) measure.
    """
    chi = spinor(spin)
    base = np.asarray(offsets, dtype=float)

    def point(x):
        p = base.copy()
        p[axis - 1] = x
        return p

    def integrand(x, part):
        p = point(x)
        psi, d1, d2 = _packet_derivatives(x, center, width, k)
        by_order = {0: psi, 1: d1, 2: d2}
        acc = 0.0
        for derivs, mat in operator_coefficients(expr, model, p, mass, block="upper").items():
            if any(c for a, c in enumerate(derivs) if a != axis - 1):
                continue
            acc = acc + np.conj(chi) @ mat @ chi * by_order[derivs[axis - 1]]
        weight = 1 + 0.5 * float(model.base_value("h", p)) - float(model.base_value("phi", p))
        val = weight * np.conj(psi) * acc
        return val.real if part == "re" else val.imag

    def norm_integrand(x):
        p = point(x)
        psi = _packet_derivatives(x, center, width, k)[0]
        weight = 1 + 0.5 * float(model.base_value("h", p)) - float(model.base_value("phi", p))
        return weight * abs(psi) ** 2

    lo, hi = center - span * width, center + span * width
    # absolute floor keeps quad from chasing roundoff in a vanishing imaginary part
    opts = dict(epsabs=1e-15, epsrel=1e-13, limit=200)
    norm = quad(norm_integrand, lo, hi, **opts)[0]
    re = quad(integrand, lo, hi, args=("re",), **opts)[0]
    im = quad(integrand, lo, hi, args=("im",), **opts)[0]
    return complex(re, im) / norm


def gaussian_field_average(model: MetricModel, base: str, axis: int, offsets, center: float, width: float, span: float = 10.0) -> float:
    """Measure-weighted average of a field over |psi|^2."""
    base_pt = np.asarray(offsets, dtype=float)

    def point(x):
        p = base_pt.copy()
        p[axis - 1] = x
        return p

    def rho(x):
        p = point(x)
        weight = 1 + 0.5 * float(model.base_value("h", p)) - float(model.base_value("phi", p))
        return weight * np.exp(-((x - center) ** 2) / (2 * width**2))

    lo, hi = center - span * width, center + span * width
    norm = quad(rho, lo, hi, epsrel=1e-13, epsabs=0.0)[0]
    num = quad(lambda x: rho(x) * float(model.base_value(base, point(x))), lo, hi, epsrel=1e-13, epsabs=0.0)[0]
    return num / norm
