"""Periodic spatial grids and two-component spinor states."""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from ..geometry import MetricModel


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid over the ``axes`` subset of (1, 2, 3).

    Coordinates along absent axes are held at ``offsets[axis - 1]``.  The
    last point of each axis sits one spacing before ``hi`` (periodic seam).
    """

    axes: tuple
    lo: tuple
    hi: tuple
    n: tuple
    offsets: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.axes or sorted(set(self.axes)) != list(self.axes) or not set(self.axes) <= {1, 2, 3}:
            raise GridError(f"axes must be an increasing subset of (1, 2, 3), got {self.axes}")
        d = len(self.axes)
        if not (len(self.lo) == len(self.hi) == len(self.n) == d):
            raise GridError("lo, hi and n need one entry per active axis")
        if any(b <= a for a, b in zip(self.lo, self.hi)) or any(k < 4 for k in self.n):
            raise GridError("each axis needs hi > lo and at least 4 points")
        if len(self.offsets) != 3:
            raise GridError("offsets must list all three coordinates")

    @classmethod
    def build(cls, axes, lo, hi, n, offsets=(0.0, 0.0, 0.0)) -> "Grid":
        return cls(
            tuple(int(a) for a in axes),
            tuple(float(v) for v in lo),
            tuple(float(v) for v in hi),
            tuple(int(v) for v in n),
            tuple(float(v) for v in offsets),
        )

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return self.n

    @cached_property
    def spacing(self) -> tuple:
        return tuple((b - a) / k for a, b, k in zip(self.lo, self.hi, self.n))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @cached_property
    def axis_coords(self) -> tuple:
        return tuple(a + h * np.arange(k) for a, h, k in zip(self.lo, self.spacing, self.n))

    @cached_property
    def coords(self) -> tuple:
        """Broadcast coordinate arrays x1, x2, x3 (absent axes are constants)."""
        mesh = np.meshgrid(*self.axis_coords, indexing="ij")
        out = []
        for axis in (1, 2, 3):
            if axis in self.axes:
                out.append(mesh[self.axes.index(axis)])
            else:
                out.append(np.full(self.n, self.offsets[axis - 1]))
        return tuple(out)

    @cached_property
    def points(self) -> np.ndarray:
        return np.stack(self.coords, axis=-1)

    @cached_property
    def wavenumbers(self) -> tuple:
        """Broadcast angular wavenumber arrays for the active axes."""
        ks = [2 * np.pi * np.fft.fftfreq(k, d=h) for k, h in zip(self.n, self.spacing)]
        return tuple(np.meshgrid(*ks, indexing="ij"))

    @cached_property
    def odd_wavenumbers(self) -> tuple:
        """As ``wavenumbers`` with the unpaired Nyquist mode zeroed (for odd derivative orders)."""
        out = []
        for k, n in zip(self.wavenumbers, self.n):
            k = k.copy()
            if n % 2 == 0:
                # fftfreq puts the Nyquist frequency at the most negative value
                k[k == k.min()] = 0.0
            out.append(k)
        return tuple(out)

    def derivative_multiplier(self, counts) -> np.ndarray:
        """Fourier multiplier of the monomial with ``counts`` per active axis."""
        factor = np.ones(self.n, dtype=complex)
        for k, k_odd, c in zip(self.wavenumbers, self.odd_wavenumbers, counts):
            if c:
                factor = factor * (1j * (k_odd if c % 2 else k)) ** c
        return factor

    def axis_position(self, axis: int) -> int | None:
        return self.axes.index(axis) if axis in self.axes else None


@dataclass(frozen=True, eq=False)
class SpinorGridState:
    """Two-component spinor ``psi[s, ...]`` on a grid, at time ``t``.

    ``weight`` samples the curved measure sqrt(-3g) on the grid.
    """

    grid: Grid
    model: MetricModel
    mass: float
    psi: np.ndarray
    weight: np.ndarray
    t: float = 0.0

    def with_psi(self, psi: np.ndarray, t: float | None = None) -> "SpinorGridState":
        return replace(self, psi=psi, t=self.t if t is None else t)

    def inner(self, a: np.ndarray, b: np.ndarray) -> complex:
        return complex(np.sum(self.weight * np.sum(np.conj(a) * b, axis=0)) * self.grid.cell_volume)

    @property
    def norm(self) -> float:
        return self.inner(self.psi, self.psi).real

    def density(self) -> np.ndarray:
        return self.weight * np.sum(np.abs(self.psi) ** 2, axis=0)

    def boundary_probability(self, cells: int = 2) -> float:
        """Probability within ``cells`` cells of any grid edge."""
        rho = self.density() * self.grid.cell_volume
        mask = np.zeros(self.grid.n, dtype=bool)
        for ax in range(self.grid.dim):
            idx = [slice(None)] * self.grid.dim
            idx[ax] = np.r_[0:cells, self.grid.n[ax] - cells : self.grid.n[ax]]
            mask[tuple(idx)] = True
        return float(rho[mask].sum() / rho.sum())


def measure_weight(model: MetricModel, grid: Grid) -> np.ndarray:
    """sqrt(-3g) = 1 + h/2 - phi = 1 - (h11 + h22 + h33)/2 at linear order."""
    pts = grid.points
    return 1 + 0.5 * model.base_value("h", pts) - model.base_value("phi", pts)


def reduction_leak(model: MetricModel, grid: Grid) -> float:
    """max |d_a h_{mu nu}| on the grid over the absent axes ``a``.

    Dropping derivatives along an absent axis keeps operators self-adjoint
    only where the fields do not vary along it; this measures the violation.
    """
    pts = grid.points
    leak = 0.0
    for axis in (1, 2, 3):
        if axis in grid.axes:
            continue
        d = [0, 0, 0]
        d[axis - 1] = 1
        for (mu, nu) in model.components:
            leak = max(leak, float(np.max(np.abs(model.value(mu, nu, pts, d)))))
    return leak
