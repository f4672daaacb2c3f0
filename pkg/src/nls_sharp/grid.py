"""Periodic tensor grid, unitary FFT helpers and quadrature.

The whole space is replaced by the box ``[-L, L)^d`` with periodic boundary
conditions; every field lives on the uniform sample points of that box.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


class GridMismatch(ValueError):
    """Two fields sampled on different grids were combined."""


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-L, L)^d`` with ``N`` points per axis.

    Use :func:`make_grid` to build one; it validates the arguments.
    """

    d: int
    L: float
    N: int

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def cell_volume(self) -> float:
        return self.dx**self.d

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.d

    @property
    def size(self) -> int:
        return self.N**self.d

    @cached_property
    def axis(self) -> np.ndarray:
        """Sample coordinates along one axis, ``x_i = -L + i dx``."""
        return -self.L + self.dx * np.arange(self.N)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers ``pi j / L`` in FFT ordering."""
        return 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.dx)

    @cached_property
    def points(self) -> np.ndarray:
        """Coordinates of every sample, shape ``(d, N, ..., N)``."""
        return np.stack(np.meshgrid(*([self.axis] * self.d), indexing="ij"))

    @cached_property
    def k(self) -> np.ndarray:
        """Wavevector components on the spectral grid, shape ``(d, N, ..., N)``."""
        return np.stack(np.meshgrid(*([self.wavenumbers] * self.d), indexing="ij"))

    @cached_property
    def k2(self) -> np.ndarray:
        return np.sum(self.k**2, axis=0)

    @cached_property
    def k_derivative(self) -> np.ndarray:
        """Wavevector used for first derivatives: Nyquist mode zeroed."""
        kd = self.k.copy()
        nyq = -self.N // 2
        for j in range(self.d):
            idx = [slice(None)] * self.d
            idx[j] = nyq
            kd[(j, *idx)] = 0.0
        return kd

    @cached_property
    def high_band(self) -> np.ndarray:
        """Mask of modes with some ``|k_j|`` above two thirds of the Nyquist wavenumber."""
        kmax = np.pi / self.dx
        return np.any(np.abs(self.k) > (2.0 / 3.0) * kmax, axis=0)

    def fft(self, values: np.ndarray) -> np.ndarray:
        return np.fft.fftn(values, axes=self._axes, norm="ortho")

    def ifft(self, values: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(values, axes=self._axes, norm="ortho")

    @property
    def _axes(self) -> tuple[int, ...]:
        return tuple(range(-self.d, 0))


def make_grid(d: int, L: float, N: int) -> Grid:
    """Build a periodic grid, rejecting unsupported dimensions and sizes."""
    if d not in (1, 2):
        raise ValueError(f"dimension must be 1 or 2, got {d}")
    if not (isinstance(N, (int, np.integer)) and _is_power_of_two(int(N)) and N >= 8):
        raise ValueError(f"points per axis must be a power of two >= 8, got {N}")
    if not (np.isfinite(L) and L > 0):
        raise ValueError(f"half width must be positive, got {L}")
    return Grid(int(d), float(L), int(N))


@dataclass(frozen=True, eq=False)
class WaveField:
    """Complex samples of a wave function on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.shape:
            raise ValueError(f"field shape {vals.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: Grid, func) -> "WaveField":
        """Sample ``func(*coords)`` on the grid."""
        return cls(grid, func(*grid.points))

    def with_values(self, values: np.ndarray) -> "WaveField":
        return WaveField(self.grid, values)

    def __repr__(self):
        return f"WaveField(grid={self.grid!r})"


def _check_same_grid(f: WaveField, g: WaveField) -> None:
    if f.grid != g.grid:
        raise GridMismatch(f"{f.grid} != {g.grid}")


def spectral_gradient(f: WaveField) -> list[WaveField]:
    """Spectral partial derivatives of ``f``, one field per axis."""
    return [WaveField(f.grid, comp) for comp in gradient_array(f.grid, f.values)]


def gradient_array(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Array form of :func:`spectral_gradient`, shape ``(d, N, ..., N)``."""
    vhat = grid.fft(values)
    return np.stack([grid.ifft(1j * kj * vhat) for kj in grid.k_derivative])


def integrate(grid: Grid, density: np.ndarray) -> float:
    """Rectangle rule, which is the trapezoidal rule on a periodic grid."""
    return float(np.sum(density) * grid.cell_volume)


def l2_norm(f: WaveField) -> float:
    return float(np.sqrt(integrate(f.grid, np.abs(f.values) ** 2)))


def inner_product(f: WaveField, g: WaveField) -> complex:
    """``<f, g> = sum conj(f) g dx^d`` (conjugate-linear in ``f``)."""
    _check_same_grid(f, g)
    return complex(np.vdot(f.values, g.values) * f.grid.cell_volume)
