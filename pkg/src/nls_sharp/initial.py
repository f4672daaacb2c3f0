"""Initial data: Gaussians, slowly decaying profiles and smooth truncations."""
from __future__ import annotations

from typing import Any, Mapping

import numpy as np

from .grid import Grid, WaveField


def smooth_cutoff(s) -> np.ndarray:
    """C-infinity function of ``|s|``: 1 for ``|s| <= 1``, 0 for ``|s| >= 2``."""
    s = np.abs(np.asarray(s, dtype=float))

    def bump(q):
        out = np.zeros_like(q)
        pos = q > 0
        out[pos] = np.exp(-1.0 / q[pos])
        return out

    z = np.clip(s - 1.0, 0.0, 1.0)
    left, right = bump(1.0 - z), bump(z)
    return left / (left + right)


def gaussian(grid: Grid, width: float = 1.0, center=0.0, momentum=0.0, amplitude: float | None = None) -> WaveField:
    """``A exp(-|x-c|^2 / (2 w^2) + i k.x)``; ``A`` defaults to the L2-normalizing value."""
    d = grid.d
    x = grid.points
    c = np.broadcast_to(np.asarray(center, dtype=float), (d,)).reshape((d,) + (1,) * d)
    k = np.broadcast_to(np.asarray(momentum, dtype=float), (d,)).reshape((d,) + (1,) * d)
    if amplitude is None:
        amplitude = (np.pi * width**2) ** (-d / 4)
    r2 = np.sum((x - c) ** 2, axis=0)
    return WaveField(grid, amplitude * np.exp(-r2 / (2 * width**2) + 1j * np.sum(k * x, axis=0)))


def soft_decay(grid: Grid, p: float = 1.0) -> np.ndarray:
    """``<x>^-p`` sampled on the grid (not necessarily negligible at the boundary)."""
    return (1.0 + np.sum(grid.points**2, axis=0)) ** (-p / 2)


def truncated(grid: Grid, inner: np.ndarray, radius: float) -> WaveField:
    r = np.sqrt(np.sum(grid.points**2, axis=0))
    return WaveField(grid, inner * smooth_cutoff(r / radius))


_IC_KEYS = {
    "gaussian": {"width", "center", "momentum", "amplitude"},
    "soft_decay": {"p", "radius"},
    "ground_state": set(),
}


def initial_from_spec(grid: Grid, spec: Mapping[str, Any]) -> WaveField:
    """Build an initial field from ``{"kind": ..., **parameters}``.

    ``soft_decay`` requires a truncation ``radius``; the untruncated profile
    does not vanish at the box edge.
    """
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in _IC_KEYS:
        raise ValueError(f"unknown initial condition {kind!r}; expected one of {sorted(_IC_KEYS)}")
    extra = set(spec) - _IC_KEYS[kind]
    if extra:
        raise ValueError(f"unknown key(s) for initial condition {kind!r}: {sorted(extra)}")
    if kind == "gaussian":
        return gaussian(grid, **spec)
    if kind == "ground_state":
        return gaussian(grid)
    if "radius" not in spec:
        raise ValueError("soft_decay needs a truncation radius")
    return truncated(grid, soft_decay(grid, spec.get("p", 1.0)), spec["radius"])
