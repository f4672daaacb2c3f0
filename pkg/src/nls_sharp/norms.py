"""Mass, energies, weighted norms and the dispersive decay ratio."""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields

import numpy as np

from .grid import Grid, WaveField, integrate
from .potentials import Potential

COLUMNS = (
    "t",
    "mass",
    "kinetic",
    "potential_energy",
    "nonlinear_energy",
    "total_E",
    "modified_E_lambda",
    "sigma_norm",
    "sigma_tilde_norm",
    "b1_norm",
    "sup_norm",
)


@dataclass(frozen=True)
class DiagnosticsRow:
    t: float
    mass: float
    kinetic: float
    potential_energy: float
    nonlinear_energy: float
    total_E: float
    modified_E_lambda: float
    sigma_norm: float
    sigma_tilde_norm: float
    b1_norm: float
    sup_norm: float

    def as_tuple(self) -> tuple[float, ...]:
        return astuple(self)


assert tuple(f.name for f in fields(DiagnosticsRow)) == COLUMNS


@dataclass(frozen=True)
class Energy:
    kinetic: float
    potential_energy: float
    nonlinear_energy: float
    total: float


def _density(f: WaveField) -> np.ndarray:
    return np.abs(f.values) ** 2


def mass(f: WaveField) -> float:
    return integrate(f.grid, _density(f))


def gradient_sq(f: WaveField) -> float:
    """``||grad f||^2`` computed in Fourier space (Parseval)."""
    fhat = f.grid.fft(f.values)
    return integrate(f.grid, f.grid.k2 * np.abs(fhat) ** 2)


def lp_norm(f: WaveField, p: float) -> float:
    if math.isinf(p):
        return float(np.abs(f.values).max())
    return integrate(f.grid, np.abs(f.values) ** p) ** (1.0 / p)


def nonlinear_energy(f: WaveField, lam: float, sigma: float) -> float:
    if lam == 0:
        return 0.0
    q = 2 * sigma + 2
    return lam / (sigma + 1) * integrate(f.grid, np.abs(f.values) ** q)


def _potential_on(grid: Grid, p: Potential) -> np.ndarray:
    return p.value(grid.points)


def _grad_v_sq(grid: Grid, p: Potential) -> np.ndarray:
    return np.sum(p.grad(grid.points) ** 2, axis=0)


def energy(u: WaveField, p: Potential, lam: float, sigma: float) -> Energy:
    kin = 0.5 * gradient_sq(u)
    pot = integrate(u.grid, _potential_on(u.grid, p) * _density(u))
    nl = nonlinear_energy(u, lam, sigma)
    return Energy(kin, pot, nl, kin + pot + nl)


def modified_energy(u: WaveField, p: Potential, lam: float, sigma: float) -> float:
    """Kinetic + nonlinear + ``int |grad V|^2 |u|^2``; the potential energy is left out."""
    return 0.5 * gradient_sq(u) + nonlinear_energy(u, lam, sigma) + integrate(
        u.grid, _grad_v_sq(u.grid, p) * _density(u)
    )


def h1_norm(u: WaveField) -> float:
    return math.sqrt(mass(u) + gradient_sq(u))


def hs_norm(u: WaveField, s: float) -> float:
    """Sobolev norm with the ``(1 + |k|^2)^(s/2)`` multiplier."""
    uhat = u.grid.fft(u.values)
    return math.sqrt(integrate(u.grid, (1.0 + u.grid.k2) ** s * np.abs(uhat) ** 2))


def sigma_norm(u: WaveField) -> float:
    """``||u||_H1 + ||x u||_L2``."""
    r2 = np.sum(u.grid.points**2, axis=0)
    return h1_norm(u) + math.sqrt(integrate(u.grid, r2 * _density(u)))


def sigma_tilde_norm(u: WaveField, p: Potential) -> float:
    """``||u||_H1 + ||u grad V||_L2``."""
    return h1_norm(u) + weight_norm(u, p)


def weight_norm(u: WaveField, p: Potential) -> float:
    """``||u grad V||_L2``."""
    return math.sqrt(integrate(u.grid, _grad_v_sq(u.grid, p) * _density(u)))


def bs_norm(u: WaveField, p: Potential, s: float) -> float:
    """Equivalent-norm surrogate ``||u||_Hs + ||V^(s/2) u||_L2`` for ``||H^(s/2) u||``.

    This is not ``||H^(s/2) u||`` itself; the two are comparable up to
    unspecified constants.  Requires ``V >= 0``.
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    if not p.nonnegative(u.grid.d):
        raise ValueError(f"{p.name} takes negative values; V^(s/2) is undefined")
    V = np.maximum(_potential_on(u.grid, p), 0.0)
    weight = V**s if s > 0 else np.ones_like(V)
    return hs_norm(u, s) + math.sqrt(integrate(u.grid, weight * _density(u)))


def diagnostics_row(u: WaveField, p: Potential, lam: float, sigma: float, t: float) -> DiagnosticsRow:
    e = energy(u, p, lam, sigma)
    m = mass(u)
    grad_sq = 2.0 * e.kinetic
    h1 = math.sqrt(m + grad_sq)
    r2 = np.sum(u.grid.points**2, axis=0)
    dens = _density(u)
    wgt = math.sqrt(integrate(u.grid, _grad_v_sq(u.grid, p) * dens))
    b1 = bs_norm(u, p, 1.0) if p.nonnegative(u.grid.d) else math.nan
    return DiagnosticsRow(
        t=float(t),
        mass=m,
        kinetic=e.kinetic,
        potential_energy=e.potential_energy,
        nonlinear_energy=e.nonlinear_energy,
        total_E=e.total,
        modified_E_lambda=e.kinetic + e.nonlinear_energy + wgt**2,
        sigma_norm=h1 + math.sqrt(integrate(u.grid, r2 * dens)),
        sigma_tilde_norm=h1 + wgt,
        b1_norm=b1,
        sup_norm=float(np.abs(u.values).max()),
    )


def dispersive_ratio(traj, u0: WaveField) -> np.ndarray:
    """Rows ``(t, ||u(t)||_inf t^(d/2) / ||u0||_L1)`` for a linear trajectory."""
    if traj.params is not None and traj.params.lam != 0:
        raise ValueError("dispersive ratio needs a linear (lambda = 0) trajectory")
    if len(traj.snapshots) != len(traj.times):
        raise ValueError("trajectory was run without snapshots")
    l1 = integrate(u0.grid, np.abs(u0.values))
    d = u0.grid.d
    out = np.empty((len(traj.times), 2))
    for i, (t, f) in enumerate(zip(traj.times, traj.snapshots)):
        out[i] = t, float(np.abs(f.values).max()) * abs(t) ** (d / 2) / l1
    return out
