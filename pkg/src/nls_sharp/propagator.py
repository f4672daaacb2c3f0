"""Strang split-step time integration.

One step is ``P(dt/2) K(dt) P(dt/2)`` where ``P`` rotates the phase by the
potential plus the nonlinearity (exact, since ``|u|`` is invariant under it)
and ``K`` is the exact discrete free flow applied in Fourier space.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .grid import Grid, WaveField
from .potentials import Potential, self_adjointness_guard

log = logging.getLogger(__name__)


class GuardRejected(ValueError):
    """The potential fails the self-adjointness guard."""


class BlowupDetected(RuntimeError):
    """Evolution stopped because the solution collapsed.

    ``trajectory`` holds everything recorded up to ``t``.
    """

    def __init__(self, t: float, reason: str, trajectory: "Trajectory | None" = None):
        super().__init__(f"blow-up detected at t={t:.6g}: {reason}")
        self.t = t
        self.reason = reason
        self.trajectory = trajectory


@dataclass(frozen=True)
class SimulationParams:
    lam: float = 0.0
    sigma: float = 1.0
    dt: float = 1e-3
    T: float = 1.0
    record_every: int = 10
    # blow-up sentinels
    amplitude_factor: float = 1e6
    resolution_tol: float = 1e-4

    def __post_init__(self):
        if not math.isfinite(self.lam):
            raise ValueError("lambda must be finite")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not self.dt > 0 or not self.T > 0:
            raise ValueError("dt and T must be positive")
        if self.dt > self.T:
            raise ValueError("dt must not exceed T")
        if int(self.record_every) < 1:
            raise ValueError("record_every must be a positive integer")


@dataclass
class Trajectory:
    times: np.ndarray
    snapshots: list[WaveField]
    diagnostics: list = field(default_factory=list)
    params: SimulationParams | None = None
    potential: Potential | None = None
    blowup: BlowupDetected | None = None

    @property
    def final(self) -> WaveField:
        return self.snapshots[-1]


class SplitStepper:
    """Precomputed propagator for repeated Strang steps of a fixed size."""

    def __init__(self, grid: Grid, potential: Potential, lam: float, sigma: float, dt: float):
        self.grid = grid
        self.lam = float(lam)
        self.sigma = float(sigma)
        self.dt = float(dt)
        self.V = np.ascontiguousarray(potential.value(grid.points).reshape(-1), dtype=float)
        self.kinetic = np.exp(-0.5j * self.dt * grid.k2)
        self.last_tail = 0.0

    def half_phase(self, u: np.ndarray) -> None:
        kernels.phase_rotate(u.reshape(-1), self.V, self.lam, self.sigma, 0.5 * self.dt)

    def kinetic_step(self, u: np.ndarray, measure_tail: bool = False) -> np.ndarray:
        uhat = self.grid.fft(u)
        if measure_tail:
            p = np.abs(uhat) ** 2
            total = p.sum()
            self.last_tail = float(p[self.grid.high_band].sum() / total) if total > 0 else 0.0
        uhat *= self.kinetic
        return np.ascontiguousarray(self.grid.ifft(uhat))

    def step(self, u: np.ndarray, measure_tail: bool = False) -> np.ndarray:
        """Advance a contiguous complex array by one step (modified in place where possible)."""
        self.half_phase(u)
        u = self.kinetic_step(u, measure_tail)
        self.half_phase(u)
        return u


def strang_step(u: WaveField, p: Potential, params: SimulationParams, dt: float) -> WaveField:
    """One Strang step of size ``dt`` (negative ``dt`` runs backward)."""
    if dt == 0:
        raise ValueError("dt must be nonzero")
    stepper = SplitStepper(u.grid, p, params.lam, params.sigma, dt)
    vals = np.array(u.values, dtype=complex, order="C")
    return WaveField(u.grid, stepper.step(vals))


def _boundary_amplitude(grid: Grid, values: np.ndarray) -> float:
    a = np.abs(values)
    edge = 0.0
    for j in range(grid.d):
        edge = max(edge, float(np.take(a, 0, axis=j).max()), float(np.take(a, -1, axis=j).max()))
    return edge


def evolve(
    u0: WaveField,
    p: Potential,
    params: SimulationParams,
    *,
    keep_snapshots: bool = True,
    diagnostics: bool = True,
    check_boundary: bool = True,
) -> Trajectory:
    """Run ``ceil(T/dt)`` Strang steps, recording every ``record_every`` steps.

    The last step is shortened so the run ends exactly at ``T``.  Raises
    :class:`BlowupDetected` (carrying the partial trajectory) when the field
    becomes non-finite, its amplitude exceeds ``amplitude_factor`` times the
    initial one, or more than ``resolution_tol`` of the mass sits in the top
    third of the spectrum.
    """
    from .norms import diagnostics_row

    verdict = self_adjointness_guard(p)
    if not verdict.accepted:
        raise GuardRejected(verdict.reason)
    grid = u0.grid
    u = np.array(u0.values, dtype=complex, order="C")
    amp0 = float(np.abs(u).max())
    if check_boundary and amp0 > 0 and _boundary_amplitude(grid, u) > 1e-8 * amp0:
        raise ValueError("initial field is not negligible at the box boundary; enlarge L")

    n_steps = max(1, math.ceil(params.T / params.dt - 1e-9))
    stride = int(params.record_every)
    stepper = SplitStepper(grid, p, params.lam, params.sigma, params.dt)
    last_dt = params.T - (n_steps - 1) * params.dt
    last = stepper if abs(last_dt - params.dt) < 1e-14 else SplitStepper(grid, p, params.lam, params.sigma, last_dt)

    traj = Trajectory(np.array([0.0]), [u0] if keep_snapshots else [], [], params, p)
    times = [0.0]
    if diagnostics:
        traj.diagnostics.append(diagnostics_row(u0, p, params.lam, params.sigma, 0.0))
    if not keep_snapshots:
        traj.snapshots = []

    def record(t: float, vals: np.ndarray) -> None:
        times.append(t)
        f = WaveField(grid, vals.copy())
        if keep_snapshots:
            traj.snapshots.append(f)
        if diagnostics:
            traj.diagnostics.append(diagnostics_row(f, p, params.lam, params.sigma, t))

    t = 0.0
    for n in range(1, n_steps + 1):
        st = last if n == n_steps else stepper
        u = st.step(u, measure_tail=True)
        t = params.T if n == n_steps else n * params.dt
        reason = None
        amp = float(np.abs(u).max())
        if not np.isfinite(amp):
            reason = "non-finite field"
        elif amp > params.amplitude_factor * amp0:
            reason = f"amplitude {amp:.3g} exceeds {params.amplitude_factor:g} x initial"
        elif st.last_tail > params.resolution_tol:
            reason = f"spectral tail fraction {st.last_tail:.3g} exceeds {params.resolution_tol:g} (collapse below grid scale)"
        if reason is not None:
            traj.times = np.array(times)
            if not keep_snapshots:
                traj.snapshots = []
            exc = BlowupDetected(t, reason, traj)
            traj.blowup = exc
            log.info("%s", exc)
            raise exc
        if n % stride == 0 or n == n_steps:
            record(t, u)
    traj.times = np.array(times)
    if not keep_snapshots:
        traj.snapshots = [WaveField(grid, u)]
    return traj
