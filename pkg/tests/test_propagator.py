import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nls_sharp.grid import WaveField, l2_norm, make_grid
from nls_sharp.initial import gaussian
from nls_sharp.norms import energy, mass
from nls_sharp.potentials import Harmonic, SoftLinear, SoftPower, Stark, Zero
from nls_sharp.propagator import (
    BlowupDetected,
    GuardRejected,
    SimulationParams,
    evolve,
    strang_step,
)


def free_gaussian_density(t, x):
    """|u|^2 for u0 = pi^(-1/4) exp(-x^2/2) under the free flow."""
    return np.exp(-(x**2) / (1 + t**2)) / np.sqrt(np.pi * (1 + t**2))


def test_free_gaussian_density(grid1d, ground_state):
    traj = evolve(ground_state, Zero(), SimulationParams(0.0, 1.0, 1e-3, 1.0, 100), diagnostics=False)
    err = np.abs(np.abs(traj.final.values) ** 2 - free_gaussian_density(1.0, grid1d.axis)).max()
    assert err < 1e-10  # free flow is exact up to round-off


def test_harmonic_ground_state_phase(ground_state):
    """The ground state picks up exp(-i t/2)."""
    T = 1.0
    traj = evolve(ground_state, Harmonic(1.0), SimulationParams(0.0, 1.0, 1e-3, T, 1000), diagnostics=False)
    expect = ground_state.values * np.exp(-0.5j * T)
    assert l2_norm(WaveField(ground_state.grid, traj.final.values - expect)) < 1e-6


def test_zero_field_stays_zero(grid1d):
    u0 = WaveField(grid1d, np.zeros(grid1d.N, dtype=complex))
    out = evolve(u0, Harmonic(1.0), SimulationParams(1.0, 1.0, 1e-2, 0.1, 1), diagnostics=False)
    assert np.all(out.final.values == 0)


def test_record_schedule_and_last_step(ground_state):
    traj = evolve(ground_state, Zero(), SimulationParams(0.0, 1.0, 0.03, 0.1, 2))
    # ceil(0.1/0.03) = 4 steps: records after step 2, step 4 (= T)
    assert traj.times.tolist() == pytest.approx([0.0, 0.06, 0.1])
    assert len(traj.snapshots) == len(traj.diagnostics) == 3
    assert traj.diagnostics[-1].t == pytest.approx(0.1)


def test_single_step_sizes(ground_state):
    p = Harmonic(1.0)
    f1 = strang_step(ground_state, p, SimulationParams(1.0, 1.0, 1e-3, 1.0), 1e-3)
    assert mass(f1) == pytest.approx(mass(ground_state), rel=1e-13)
    with pytest.raises(ValueError):
        strang_step(ground_state, p, SimulationParams(1.0, 1.0, 1e-3, 1.0), 0.0)


def test_guard_rejects_negated_soft_power(ground_state):
    with pytest.raises(GuardRejected):
        evolve(ground_state, -SoftPower(4.0), SimulationParams())


def test_boundary_check(grid1d):
    wide = gaussian(grid1d, width=6.0)
    with pytest.raises(ValueError, match="boundary"):
        evolve(wide, Zero(), SimulationParams(T=0.01))


@pytest.mark.parametrize(
    "kwargs",
    [dict(dt=0.0), dict(dt=-1e-3), dict(T=0.0), dict(sigma=0.0), dict(record_every=0), dict(lam=float("nan"))],
)
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        SimulationParams(**kwargs)


def test_blowup_sentinel_carries_trajectory():
    grid = make_grid(1, 16.0, 1024)
    u0 = gaussian(grid, amplitude=3.0)
    with pytest.raises(BlowupDetected) as info:
        evolve(u0, Zero(), SimulationParams(-1.0, 2.0, 1e-3, 2.0, 10))
    exc = info.value
    assert 0 < exc.t < 2.0
    assert exc.trajectory is not None and exc.trajectory.blowup is exc
    assert len(exc.trajectory.times) == len(exc.trajectory.diagnostics) >= 1


@pytest.mark.parametrize("p", [Zero(), Harmonic(1.0), Stark(1.0), SoftLinear(), SoftPower(3.0)], ids=lambda p: p.name)
@pytest.mark.parametrize("lam", [-1.0, 1.0])
def test_reversibility(ground_state, p, lam):
    params = SimulationParams(lam, 1.0, 1e-3, 1.0)
    u = ground_state
    for _ in range(50):
        u = strang_step(u, p, params, 1e-3)
    for _ in range(50):
        u = strang_step(u, p, params, -1e-3)
    diff = WaveField(u.grid, u.values - ground_state.values)
    assert l2_norm(diff) < 1e-12


@settings(max_examples=15, deadline=None)
@given(
    st.sampled_from([Zero(), Harmonic(1.0), Stark(0.5), SoftLinear(), SoftPower(3.0)]),
    st.sampled_from([-1.0, 0.0, 1.0]),
    st.floats(0.5, 1.5),
    st.floats(-1.0, 1.0),
)
def test_mass_invariant(p, lam, width, k0):
    grid = make_grid(1, 16.0, 512)
    u0 = gaussian(grid, width=width, momentum=k0)
    traj = evolve(u0, p, SimulationParams(lam, 1.0, 1e-2, 0.5, 10), keep_snapshots=False)
    m = np.array([r.mass for r in traj.diagnostics])
    assert np.abs(m - m[0]).max() / m[0] < 1e-12


def _energy_drift(u0, p, lam, dt, T=1.0):
    traj = evolve(u0, p, SimulationParams(lam, 1.0, dt, T, 10), keep_snapshots=False)
    e = np.array([r.total_E for r in traj.diagnostics])
    return np.abs(e - e[0]).max() / abs(e[0])


@pytest.mark.parametrize("p,lam", [(Harmonic(1.0), 1.0), (SoftPower(3.0), -1.0)], ids=["harmonic+", "softpower-"])
def test_energy_drift_is_second_order(ground_state, p, lam):
    e1 = _energy_drift(ground_state, p, lam, 1e-2)
    e2 = _energy_drift(ground_state, p, lam, 5e-3)
    assert 3.0 < e1 / e2 < 5.0


def test_solution_error_is_second_order(ground_state):
    p, T = Harmonic(1.0), 1.0
    ref = evolve(ground_state, p, SimulationParams(1.0, 1.0, 1.25e-3 / 2, T, 10**6), diagnostics=False).final
    errs = []
    for dt in (0.04, 0.02, 0.01):
        u = evolve(ground_state, p, SimulationParams(1.0, 1.0, dt, T, 10**6), diagnostics=False).final
        errs.append(l2_norm(WaveField(ref.grid, u.values - ref.values)))
    for a, b in zip(errs, errs[1:]):
        assert a / b == pytest.approx(4.0, rel=0.1)


def test_free_flow_commutes_with_translation(grid1d):
    u0 = gaussian(grid1d, center=-1.0, momentum=0.5)
    shifted = WaveField(grid1d, np.roll(u0.values, 64))
    params = SimulationParams(1.0, 1.0, 1e-2, 0.5, 10**6)
    a = evolve(u0, Zero(), params, diagnostics=False).final.values
    b = evolve(shifted, Zero(), params, diagnostics=False).final.values
    np.testing.assert_allclose(np.roll(a, 64), b, atol=1e-12)


def test_stark_momentum_kick(grid1d, ground_state):
    """Under V = E x the mean momentum decreases at rate E."""
    T, E = 1.0, 1.0
    out = evolve(ground_state, Stark(E), SimulationParams(0.0, 1.0, 1e-3, T, 10**6), diagnostics=False).final
    uhat = grid1d.fft(out.values)
    kmean = np.sum(grid1d.wavenumbers * np.abs(uhat) ** 2) / np.sum(np.abs(uhat) ** 2)
    assert kmean == pytest.approx(-E * T, abs=1e-8)


def test_energy_value_conserved_nonlinear(ground_state):
    p = Harmonic(1.0)
    e0 = energy(ground_state, p, 1.0, 1.0).total
    out = evolve(ground_state, p, SimulationParams(1.0, 1.0, 1e-3, 1.0, 10**6), diagnostics=False).final
    assert energy(out, p, 1.0, 1.0).total == pytest.approx(e0, rel=1e-6)
    assert math.isfinite(e0)
