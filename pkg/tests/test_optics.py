import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nls_sharp.grid import WaveField, make_grid
from nls_sharp.initial import gaussian
from nls_sharp.optics import (
    NoConvergence,
    OutOfRange,
    caustic_time,
    eikonal_residual,
    invert_flow,
    invert_points,
    launch_points,
    phase_gradient_check,
    trace_rays,
    wkb_error,
    wkb_field,
)
from nls_sharp.potentials import (
    AnisotropicQuadratic,
    Harmonic,
    InvertedHarmonic,
    SoftLinear,
    SoftPower,
    Stark,
    Zero,
)

Y = np.linspace(-4, 4, 161)


@pytest.fixture(scope="module")
def harmonic_rays():
    return trace_rays(Harmonic(1.0), Y, 2.0, 1e-3)


def test_harmonic_examples(harmonic_rays):
    b = harmonic_rays
    assert b.caustic == pytest.approx(math.pi / 2, abs=1e-3)
    assert caustic_time(b) == pytest.approx(b.caustic)
    st_ = b.state_at(math.pi / 4)
    np.testing.assert_allclose(st_.J, math.cos(math.pi / 4), atol=1e-10)
    assert invert_flow(b, math.pi / 4, 1.0) == pytest.approx(math.sqrt(2), abs=1e-9)
    assert b.valid_until < math.pi / 2


def test_harmonic_state_closed_form(harmonic_rays):
    for t in (0.1, 0.7, 1.3):
        s = harmonic_rays.state_at(t)
        np.testing.assert_allclose(s.x[0], Y * math.cos(t), atol=1e-12)
        np.testing.assert_allclose(s.xi[0], -Y * math.sin(t), atol=1e-12)
        # phi(t, y) along the ray: -(y^2/4) sin(2t)
        np.testing.assert_allclose(s.phi, -(Y**2) * math.sin(2 * t) / 4, atol=1e-11)


def test_beyond_caustic_refused(harmonic_rays):
    with pytest.raises(ValueError):
        invert_points(harmonic_rays, 1.6, [0.0])
    with pytest.raises(ValueError):
        harmonic_rays.state_at(1.9)


def test_no_caustic_for_stark_and_inverted():
    assert trace_rays(Stark(1.0), Y, 3.0, 1e-2).caustic is None
    b = trace_rays(InvertedHarmonic(1.0), Y, 1.0, 1e-3)
    assert b.caustic is None
    np.testing.assert_allclose(b.state_at(1.0).J, math.cosh(1.0), rtol=1e-11)


def test_out_of_range_and_exceptions(harmonic_rays):
    with pytest.raises(OutOfRange):
        invert_flow(harmonic_rays, 0.5, 100.0)
    assert issubclass(NoConvergence, RuntimeError)
    with pytest.raises(ValueError):
        trace_rays(-SoftPower(4.0), Y, 1.0, 1e-2)
    with pytest.raises(ValueError):
        trace_rays(Zero(), Y, 0.0, 1e-2)


def test_free_rays_static():
    b = trace_rays(Zero(), Y, 1.0, 1e-2)
    np.testing.assert_array_equal(b.state_at(1.0).x[0], Y)
    assert invert_flow(b, 0.5, 0.3) == pytest.approx(0.3, abs=1e-14)


@pytest.mark.parametrize("p", [SoftLinear(), SoftPower(3.0), Harmonic(0.7)], ids=lambda p: p.name)
def test_jacobian_matches_finite_differences(p):
    h = 1e-5
    y = np.linspace(-2, 2, 9)
    b0 = trace_rays(p, y, 0.5, 1e-3)
    bp = trace_rays(p, y + h, 0.5, 1e-3)
    bm = trace_rays(p, y - h, 0.5, 1e-3)
    fd = (bp.x[-1, 0] - bm.x[-1, 0]) / (2 * h)
    np.testing.assert_allclose(b0.J[-1], fd, atol=1e-4)


def test_jacobian_2d_matches_finite_differences():
    p = AnisotropicQuadratic([[2.0, 0.5], [0.5, 1.0]], [0.2, -0.1], 1.0)
    y = np.array([[0.3, -1.0, 1.2], [0.5, 0.2, -0.7]])
    b0 = trace_rays(p, y, 0.5, 1e-3)
    h = 1e-5
    X = np.empty((2, 2, 3))
    for j in range(2):
        e = np.zeros((2, 1))
        e[j] = h
        X[:, j] = (trace_rays(p, y + e, 0.5, 1e-3).x[-1] - trace_rays(p, y - e, 0.5, 1e-3).x[-1]) / (2 * h)
    np.testing.assert_allclose(b0.dxdy[-1], X, atol=1e-4)
    J = X[0, 0] * X[1, 1] - X[0, 1] * X[1, 0]
    np.testing.assert_allclose(b0.J[-1], J, atol=1e-4)


def test_lagrangian_symmetry_2d():
    """X^T Xi stays symmetric: the launch manifold xi = 0 is Lagrangian."""
    p = SoftPower(3.0)
    y = np.random.default_rng(0).uniform(-1.5, 1.5, size=(2, 20))
    b = trace_rays(p, y, 0.4, 1e-3)
    X, Xi = b.dxdy[-1], b.dxidy[-1]
    S = np.einsum("kim,kjm->ijm", X, Xi)
    assert np.abs(S - np.swapaxes(S, 0, 1)).max() < 1e-10


@pytest.mark.parametrize("p", [Harmonic(1.0), SoftPower(3.0), SoftLinear(), Stark(2.0)], ids=lambda p: p.name)
def test_ray_energy_conserved(p):
    b = trace_rays(p, Y, 0.5, 1e-4)
    s = b.record(len(b.times) - 1)
    H = 0.5 * s.xi[0] ** 2 + p.value(s.x)
    np.testing.assert_allclose(H, p.value(b.y), atol=1e-10)


def test_liouville_along_bundle():
    """dJ/dt = tr(X^{-1} Xi) J, checked by centered differences."""
    p = SoftPower(3.0)
    y = np.linspace(-1, 1, 11)
    b = trace_rays(p, y, 0.3, 1e-4)
    dt = 1e-4
    a, m, c = b.state_at(0.2 - dt), b.state_at(0.2), b.state_at(0.2 + dt)
    dJ = (c.J - a.J) / (2 * dt)
    rhs = m.dxidy[0, 0] / m.dxdy[0, 0] * m.J
    np.testing.assert_allclose(dJ, rhs, atol=1e-7)


_WIDE = trace_rays(Harmonic(1.0), np.linspace(-5, 5, 401), 1.3, 1e-3)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(0.05, 1.2))
def test_inversion_roundtrip_property(y0, t):
    b = _WIDE
    x = y0 * math.cos(t)
    assert invert_flow(b, t, x) == pytest.approx(y0, abs=1e-10)


def test_inversion_roundtrip_on_rays():
    b = trace_rays(SoftPower(3.0), np.linspace(-3, 3, 301), 0.3, 1e-3)
    st_ = b.state_at(0.3)
    inv = invert_points(b, 0.3, st_.x[0, 10:-10])
    assert np.all(inv.ok)
    np.testing.assert_allclose(inv.y[0], b.y[0, 10:-10], atol=1e-10)
    np.testing.assert_allclose(inv.J, st_.J[10:-10], atol=1e-10)


def test_stark_phase_and_inverse():
    b = trace_rays(Stark(1.0), np.linspace(-8, 8, 321), 1.0, 1e-3)
    x = np.linspace(-2, 2, 41)
    inv = invert_points(b, 1.0, x)
    np.testing.assert_allclose(inv.phi, -x - 1.0 / 6, atol=1e-9)
    np.testing.assert_allclose(inv.y[0], x + 0.5, atol=1e-10)
    np.testing.assert_allclose(inv.J, 1.0, atol=1e-12)


@pytest.mark.parametrize("p", [Harmonic(1.0), SoftPower(3.0), SoftLinear()], ids=lambda p: p.name)
def test_eikonal_residual_small(p):
    b = trace_rays(p, np.linspace(-3, 3, 241), 0.3, 1e-4)
    assert b.caustic is None
    assert eikonal_residual(b, p, 0.2, np.linspace(-1.5, 1.5, 31)) < 1e-3


def test_phase_gradient_harmonic(harmonic_rays):
    rep = phase_gradient_check(harmonic_rays, Harmonic(1.0), [0.1, 0.2, 0.3])
    expect = [abs(t - math.tan(t)) / t**2 for t in (0.1, 0.2, 0.3)]
    np.testing.assert_allclose(rep.max_ratio_per_t, expect, rtol=1e-6)
    assert rep.passed
    rep2 = phase_gradient_check(harmonic_rays, Harmonic(1.0), [0.2], points=np.linspace(-2, 2, 21))
    assert rep2.max_ratio_per_t[0] == pytest.approx(expect[1], rel=1e-6)


def test_wkb_amplitude_modulus_matches_field():
    grid = make_grid(1, 16.0, 1024)
    u0 = gaussian(grid)
    b = trace_rays(Harmonic(1.0), launch_points(grid), 0.3, 1e-3)
    u_t = WaveField(grid, u0.values * np.exp(0.2j))
    dec = wkb_field(b, u0, 0.1, u_t)
    np.testing.assert_allclose(np.abs(dec.a), np.abs(u_t.values))
    dec0 = wkb_field(b, u0, 0.0, u0)
    assert wkb_error(u0, dec0) < 1e-12


def test_launch_points_colocated():
    grid = make_grid(1, 4.0, 64)
    y = launch_points(grid)[0]
    assert np.any(y == grid.axis[0])
    common = np.intersect1d(y, grid.axis)
    assert common.size == grid.N


def test_two_dimensional_smoke():
    grid = make_grid(2, 6.0, 32)
    p = Harmonic([1.0, 0.5])
    b = trace_rays(p, launch_points(grid), 0.5, 1e-2)
    assert b.caustic is None
    s = b.state_at(0.5)
    np.testing.assert_allclose(s.J, math.cos(0.5) * math.cos(0.25), atol=1e-8)
    y = invert_flow(b, 0.5, [1.0 * math.cos(0.5), -0.5 * math.cos(0.25)])
    np.testing.assert_allclose(y, [1.0, -0.5], atol=1e-8)
    u0 = gaussian(grid)
    dec = wkb_field(b, u0, 0.2)
    assert dec.mask[8:24, 8:24].all()
    assert dec.a is None
