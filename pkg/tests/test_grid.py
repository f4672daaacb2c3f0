import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from nls_sharp.grid import (
    GridMismatch,
    WaveField,
    gradient_array,
    inner_product,
    l2_norm,
    make_grid,
    spectral_gradient,
)


def test_make_grid_small():
    g = make_grid(1, np.pi, 8)
    assert g.dx == pytest.approx(np.pi / 4)
    assert g.wavenumbers.tolist() == pytest.approx([0, 1, 2, 3, -4, -3, -2, -1])
    assert g.axis[0] == -np.pi
    assert g.axis[-1] == pytest.approx(np.pi - np.pi / 4)


def test_make_grid_spacing_and_size():
    assert make_grid(1, 16, 1024).dx == 0.03125
    g2 = make_grid(2, 8, 256)
    assert g2.size == 65536
    assert g2.points.shape == (2, 256, 256)


@pytest.mark.parametrize("d,L,N", [(3, 1.0, 8), (0, 1.0, 8), (1, 1.0, 12), (1, 1.0, 4), (1, 0.0, 8), (1, -2.0, 8)])
def test_make_grid_rejects(d, L, N):
    with pytest.raises(ValueError):
        make_grid(d, L, N)


@pytest.mark.parametrize("N", [8, 16, 64, 1024])
def test_wavenumbers_antisymmetric_except_nyquist(N):
    g = make_grid(1, 3.0, N)
    k = g.wavenumbers
    assert k.size == N
    assert g.dx * N == pytest.approx(2 * g.L)
    np.testing.assert_allclose(k[1 : N // 2], -k[N - 1 : N // 2 : -1])
    assert k[N // 2] == pytest.approx(-np.pi * (N // 2) / g.L)


def test_gradient_single_mode():
    g = make_grid(1, np.pi, 8)
    f = WaveField.from_function(g, lambda x: np.exp(1j * x))
    (df,) = spectral_gradient(f)
    np.testing.assert_allclose(df.values, 1j * np.exp(1j * g.axis), atol=1e-14)


def test_gradient_of_constant_is_zero(grid1d):
    f = WaveField(grid1d, np.full(grid1d.shape, 2.5 - 1j))
    assert np.abs(spectral_gradient(f)[0].values).max() < 1e-13


def test_gradient_gaussian_vs_analytic(grid1d):
    x = grid1d.axis
    f = WaveField(grid1d, np.exp(-(x**2) / 2))
    (df,) = spectral_gradient(f)
    assert np.abs(df.values - (-x * np.exp(-(x**2) / 2))).max() < 1e-10


def test_gradient_2d_components(grid2d):
    x, y = grid2d.points
    f = WaveField(grid2d, np.exp(-(x**2 + 2 * y**2) / 2))
    dx, dy = spectral_gradient(f)
    np.testing.assert_allclose(dx.values, -x * f.values, atol=1e-9)
    np.testing.assert_allclose(dy.values, -2 * y * f.values, atol=1e-9)


def test_l2_norm_gaussian_matches_quadrature(grid1d):
    oracle, _ = quad(lambda x: np.exp(-(x**2)) / np.sqrt(np.pi), -np.inf, np.inf)
    f = WaveField(grid1d, np.pi ** (-0.25) * np.exp(-grid1d.axis**2 / 2))
    assert oracle == pytest.approx(1.0, abs=1e-12)
    assert l2_norm(f) == pytest.approx(np.sqrt(oracle), abs=1e-10)


def test_zero_field(grid1d):
    f = WaveField(grid1d, np.zeros(grid1d.shape))
    assert l2_norm(f) == 0.0


def test_inner_product_self_and_conjugation(grid1d):
    rng = np.random.default_rng(1)
    f = WaveField(grid1d, rng.normal(size=1024) + 1j * rng.normal(size=1024))
    g = WaveField(grid1d, rng.normal(size=1024) + 1j * rng.normal(size=1024))
    ff = inner_product(f, f)
    assert ff.imag == 0.0 or abs(ff.imag) < 1e-12 * abs(ff.real)
    assert ff.real == pytest.approx(l2_norm(f) ** 2, rel=1e-13)
    # conjugate-linear in the first argument
    assert inner_product(WaveField(grid1d, 2j * f.values), g) == pytest.approx(-2j * inner_product(f, g))


def test_inner_product_grid_mismatch(grid1d):
    other = make_grid(1, 8.0, 1024)
    with pytest.raises(GridMismatch):
        inner_product(WaveField(grid1d, np.ones(1024)), WaveField(other, np.ones(1024)))


def test_wavefield_rejects_nonfinite_and_bad_shape(grid1d):
    with pytest.raises(ValueError):
        WaveField(grid1d, np.full(1024, np.nan))
    with pytest.raises(ValueError):
        WaveField(grid1d, np.ones(512))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2]))
def test_parseval(seed, d):
    g = make_grid(d, 5.0, 32)
    rng = np.random.default_rng(seed)
    v = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
    f = WaveField(g, v)
    fhat = WaveField(g, g.fft(v))
    assert l2_norm(fhat) == pytest.approx(l2_norm(f), rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_product_rule_for_band_limited(seed):
    g = make_grid(1, np.pi, 64)
    rng = np.random.default_rng(seed)
    kmax = g.N // 8  # product stays within N/4

    def field():
        c = np.zeros(g.N, dtype=complex)
        ks = np.r_[0 : kmax + 1, g.N - kmax : g.N]
        c[ks] = rng.normal(size=ks.size) + 1j * rng.normal(size=ks.size)
        return np.fft.ifft(c) * g.N

    a, b = field(), field()
    da, db = gradient_array(g, a)[0], gradient_array(g, b)[0]
    dab = gradient_array(g, a * b)[0]
    scale = np.abs(a).max() * np.abs(b).max() * kmax
    assert np.abs(dab - (da * b + a * db)).max() < 1e-10 * scale


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_gradient_of_real_even_field_is_odd(seed):
    g = make_grid(1, 4.0, 128)
    rng = np.random.default_rng(seed)
    c = rng.normal(size=6)
    x = g.axis
    f = sum(cj * np.cos(j * np.pi * x / g.L) for j, cj in enumerate(c))
    df = gradient_array(g, f)[0]
    assert np.abs(df.imag).max() < 1e-12 * max(1.0, np.abs(df).max())
    # odd about x = 0 (index N/2); the first sample x = -L pairs with itself
    mid = g.N // 2
    left = df.real[mid - 1 : 0 : -1]
    right = df.real[mid + 1 :]
    assert np.abs(left + right).max() < 1e-12 * max(1.0, np.abs(df).max())
