import numpy as np
import pytest

from nls_sharp.grid import make_grid
from nls_sharp.initial import gaussian


@pytest.fixture(scope="session")
def grid1d():
    return make_grid(1, 16.0, 1024)


@pytest.fixture(scope="session")
def ground_state(grid1d):
    """pi^(-1/4) exp(-x^2/2): unit-mass Gaussian, harmonic ground state."""
    return gaussian(grid1d)


@pytest.fixture(scope="session")
def grid2d():
    return make_grid(2, 8.0, 64)


def band_limited_corpus(grid, count, seed=0, kmax_frac=0.25):
    """Random fields with modes up to ``kmax_frac * N`` under a Gaussian envelope."""
    rng = np.random.default_rng(seed)
    out = []
    kmax = kmax_frac * grid.N
    for _ in range(count):
        coeffs = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
        mask = np.all(np.abs(np.fft.fftfreq(grid.N) * grid.N)[np.newaxis] <= kmax / 4, axis=0)
        vals = np.fft.ifft(coeffs * mask)
        env = np.exp(-np.sum(grid.points**2, axis=0) / 8.0)
        out.append(vals / np.abs(vals).max() * env)
    return out
