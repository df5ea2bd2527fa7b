import numpy as np
import pytest

from bouss2d import make_grid


@pytest.fixture
def grid16():
    return make_grid(16)


@pytest.fixture
def grid32():
    return make_grid(32)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def mesh(grid):
    """(X1, X2) collocation coordinates with ij indexing."""
    return np.meshgrid(grid.x, grid.x, indexing="ij")


def single_mode(grid, k1, k2, amplitude=1.0, phase="sin"):
    """Exact spectral representation of amplitude*sin/cos(k.x) (no FFT noise)."""
    from bouss2d import SpectralField

    n = grid.n
    coeffs = np.zeros((n, n), dtype=np.complex128)
    i, j = k1 % n, k2 % n
    ni, nj = (-k1) % n, (-k2) % n
    if phase == "sin":
        coeffs[i, j] = -0.5j * amplitude
        coeffs[ni, nj] += 0.5j * amplitude
    else:
        coeffs[i, j] = 0.5 * amplitude
        coeffs[ni, nj] += 0.5 * amplitude
    return SpectralField(grid, coeffs)
