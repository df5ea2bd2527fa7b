"""Spectral core: transforms, norms, eigen enumeration, projections."""

import numpy as np
import pytest

import bouss2d.spectral as sp
from bouss2d import (
    dealias,
    eigen_index,
    fractional_laplacian,
    from_spectral,
    inner_l2,
    lp_norm,
    make_grid,
    project_high,
    project_low,
    random_field,
    sobolev_norm,
    to_spectral,
)

from conftest import mesh, single_mode

TWO_PI2 = 2 * np.pi**2


class TestGrid:
    def test_dealias_cut(self):
        assert make_grid(64).dealias_cut == 21
        assert make_grid(8).dealias_cut == 2

    @pytest.mark.parametrize("n", [7, 6, 9, 2, 0])
    def test_bad_resolution_rejected(self, n):
        with pytest.raises(ValueError):
            make_grid(n)

    def test_equality_by_resolution(self):
        assert make_grid(16) == make_grid(16)
        assert make_grid(16) != make_grid(32)


class TestTransforms:
    def test_sin_single_conjugate_pair(self, grid32):
        X1, _ = mesh(grid32)
        f = to_spectral(np.sin(X1), grid32)
        n = grid32.n
        np.testing.assert_allclose(f.coeffs[1, 0], -0.5j, atol=1e-14)
        np.testing.assert_allclose(f.coeffs[n - 1, 0], 0.5j, atol=1e-14)
        others = f.coeffs.copy()
        others[1, 0] = others[n - 1, 0] = 0
        assert np.abs(others).max() < 1e-14

    def test_constant_field_is_zero(self, grid16):
        before = sp.mean_removals
        with pytest.warns(UserWarning):
            f = to_spectral(np.full((16, 16), 3.7), grid16)
        assert np.abs(f.coeffs).max() == 0.0
        assert sp.mean_removals == before + 1

    def test_round_trip_removes_mean(self, grid32, rng):
        samples = rng.standard_normal((32, 32))
        with pytest.warns(UserWarning):
            f = to_spectral(samples, grid32)
        back = from_spectral(f)
        np.testing.assert_allclose(back, samples - samples.mean(), atol=1e-12)

    def test_against_direct_dft_at_n8(self, rng):
        # O(n^4) direct evaluation of fhat(k) = n^-2 sum f(x_j) e^{-i k.x_j}
        grid = make_grid(8)
        samples = rng.standard_normal((8, 8))
        samples -= samples.mean()
        f = to_spectral(samples, grid)
        n = 8
        k = np.fft.fftfreq(n, d=1.0 / n).astype(int)
        x = grid.x
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for a in range(n):
                    for b in range(n):
                        acc += samples[a, b] * np.exp(-1j * (k[i] * x[a] + k[j] * x[b]))
                acc /= n * n
                if (i, j) == (0, 0):
                    acc = 0.0
                assert abs(f.coeffs[i, j] - acc) < 1e-12

    def test_shape_mismatch(self, grid16):
        with pytest.raises(ValueError, match="shape"):
            to_spectral(np.zeros((8, 8)), grid16)


class TestFractionalLaplacian:
    def test_unit_mode_unchanged(self, grid32):
        f = single_mode(grid32, 1, 0)
        for s in (-1.3, 0.0, 0.5, 2.0):
            g = fractional_laplacian(f, s)
            np.testing.assert_allclose(g.coeffs, f.coeffs, atol=1e-16)

    def test_mode_3_4_squared(self, grid32):
        f = single_mode(grid32, 3, 4)
        g = fractional_laplacian(f, 2.0)
        np.testing.assert_allclose(g.coeffs, 25.0 * f.coeffs, rtol=1e-14)

    def test_inverse_round_trip(self, grid32, rng):
        f = random_field(grid32, rng)
        g = fractional_laplacian(fractional_laplacian(f, 1.7), -1.7)
        assert np.abs(g.coeffs - f.coeffs).max() < 1e-12

    def test_semigroup_property(self, grid32, rng):
        f = random_field(grid32, rng)
        a = fractional_laplacian(fractional_laplacian(f, 0.6), 0.9)
        b = fractional_laplacian(f, 1.5)
        np.testing.assert_allclose(a.coeffs, b.coeffs, rtol=1e-12, atol=1e-18)

    def test_mean_mode_stays_zero(self, grid16, rng):
        f = random_field(grid16, rng)
        for s in (-2.0, 0.0, 3.0):
            assert fractional_laplacian(f, s).coeffs[0, 0] == 0.0


class TestNorms:
    def test_sin_all_s(self, grid32):
        X1, _ = mesh(grid32)
        f = to_spectral(np.sin(X1), grid32)
        for s in (-1.0, 0.0, 0.75, 2.0):
            np.testing.assert_allclose(sobolev_norm(f, s), np.sqrt(TWO_PI2), rtol=1e-13)

    def test_sin_2x_scaling(self, grid32):
        X1, _ = mesh(grid32)
        f = to_spectral(np.sin(2 * X1), grid32)
        for s in (0.5, 1.0, 1.7):
            np.testing.assert_allclose(sobolev_norm(f, s), 2**s * np.sqrt(TWO_PI2), rtol=1e-13)

    def test_parseval_vs_quadrature(self, grid32, rng):
        f = random_field(grid32, rng)
        vals = from_spectral(f)
        quad = np.sqrt(np.sum(vals**2) * (2 * np.pi / 32) ** 2)
        assert abs(sobolev_norm(f, 0.0) - quad) < 1e-10 * quad

    def test_lp_matches_l2(self, grid32):
        X1, _ = mesh(grid32)
        f = to_spectral(np.sin(X1), grid32)
        assert abs(lp_norm(f, 2) - sobolev_norm(f, 0.0)) < 1e-10

    def test_sin_l4(self, grid32):
        # ∫ sin^4 over the torus = (3/8)(2π)², so ‖sin‖_L4 = ((3/2)π²)^{1/4}
        X1, _ = mesh(grid32)
        f = to_spectral(np.sin(X1), grid32)
        np.testing.assert_allclose(lp_norm(f, 4), (1.5 * np.pi**2) ** 0.25, rtol=1e-12)

    def test_sup_norm(self):
        for n in (16, 64, 128):
            grid = make_grid(n)
            X1, _ = mesh(grid)
            f = to_spectral(np.sin(X1), grid)
            val = lp_norm(f, np.inf)
            assert val <= 1.0 + 1e-13
            assert val > 0.95
        assert lp_norm(f, np.inf) > 0.999  # n=128 samples close to the peak

    def test_p_below_one_rejected(self, grid16, rng):
        with pytest.raises(ValueError, match="p >= 1"):
            lp_norm(random_field(grid16, rng), 0.5)

    def test_poincare_monotonicity(self, grid32, rng):
        for _ in range(20):
            f = random_field(grid32, rng)
            assert sobolev_norm(f, 0.3) <= sobolev_norm(f, 1.1) * (1 + 1e-12)


class TestEigenIndex:
    def test_first_shell(self, grid32):
        ei = eigen_index(grid32)
        assert [ei.eigenvalue_of(m) for m in (1, 2, 3, 4)] == [1.0] * 4
        np.testing.assert_allclose(ei.eigenvalue_of(5), np.sqrt(2))
        # four |k|=1 eigenfunctions: sin/cos at (0,1) and (1,0)
        assert {tuple(k) for k in ei.wavevectors[:4]} == {(0, 1), (1, 0)}
        assert list(ei.tags[:4]) == [0, 1, 0, 1]

    def test_nondecreasing_and_count(self, grid16):
        ei = eigen_index(grid16)
        cut = grid16.dealias_cut
        assert ei.count == (2 * cut + 1) ** 2 - 1
        assert np.all(np.diff(ei.lam) >= -1e-15)

    def test_deterministic(self):
        a, b = make_grid(32).eigen_index(), make_grid(32).eigen_index()
        assert np.array_equal(a.wavevectors, b.wavevectors)
        assert np.array_equal(a.tags, b.tags)

    def test_out_of_range(self, grid16):
        ei = eigen_index(grid16)
        with pytest.raises(ValueError):
            ei.eigenvalue_of(0)
        with pytest.raises(ValueError):
            ei.eigenvalue_of(ei.count + 1)


class TestProjections:
    def test_m_zero(self, grid32, rng):
        f = random_field(grid32, rng)
        assert np.abs(project_low(f, 0).coeffs).max() == 0.0
        assert np.array_equal(project_high(f, 0).coeffs, f.coeffs)

    def test_partition_exact(self, grid32, rng):
        f = random_field(grid32, rng)
        m = 123
        total = project_low(f, m).coeffs + project_high(f, m).coeffs
        assert np.array_equal(total, f.coeffs)

    def test_idempotent(self, grid32, rng):
        f = random_field(grid32, rng)
        p = project_low(f, 37)
        assert np.array_equal(project_low(p, 37).coeffs, p.coeffs)
        assert np.abs(project_high(p, 37).coeffs).max() == 0.0

    def test_first_shell_identity(self, grid32):
        X1, X2 = mesh(grid32)
        f = to_spectral(
            0.3 * np.sin(X1) + 0.7 * np.cos(X1) - 1.1 * np.sin(X2) + 0.2 * np.cos(X2), grid32
        )
        p = project_low(f, 4)
        np.testing.assert_allclose(p.coeffs, f.coeffs, atol=1e-16)

    def test_self_adjoint_exact(self, grid32, rng):
        f, g = random_field(grid32, rng), random_field(grid32, rng)
        for m in (1, 17, 300):
            assert inner_l2(project_low(f, m), g) == inner_l2(f, project_low(g, m))

    def test_projection_contracts(self, grid32, rng):
        f = random_field(grid32, rng)
        norms = [sobolev_norm(project_high(f, m), 1.0) for m in (0, 8, 64, 256)]
        assert all(a >= b - 1e-15 for a, b in zip(norms, norms[1:]))

    def test_m_out_of_range(self, grid16, rng):
        f = random_field(grid16, rng)
        with pytest.raises(ValueError):
            project_low(f, grid16.eigen_index().count + 1)
        with pytest.raises(ValueError):
            project_high(f, -1)

    def test_splits_sin_cos_pair(self, grid32):
        # m=1 keeps only sin(x2) (first eigen entry); cos(x2) is position 2
        X1, X2 = mesh(grid32)
        f = to_spectral(2.0 * np.sin(X2) + 5.0 * np.cos(X2), grid32)
        p = from_spectral(project_low(f, 1))
        np.testing.assert_allclose(p, 2.0 * np.sin(X2), atol=1e-13)


class TestDealias:
    def test_within_cut_unchanged(self, grid32, rng):
        f = random_field(grid32, rng, band=grid32.dealias_cut)
        assert np.array_equal(dealias(f).coeffs, f.coeffs)

    def test_high_mode_zeroed(self):
        grid = make_grid(64)
        f = single_mode(grid, 31, 0)
        assert sobolev_norm(f, 0.0) > 1.0
        assert np.abs(dealias(f).coeffs).max() == 0.0

    def test_energy_never_increases(self, grid32, rng):
        c = rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32))
        f = to_spectral(np.real(np.fft.ifft2(c)), grid32, warn=False)
        assert sobolev_norm(dealias(f), 0.0) <= sobolev_norm(f, 0.0)


class TestRandomField:
    def test_real_and_mean_zero(self, grid32, rng):
        f = random_field(grid32, rng)
        assert f.coeffs[0, 0] == 0.0
        vals = np.fft.ifft2(f.coeffs) * 32 * 32
        assert np.abs(vals.imag).max() < 1e-12

    def test_normalized(self, grid32, rng):
        f = random_field(grid32, rng)
        np.testing.assert_allclose(sobolev_norm(f, 0.0), 1.0, rtol=1e-12)

    def test_band_limited(self, grid32, rng):
        f = random_field(grid32, rng, band=4)
        outside = ~((np.abs(grid32.kx) <= 4) & (np.abs(grid32.ky) <= 4))
        assert np.abs(f.coeffs[outside]).max() == 0.0
