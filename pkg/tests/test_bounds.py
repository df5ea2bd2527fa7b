"""Closed-form bound calculators against high-precision oracles."""

import math

import mpmath as mp
import numpy as np
import pytest

from bouss2d import (
    FlowState,
    PhysParams,
    compute_aggregates,
    compute_M,
    compute_N,
    determining_threshold,
    dimension_bound,
    gauss_constant,
    make_forcing,
    make_grid,
    monitor_apriori,
    record_norms,
    rho_m,
)
from bouss2d.bounds import build_bound_report
from bouss2d.spectral import zero_field

mp.mp.dps = 50

UNIT = PhysParams(1.0, 1.0, 0.75, 0.75)


def unit_forcing(grid, amp=1.0):
    return make_forcing([(1, 0, amp, "sin")], grid, UNIT)


class TestAggregates:
    def test_unit_parameters(self, grid32):
        # B = e^ν (1+κ)/(ν³κ³) ‖f‖² = 2e · 2π² for ν = κ = 1, f = sin x1
        a, b, a1 = compute_aggregates(unit_forcing(grid32), UNIT)
        np.testing.assert_allclose(b, 2 * math.e * 2 * math.pi**2, rtol=1e-12)
        # L^p norms of sin at p = 4/(2β-1) = 8 and p = 2/(α+β-1) = 4
        np.testing.assert_allclose(a1, (1.5 * math.pi**2) ** 0.25, rtol=1e-10)

    def test_a_halves_with_doubled_kappa(self, grid32):
        params2 = PhysParams(1.0, 2.0, 0.75, 0.75)
        f1 = make_forcing([(1, 0, 1.0, "sin")], grid32, UNIT)
        f2 = make_forcing([(1, 0, 1.0, "sin")], grid32, params2)
        a1_, _, _ = compute_aggregates(f1, UNIT)
        a2_, _, _ = compute_aggregates(f2, params2)
        np.testing.assert_allclose(a2_, 0.5 * a1_, rtol=1e-12)

    def test_zero_forcing(self, grid32):
        f = make_forcing([(1, 0, 0.0, "sin")], grid32, UNIT)
        assert compute_aggregates(f, UNIT) == (0.0, 0.0, 0.0)


class TestGronwallExponents:
    def test_zero_aggregates(self):
        gw = compute_M(UNIT, 0.0, 0.0, 0.0)
        assert (gw.m1, gw.m2, gw.m) == (1.0, 1.0, 1.0)

    def test_against_mpmath(self):
        # literal evaluation at ν=κ=1, α=β=3/4, A=B=A1=1
        gw = compute_M(UNIT, 1.0, 1.0, 1.0)
        # 4β/(2β-1) = 3/0.5 = 6 and (2α+2β)/(α+β-1) = 3/0.5 = 6
        m1 = max(mp.mpf(2) ** 6 + 1, mp.mpf(1) + mp.mpf(1))
        m2 = max(mp.mpf(2) ** 6 + 1, mp.mpf(1) + mp.mpf(1))
        assert abs(gw.m1 - float(m1)) < 1e-9 * float(m1)
        assert abs(gw.m2 - float(m2)) < 1e-9 * float(m2)
        assert gw.m == max(gw.m1, gw.m2)

    def test_monotone_in_a(self):
        prev = -1.0
        for a in (0.0, 0.5, 1.0, 4.0, 10.0):
            gw = compute_M(UNIT, a, 1.0, 1.0)
            assert gw.m1 >= prev
            prev = gw.m1

    def test_degenerate_exponent_flagged(self):
        params = PhysParams(0.2, 1.0, 0.2, 0.9, allow_out_of_range=True)  # 3α - β < 0
        gw = compute_M(params, 1.0, 1.0, 1.0)
        assert not gw.m2_defined
        assert gw.m == gw.m1


class TestN:
    def test_zero_forcing(self, grid32):
        f = make_forcing([(1, 0, 0.0, "sin")], grid32, UNIT)
        assert compute_N(UNIT, f, 5.0) == (0.0, False)

    def test_unit_evaluation(self, grid32):
        # amp chosen so ‖Λ^β f‖² = 1; with M = 0: N = (1+κ)² e^{2ν}/(κ³ν²) = 4e²
        amp = 1.0 / math.sqrt(2 * math.pi**2)
        f = unit_forcing(grid32, amp)
        n, overflow = compute_N(UNIT, f, 0.0)
        np.testing.assert_allclose(n, 4 * math.e**2, rtol=1e-12)
        assert not overflow

    def test_quadratic_in_forcing(self, grid32):
        n1, _ = compute_N(UNIT, unit_forcing(grid32, 1.0), 2.0)
        n2, _ = compute_N(UNIT, unit_forcing(grid32, 2.0), 2.0)
        np.testing.assert_allclose(n2, 4 * n1, rtol=1e-12)

    def test_overflow_flagged(self, grid32):
        n, overflow = compute_N(UNIT, unit_forcing(grid32), 500.0)
        assert math.isinf(n)
        assert overflow


class TestThreshold:
    def test_unit_case(self, grid32):
        # N=0, C=1, ν=κ=1, α=3/4: base = 2, threshold = 2^{1/(1/4)} = 16
        ei = make_grid(64).eigen_index()
        threshold, m_star = determining_threshold(UNIT, 0.0, ei, 1.0)
        np.testing.assert_allclose(threshold, 16.0, rtol=1e-13)
        # independent count of eigenvalues strictly below 16
        expected = int(np.sum(ei.lam < 16.0))
        assert m_star == expected
        assert ei.eigenvalue_of(m_star + 1) >= 16.0

    def test_c_free_power_law(self):
        ei = make_grid(32).eigen_index()
        t1, _ = determining_threshold(UNIT, 0.0, ei, 1.0)
        t2, _ = determining_threshold(UNIT, 0.0, ei, 2.0)
        np.testing.assert_allclose(t2, 2 ** (1 / 0.25) * t1, rtol=1e-12)

    def test_alpha_near_half_unresolved(self):
        ei = make_grid(32).eigen_index()
        params = PhysParams(1.0, 1.0, 0.5001, 0.75)
        threshold, m_star = determining_threshold(params, 0.0, ei, 1.0)
        assert m_star is None
        assert threshold > ei.lam[-1]

    def test_alpha_at_half_rejected(self):
        ei = make_grid(32).eigen_index()
        params = PhysParams(1.0, 1.0, 0.4, 0.75, allow_out_of_range=True)
        with pytest.raises(ValueError):
            determining_threshold(params, 0.0, ei, 1.0)


class TestRho:
    def test_unit(self):
        assert rho_m(UNIT, 1.0) == 0.5

    def test_kappa_branch(self):
        params = PhysParams(2.0, 1.0, 0.75, 0.75)
        for lam in (1.0, 3.0, 9.5):
            np.testing.assert_allclose(rho_m(params, lam), 0.5 * lam**0.75)

    def test_min_of_powers(self):
        params = PhysParams(1.0, 1.0, 0.6, 0.9)
        np.testing.assert_allclose(rho_m(params, 4.0), 0.5 * 4.0**0.6, rtol=1e-14)

    def test_below_one_rejected(self):
        with pytest.raises(ValueError):
            rho_m(UNIT, 0.5)


def mp_gauss():
    return 2 / mp.pi * mp.quad(lambda x: 1 / mp.sqrt(1 - x**4), [0, 1])


class TestGaussConstant:
    def test_known_digits(self):
        assert abs(gauss_constant() - 0.8346268) < 1e-6

    def test_against_mpmath(self):
        assert abs(gauss_constant() - float(mp_gauss())) < 1e-10

    def test_original_integrand_at_zero(self):
        assert 1.0 / math.sqrt(1.0 - 0.0**4) == 1.0

    def test_tolerance_stability(self):
        assert abs(gauss_constant(1e-12) - gauss_constant(5e-13)) < 1e-10


class TestDimensionBound:
    def test_reference_value(self):
        g = mp_gauss()
        expected = 10 * mp.log(8 * g**2 * 4 / mp.mpf("0.75")) / mp.log(2 / mp.mpf("1.25"))
        got = dimension_bound(10, 2.0, 0.5)
        assert abs(got - float(expected)) < 1e-9 * float(expected)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            dimension_bound(10, 2.0, 1.0)
        with pytest.raises(ValueError):
            dimension_bound(10, 0.5, 0.5)
        with pytest.raises(ValueError):
            dimension_bound(-1, 2.0, 0.5)

    def test_monotonicity(self):
        base = dimension_bound(10, 2.0, 0.5)
        assert dimension_bound(11, 2.0, 0.5) > base
        assert dimension_bound(10, 3.0, 0.5) > base
        assert dimension_bound(10, 2.0, 0.6) > base


class TestMonitor:
    def test_empty_rejected(self, grid32):
        with pytest.raises(ValueError):
            monitor_apriori([], UNIT, unit_forcing(grid32), 1.0)

    def test_decayed_state(self, grid32):
        f = make_forcing([(1, 0, 0.0, "sin")], grid32, UNIT)
        state = FlowState(zero_field(grid32), zero_field(grid32))
        rec = [record_norms(state, UNIT)]
        margins = monitor_apriori(rec, UNIT, f, 0.0)
        assert margins.sup_high_norms == 0.0
        assert margins.c_hat == 0.0

    def test_sup_dominates_each_record(self, grid32, rng):
        from bouss2d import random_field

        states = [
            FlowState(random_field(grid32, rng), random_field(grid32, rng), t=float(i))
            for i in range(5)
        ]
        recs = [record_norms(s, UNIT) for s in states]
        margins = monitor_apriori(recs, UNIT, unit_forcing(grid32), 1.0)
        for r in recs:
            assert margins.sup_high_norms >= r.theta_h2beta**2 + r.u_h2alpha**2 - 1e-12


class TestReport:
    def test_round_trip_dict(self, grid32):
        report = build_bound_report(grid32.eigen_index(), UNIT, unit_forcing(grid32, 0.01))
        d = report.to_dict()
        assert d["aggregates"]["A"] == report.a
        assert d["N_overflow"] == report.n_overflow
        assert set(d["rho_m"]) == set()

    def test_rho_entries(self, grid32):
        report = build_bound_report(
            grid32.eigen_index(), UNIT, unit_forcing(grid32, 0.01), rho_at=(1, 5)
        )
        assert set(report.rho) == {1, 5}
        np.testing.assert_allclose(report.rho[1], 0.5)
