"""Integrating-factor stepping: exactness, order, CFL, spin-up."""

import numpy as np
import pytest

from bouss2d import (
    BlowUpError,
    FlowState,
    IntegratorConfig,
    PhysParams,
    Stepper,
    cfl_dt,
    make_forcing,
    make_grid,
    random_field,
    sobolev_norm,
    spin_up,
    step,
)
from bouss2d.integrate import DEFAULT_CFL_CAP
from bouss2d.spectral import zero_field

from conftest import single_mode

PARAMS = PhysParams(0.2, 0.4, 0.8, 0.6)


def random_state(grid, seed, amplitude=1.0):
    rng = np.random.default_rng(seed)
    return FlowState(
        amplitude * random_field(grid, rng), amplitude * random_field(grid, rng), 0.0
    )


class TestLinearExactness:
    @pytest.mark.parametrize("scheme", ["ifrk2", "ifrk4"])
    def test_pure_dissipation_exact_over_100_steps(self, grid32, scheme):
        state = random_state(grid32, 5)
        dt = 0.03
        stepper = Stepper(
            grid32, PARAMS, None, dt, scheme, include_advection=False, include_buoyancy=False
        )
        s = state
        for _ in range(100):
            s = stepper.advance(s)
        t = 100 * dt
        et = np.exp(-PARAMS.kappa * grid32.kmag ** (2 * PARAMS.beta) * t)
        ew = np.exp(-PARAMS.nu * grid32.kmag ** (2 * PARAMS.alpha) * t)
        ref_t = state.theta.coeffs * et
        ref_w = state.omega.coeffs * ew
        nz = np.abs(ref_t) > 0
        assert (np.abs(s.theta.coeffs - ref_t)[nz] / np.abs(ref_t)[nz]).max() < 1e-12
        nz = np.abs(ref_w) > 0
        assert (np.abs(s.omega.coeffs - ref_w)[nz] / np.abs(ref_w)[nz]).max() < 1e-12

    def test_forced_linear_steady_state(self, grid32):
        # θhat -> fhat / (κ |k|^{2β}) for the dissipation-forcing balance
        forcing = make_forcing([(1, 0, 1.0, "sin"), (2, 2, 0.5, "cos")], grid32, PARAMS)
        stepper = Stepper(
            grid32, PARAMS, forcing, 0.05, "ifrk4",
            include_advection=False, include_buoyancy=False,
        )
        s = FlowState(zero_field(grid32), zero_field(grid32))
        for _ in range(int(300 / 0.05)):  # t = 300 >> 1/κ
            s = stepper.advance(s)
        mult = PARAMS.kappa * grid32.kmag ** (2 * PARAMS.beta)
        mult[0, 0] = 1.0
        target = forcing.field.coeffs / mult
        assert np.abs(s.theta.coeffs - target).max() < 1e-8

    def test_step_wrapper_matches_stepper(self, grid32):
        state = random_state(grid32, 6, amplitude=0.3)
        forcing = make_forcing([(1, 0, 0.1, "sin")], grid32, PARAMS)
        a = step(state, forcing, PARAMS, 0.01)
        b = Stepper(grid32, PARAMS, forcing, 0.01).advance(state)
        assert np.array_equal(a.theta.coeffs, b.theta.coeffs)
        assert np.array_equal(a.omega.coeffs, b.omega.coeffs)


class TestOrder:
    @pytest.mark.parametrize("scheme,expected", [("ifrk2", 2.0), ("ifrk4", 4.0)])
    def test_richardson_self_convergence(self, grid32, scheme, expected):
        # order from errors against the dt/2 solution (Richardson extrapolation)
        params = PhysParams(0.1, 0.1, 0.75, 0.75)
        forcing = make_forcing([(1, 0, 0.2, "sin"), (0, 2, 0.1, "cos")], grid32, params)
        s0 = random_state(grid32, 3, amplitude=0.5)
        T = 1.0

        def final(dt):
            st = Stepper(grid32, params, forcing, dt, scheme)
            s = s0
            for _ in range(int(round(T / dt))):
                s = st.advance(s)
            return s

        sols = [final(dt) for dt in (0.02, 0.01, 0.005)]
        e1 = sobolev_norm(sols[0].theta - sols[1].theta, 0.0) + sobolev_norm(
            sols[0].omega - sols[1].omega, 0.0
        )
        e2 = sobolev_norm(sols[1].theta - sols[2].theta, 0.0) + sobolev_norm(
            sols[1].omega - sols[2].omega, 0.0
        )
        order = np.log2(e1 / e2)
        assert order > expected - 0.25

    def test_determinism(self, grid32):
        forcing = make_forcing([(1, 0, 0.1, "sin")], grid32, PARAMS)
        runs = []
        for _ in range(2):
            s = random_state(grid32, 11, amplitude=0.4)
            st = Stepper(grid32, PARAMS, forcing, 0.02)
            for _ in range(50):
                s = st.advance(s)
            runs.append(s)
        assert np.array_equal(runs[0].theta.coeffs, runs[1].theta.coeffs)
        assert np.array_equal(runs[0].omega.coeffs, runs[1].omega.coeffs)


class TestCFL:
    def test_quiescent_returns_cap(self, grid32):
        state = FlowState(zero_field(grid32), zero_field(grid32))
        assert cfl_dt(state, PARAMS, safety=1.0) == DEFAULT_CFL_CAP
        assert cfl_dt(state, PARAMS, safety=0.5) == 0.5 * DEFAULT_CFL_CAP

    def test_advective_part_halves(self, grid32):
        # ω = a sin(x1) gives max|u| = a exactly
        big_cap = 1e9
        slow = FlowState(zero_field(grid32), single_mode(grid32, 1, 0, amplitude=4.0))
        fast = FlowState(zero_field(grid32), single_mode(grid32, 1, 0, amplitude=8.0))
        dt_slow = cfl_dt(slow, PARAMS, 1.0, cap=big_cap)
        dt_fast = cfl_dt(fast, PARAMS, 1.0, cap=big_cap)
        np.testing.assert_allclose(dt_fast, 0.5 * dt_slow, rtol=1e-12)

    def test_never_exceeds_cap(self, grid32, rng):
        for amp in (0.0, 0.1, 10.0):
            state = FlowState(zero_field(grid32), amp * random_field(grid32, rng))
            assert cfl_dt(state, PARAMS, 0.7) <= 0.7 * DEFAULT_CFL_CAP + 1e-15

    def test_safety_validated(self, grid32):
        state = FlowState(zero_field(grid32), zero_field(grid32))
        with pytest.raises(ValueError):
            cfl_dt(state, PARAMS, 0.0)


class TestBlowUp:
    def test_nan_detected_with_last_state(self, grid16):
        # a dt far beyond the advective CFL bound overflows within a few steps
        state = random_state(grid16, 2, amplitude=50.0)
        stepper = Stepper(grid16, PARAMS, None, dt=0.5)
        with np.errstate(all="ignore"), pytest.raises(BlowUpError) as info:
            s = state
            for _ in range(50):
                s = stepper.advance(s)
        assert info.value.last_state is not None
        assert np.isfinite(info.value.last_state.theta.coeffs).all()


class TestSpinUp:
    def test_zero_duration_returns_initial(self, grid32):
        state = random_state(grid32, 8)
        res = spin_up(state, None, PARAMS, 0.0)
        assert res.state is state
        assert res.n_steps == 0

    def test_unforced_decay(self, grid16):
        # ‖θ‖ + ‖ω‖ far below 1e-6 after t >> 1 / min(ν, κ)
        params = PhysParams(0.5, 0.5, 0.75, 0.75)
        state = random_state(grid16, 9)
        res = spin_up(state, None, params, 40.0, dt=0.05)
        total = sobolev_norm(res.state.theta, 0.0) + sobolev_norm(res.state.omega, 0.0)
        assert total < 1e-6
        assert not res.blew_up

    def test_negative_duration_rejected(self, grid16):
        with pytest.raises(ValueError):
            spin_up(random_state(grid16, 1), None, PARAMS, -1.0)

    def test_forced_run_plateaus(self):
        # regression baseline: the standard forced n=64 configuration levels
        # off well before t = 200
        grid = make_grid(64)
        params = PhysParams(0.1, 0.1, 0.75, 0.75)
        forcing = make_forcing(
            [(1, 0, 0.02, "sin"), (0, 1, 0.02, "cos"), (1, 1, 0.01, "sin")], grid, params
        )
        state = random_state(grid, 42, amplitude=0.5)
        res = spin_up(state, forcing, params, 200.0, dt=0.02)
        assert res.plateaued
        assert res.drift < 0.01
