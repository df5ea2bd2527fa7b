"""Integrating-factor Runge-Kutta time stepping.

The fractional dissipation is diagonal in Fourier space, so the stiff part is
integrated exactly through the factors exp(−ν|k|^{2α} dt) and
exp(−κ|k|^{2β} dt); only the advection, buoyancy and forcing terms are
treated explicitly.  With the nonlinearity switched off a step reduces to the
exact linear solution, to round-off.

The step size is fixed over a run (reproducible trajectory pairs need
identical step sequences); cfl_dt provides the initial choice and an optional
re-check every 100 steps flags late CFL violations without altering dt.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import FlowState, Forcing, PhysParams, nonlinear_tendency, velocity_from_vorticity
from .spectral import SpectralField, _lambda_power, from_spectral

#: Default ceiling on dt from the explicitly integrated terms.
DEFAULT_CFL_CAP = 0.1


class BlowUpError(RuntimeError):
    """Raised when a trajectory produces non-finite coefficients."""

    def __init__(self, t: float, last_state: FlowState | None = None):
        super().__init__(f"numerical blow-up at t={t:.6g}")
        self.t = t
        self.last_state = last_state


@dataclass
class IntegratorConfig:
    """Step-size and scheme selection for a run."""

    dt: float | None = None  # None: choose from the initial CFL bound
    scheme: str = "ifrk4"  # "ifrk2" | "ifrk4"
    cfl_safety: float = 0.5
    t_end: float = 0.0
    cfl_cap: float = DEFAULT_CFL_CAP
    linear_only: bool = False

    def __post_init__(self):
        if self.dt is not None and self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if self.scheme not in ("ifrk2", "ifrk4"):
            raise ValueError(f"unknown scheme {self.scheme!r}")


def cfl_dt(
    state: FlowState, params: PhysParams, safety: float = 0.5, cap: float = DEFAULT_CFL_CAP
) -> float:
    """safety * min(Δx / max|u|, cap); the cap is returned for a quiescent state."""
    if not 0 < safety <= 1:
        raise ValueError(f"safety must lie in (0, 1], got {safety}")
    u1, u2 = velocity_from_vorticity(state.omega)
    umax = max(
        float(np.max(np.abs(from_spectral(u1)))),
        float(np.max(np.abs(from_spectral(u2)))),
    )
    dx = state.grid.domain_size / state.grid.n
    dt_adv = dx / umax if umax > 0 else np.inf
    return safety * min(dt_adv, cap)


class Stepper:
    """One-trajectory stepper with precomputed integrating factors."""

    def __init__(
        self,
        grid,
        params: PhysParams,
        forcing: Forcing | None,
        dt: float,
        scheme: str = "ifrk4",
        include_advection: bool = True,
        include_buoyancy: bool = True,
    ):
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        if scheme not in ("ifrk2", "ifrk4"):
            raise ValueError(f"unknown scheme {scheme!r}")
        self.grid = grid
        self.params = params
        self.forcing = forcing
        self.dt = dt
        self.scheme = scheme
        self.include_advection = include_advection
        self.include_buoyancy = include_buoyancy
        lam_t = params.kappa * _lambda_power(grid, 2.0 * params.beta)
        lam_w = params.nu * _lambda_power(grid, 2.0 * params.alpha)
        self.et_full = np.exp(-dt * lam_t)
        self.ew_full = np.exp(-dt * lam_w)
        self.et_half = np.exp(-0.5 * dt * lam_t)
        self.ew_half = np.exp(-0.5 * dt * lam_w)

    def _tendency(self, theta_c, omega_c):
        state = FlowState(
            SpectralField(self.grid, theta_c), SpectralField(self.grid, omega_c)
        )
        return nonlinear_tendency(
            state, self.forcing, self.include_advection, self.include_buoyancy
        )

    def advance(self, state: FlowState) -> FlowState:
        th, w = state.theta.coeffs, state.omega.coeffs
        h = self.dt
        if self.scheme == "ifrk2":
            # Heun with integrating factor
            nt1, nw1 = self._tendency(th, w)
            th_p = self.et_full * (th + h * nt1)
            w_p = self.ew_full * (w + h * nw1)
            nt2, nw2 = self._tendency(th_p, w_p)
            th_new = self.et_full * th + 0.5 * h * (self.et_full * nt1 + nt2)
            w_new = self.ew_full * w + 0.5 * h * (self.ew_full * nw1 + nw2)
        else:
            # classical RK4 in integrating-factor variables
            nt1, nw1 = self._tendency(th, w)
            th_a = self.et_half * (th + 0.5 * h * nt1)
            w_a = self.ew_half * (w + 0.5 * h * nw1)
            nt2, nw2 = self._tendency(th_a, w_a)
            th_b = self.et_half * th + 0.5 * h * nt2
            w_b = self.ew_half * w + 0.5 * h * nw2
            nt3, nw3 = self._tendency(th_b, w_b)
            th_c = self.et_full * th + h * self.et_half * nt3
            w_c = self.ew_full * w + h * self.ew_half * nw3
            nt4, nw4 = self._tendency(th_c, w_c)
            th_new = self.et_full * th + (h / 6.0) * (
                self.et_full * nt1 + 2.0 * self.et_half * (nt2 + nt3) + nt4
            )
            w_new = self.ew_full * w + (h / 6.0) * (
                self.ew_full * nw1 + 2.0 * self.ew_half * (nw2 + nw3) + nw4
            )
        t_new = state.t + h
        if not np.isfinite(th_new).all() or not np.isfinite(w_new).all():
            raise BlowUpError(t_new, state)
        return FlowState(
            SpectralField(self.grid, th_new), SpectralField(self.grid, w_new), t_new
        )

    def run(self, state: FlowState, n_steps: int, callback=None, cfl_recheck: bool = False):
        """Advance n_steps; callback(state, step) after each step.

        Returns (state, flags) where flags records CFL re-check events.  A
        blow-up aborts with BlowUpError carrying the last finite state.
        """
        flags = {"cfl_violations": 0}
        for i in range(n_steps):
            state = self.advance(state)
            if cfl_recheck and (i + 1) % 100 == 0:
                if cfl_dt(state, self.params, 1.0) < self.dt:
                    flags["cfl_violations"] += 1
            if callback is not None:
                callback(state, i + 1)
        return state, flags


def step(
    state: FlowState,
    forcing: Forcing | None,
    params: PhysParams,
    dt: float,
    scheme: str = "ifrk4",
    include_advection: bool = True,
    include_buoyancy: bool = True,
) -> FlowState:
    """Single integrating-factor Runge-Kutta step (convenience wrapper)."""
    stepper = Stepper(
        state.grid, params, forcing, dt, scheme, include_advection, include_buoyancy
    )
    return stepper.advance(state)


@dataclass
class SpinUpResult:
    state: FlowState
    plateaued: bool
    drift: float
    n_steps: int
    blew_up: bool = False


def spin_up(
    initial: FlowState,
    forcing: Forcing | None,
    params: PhysParams,
    t_spin: float,
    dt: float | None = None,
    scheme: str = "ifrk4",
    cfl_safety: float = 0.5,
    drift_tol: float = 0.1,
) -> SpinUpResult:
    """Integrate for t_spin to shed transients.

    Plateau detection: the time average of ‖Λ^β θ‖² over the last 20% of the
    spin-up window is split in half, and the relative difference of the two
    half-window means is reported as the drift; plateaued means drift below
    drift_tol.  A blow-up ends the spin-up early with the last finite state.
    """
    from .spectral import sobolev_norm

    if t_spin < 0:
        raise ValueError(f"t_spin must be nonnegative, got {t_spin}")
    if t_spin == 0:
        return SpinUpResult(initial, False, np.inf, 0)
    if dt is None:
        dt = cfl_dt(initial, params, cfl_safety)
    n_steps = max(1, int(round(t_spin / dt)))
    stepper = Stepper(initial.grid, params, forcing, dt, scheme)
    series: list[float] = []

    def rec(s, i):
        series.append(sobolev_norm(s.theta, params.beta) ** 2)

    try:
        state, _ = stepper.run(initial, n_steps, callback=rec)
        blew_up = False
    except BlowUpError as e:
        state = e.last_state
        blew_up = True
    done = len(series)
    if done < 2:
        return SpinUpResult(state, False, np.inf, done, blew_up)
    tail = np.asarray(series[-max(2, int(0.2 * done)) :])
    half = len(tail) // 2
    m1, m2 = float(np.mean(tail[:half])), float(np.mean(tail[half:]))
    drift = abs(m2 - m1) / max(m2, m1, 1e-300)
    return SpinUpResult(state, bool(drift < drift_tol and not blew_up), drift, done, blew_up)
