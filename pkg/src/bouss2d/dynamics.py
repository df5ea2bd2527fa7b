"""Temperature/vorticity form of the 2D Boussinesq system.

The velocity/pressure system is reformulated by taking the curl: the state is
(θ, ω) with ω = ∂₁u₂ − ∂₂u₁, the velocity is recovered through the
streamfunction (Δψ = ω, u = ∇⊥ψ) so incompressibility is exact in spectral
space, and the buoyancy θ e₂ enters the vorticity equation as ∂₁θ.

    ∂t θ + u·∇θ + κ Λ^{2β} θ = f
    ∂t ω + u·∇ω + ν Λ^{2α} ω = ∂₁θ

Nonlinear products are evaluated pseudospectrally and dealiased with the
2/3 rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    DOMAIN_AREA,
    GridSpec,
    SpectralField,
    _lambda_power,
    dealias,
    lp_norm,
    sobolev_norm,
)

EXPONENT_RANGE_MSG = (
    "dissipation exponents must satisfy 1/2 < alpha < 1 and 1/2 < beta < 1 "
    "(subcritical range); pass allow_out_of_range=True / "
    "--allow-out-of-range-exponents to override"
)


@dataclass(frozen=True)
class PhysParams:
    """Viscosity, diffusivity and the fractional dissipation exponents."""

    nu: float
    kappa: float
    alpha: float
    beta: float
    allow_out_of_range: bool = False

    def __post_init__(self):
        if self.nu <= 0 or self.kappa <= 0:
            raise ValueError(f"nu and kappa must be positive, got nu={self.nu}, kappa={self.kappa}")
        in_range = 0.5 < self.alpha < 1.0 and 0.5 < self.beta < 1.0
        if not in_range and not self.allow_out_of_range:
            raise ValueError(f"{EXPONENT_RANGE_MSG}; got alpha={self.alpha}, beta={self.beta}")

    @property
    def sigma(self) -> float:
        """min(nu, kappa), the joint dissipation rate."""
        return min(self.nu, self.kappa)


@dataclass
class FlowState:
    """(θ, ω) pair at time t; both fields mean-zero on the same grid."""

    theta: SpectralField
    omega: SpectralField
    t: float = 0.0

    def __post_init__(self):
        if self.theta.grid != self.omega.grid:
            raise ValueError("theta and omega live on different grids")

    @property
    def grid(self) -> GridSpec:
        return self.theta.grid

    def copy(self) -> "FlowState":
        return FlowState(self.theta.copy(), self.omega.copy(), self.t)


@dataclass(frozen=True)
class ForcingMode:
    """One trigonometric component amp * sin(k.x) or amp * cos(k.x)."""

    k1: int
    k2: int
    amplitude: float
    phase: str = "sin"  # "sin" | "cos"

    def __post_init__(self):
        if self.phase not in ("sin", "cos"):
            raise ValueError(f"phase must be 'sin' or 'cos', got {self.phase!r}")
        if self.k1 == 0 and self.k2 == 0:
            raise ValueError("forcing mode at k=0 violates the mean-zero requirement")


@dataclass
class Forcing:
    """Time-independent trigonometric forcing with its cached norms.

    Caches ‖f‖, ‖Λ^β f‖ and the two Lebesgue norms entering the bound
    aggregates, ‖f‖_{L^{4/(2β−1)}} and ‖f‖_{L^{2/(α+β−1)}}, plus the
    integrability pair (r0, p0) derived from the dissipation exponents.
    """

    modes: tuple[ForcingMode, ...]
    field: SpectralField
    l2: float
    h_beta: float
    lp_a: float  # ‖f‖_{L^{4/(2β−1)}}
    lp_a1: float  # ‖f‖_{L^{2/(α+β−1)}}
    r0: float
    p0: float
    extra_lp: dict[float, float] = field(default_factory=dict)


def make_forcing(
    modes, grid: GridSpec, params: PhysParams, s1: float = 1.0, lp_list=()
) -> Forcing:
    """Realize a mode list as a spectral field and cache the norms above.

    For s1 >= 1 the integrability exponent r0 may be any number in
    (2 max(1−α, 1−β), 1); the midpoint is used.
    """
    modes = tuple(
        m if isinstance(m, ForcingMode) else ForcingMode(*m) for m in modes
    )
    cut = grid.dealias_cut
    f = np.zeros((grid.n, grid.n), dtype=np.complex128)
    n = grid.n
    for m in modes:
        if max(abs(m.k1), abs(m.k2)) > cut:
            raise ValueError(f"forcing mode k=({m.k1},{m.k2}) outside the dealias cut {cut}")
        i, j = m.k1 % n, m.k2 % n
        ni, nj = (-m.k1) % n, (-m.k2) % n
        if m.phase == "sin":
            f[i, j] += -0.5j * m.amplitude
            f[ni, nj] += 0.5j * m.amplitude
        else:
            f[i, j] += 0.5 * m.amplitude
            f[ni, nj] += 0.5 * m.amplitude
    ffield = SpectralField(grid, f)

    alpha, beta = params.alpha, params.beta
    if 2 * beta - 1 <= 0 or alpha + beta - 1 <= 0:
        raise ValueError(
            "forcing norm exponents require beta > 1/2 and alpha + beta > 1; "
            f"got alpha={alpha}, beta={beta}"
        )
    low = 2 * max(1 - alpha, 1 - beta)
    r0 = s1 if low < s1 < 1 else 0.5 * (low + 1.0)
    forcing = Forcing(
        modes=modes,
        field=ffield,
        l2=sobolev_norm(ffield, 0.0),
        h_beta=sobolev_norm(ffield, beta),
        lp_a=lp_norm(ffield, 4.0 / (2 * beta - 1)),
        lp_a1=lp_norm(ffield, 2.0 / (alpha + beta - 1)),
        r0=r0,
        p0=2.0 / (1.0 - r0),
        extra_lp={q: lp_norm(ffield, q) for q in lp_list},
    )
    return forcing


# ---------------------------------------------------------------------------
# velocity recovery and velocity-space norms/projections
# ---------------------------------------------------------------------------

def _biot_savart_multipliers(grid: GridSpec):
    """(m1, m2) with uhat = (m1 ωhat, m2 ωhat): u = ∇⊥ψ, Δψ = ω."""
    k2 = grid.k2.copy()
    k2[0, 0] = 1.0
    m1 = 1j * grid.ky / k2
    m2 = -1j * grid.kx / k2
    m1[0, 0] = 0.0
    m2[0, 0] = 0.0
    return m1, m2


def velocity_from_vorticity(omega: SpectralField) -> tuple[SpectralField, SpectralField]:
    """Divergence-free velocity with curl(u) = ω, both exact in spectral space."""
    m1, m2 = _biot_savart_multipliers(omega.grid)
    return (
        SpectralField(omega.grid, m1 * omega.coeffs),
        SpectralField(omega.grid, m2 * omega.coeffs),
    )


def velocity_sobolev_norm(omega: SpectralField, s: float) -> float:
    """‖Λ^s u‖ for the velocity induced by ω: ( (2π)² Σ |k|^{2s−2} |ωhat|² )^{1/2}."""
    mult = _lambda_power(omega.grid, 2.0 * s - 2.0)
    return float(np.sqrt(DOMAIN_AREA * np.sum(mult * np.abs(omega.coeffs) ** 2)))


def project_low_velocity(omega: SpectralField, m: int) -> SpectralField:
    """P_m applied componentwise to the velocity, expressed on the vorticity.

    The Biot–Savart multiplier i k⊥/|k|² swaps sin and cos amplitudes, so the
    velocity component along the eigenfunction (k, sin) is carried by the
    vorticity cos amplitude Re(ωhat(k)) and vice versa.  Masking with the
    roles swapped therefore realizes the velocity-space projector exactly
    (bitwise), with no Biot–Savart round trip.
    """
    ei = omega.grid.eigen_index()
    ei.check_m(m)
    re = np.where(ei.order_sin <= m, omega.coeffs.real, 0.0)
    im = np.where(ei.order_cos <= m, omega.coeffs.imag, 0.0)
    return SpectralField(omega.grid, re + 1j * im)


def project_high_velocity(omega: SpectralField, m: int) -> SpectralField:
    """Complement of project_low_velocity."""
    ei = omega.grid.eigen_index()
    ei.check_m(m)
    re = np.where(ei.order_sin <= m, 0.0, omega.coeffs.real)
    im = np.where(ei.order_cos <= m, 0.0, omega.coeffs.imag)
    return SpectralField(omega.grid, re + 1j * im)


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------

def _advection(state: FlowState) -> tuple[np.ndarray, np.ndarray]:
    """Dealiased spectral coefficients of u·∇θ and u·∇ω (pseudospectral)."""
    grid = state.grid
    n = grid.n
    ikx, iky = 1j * grid.kx, 1j * grid.ky
    m1, m2 = _biot_savart_multipliers(grid)
    w = state.omega.coeffs
    th = state.theta.coeffs

    def phys(c):
        return np.real(np.fft.ifft2(c) * (n * n))

    u1 = phys(m1 * w)
    u2 = phys(m2 * w)
    adv_t = u1 * phys(ikx * th) + u2 * phys(iky * th)
    adv_w = u1 * phys(ikx * w) + u2 * phys(iky * w)
    mask = grid.dealias_mask
    c_t = np.where(mask, np.fft.fft2(adv_t) / (n * n), 0.0)
    c_w = np.where(mask, np.fft.fft2(adv_w) / (n * n), 0.0)
    c_t[0, 0] = 0.0
    c_w[0, 0] = 0.0
    return c_t, c_w


def nonlinear_tendency(
    state: FlowState,
    forcing: Forcing | None,
    include_advection: bool = True,
    include_buoyancy: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Non-stiff tendency coefficients (everything except the dissipation).

    Returns (N_θ, N_ω) with N_θ = −dealias(u·∇θ) + f and
    N_ω = −dealias(u·∇ω) + ∂₁θ.  The flags disable the advection and
    buoyancy couplings for linear validation runs.
    """
    grid = state.grid
    if include_advection:
        adv_t, adv_w = _advection(state)
        n_t, n_w = -adv_t, -adv_w
    else:
        n_t = np.zeros((grid.n, grid.n), dtype=np.complex128)
        n_w = np.zeros((grid.n, grid.n), dtype=np.complex128)
    if forcing is not None:
        n_t = n_t + forcing.field.coeffs
    if include_buoyancy:
        n_w = n_w + (1j * grid.kx) * state.theta.coeffs
    return n_t, n_w


def temperature_rhs(
    state: FlowState,
    forcing: Forcing | None,
    params: PhysParams,
    include_advection: bool = True,
) -> SpectralField:
    """∂t θ = −dealias(u·∇θ) − κ Λ^{2β} θ + f."""
    n_t, _ = nonlinear_tendency(state, forcing, include_advection, include_buoyancy=False)
    diss = params.kappa * _lambda_power(state.grid, 2.0 * params.beta)
    return SpectralField(state.grid, n_t - diss * state.theta.coeffs)


def vorticity_rhs(
    state: FlowState,
    params: PhysParams,
    include_advection: bool = True,
    include_buoyancy: bool = True,
) -> SpectralField:
    """∂t ω = −dealias(u·∇ω) − ν Λ^{2α} ω + ∂₁θ."""
    _, n_w = nonlinear_tendency(state, None, include_advection, include_buoyancy)
    diss = params.nu * _lambda_power(state.grid, 2.0 * params.alpha)
    return SpectralField(state.grid, n_w - diss * state.omega.coeffs)
