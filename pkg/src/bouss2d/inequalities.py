"""Numerical exercise of the analytic toolbox on trigonometric polynomials.

Two kinds of checks:

* constant-explicit inequalities (Poincaré and interpolation with constant 1,
  the uniform Gronwall conclusion) are hard assertions up to round-off slack;
* constant-free inequalities (Kato-Ponce, the advective commutator, the
  fractional Sobolev embedding) get a fitted constant: the maximum of
  lhs/rhs over the samples, reported together with scaling sanity checks.

Sample fields for the product inequalities are band-limited to a quarter of
the grid so that pointwise products are exactly representable (no aliasing
anywhere, not just below the 2/3 cut).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import velocity_from_vorticity
from .spectral import (
    TWO_PI,
    GridSpec,
    SpectralField,
    fractional_laplacian,
    from_spectral,
    lp_norm,
    random_field,
    sobolev_norm,
    to_spectral,
)

#: Relative slack allowed on constant-explicit inequalities.
ROUNDOFF_SLACK = 1e-12


@dataclass
class InequalityReport:
    inequality: str
    samples: int
    worst_margin: float  # max over samples of lhs - rhs (negative = satisfied)
    fitted_constant: float | None = None
    violations: int = 0
    note: str = ""
    details: dict = field(default_factory=dict)

    @property
    def satisfied(self) -> bool:
        return self.violations == 0


def product_band(grid: GridSpec) -> int:
    """Widest band c such that products of two band-c fields are alias-free."""
    return (grid.n // 2 - 1) // 2


def sharp_sobolev_constant(s: float) -> float:
    """Whole-space sharp constant Γ(1−s) / ((4π)^s π^{s/2} Γ(1+s)) for 0 < s < 1."""
    if not 0 < s < 1:
        raise ValueError(f"sharp constant defined for 0 < s < 1, got s={s}")
    return math.gamma(1 - s) / ((4 * math.pi) ** s * math.pi ** (s / 2) * math.gamma(1 + s))


def check_poincare(fields: list[SpectralField], s1: float, s2: float) -> InequalityReport:
    """‖Λ^{s1} g‖ <= ‖Λ^{s2} g‖ for s1 <= s2, with constant exactly 1."""
    if s1 > s2:
        raise ValueError(f"requires s1 <= s2, got s1={s1} > s2={s2}")
    worst = -math.inf
    violations = 0
    for f in fields:
        lhs, rhs = sobolev_norm(f, s1), sobolev_norm(f, s2)
        margin = lhs - rhs
        worst = max(worst, margin)
        if margin > ROUNDOFF_SLACK * max(rhs, 1e-300):
            violations += 1
    return InequalityReport("poincare", len(fields), worst, violations=violations)


def check_interpolation(
    fields: list[SpectralField], s1: float, s: float, s2: float
) -> InequalityReport:
    """‖Λ^s g‖ <= ‖Λ^{s1} g‖^δ ‖Λ^{s2} g‖^{1−δ}, δ from s = δ s1 + (1−δ) s2."""
    if not s1 <= s <= s2:
        raise ValueError(f"requires s1 <= s <= s2, got ({s1}, {s}, {s2})")
    delta = 1.0 if s2 == s1 else (s2 - s) / (s2 - s1)
    worst = -math.inf
    violations = 0
    for f in fields:
        lhs = sobolev_norm(f, s)
        rhs = sobolev_norm(f, s1) ** delta * sobolev_norm(f, s2) ** (1 - delta)
        margin = lhs - rhs
        worst = max(worst, margin)
        if margin > ROUNDOFF_SLACK * max(rhs, 1e-300):
            violations += 1
    return InequalityReport(
        "interpolation", len(fields), worst, violations=violations, details={"delta": delta}
    )


def check_sobolev(fields: list[SpectralField], s: float) -> InequalityReport:
    """Ratio ‖u‖²_{L^p} / ‖u‖²_{H^s} with p = 2/(1−s) against the sharp constant.

    Report-only: the stated constant is the whole-space one, so torus
    violations are counted but not treated as failures.
    """
    if not 0 < s < 1:
        raise ValueError(f"requires 0 < s < 1, got s={s}")
    p = 2.0 / (1.0 - s)
    c_s = sharp_sobolev_constant(s)
    max_ratio = 0.0
    violations = 0
    for f in fields:
        hs = sobolev_norm(f, s)
        if hs == 0:
            continue
        ratio = lp_norm(f, p) ** 2 / hs**2
        max_ratio = max(max_ratio, ratio)
        if ratio > c_s * (1 + 1e-9):
            violations += 1
    return InequalityReport(
        "sobolev_sharp",
        len(fields),
        max_ratio - c_s,
        fitted_constant=max_ratio,
        violations=violations,
        note="report-only: stated constant is the whole-space one",
        details={"C_s": c_s, "p": p},
    )


def _lp_vector(v1: np.ndarray, v2: np.ndarray, p: float, n: int) -> float:
    """L^p quadrature of the pointwise magnitude of a vector field."""
    mag = np.sqrt(v1 * v1 + v2 * v2)
    if np.isinf(p):
        return float(np.max(mag))
    cell = (TWO_PI / n) ** 2
    return float((np.sum(mag**p) * cell) ** (1.0 / p))


def _check_holder(p1: float, p2: float, q1: float, q2: float) -> None:
    for pair in ((p1, p2), (q1, q2)):
        total = sum(0.0 if np.isinf(x) else 1.0 / x for x in pair)
        if abs(total - 0.5) > 1e-12:
            raise ValueError(f"Hölder exponents {pair} do not satisfy 1/p + 1/q = 1/2")


def check_kato_ponce(
    pairs: list[tuple[SpectralField, SpectralField]],
    s: float,
    p1: float = 4.0,
    p2: float = 4.0,
    q1: float = 4.0,
    q2: float = 4.0,
) -> InequalityReport:
    """Fitted constant for ‖Λ^s(gh)‖ <= C(‖Λ^s g‖_{p1}‖h‖_{p2} + ‖Λ^s h‖_{q1}‖g‖_{q2})."""
    if s <= 0:
        raise ValueError(f"requires s > 0, got s={s}")
    _check_holder(p1, p2, q1, q2)
    c_hat = 0.0
    count = 0
    for g, h in pairs:
        grid = g.grid
        prod = to_spectral(from_spectral(g) * from_spectral(h), grid, warn=False)
        lhs = sobolev_norm(prod, s)
        rhs = lp_norm(fractional_laplacian(g, s), p1) * lp_norm(h, p2) + lp_norm(
            fractional_laplacian(h, s), q1
        ) * lp_norm(g, q2)
        if rhs == 0.0:
            if lhs == 0.0:
                continue
            return InequalityReport("kato_ponce", len(pairs), math.inf, fitted_constant=math.inf, violations=1)
        c_hat = max(c_hat, lhs / rhs)
        count += 1
    return InequalityReport(
        "kato_ponce", len(pairs), 0.0, fitted_constant=c_hat, details={"nonzero_pairs": count}
    )


def advective_commutator(omega: SpectralField, h: SpectralField, s: float) -> SpectralField:
    """Λ^s(g·∇h) − g·(Λ^s ∇h) for the velocity g induced by ω (pseudospectral)."""
    grid = omega.grid
    n = grid.n
    g1, g2 = velocity_from_vorticity(omega)
    g1p, g2p = from_spectral(g1), from_spectral(g2)
    ikx, iky = 1j * grid.kx, 1j * grid.ky

    def phys(c):
        return np.real(np.fft.ifft2(c) * (n * n))

    hx, hy = phys(ikx * h.coeffs), phys(iky * h.coeffs)
    adv = to_spectral(g1p * hx + g2p * hy, grid, warn=False)
    lam_h = fractional_laplacian(h, s)
    lhx, lhy = phys(ikx * lam_h.coeffs), phys(iky * lam_h.coeffs)
    g_dot_lam = to_spectral(g1p * lhx + g2p * lhy, grid, warn=False)
    return fractional_laplacian(adv, s) - g_dot_lam


def check_commutator(
    pairs: list[tuple[SpectralField, SpectralField]],
    s: float,
    p1: float = 4.0,
    p2: float = 4.0,
    q1: float = 4.0,
    q2: float = 4.0,
) -> InequalityReport:
    """Fitted constant for the advective commutator bound.

    ‖Λ^s(g·∇h) − g·(Λ^s ∇h)‖ <= C(‖∇g‖_{p1}‖Λ^s h‖_{p2} + ‖Λ^s g‖_{q1}‖∇h‖_{q2})
    with g the divergence-free velocity induced by a vorticity sample (first
    element of each pair) and h a scalar sample.
    """
    if s <= 0:
        raise ValueError(f"requires s > 0, got s={s}")
    _check_holder(p1, p2, q1, q2)
    c_hat = 0.0
    for omega, h in pairs:
        grid = omega.grid
        n = grid.n
        g1, g2 = velocity_from_vorticity(omega)
        lhs = sobolev_norm(advective_commutator(omega, h, s), 0.0)
        lam_h = fractional_laplacian(h, s)

        def phys(c):
            return np.real(np.fft.ifft2(c) * (n * n))

        hx = phys(1j * grid.kx * h.coeffs)
        hy = phys(1j * grid.ky * h.coeffs)
        grad_g = _lp_vector_gradient(g1, g2, p1)
        lam_s_h_lp = lp_norm(lam_h, p2)
        lam_s_g_lq = _lp_vector(
            from_spectral(fractional_laplacian(g1, s)),
            from_spectral(fractional_laplacian(g2, s)),
            q1,
            n,
        )
        grad_h_lq = _lp_vector(hx, hy, q2, n)
        rhs = grad_g * lam_s_h_lp + lam_s_g_lq * grad_h_lq
        if rhs > 0:
            c_hat = max(c_hat, lhs / rhs)
    return InequalityReport("commutator", len(pairs), 0.0, fitted_constant=c_hat)


def _lp_vector_gradient(g1: SpectralField, g2: SpectralField, p: float) -> float:
    """L^p norm of the pointwise Frobenius magnitude of ∇g for vector g."""
    grid = g1.grid
    n = grid.n
    ikx, iky = 1j * grid.kx, 1j * grid.ky

    def phys(c):
        return np.real(np.fft.ifft2(c) * (n * n))

    comps = [
        phys(ikx * g1.coeffs),
        phys(iky * g1.coeffs),
        phys(ikx * g2.coeffs),
        phys(iky * g2.coeffs),
    ]
    mag = np.sqrt(sum(c * c for c in comps))
    if np.isinf(p):
        return float(np.max(mag))
    cell = (TWO_PI / n) ** 2
    return float((np.sum(mag**p) * cell) ** (1.0 / p))


# ---------------------------------------------------------------------------
# uniform Gronwall
# ---------------------------------------------------------------------------

def check_uniform_gronwall(
    g: np.ndarray, h: np.ndarray, dt: float, r: float, y0: float
) -> InequalityReport:
    """Verify y(t+r) <= (a3/r + a2) e^{a1} for y built from y' = g y + h.

    g and h are nonnegative piecewise-constant values on a uniform mesh of
    width dt; y is the exact solution with y(0) = y0 >= 0, so the
    differential hypothesis holds with equality by construction.  The window
    constants a1, a2, a3 are the maxima of the sliding window integrals of
    g, h, y (exact within each cell; r must be a positive multiple of dt).
    Violations beyond round-off slack indicate a construction bug and raise.
    """
    g = np.asarray(g, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if g.shape != h.shape or g.ndim != 1:
        raise ValueError("g and h must be 1D arrays of equal length")
    if np.any(g < 0) or np.any(h < 0) or y0 < 0:
        raise ValueError("uniform Gronwall requires nonnegative g, h, y0")
    steps = int(round(r / dt))
    if steps < 1 or abs(steps * dt - r) > 1e-12 * max(r, dt):
        raise ValueError(f"window r={r} must be a positive multiple of dt={dt}")
    n = len(g)
    if steps > n:
        raise ValueError("window longer than the sampled horizon")

    y = np.empty(n + 1)
    y[0] = y0
    cell_y = np.empty(n)  # exact ∫ y over each cell
    for j in range(n):
        gj, hj = g[j], h[j]
        if gj > 0:
            em1 = math.expm1(gj * dt)
            y[j + 1] = y[j] * (1.0 + em1) + hj * em1 / gj
            cell_y[j] = y[j] * em1 / gj + (hj / gj) * (em1 / gj - dt)
        else:
            y[j + 1] = y[j] + hj * dt
            cell_y[j] = y[j] * dt + 0.5 * hj * dt * dt
    cell_g = g * dt
    cell_h = h * dt

    def window_max(cells: np.ndarray) -> float:
        c = np.concatenate([[0.0], np.cumsum(cells)])
        return float(np.max(c[steps:] - c[: n - steps + 1]))

    a1, a2, a3 = window_max(cell_g), window_max(cell_h), window_max(cell_y)
    bound = (a3 / r + a2) * math.exp(a1)
    worst = -math.inf
    for i in range(n - steps + 1):
        margin = y[i + steps] - bound
        worst = max(worst, margin)
        if margin > ROUNDOFF_SLACK * max(bound, 1e-300):
            raise AssertionError(
                f"constructed trajectory violates the Gronwall conclusion at "
                f"t={(i + steps) * dt:.6g}: y={y[i + steps]:.6g} > bound={bound:.6g}"
            )
    return InequalityReport(
        "uniform_gronwall",
        n - steps + 1,
        worst,
        details={"a1": a1, "a2": a2, "a3": a3, "bound": bound},
    )


def random_samples(
    grid: GridSpec,
    count: int,
    rng: np.random.Generator,
    decay: float = 2.0,
    band: int | None = None,
) -> list[SpectralField]:
    """Independent random fields suitable for alias-free product checks."""
    if band is None:
        band = product_band(grid)
    return [random_field(grid, rng, decay=decay, band=band) for _ in range(count)]


def run_uniform_gronwall_sweep(
    rng: np.random.Generator, cases: int = 100, mesh: int = 64
) -> InequalityReport:
    """Random piecewise-constant (g, h) instances of the Gronwall check."""
    worst = -math.inf
    total = 0
    for _ in range(cases):
        dt = float(rng.uniform(0.01, 0.1))
        r = dt * int(rng.integers(2, mesh // 2))
        g = rng.uniform(0.0, 2.0, mesh)
        h = rng.uniform(0.0, 1.0, mesh)
        # sprinkle exact zeros to exercise the g = 0 branch
        g[rng.random(mesh) < 0.2] = 0.0
        y0 = float(rng.uniform(0.0, 3.0))
        rep = check_uniform_gronwall(g, h, dt, r, y0)
        worst = max(worst, rep.worst_margin)
        total += rep.samples
    return InequalityReport("uniform_gronwall", total, worst)
