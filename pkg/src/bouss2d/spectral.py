"""Fourier representation of mean-zero periodic fields on the 2π-square torus.

Fields are stored as full (n, n) complex coefficient arrays in numpy FFT
layout, with the convention

    f(x) = sum_k  fhat(k) exp(i k.x),      fhat(k) = (2π)^{-2} ∫ f e^{-i k.x} dx,

so that Parseval reads ∫ |f|² dx = (2π)² Σ |fhat(k)|².  The mean mode k=0 is
identically zero for every field produced here; that makes negative powers of
the fractional Laplacian well defined and puts the first eigenvalue of
Λ = (−Δ)^{1/2} at exactly 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi

#: Volume of the domain [0, 2π]².
DOMAIN_AREA = TWO_PI * TWO_PI

#: Number of times to_spectral silently removed a nonzero mean (diagnostics).
mean_removals = 0


class GridSpec:
    """Uniform n×n collocation grid on [0, 2π]² with 2/3-rule dealiasing.

    Precomputes integer wavenumber arrays, |k| multipliers and the dealias
    mask shared by every field on the grid.  Grids compare equal by
    resolution; the domain is fixed to the 2π square so λ₁ = 1.
    """

    def __init__(self, n: int):
        if n < 8 or n % 2 != 0:
            raise ValueError(f"grid resolution must be even and >= 8, got n={n}")
        self.n = n
        self.domain_size = TWO_PI
        self.dealias_cut = n // 3

        k = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
        self.kx = k[:, None]
        self.ky = k[None, :]
        self.k2 = (self.kx * self.kx + self.ky * self.ky).astype(np.float64)
        self.kmag = np.sqrt(self.k2)
        self.dealias_mask = (np.abs(self.kx) <= self.dealias_cut) & (
            np.abs(self.ky) <= self.dealias_cut
        )
        # 1D collocation points, x[i] = 2π i / n
        self.x = TWO_PI * np.arange(n) / n
        self._eigen: EigenIndex | None = None

    def eigen_index(self) -> "EigenIndex":
        """Eigenfunction enumeration of Λ on this grid (cached)."""
        if self._eigen is None:
            self._eigen = EigenIndex(self)
        return self._eigen

    def __eq__(self, other) -> bool:
        return isinstance(other, GridSpec) and other.n == self.n

    def __hash__(self) -> int:
        return hash(("GridSpec", self.n))

    def __repr__(self) -> str:
        return f"GridSpec(n={self.n}, dealias_cut={self.dealias_cut})"


def make_grid(n: int) -> GridSpec:
    """Build a GridSpec for an even resolution n >= 8."""
    return GridSpec(n)


@dataclass
class SpectralField:
    """Mean-zero real scalar field stored as Fourier coefficients.

    Conjugate symmetry coeffs(-k) == conj(coeffs(k)) is maintained by all
    operations; the k = 0 coefficient is always exactly zero.
    """

    grid: GridSpec
    coeffs: np.ndarray

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy())

    def values(self) -> np.ndarray:
        return from_spectral(self)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, c: float) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * c)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.grid, -self.coeffs)


def _check_same_grid(a: SpectralField, b: SpectralField) -> None:
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


def zero_field(grid: GridSpec) -> SpectralField:
    return SpectralField(grid, np.zeros((grid.n, grid.n), dtype=np.complex128))


def to_spectral(
    samples: np.ndarray, grid: GridSpec, mean_tol: float = 1e-13, warn: bool = True
) -> SpectralField:
    """Transform physical samples to coefficients, removing any mean.

    A nonzero mean (relative magnitude above mean_tol) is removed; with warn
    it is reported and counted in the module-level ``mean_removals`` counter.
    Internal callers that form products of mean-zero fields pass warn=False,
    since the product mean is annihilated by every Λ^s, s > 0, anyway.
    """
    global mean_removals
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape != (grid.n, grid.n):
        raise ValueError(f"sample shape {samples.shape} does not match grid n={grid.n}")
    coeffs = np.fft.fft2(samples) / (grid.n * grid.n)
    mean = coeffs[0, 0]
    scale = np.max(np.abs(samples)) if samples.size else 0.0
    if warn and abs(mean) > mean_tol * max(scale, 1.0):
        mean_removals += 1
        warnings.warn(f"removed nonzero mean {mean.real:.3e} from input samples")
    coeffs[0, 0] = 0.0
    return SpectralField(grid, coeffs)


def from_spectral(field: SpectralField) -> np.ndarray:
    """Evaluate the field on the collocation grid (real part of the inverse FFT)."""
    n = field.grid.n
    return np.real(np.fft.ifft2(field.coeffs) * (n * n))


def fractional_laplacian(field: SpectralField, s: float) -> SpectralField:
    """Apply Λ^s, the Fourier multiplier |k|^s; the k=0 mode stays zero."""
    mult = _lambda_power(field.grid, s)
    return SpectralField(field.grid, field.coeffs * mult)


def _lambda_power(grid: GridSpec, s: float) -> np.ndarray:
    """|k|^s with the k=0 entry forced to 0 (valid for any real s on mean-zero fields)."""
    if s == 0.0:
        mult = np.ones_like(grid.kmag)
    else:
        kmag = grid.kmag.copy()
        kmag[0, 0] = 1.0  # placeholder, overwritten below
        mult = kmag**s
    mult[0, 0] = 0.0
    return mult


def sobolev_norm(field: SpectralField, s: float) -> float:
    """H^s norm, ( (2π)² Σ |k|^{2s} |fhat(k)|² )^{1/2}."""
    mult = _lambda_power(field.grid, 2.0 * s)
    return float(np.sqrt(DOMAIN_AREA * np.sum(mult * np.abs(field.coeffs) ** 2)))


def inner_l2(a: SpectralField, b: SpectralField) -> float:
    """Real L² inner product ⟨a, b⟩ = ∫ a b dx via Parseval."""
    _check_same_grid(a, b)
    ar, ai = a.coeffs.real, a.coeffs.imag
    br, bi = b.coeffs.real, b.coeffs.imag
    return float(DOMAIN_AREA * np.sum(ar * br + ai * bi))


def lp_norm(field: SpectralField, p: float) -> float:
    """L^p norm by quadrature on the physical grid; p = inf gives max |f|."""
    if p < 1:
        raise ValueError(f"L^p norm requires p >= 1, got p={p}")
    vals = from_spectral(field)
    if np.isinf(p):
        return float(np.max(np.abs(vals)))
    cell = (TWO_PI / field.grid.n) ** 2
    return float((np.sum(np.abs(vals) ** p) * cell) ** (1.0 / p))


def dealias(field: SpectralField) -> SpectralField:
    """Zero every mode with max(|k1|, |k2|) beyond the 2/3-rule cut."""
    return SpectralField(field.grid, np.where(field.grid.dealias_mask, field.coeffs, 0.0))


class EigenIndex:
    """Deterministic enumeration of the real eigenfunctions of Λ.

    Each half-lattice wavevector k (k1 > 0, or k1 = 0 and k2 > 0) inside the
    dealias square contributes sin(k.x) and cos(k.x), both with eigenvalue
    |k|.  Entries are sorted by (|k|, k1, k2, sin-before-cos), which fixes the
    meaning of "the first m eigenfunctions" used by the projections.
    """

    def __init__(self, grid: GridSpec):
        self.grid = grid
        cut = grid.dealias_cut
        reps = []
        for k1 in range(0, cut + 1):
            for k2 in range(-cut, cut + 1):
                if k1 == 0 and k2 <= 0:
                    continue
                reps.append((k1 * k1 + k2 * k2, k1, k2))
        reps.sort()
        self.count = 2 * len(reps)

        # entry arrays, 0-based position -> (k1, k2, tag); tag 0 = sin, 1 = cos
        ks = np.empty((self.count, 2), dtype=np.int64)
        tags = np.empty(self.count, dtype=np.int64)
        lam = np.empty(self.count, dtype=np.float64)
        # 1-based eigen position of each sin/cos component on the full lattice;
        # sentinel count+1 marks modes outside the index (k=0 and beyond the cut)
        n = grid.n
        sentinel = self.count + 1
        order_sin = np.full((n, n), sentinel, dtype=np.int64)
        order_cos = np.full((n, n), sentinel, dtype=np.int64)
        for i, (k2sum, k1, k2) in enumerate(reps):
            p_sin, p_cos = 2 * i + 1, 2 * i + 2
            ks[2 * i] = ks[2 * i + 1] = (k1, k2)
            tags[2 * i], tags[2 * i + 1] = 0, 1
            lam[2 * i] = lam[2 * i + 1] = np.sqrt(k2sum)
            for kk1, kk2 in ((k1, k2), (-k1, -k2)):
                order_sin[kk1 % n, kk2 % n] = p_sin
                order_cos[kk1 % n, kk2 % n] = p_cos
        self.wavevectors = ks
        self.tags = tags
        self.lam = lam
        self.order_sin = order_sin
        self.order_cos = order_cos

    def eigenvalue_of(self, m: int) -> float:
        """λ_m for 1-based m."""
        if not 1 <= m <= self.count:
            raise ValueError(f"eigen position m={m} outside 1..{self.count}")
        return float(self.lam[m - 1])

    def check_m(self, m: int) -> None:
        if not 0 <= m <= self.count:
            raise ValueError(f"mode count m={m} outside 0..{self.count}")


def eigen_index(grid: GridSpec) -> EigenIndex:
    return grid.eigen_index()


def project_low(field: SpectralField, m: int) -> SpectralField:
    """P_m: keep the components along the first m eigenfunctions of Λ.

    The cos amplitude of a real field lives in Re(fhat) and the sin amplitude
    in Im(fhat), so P_m is an exact selection mask on the real and imaginary
    parts separately (idempotent bitwise).
    """
    ei = field.grid.eigen_index()
    ei.check_m(m)
    re = np.where(ei.order_cos <= m, field.coeffs.real, 0.0)
    im = np.where(ei.order_sin <= m, field.coeffs.imag, 0.0)
    return SpectralField(field.grid, re + 1j * im)


def project_high(field: SpectralField, m: int) -> SpectralField:
    """Q_m = I − P_m; keeps everything not kept by project_low."""
    ei = field.grid.eigen_index()
    ei.check_m(m)
    re = np.where(ei.order_cos <= m, 0.0, field.coeffs.real)
    im = np.where(ei.order_sin <= m, 0.0, field.coeffs.imag)
    return SpectralField(field.grid, re + 1j * im)


def random_field(
    grid: GridSpec,
    rng: np.random.Generator,
    decay: float = 2.0,
    band: int | None = None,
    normalize: bool = True,
) -> SpectralField:
    """Random mean-zero field with |k|^(-decay) spectral envelope.

    Coefficients are i.i.d. complex Gaussian inside max(|k1|,|k2|) <= band
    (default: the dealias cut), then conjugate-symmetrized.  With normalize
    the L² norm is scaled to 1.
    """
    n = grid.n
    if band is None:
        band = grid.dealias_cut
    if band > n // 2 - 1:
        raise ValueError(f"band {band} too wide for grid n={n}")
    c = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    mask = (np.abs(grid.kx) <= band) & (np.abs(grid.ky) <= band)
    c = np.where(mask, c, 0.0)
    env = _lambda_power(grid, -decay)
    c *= env
    # enforce fhat(-k) = conj(fhat(k))
    c_neg = np.roll(c[::-1, ::-1], shift=(1, 1), axis=(0, 1))
    c = 0.5 * (c + np.conj(c_neg))
    c[0, 0] = 0.0
    f = SpectralField(grid, c)
    if normalize:
        nrm = sobolev_norm(f, 0.0)
        if nrm > 0:
            f = f * (1.0 / nrm)
    return f
