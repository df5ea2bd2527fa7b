"""Trajectory-pair experiments probing the long-time contraction structure.

* run_squeezing: evolve perturbed pairs from near-attractor states and
  measure the growth factor on the full difference, y(T)/y(0), against the
  contraction of its high-mode part, z_m(T)/y(0), across a sweep of m.

* run_determining_modes: slave one trajectory to another by overwriting its
  first m modes (temperature by the scalar projector, velocity by the
  componentwise velocity projector) after every step, and track the decay of
  the unslaved remainder d(t) = ‖Q_m w‖² + ‖Q_m η‖².

* run_trajectory_pair: record the difference energy y(t), its dissipation
  integral, and the trajectory-dependent exponential factor that controls it,
  fitting the free constant from the run.

All randomness is drawn from child seeds of the configured seed, so results
are reproducible from (config, seed) alone; parallel workers only ever
compute independent items that are merged back in config order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    FlowState,
    Forcing,
    PhysParams,
    make_forcing,
    project_high_velocity,
    project_low_velocity,
    velocity_sobolev_norm,
)
from .integrate import BlowUpError, Stepper, cfl_dt, spin_up
from .spectral import (
    GridSpec,
    SpectralField,
    make_grid,
    project_high,
    project_low,
    random_field,
    sobolev_norm,
)

#: d(t) growth beyond this factor of d(0) marks m as non-determining.
GROWTH_ABORT_FACTOR = 1e6


@dataclass
class ExperimentConfig:
    """Shared configuration of the pairwise experiments."""

    n: int
    params: PhysParams
    forcing_modes: tuple
    spin_up: float = 0.0
    horizon: float = 10.0
    eps: float = 1e-3
    m_list: tuple[int, ...] = ()
    pairs: int = 1
    seed: int = 0
    dt: float | None = None
    scheme: str = "ifrk4"
    cfl_safety: float = 0.5
    s1: float = 1.0
    s2: float = 1.0
    record_interval: int = 5
    sync_tol: float = 1e-6
    init_amplitude: float = 0.5
    init_decay: float = 2.0

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError(f"perturbation amplitude must be positive, got {self.eps}")
        if self.horizon <= 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.pairs < 1:
            raise ValueError(f"need at least one pair, got {self.pairs}")


def _setup(config: ExperimentConfig):
    grid = make_grid(config.n)
    forcing = make_forcing(config.forcing_modes, grid, config.params, s1=config.s1)
    ei = grid.eigen_index()
    for m in config.m_list:
        ei.check_m(m)
    return grid, forcing


def _random_state(grid: GridSpec, rng: np.random.Generator, amplitude: float, decay: float):
    theta = amplitude * random_field(grid, rng, decay=decay)
    omega = amplitude * random_field(grid, rng, decay=decay)
    return FlowState(theta, omega, 0.0)


def _base_state(config: ExperimentConfig, grid: GridSpec, forcing, rng):
    """Spin a seeded random state toward the attractor; fixed dt thereafter."""
    init = _random_state(grid, rng, config.init_amplitude, config.init_decay)
    dt = config.dt if config.dt is not None else cfl_dt(init, config.params, config.cfl_safety)
    if config.spin_up > 0:
        res = spin_up(init, forcing, config.params, config.spin_up, dt=dt, scheme=config.scheme)
        if res.blew_up:
            raise BlowUpError(res.state.t, res.state)
        return res.state, dt, res.plateaued
    return init, dt, False


def pair_y(base: FlowState, other: FlowState, s1: float, s2: float) -> float:
    """y = ‖Λ^{s2} w‖² + ‖Λ^{s1} η‖² for the difference (η, w)."""
    eta = base.theta - other.theta
    domega = base.omega - other.omega
    return velocity_sobolev_norm(domega, s2) ** 2 + sobolev_norm(eta, s1) ** 2


def pair_z(base: FlowState, other: FlowState, m: int, s1: float, s2: float) -> float:
    """z = ‖Λ^{s2} Q_m w‖² + ‖Λ^{s1} Q_m η‖² (velocity projector for w)."""
    eta = project_high(base.theta - other.theta, m)
    domega = project_high_velocity(base.omega - other.omega, m)
    return velocity_sobolev_norm(domega, s2) ** 2 + sobolev_norm(eta, s1) ** 2


def _perturb(
    base: FlowState, rng: np.random.Generator, eps: float, s1: float, s2: float, decay: float
) -> FlowState:
    """Add a random mean-zero perturbation with y(0) = eps² exactly."""
    dtheta = random_field(base.grid, rng, decay=decay, normalize=False)
    domega = random_field(base.grid, rng, decay=decay, normalize=False)
    raw = velocity_sobolev_norm(domega, s2) ** 2 + sobolev_norm(dtheta, s1) ** 2
    scale = eps / math.sqrt(raw)
    return FlowState(base.theta + scale * dtheta, base.omega + scale * domega, base.t)


def spearman(x, y) -> float:
    """Spearman rank correlation with average ranks on ties; 0 for constant input."""
    rx, ry = _ranks(x), _ranks(y)
    sx, sy = np.std(rx), np.std(ry)
    if sx == 0 or sy == 0:
        return 0.0
    return float(np.mean((rx - np.mean(rx)) * (ry - np.mean(ry))) / (sx * sy))


def _ranks(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    order = np.argsort(v, kind="stable")
    ranks = np.empty(len(v))
    ranks[order] = np.arange(1, len(v) + 1, dtype=np.float64)
    for val in np.unique(v):
        mask = v == val
        if np.count_nonzero(mask) > 1:
            ranks[mask] = ranks[mask].mean()
    return ranks


# ---------------------------------------------------------------------------
# squeezing
# ---------------------------------------------------------------------------

@dataclass
class PairSqueeze:
    pair: int
    y0: float
    y_end: float
    z_end: dict[int, float]
    t_series: np.ndarray
    y_series: np.ndarray
    z_series: dict[int, np.ndarray]
    plateaued: bool
    blew_up: bool = False

    @property
    def undefined(self) -> bool:
        return self.y0 == 0.0


@dataclass
class SqueezingResult:
    config: ExperimentConfig
    pairs: list[PairSqueeze]
    l_hat: float | None  # max y(T)/y(0); None if every pair degenerate
    delta_hat: dict[int, float | None]
    delta_spearman: float

    def dimension_inputs(self) -> tuple[int, float, float] | None:
        """(m, l, δ) for the dimension bound: smallest tested m with δ̂ < 1.

        l is clamped up to 1 (the bound needs l >= 1, a contracting flow may
        measure less).  None when no tested m contracts or ratios undefined.
        """
        if self.l_hat is None:
            return None
        for m in sorted(self.delta_hat):
            d = self.delta_hat[m]
            if d is not None and 0.0 < d < 1.0:
                return m, max(self.l_hat, 1.0), d
        return None


def _squeeze_one_pair(config: ExperimentConfig, grid, forcing, pair_idx: int, child_seed):
    rng = np.random.default_rng(child_seed)
    base, dt, plateaued = _base_state(config, grid, forcing, rng)
    pert = _perturb(base, rng, config.eps, config.s1, config.s2, config.init_decay)
    stepper = Stepper(grid, config.params, forcing, dt, config.scheme)
    n_steps = max(1, int(round(config.horizon / dt)))
    s1, s2 = config.s1, config.s2
    m_list = tuple(config.m_list)

    y0 = pair_y(base, pert, s1, s2)
    t_series = [0.0]
    y_series = [y0]
    z_series = {m: [pair_z(base, pert, m, s1, s2)] for m in m_list}
    a, b = base, pert
    try:
        for i in range(n_steps):
            a = stepper.advance(a)
            b = stepper.advance(b)
            if (i + 1) % config.record_interval == 0 or i == n_steps - 1:
                t_series.append(a.t - base.t)
                y_series.append(pair_y(a, b, s1, s2))
                for m in m_list:
                    z_series[m].append(pair_z(a, b, m, s1, s2))
        blew_up = False
    except BlowUpError:
        blew_up = True
    return PairSqueeze(
        pair=pair_idx,
        y0=y0,
        y_end=y_series[-1],
        z_end={m: z_series[m][-1] for m in m_list},
        t_series=np.asarray(t_series),
        y_series=np.asarray(y_series),
        z_series={m: np.asarray(v) for m, v in z_series.items()},
        plateaued=plateaued,
        blew_up=blew_up,
    )


def run_squeezing(config: ExperimentConfig, threads: int = 1) -> SqueezingResult:
    """Measure l̂ = max y(T)/y(0) and δ̂(m) = max z_m(T)/y(0) over perturbed pairs."""
    grid, forcing = _setup(config)
    children = np.random.SeedSequence(config.seed).spawn(config.pairs)
    jobs = [(i, children[i]) for i in range(config.pairs)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(
                ex.map(lambda job: _squeeze_one_pair(config, grid, forcing, *job), jobs)
            )
    else:
        results = [_squeeze_one_pair(config, grid, forcing, *job) for job in jobs]

    usable = [p for p in results if not p.undefined and not p.blew_up]
    l_hat = max((p.y_end / p.y0 for p in usable), default=None)
    delta_hat: dict[int, float | None] = {}
    for m in config.m_list:
        delta_hat[m] = max((p.z_end[m] / p.y0 for p in usable), default=None)
    ms = sorted(m for m in delta_hat if delta_hat[m] is not None)
    rho = spearman(ms, [delta_hat[m] for m in ms]) if len(ms) >= 3 else 0.0
    return SqueezingResult(config, results, l_hat, delta_hat, rho)


# ---------------------------------------------------------------------------
# determining modes
# ---------------------------------------------------------------------------

def slave_to_master(slave: FlowState, master: FlowState, m: int) -> FlowState:
    """Overwrite the first m modes of the slave with the master's.

    Temperature uses the scalar projector; the velocity condition is applied
    through the vorticity with the swapped sin/cos masks, which makes the
    replacement an exact componentwise selection (bitwise reproducible).
    """
    theta = project_low(master.theta, m) + project_high(slave.theta, m)
    omega = project_low_velocity(master.omega, m) + project_high_velocity(slave.omega, m)
    return FlowState(theta, omega, slave.t)


def d_norm(master: FlowState, slave: FlowState, m: int) -> float:
    """d = ‖Q_m w‖² + ‖Q_m η‖² in L² (velocity projector for w)."""
    eta = project_high(master.theta - slave.theta, m)
    domega = project_high_velocity(master.omega - slave.omega, m)
    return velocity_sobolev_norm(domega, 0.0) ** 2 + sobolev_norm(eta, 0.0) ** 2


@dataclass
class ModeRun:
    m: int
    t_series: np.ndarray
    d_series: np.ndarray
    rate: float  # decay rate of d (positive = decaying); inf if d hits 0
    synchronized: bool
    non_determining: bool = False


@dataclass
class DeterminingResult:
    config: ExperimentConfig
    runs: dict[int, ModeRun]
    m_star: int | None  # smallest tested m with it and every larger tested m synchronized
    rate_spearman: float
    plateaued: bool


def _fit_decay_rate(t: np.ndarray, d: np.ndarray, zero_floor: float = 0.0) -> float:
    """Least-squares slope of log d over the final half horizon.

    Values at or below zero_floor count as zero: double precision cannot
    follow the decay below the round-off level of the slaved difference, so
    a floor value inside the fit window short-circuits to rate = +inf
    ("synchronized to machine zero"), exactly like a literal d = 0.
    """
    half = t >= (t[0] + 0.5 * (t[-1] - t[0]))
    tt, dd = t[half], d[half]
    keep = dd > max(zero_floor, 0.0)
    if np.count_nonzero(keep) < 2:
        return math.inf if len(tt) else math.nan
    slope = np.polyfit(tt[keep], np.log(dd[keep]), 1)[0]
    return float(-slope)


def _determine_one_mode(config, grid, forcing, master0, pert, dt, m):
    params = config.params
    stepper = Stepper(grid, params, forcing, dt, config.scheme)
    state_scale = math.sqrt(
        sobolev_norm(master0.theta, 0.0) ** 2 + velocity_sobolev_norm(master0.omega, 0.0) ** 2
    )
    zero_floor = (1e-13 * state_scale) ** 2
    slave = FlowState(
        master0.theta + project_high(pert.theta, m),
        master0.omega + project_high_velocity(pert.omega, m),
        master0.t,
    )
    n_steps = max(1, int(round(config.horizon / dt)))
    d0 = d_norm(master0, slave, m)
    t_series = [0.0]
    d_series = [d0]
    master = master0
    non_det = False
    for i in range(n_steps):
        master = stepper.advance(master)
        slave = stepper.advance(slave)
        slave = slave_to_master(slave, master, m)
        if (i + 1) % config.record_interval == 0 or i == n_steps - 1:
            d = d_norm(master, slave, m)
            t_series.append(master.t - master0.t)
            d_series.append(d)
            if d0 > 0 and d > GROWTH_ABORT_FACTOR * d0:
                non_det = True
                break
    t_arr, d_arr = np.asarray(t_series), np.asarray(d_series)
    rate = math.inf if d0 == 0.0 else _fit_decay_rate(t_arr, d_arr, zero_floor)
    synchronized = (d0 == 0.0) or (not non_det and d_arr[-1] < config.sync_tol * d0)
    return ModeRun(m, t_arr, d_arr, rate, synchronized, non_det)


def run_determining_modes(config: ExperimentConfig, threads: int = 1) -> DeterminingResult:
    """Per-step slaving experiment across the configured m sweep."""
    if not config.m_list:
        raise ValueError("determining-modes experiment needs a nonempty m_list")
    grid, forcing = _setup(config)
    children = np.random.SeedSequence(config.seed).spawn(2)
    rng = np.random.default_rng(children[0])
    master0, dt, plateaued = _base_state(config, grid, forcing, rng)
    # one shared unscaled perturbation; each m keeps only its Q_m part
    prng = np.random.default_rng(children[1])
    dtheta = random_field(grid, prng, decay=config.init_decay, normalize=False)
    domega = random_field(grid, prng, decay=config.init_decay, normalize=False)
    raw = velocity_sobolev_norm(domega, 0.0) ** 2 + sobolev_norm(dtheta, 0.0) ** 2
    scale = config.eps / math.sqrt(raw)
    pert = FlowState(scale * dtheta, scale * domega, master0.t)

    jobs = list(config.m_list)
    worker = lambda m: _determine_one_mode(config, grid, forcing, master0, pert, dt, m)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            runs = {m: r for m, r in zip(jobs, ex.map(worker, jobs))}
    else:
        runs = {m: worker(m) for m in jobs}

    m_sorted = sorted(runs)
    m_star = None
    for i, m in enumerate(m_sorted):
        if all(runs[mm].synchronized for mm in m_sorted[i:]):
            m_star = m
            break
    finite = [m for m in m_sorted if not math.isnan(runs[m].rate)]
    rho = spearman(finite, [runs[m].rate for m in finite]) if len(finite) >= 3 else 0.0
    return DeterminingResult(config, runs, m_star, rho, plateaued)


# ---------------------------------------------------------------------------
# trajectory-pair Gronwall record
# ---------------------------------------------------------------------------

@dataclass
class GronwallRecord:
    config: ExperimentConfig
    t: np.ndarray
    y: np.ndarray
    diss_integral: np.ndarray  # σ ∫ (‖Λ^{s2+α} w‖² + ‖Λ^{s1+β} η‖²)
    growth_integral: np.ndarray  # ∫ (‖Λ^{s2+α}u1‖² + ‖Λ^{s2+α}u2‖² + ‖Λ^{s1+β}θ2‖²)
    log_c_hat: float
    holds: bool
    plateaued: bool

    @property
    def c_hat(self) -> float:
        try:
            return math.exp(self.log_c_hat)
        except OverflowError:
            return math.inf


def run_trajectory_pair(config: ExperimentConfig) -> GronwallRecord:
    """Track y(t) against y(0) · Ĉ · exp(∫ growth) with Ĉ fitted from the run.

    The left side includes the dissipation integral, so the fitted constant
    makes the full inequality an identity at its argmax and a bound
    everywhere else; everything is fitted in log space to avoid overflow of
    the exponential factor.
    """
    grid, forcing = _setup(config)
    params = config.params
    child = np.random.SeedSequence(config.seed).spawn(1)[0]
    rng = np.random.default_rng(child)
    base, dt, plateaued = _base_state(config, grid, forcing, rng)
    pert = _perturb(base, rng, config.eps, config.s1, config.s2, config.init_decay)
    stepper = Stepper(grid, params, forcing, dt, config.scheme)
    n_steps = max(1, int(round(config.horizon / dt)))
    s1, s2 = config.s1, config.s2
    sigma = params.sigma

    def diss_integrand(sa: FlowState, sb: FlowState) -> float:
        eta = sa.theta - sb.theta
        dom = sa.omega - sb.omega
        return (
            velocity_sobolev_norm(dom, s2 + params.alpha) ** 2
            + sobolev_norm(eta, s1 + params.beta) ** 2
        )

    def growth_integrand(sa: FlowState, sb: FlowState) -> float:
        return (
            velocity_sobolev_norm(sa.omega, s2 + params.alpha) ** 2
            + velocity_sobolev_norm(sb.omega, s2 + params.alpha) ** 2
            + sobolev_norm(sb.theta, s1 + params.beta) ** 2
        )

    a, b = base, pert
    t = [0.0]
    y = [pair_y(a, b, s1, s2)]
    diss = [0.0]
    growth = [0.0]
    g_prev = growth_integrand(a, b)
    d_prev = diss_integrand(a, b)
    diss_acc = 0.0
    growth_acc = 0.0
    for i in range(n_steps):
        a = stepper.advance(a)
        b = stepper.advance(b)
        g_cur = growth_integrand(a, b)
        d_cur = diss_integrand(a, b)
        growth_acc += 0.5 * dt * (g_prev + g_cur)
        diss_acc += 0.5 * dt * (d_prev + d_cur)
        g_prev, d_prev = g_cur, d_cur
        if (i + 1) % config.record_interval == 0 or i == n_steps - 1:
            t.append(a.t - base.t)
            y.append(pair_y(a, b, s1, s2))
            diss.append(sigma * diss_acc)
            growth.append(growth_acc)
    t_arr = np.asarray(t)
    y_arr = np.asarray(y)
    diss_arr = np.asarray(diss)
    growth_arr = np.asarray(growth)

    if y_arr[0] == 0.0:
        return GronwallRecord(config, t_arr, y_arr, diss_arr, growth_arr, -math.inf, True, plateaued)
    with np.errstate(divide="ignore"):
        lhs_log = np.log(y_arr + diss_arr)
    log_c = float(np.max(lhs_log - math.log(y_arr[0]) - growth_arr))
    holds = bool(np.all(lhs_log <= math.log(y_arr[0]) + log_c + growth_arr + 1e-9))
    return GronwallRecord(config, t_arr, y_arr, diss_arr, growth_arr, log_c, holds, plateaued)
