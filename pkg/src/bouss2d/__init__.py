"""Pseudospectral 2D Boussinesq equations with fractional dissipation.

Solver for the temperature/vorticity form of the incompressible Boussinesq
system on the periodic 2π-square, with Λ^{2α}, Λ^{2β} dissipation handled by
exact integrating factors, plus the diagnostics used to probe the long-time
dynamics numerically: squeezing measurements, determining-modes slaving, and
closed-form bound calculators.
"""

from .spectral import (
    GridSpec,
    SpectralField,
    EigenIndex,
    make_grid,
    to_spectral,
    from_spectral,
    fractional_laplacian,
    sobolev_norm,
    lp_norm,
    inner_l2,
    dealias,
    eigen_index,
    project_low,
    project_high,
    random_field,
)
from .dynamics import (
    PhysParams,
    FlowState,
    Forcing,
    ForcingMode,
    make_forcing,
    velocity_from_vorticity,
    temperature_rhs,
    vorticity_rhs,
    velocity_sobolev_norm,
    project_low_velocity,
    project_high_velocity,
)
from .integrate import (
    IntegratorConfig,
    Stepper,
    BlowUpError,
    step,
    cfl_dt,
    spin_up,
    SpinUpResult,
)
from .bounds import (
    BoundReport,
    NormRecord,
    compute_aggregates,
    compute_M,
    compute_N,
    determining_threshold,
    rho_m,
    dimension_bound,
    gauss_constant,
    monitor_apriori,
    build_bound_report,
    record_norms,
)
from .experiments import (
    ExperimentConfig,
    SqueezingResult,
    DeterminingResult,
    GronwallRecord,
    run_squeezing,
    run_determining_modes,
    run_trajectory_pair,
)
from .inequalities import (
    InequalityReport,
    sharp_sobolev_constant,
    check_poincare,
    check_interpolation,
    check_sobolev,
    check_kato_ponce,
    check_commutator,
    check_uniform_gronwall,
)

__version__ = "0.1.0"
