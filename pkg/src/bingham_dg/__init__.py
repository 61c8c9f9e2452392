"""Implicit DG solver for 1D shallow water with regularized Bingham rheology."""

from .assembly import (
    BlockTridiagonal,
    BoundarySpec,
    Dirichlet,
    Neumann,
    ProblemSetup,
    SideBC,
    SolutionState,
    assemble,
    boundary_traces,
    jacobian_blocks,
    residual_E,
    residual_V,
)
from .benchmarks import (
    BenchmarkSpec,
    ErrorReport,
    error_norms,
    setup_constant_free_surface,
    setup_dam_break,
    setup_parallel_free_surface,
    stoker_solution,
    yield_threshold,
)
from .constitutive import (
    PhysicalParams,
    Regularization,
    RegularizationConfig,
    active_fraction,
    newtonian_stress,
    plastic_stress,
    plastic_stress_derivative,
    smooth_max,
    total_stress_and_derivative,
)
from .errors import (
    BinghamDGError,
    ConfigError,
    InvalidArgumentError,
    SimulationAborted,
    SolverError,
    StateValidityError,
)
from .fluxes import central_flux, hll_flux, hll_flux_derivative, physical_flux, wave_speeds
from .mesh_basis import (
    BasisSet,
    CoefficientField,
    Mesh1D,
    build_uniform_mesh,
    evaluate_field,
    legendre_basis,
    project_function,
)
from .time_newton import (
    NewtonConfig,
    RunStats,
    StepStats,
    continuation_step,
    linear_solve,
    newton_solve,
    residual_norm,
    run_simulation,
    step,
)

__version__ = "0.1.0"
