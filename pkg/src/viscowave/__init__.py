"""Spectral solver and asymptotic checks for the viscous wave equation.

The equation is eps u_xxt + u_xx - u_tt - a u_t = F on [0, pi] with
Neumann flux data; eps = 0 gives the damped wave limit.  The package
evaluates the Green-function cosine series, solves initial/boundary
value problems spectrally, cross-checks against an implicit
finite-difference oracle, and measures how well the small-eps error
bounds hold up numerically.
"""

from .errors import (
    ConfigError,
    ConvergenceError,
    GridMismatchError,
    TruncationError,
    ValidationError,
)
from .kernels import (
    DEGENERACY_TOL,
    GreenValue,
    MediumParams,
    ModeKernel,
    Regime,
    Truncation,
    classify_mode,
    cosine_series_tail,
    decay_rate,
    green_function,
    limit_kernel,
    modal_kernel,
    mode_thresholds,
    zero_mode_response,
)
from .problem import (
    PROBLEM_BUNDLES,
    BoundaryFlux,
    DomainScale,
    FieldSampling,
    Grid,
    NeumannProblem,
    bundle_problem,
    dehomogenize,
    homogenize,
    lifting_field,
    read_field_csv,
    rescale_to_pi,
    source_mode_gap,
    write_field_csv,
)
from .solver import (
    CosineSpectrum,
    SolutionField,
    boundary_flux_error,
    cosine_analysis,
    cosine_synthesis,
    forced_solution,
    initial_displacement_solution,
    initial_velocity_solution,
    max_resolved_modes,
    pde_residual,
    solve,
    solution_rate,
)
from .oracle import OracleConfig, discrete_energy, integrate, neumann_laplacian
from .asymptotics import (
    BOUND_IDS,
    DEFAULT_EPS_SWEEP,
    SWEEP_TRUNCATION,
    BoundConstants,
    BoundExponents,
    SweepReport,
    SweepRow,
    bound_shape,
    data_constants,
    default_pairs,
    default_times,
    fit_constants,
    gamma_tail_profile,
    incomplete_gamma,
    kernel_gap,
    proof_constants,
    regime_classify,
    scaled_green_norm,
    solution_gap,
)

__version__ = "0.1.0"
