"""Sub-diffusion with a regularized Prabhakar time derivative.

Closed-form Green's-function solution of the first initial-boundary
value problem on a strip, the special functions it needs, and an
independent convolution-quadrature finite-difference oracle.
"""

from .errors import (
    DivergentParameters,
    DomainError,
    GridMismatch,
    MissingDerivative,
    NodeFailure,
    NonConvergence,
    PathMismatch,
    QuadratureFailure,
    SingularSystem,
    SubgreenError,
    UnfoldablePole,
)
from .greens import (
    DomainSpec,
    KernelValue,
    boundary_kernel_gxi,
    e12_flux_params,
    e12_initial_params,
    e12_interior_params,
    free_space_v,
    green_g,
    green_g_tilde,
    omega_kernel,
    series_cutoff,
)
from .operators import (
    QuadratureSpec,
    TimeFunction,
    prabhakar_deriv_caputo,
    prabhakar_deriv_rl,
    prabhakar_integral,
    derivative_relation_residual,
    vanishing_integral_limit,
)
from .oracle import FdGrid, WeightTable, build_weights, fd_apply_operator, fd_solve
from .solver import (
    ProblemSpec,
    SolutionField,
    SolutionReport,
    eigen_forced_linear,
    eigen_relaxation,
    max_rel_diff,
    solve_u,
    solve_y,
    solve_z,
    verify_solution,
)
from .specfun import (
    E12Params,
    FracParams,
    SeriesControl,
    bivariate_e12,
    kernel_antiderivative,
    memory_kernel,
    pochhammer,
    prabhakar_ml,
    recip_gamma,
    wright_e,
)

__version__ = "0.1.0"
