"""Finite element solver and experiment harness for two-parameter
Kirchhoff-type Dirichlet problems on intervals and rectangles."""

from ._kernels import BACKEND as kernel_backend
from .errors import (
    AssemblyError,
    ConfigError,
    DomainError,
    FeasibilityError,
    IntegrationError,
    InvalidMeshError,
    KirchfemError,
    LinearSolveError,
    NoRootError,
    ShapeError,
    UnsupportedLawError,
)
from .fem import (
    AssembledOperators,
    FeFunction,
    Mesh,
    assemble,
    build_interval_mesh,
    build_rect_mesh,
    h1_norm,
    interpolate,
    riesz_solve,
)
from .model import (
    HypothesisReport,
    KirchhoffLaw,
    Nonlinearity,
    SamplingConfig,
    check_hypotheses,
    specimen_library,
)
from .solvers import (
    CriticalPoint,
    DivergenceReport,
    Problem,
    SolutionSet,
    SolverOptions,
    ThresholdEstimate,
    ThresholdOptions,
    estimate_threshold,
    fixed_point_solve,
    minimize_energy,
    newton_deflated,
    scale_invariance_check,
    standard_starts,
)
from .variational import (
    EnergyBreakdown,
    diffusion_energy,
    diffusion_gradient,
    energy_breakdown,
    invert_diffusion_gradient,
    perturbation_energy,
    perturbation_gradient,
    residual,
    source_energy,
    source_gradient,
)

__version__ = "0.1.0"
