"""Exception hierarchy shared by all kirchfem modules."""


class KirchfemError(Exception):
    """Base class for all errors raised by this package."""


class InvalidMeshError(KirchfemError):
    """Mesh construction parameters violate a precondition."""


class AssemblyError(KirchfemError):
    """Element integration failed, e.g. a degenerate element."""


class ShapeError(KirchfemError):
    """Vector or matrix dimensions do not match the discretization."""


class LinearSolveError(KirchfemError):
    """Sparse factorization or solve broke down."""


class DomainError(KirchfemError):
    """Argument outside the mathematical domain of an evaluator."""


class IntegrationError(KirchfemError):
    """Adaptive quadrature failed to converge within its depth budget."""


class UnsupportedLawError(KirchfemError):
    """Operation requires a structural property the coefficient law lacks."""


class NoRootError(KirchfemError):
    """Scalar root bracketing exceeded its range without a sign change."""


class FeasibilityError(KirchfemError):
    """No admissible probe was found, e.g. no function with positive source potential."""


class ConfigError(KirchfemError):
    """Run configuration file is missing, malformed or inconsistent."""
