"""Exception hierarchy shared across the package."""


class SubgreenError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SubgreenError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class NonConvergence(SubgreenError):
    """A truncated series hit its term cap before the stop rule fired."""


class DivergentParameters(SubgreenError, ValueError):
    """Bivariate series parameters violate the convergence conditions."""


class UnfoldablePole(SubgreenError, ValueError):
    """A numerator gamma pole cannot be cancelled against a denominator."""


class QuadratureFailure(SubgreenError):
    """A quadrature self-check (panel doubling) moved the result too much."""


class MissingDerivative(SubgreenError, ValueError):
    """An operation needs g' but the time function carries no derivative."""


class PathMismatch(SubgreenError):
    """Two independent evaluation paths of the same quantity disagree."""


class SingularSystem(SubgreenError):
    """The implicit time step produced an unsolvable linear system."""


class GridMismatch(SubgreenError, ValueError):
    """A sampled field does not live on the expected grid."""


class NodeFailure(SubgreenError):
    """A grid node could not be evaluated; carries the node coordinates."""

    def __init__(self, t: float, x: float, cause: Exception):
        self.t = t
        self.x = x
        self.cause = cause
        super().__init__(f"evaluation failed at node (t={t!r}, x={x!r}): {cause}")
