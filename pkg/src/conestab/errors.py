"""Exception hierarchy shared by all conestab modules."""


class ConestabError(Exception):
    """Base class for all library errors."""


class UsageError(ConestabError):
    """Invalid arguments or malformed input data."""


class NonSmoothPoint(ConestabError):
    """Derivative calculus requested inside the smoothness guard band."""


class DegenerateBoundary(ConestabError):
    """Boundary data with non-positive mean curvature."""


class NoZeroFound(ConestabError):
    """Cross-section profile never crossed zero (numerical failure)."""


class OutOfDomain(ConestabError):
    """Evaluation point outside the cone cross-section."""


class AllPointsGuarded(ConestabError):
    """Every sample point fell in the smoothness guard band."""


class NoConvergence(ConestabError):
    """Eigenvalue iteration failed to bracket or converge."""


class StableCone(ConestabError):
    """Instability certificate requested for a cone that is not unstable."""


class UnstableCone(ConestabError):
    """Positive solution requested for a cone that is unstable."""


class MarginTooSmall(ConestabError):
    """Certificate sign not stable under quadrature refinement."""


class IdentityViolated(ConestabError):
    """Exact algebraic identity check failed (implementation bug)."""
