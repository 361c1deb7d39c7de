"""Exception types raised by the toolkit."""


class CurvedimError(Exception):
    """Base class for toolkit errors."""


class LeavesChart(CurvedimError):
    """A geodesic or quadrature ray left the coordinate chart."""


class ConjugatePoint(CurvedimError):
    """det A_t changed sign while integrating a Jacobi matrix."""


class NotAbsolutelyContinuous(CurvedimError):
    """Pushforward mass landed where the reference measure vanishes."""


class NonMapPlan(CurvedimError):
    """A source atom splits on a manifold kind where binning is disabled."""


class SizeExceeded(CurvedimError):
    """Instance above the exact-solver size cap."""


class DegenerateWarp(CurvedimError):
    """Warping function vanishes in the interior of the base."""


class ConditionViolated(CurvedimError):
    """A hypothesis of the warped curvature check fails on the base grid."""

    def __init__(self, which: str, where, residual: float):
        self.which = which
        self.where = where
        self.residual = residual
        super().__init__(f"condition {which} violated at {where} (residual {residual:.3e})")


class NegativeDensity(CurvedimError):
    """Evolution produced densities below -1e-12 (time step too large)."""


class UnsupportedSpace(CurvedimError):
    """Operation has no closed form for this model space kind."""
