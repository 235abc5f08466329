"""Exception types shared across the package."""


class CxMetricError(Exception):
    """Base class for all package-specific errors."""


class GradientVanishes(CxMetricError):
    """The defining-function gradient is numerically zero at a boundary point."""


class NotOnBoundary(CxMetricError):
    """A point expected to lie on the zero set of rho does not."""


class OutsideDomain(CxMetricError):
    """A point expected inside the domain has rho >= 0."""


class ZeroProjection(CxMetricError):
    """Complex-tangential projection collapsed to (numerically) zero."""


class CenterOutside(CxMetricError):
    """A disc/ray center that must be interior is not."""


class RayUnbounded(CxMetricError):
    """No boundary crossing found along a ray inside the bounding box."""


class TypeExceedsCap(CxMetricError):
    """All line-restriction coefficients vanish up to the order cap (m = infinity sentinel)."""

    def __init__(self, message, coefficient_table=None):
        super().__init__(message)
        self.coefficient_table = coefficient_table or {}


class FrameMisaligned(CxMetricError):
    """Contact point does not sit on the positive real axis of the first frame coordinate."""


class NegativeLevi(CxMetricError):
    """A candidate reported a significantly negative Levi form at its base point."""


class NormalizationUnstable(CxMetricError):
    """Independent sup-sampling passes disagree by more than the stability threshold."""


class NotAdmissible(CxMetricError):
    """A polynomial sample violates the convexity condition f'' >= 0 on [0, r]."""


class OutsideDisc(CxMetricError):
    """Point outside the open unit disc."""


class PreconditionFailed(CxMetricError):
    """A sampled admissibility precondition failed; the message names the condition."""


class DegenerateFit(CxMetricError):
    """Not enough distinct abscissae for a least-squares slope."""


class ConfigInvalid(CxMetricError):
    """Sweep/CLI configuration is malformed."""
