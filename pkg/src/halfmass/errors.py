"""Exception types shared across the package."""


class HalfmassError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(HalfmassError):
    """A point lies outside the half-space chart or off the sampling grid."""


class DegenerateMetricError(HalfmassError):
    """The metric failed to be positive definite where it was needed."""


class DegenerateAngleError(HalfmassError):
    """An angle parameter sits at (or too close to) an excluded value."""


class EigenconditionError(HalfmassError):
    """A spinor does not satisfy the chirality eigencondition it claims."""


class UsageError(HalfmassError):
    """Bad command-line or config input. The CLI maps this to exit code 2."""
