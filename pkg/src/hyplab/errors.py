"""Exception types shared across the toolkit."""


class HyplabError(Exception):
    """Base class for all hyplab errors."""


class EnumerationTruncated(HyplabError):
    """Group-ball enumeration hit the word-length cap while candidates
    below the pruning threshold were still open; the ball may be incomplete.

    The partial result, if any, is attached as ``partial``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class QuadratureFailure(HyplabError):
    """Adaptive quadrature did not reach the requested tolerance."""


class BandTooSmall(HyplabError):
    """Inverse Selberg transform failed its forward round-trip check;
    the caller-supplied band limit does not resolve the multiplier."""


class OdeFailure(HyplabError):
    """Radial ODE integration exceeded its residual tolerance."""


class BoundNotReached(HyplabError):
    """No index satisfied the periodic lower-bound criterion below the cap.

    ``violations`` lists the offending (k, s) pairs.
    """

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class IllConditioned(HyplabError):
    """Least-squares system required regularization beyond the default ridge."""


class NoMesh(HyplabError):
    """Eigen-data carries no quadrature mesh, but one is required."""


class GramDeviationTooLarge(UserWarning):
    """Mesh quadrature Gram matrix deviates from identity beyond the
    warning threshold; matrix elements may be unreliable."""
