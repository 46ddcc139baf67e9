"""Exception hierarchy shared by all estimator modules.

Every failure the library can signal derives from :class:`InfokitError`,
so callers (in particular the CLI) can map estimation failures to exit
codes without catching bare ``Exception``.
"""


class InfokitError(Exception):
    """Base class for all errors raised by this package."""


class NonFiniteInputError(InfokitError):
    """Input contains NaN or infinite entries."""


class DimensionMismatchError(InfokitError):
    """Samples that must share a dimension do not."""


class TooFewPointsError(InfokitError):
    """Fewer observations than the operation requires."""


class KTooLargeError(InfokitError):
    """Neighbor order k exceeds what the sample sizes allow."""


class DuplicatePointsError(InfokitError):
    """Coincident observations produced a zero nearest-neighbor distance."""


class InvalidParameterError(InfokitError):
    """A parameter value is outside its allowed domain."""


class InvalidAlphaError(InvalidParameterError):
    """Order alpha is invalid for the requested estimator."""


class BandwidthError(InvalidParameterError):
    """Kernel bandwidth is not positive."""


class WeightError(InvalidParameterError):
    """Mixture weights are not positive or do not sum to one."""


class BlockError(InfokitError):
    """Block structure of a joint sample is inconsistent."""


class UnknownEstimatorError(InfokitError):
    """No estimator with the requested name is registered under the kind."""


class UnknownParameterError(InfokitError):
    """A parameter override names no declared parameter."""


class ArityMismatchError(InfokitError):
    """Number of sample arguments does not match the estimator's arity."""


class DegenerateInputError(InfokitError):
    """Input is degenerate for the operation (e.g. zero-variance column)."""


class ShapeError(InfokitError):
    """Matrix or partition shapes are inconsistent."""


class NonSymmetricError(InfokitError):
    """A matrix required to be symmetric is not, beyond tolerance."""


class BadTargetError(InfokitError):
    """Clustering target (widths or group count) is inconsistent."""


class BadDimsError(InfokitError):
    """Subspace width list is invalid."""
