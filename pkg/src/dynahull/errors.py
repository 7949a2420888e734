"""Exception types shared across the toolkit."""


class CloudIoError(Exception):
    """Base class for point-cloud file problems."""


class MalformedHeader(CloudIoError):
    """PCD/PLY header is missing required fields or is inconsistent."""


class NonFiniteCoordinate(CloudIoError):
    """A loaded point contains NaN or infinite coordinates."""


class IoFailure(CloudIoError):
    """The underlying file could not be read or written."""


class EmptyCloud(ValueError):
    """An operation that needs points received an empty cloud."""


class TooFewPoints(ValueError):
    """The cloud has fewer points than the neighbor count requires."""


class InsufficientPoints(ValueError):
    """Fewer points than clusters requested."""


class NoGroundFound(RuntimeError):
    """No near-horizontal plane with enough inliers exists."""


class InvalidConfig(ValueError):
    """A parameter or configuration value violates its invariants."""
