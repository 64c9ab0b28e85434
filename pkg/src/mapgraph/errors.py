"""Exception and warning types shared across the toolkit.

Every error carries a stable machine-readable ``code`` so the CLI can emit
structured diagnostics on stderr.
"""

from __future__ import annotations


class MapGraphError(Exception):
    """Base class for all toolkit errors."""

    code = "ERROR"

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details


class ReferentialError(MapGraphError):
    """A graph document references ids that do not resolve (or resolve twice)."""

    code = "REFERENTIAL_ERROR"


class NoPathError(MapGraphError):
    """No traversable path exists between the requested endpoints."""

    code = "NO_PATH"


class PathExplosionError(MapGraphError):
    """Simple-path enumeration exceeded the configured cap."""

    code = "PATH_EXPLOSION"


class InvalidPathError(MapGraphError):
    """A node sequence is not a traversable path in the given graph."""

    code = "INVALID_PATH"


class DisconnectedGraphError(MapGraphError):
    """An all-pairs metric was asked for on a disconnected graph."""

    code = "GRAPH_DISCONNECTED"


class EndpointMismatchError(MapGraphError):
    """A candidate path does not start/end at the queried landmarks."""

    code = "ENDPOINT_MISMATCH"


class IdenticalPointsError(MapGraphError):
    """Direction of a zero-length displacement is undefined."""

    code = "IDENTICAL_POINTS"


class NotLandmarkEndpointsError(MapGraphError):
    """Narration requires the path to start and end at landmark nodes."""

    code = "NOT_LANDMARK_ENDPOINTS"


class TooFewLocationsError(MapGraphError):
    """Fewer than two matched locations; no edge sequence can be formed."""

    code = "TOO_FEW_LOCATIONS"


class UnresolvablePairError(MapGraphError):
    """A waypoint pair could not be resolved to a traversable subpath."""

    code = "UNRESOLVABLE_PAIR"


class TooFewLandmarksError(MapGraphError):
    """Query generation needs at least two landmarks."""

    code = "TOO_FEW_LANDMARKS"


class SchemaError(MapGraphError):
    """A document does not conform to the expected schema."""

    code = "SCHEMA_ERROR"


class BadLabelError(MapGraphError):
    """An annotation shape carries a label outside the naming conventions."""

    code = "BAD_LABEL"


class UnanchoredEdgeError(MapGraphError):
    """An annotated segment end lies too far from every node center."""

    code = "UNANCHORED_EDGE"


class ValidationFailedError(MapGraphError):
    """An imported graph failed connectivity validation."""

    code = "VALIDATION_FAILED"

    def __init__(self, message: str, report=None, **details):
        super().__init__(message, **details)
        self.report = report


class TransportError(MapGraphError):
    """A model endpoint could not be reached after the configured retries."""

    code = "TRANSPORT_ERROR"


class CacheCorruptError(MapGraphError):
    """A cache entry exists but cannot be decoded."""

    code = "CACHE_CORRUPT"


class DegenerateRangeWarning(UserWarning):
    """Min-max normalization hit a constant column; values default to 0."""
