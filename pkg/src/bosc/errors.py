"""Exception hierarchy shared by every engine.

Each exception carries a stable ``code`` string; the HTTP service echoes
that code verbatim in error payloads, so the names here are wire contract.
"""

from __future__ import annotations


class BoscError(Exception):
    """Base class. ``code`` defaults to the class name."""

    code = "BoscError"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


class DimensionMismatch(BoscError):
    code = "DimensionMismatch"


class RegistryInconsistent(BoscError):
    code = "RegistryInconsistent"


class InvalidArgument(BoscError):
    code = "InvalidArgument"


class UnknownSegmentId(BoscError):
    code = "UnknownSegmentId"


class UnknownClass(BoscError):
    code = "UnknownClass"


class DegeneratePolygon(BoscError):
    code = "DegeneratePolygon"


class EmptyRegistry(BoscError):
    code = "EmptyRegistry"


class NonFiniteFeature(BoscError):
    code = "NonFiniteFeature"


class InvalidStop(BoscError):
    code = "InvalidStop"


class OutOfProjectionBounds(BoscError):
    code = "OutOfProjectionBounds"


class DegenerateControlPoints(BoscError):
    code = "DegenerateControlPoints"


class SingularTransform(BoscError):
    code = "SingularTransform"


class NotGeoreferenced(BoscError):
    code = "NotGeoreferenced"


class PartialClassMap(BoscError):
    code = "PartialClassMap"


class BadFormat(BoscError):
    code = "BadFormat"


class IoFailure(BoscError):
    code = "IoFailure"


class ProjectLocked(BoscError):
    code = "ProjectLocked"


class ProjectNotFound(BoscError):
    code = "ProjectNotFound"
