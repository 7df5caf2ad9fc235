"""Exception types raised across the package.

Every error is a subclass of :class:`FaceHRError`; the value-like ones also
derive from :class:`ValueError` so generic callers can catch them that way.
"""


class FaceHRError(Exception):
    """Base class for all package errors."""


# ingest
class MissingFile(FaceHRError, FileNotFoundError):
    pass


class GeometryMismatch(FaceHRError, ValueError):
    pass


class BadMagic(FaceHRError, ValueError):
    pass


class BadMaxval(FaceHRError, ValueError):
    pass


class MalformedFile(FaceHRError, ValueError):
    pass


class NonMonotoneTime(FaceHRError, ValueError):
    pass


class NonNumericCell(FaceHRError, ValueError):
    pass


class TooFewRows(FaceHRError, ValueError):
    pass


class NonPositiveHr(FaceHRError, ValueError):
    pass


class IndexOutOfRange(FaceHRError, ValueError):
    pass


class DuplicateIndex(FaceHRError, ValueError):
    pass


class MissingIndex(FaceHRError, ValueError):
    pass


class BoxOutsideFrame(FaceHRError, ValueError):
    pass


# track
class NoSkinPixels(FaceHRError, ValueError):
    pass


# trace
class TooShort(FaceHRError, ValueError):
    pass


class WindowTooSmall(FaceHRError, ValueError):
    pass


class EmptyBackground(FaceHRError, ValueError):
    pass


# rectify
class LengthMismatch(FaceHRError, ValueError):
    pass


class FsMismatch(FaceHRError, ValueError):
    pass


class NonFinite(FaceHRError, ValueError):
    pass


# pulse
class SingularCovariance(FaceHRError, ValueError):
    pass


class BandInvalid(FaceHRError, ValueError):
    pass


class EmptyBand(FaceHRError, ValueError):
    pass


class ZeroPower(FaceHRError, ValueError):
    pass


class TraceTooShort(FaceHRError, ValueError):
    pass


# metrics
class NoOverlap(FaceHRError, ValueError):
    pass


class TooFewPairs(FaceHRError, ValueError):
    pass


# synth
class InvalidSpec(FaceHRError, ValueError):
    pass


class StageError(FaceHRError):
    """A pipeline stage failed; ``stage`` names it and ``__cause__`` holds the original."""

    def __init__(self, stage, error):
        self.stage = stage
        self.error = error
        super().__init__(f"stage '{stage}' failed: {type(error).__name__}: {error}")
