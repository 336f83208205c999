"""Exception hierarchy shared across the pipeline."""


class PipelineError(Exception):
    """Base class for every error raised by this package."""


class DegenerateGeometry(PipelineError):
    """Camera and target coincide; no direction is defined."""


class OutOfBounds(PipelineError):
    """Pixel coordinate or angle outside its valid range."""


class InvalidDepth(PipelineError):
    """Depth is non-positive, non-finite, or the missing-data sentinel."""


class MalformedBase64(PipelineError):
    """Payload text is not valid URL-safe base64."""


class TruncatedPayload(PipelineError):
    """Payload has fewer bytes than its header implies."""


class BadHeader(PipelineError):
    """Depth payload header does not match the expected layout."""


class BadMagic(PipelineError):
    """Raw grid blob does not start with the expected magic bytes."""


class SizeMismatch(PipelineError):
    """Declared dimensions disagree with the actual data size."""


class MissingManifest(PipelineError):
    """Mask bundle directory has no manifest.json."""


class DimensionMismatch(PipelineError):
    """Bitmap dimensions disagree with their declared size."""


class NonBinaryPixel(PipelineError):
    """Mask bitmap contains a value other than 0 or 255."""


class IoFailure(PipelineError):
    """Filesystem write failed."""


class MissingTile(PipelineError):
    """Tile grid is incomplete; `coords` lists the missing (row, col) pairs."""

    def __init__(self, coords):
        self.coords = sorted(coords)
        super().__init__(f"missing tiles: {self.coords}")


class NoCandidates(PipelineError):
    """Viewpoint selection received an empty candidate list."""


class ParseError(PipelineError):
    """Input file could not be parsed."""


class MissingId(PipelineError):
    """Parcel feature lacks a property_id."""


class EmptyInput(PipelineError):
    """Metric received an empty input."""


class ZeroTotal(PipelineError):
    """Availability denominator is zero."""


class InvalidScene(PipelineError):
    """Synthetic scene description violates its invariants."""


class NoOverlap(PipelineError):
    """Predictions and truth share no property ids."""
