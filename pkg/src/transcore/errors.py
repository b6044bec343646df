"""Exception taxonomy shared across the toolkit."""


class TranscoreError(Exception):
    """Base class for every error raised by this package."""


class MalformedFile(TranscoreError):
    """File cannot be decoded (bad magic, truncated stream, header/payload disagreement)."""


class UnsupportedPixelFormat(TranscoreError):
    """Decodable image, but not 8-bit grayscale/RGB (16-bit depths, palette+tRNS, ...)."""


class UnsupportedDtype(TranscoreError):
    """Tensor file declares a dtype other than little-endian float32."""


class UnsupportedByteOrder(TranscoreError):
    """Tensor file declares a non-little-endian (or platform-dependent) byte order."""


class ShapeMismatch(TranscoreError):
    """Operands (or a backend output) do not have the required/matching shape."""


class LengthMismatch(TranscoreError):
    """Paired sequences have different lengths."""


class ImageTooSmall(TranscoreError):
    """Image is below the minimum size an operation needs."""


class BackendUnavailable(TranscoreError):
    """A model runtime or model file is missing."""


class MissingEmbedding(TranscoreError):
    """No precomputed embedding file for the requested key."""


class ClassCountMismatch(TranscoreError):
    """Label maps being compared declare different class counts."""


class EmptyMatrix(TranscoreError):
    """Confusion matrix holds no scorable pixels."""


class GrayscaleUnsupported(TranscoreError):
    """Operation requires a 3-channel image."""


class DegenerateSeries(TranscoreError):
    """A series has zero variance, so correlation is undefined."""


class InsufficientDegrees(TranscoreError):
    """Fewer than three distinct distortion degrees in a record group."""


class ZeroBaseline(TranscoreError):
    """Percent change is undefined when the first element is zero."""


class IoError(TranscoreError):
    """Failed to read or write an output artifact."""


class ConfigError(TranscoreError):
    """Invalid run configuration or manifest."""
