"""Exception taxonomy shared across the toolkit.

Three broad families map onto the CLI exit codes: file/container problems
(exit 2), dimension/content problems (exit 3), and numeric failures (exit 4).
"""


class VoicemorphError(Exception):
    """Base class for all toolkit errors."""


class FileFormatError(VoicemorphError):
    """A file is not what its container/header claims (CLI exit 2)."""


class ContentError(VoicemorphError):
    """Inputs are well-formed but dimensionally or semantically unusable (CLI exit 3)."""


class NumericError(VoicemorphError):
    """A numeric contract was violated (CLI exit 4)."""


# -- audio containers ----------------------------------------------------

class NotWavError(FileFormatError):
    """File does not carry RIFF/WAVE magic."""


class UnsupportedEncodingError(FileFormatError):
    """WAV is not mono 16-bit integer PCM."""


class WrongRateError(FileFormatError):
    """Caller requires a specific sample rate and the file has another."""


# -- binary feature/weight containers ------------------------------------

class BadMagicError(FileFormatError):
    """Unknown magic tag at the start of a binary file."""


class VersionMismatchError(FileFormatError):
    """Recognized magic but unsupported format version."""


class TruncatedFileError(FileFormatError):
    """Declared sizes disagree with the actual byte length."""


# -- dimensions and content ----------------------------------------------

class DimMismatchError(ContentError):
    """Vector/matrix dimensions disagree."""


class LengthMismatchError(ContentError):
    """Sequence lengths disagree."""


class SizeMismatchError(ContentError):
    """Buffer/filter sizing violates an operation's precondition."""


class EmptyError(ContentError):
    """Operation requires non-empty input."""


class EmptyPoolError(ContentError):
    """No usable vectors were left to build a phone pool."""


class PoolTooSmallError(ContentError):
    """Pool has fewer vectors than the requested candidate count."""


class ZeroVectorError(ContentError):
    """Cosine distance is undefined for zero-norm vectors."""


class TooShortError(ContentError):
    """Signal shorter than one analysis frame."""


class TooFewPeriodsError(ContentError):
    """Not enough extracted periods for the requested quotient."""


class NoVoicedRegionError(ContentError):
    """No voiced frames available."""


class AllUnvoicedError(ContentError):
    """Contour has no voiced frames to normalize over."""


class ZeroVarianceError(ContentError):
    """Constant input where variance is required."""


class ZeroAmplitudeError(ContentError):
    """Mean period amplitude is zero."""


class NoOverlapError(ContentError):
    """Fewer than two jointly voiced frames."""


class MissingTensorError(ContentError):
    """Weight bundle lacks a tensor required by the architecture manifest."""


class ShapeMismatchError(ContentError):
    """Weight bundle tensor has the wrong shape (or is not in the manifest)."""


class BadConfigError(ContentError):
    """Configuration violates its invariants."""


# -- numerics --------------------------------------------------------------

class BadF0Error(NumericError):
    """F0 value outside the legal range (negative, or above 2000 Hz)."""


class NonFiniteError(NumericError):
    """NaN or Inf where finite values are required."""
