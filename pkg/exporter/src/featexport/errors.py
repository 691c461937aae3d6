class FeatexportError(Exception):
    """Base class for exporter errors."""


class ModelUnavailableError(FeatexportError):
    """The pretrained SSL model could not be loaded locally."""


class BadAudioError(FeatexportError):
    """Input audio is unreadable, not mono PCM16, or not 16 kHz."""
