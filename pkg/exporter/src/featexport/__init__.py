"""Feature exporter: SSL layer activations and hand-crafted prosodic features
written as DQF1 files for the conversion toolkit."""

from .backends import FilterbankBackend, WavlmBackend, make_backend
from .errors import BadAudioError, FeatexportError, ModelUnavailableError
from .export import ExportSpec, export_layer, export_prosody

__version__ = "0.1.0"
