"""Export operations: SSL layer features and the concatenated prosody stream."""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import prosody
from .backends import SSL_HOP, make_backend
from .dqf import write_dqf1
from .errors import BadAudioError
from .wav import read_wav_16k

PHONETIC_LAYER = 6
PROSODIC_LAYER = 12


@dataclass
class ExportSpec:
    wav_paths: list
    layer: int
    out_dir: Path
    device: str = "cpu"
    backend: object = None          # defaults to WavLM when first needed
    backend_name: str = "wavlm"
    model_path: str = None

    def __post_init__(self):
        if self.layer not in (PHONETIC_LAYER, PROSODIC_LAYER):
            raise ValueError(f"layer must be 6 or 12, got {self.layer}")
        self.out_dir = Path(self.out_dir)

    def resolve_backend(self):
        if self.backend is None:
            self.backend = make_backend(self.backend_name, self.model_path)
        return self.backend


def _fit_rows(column: np.ndarray, t: int) -> np.ndarray:
    """Length-align a prosody column to the SSL frame count by edge padding."""
    if len(column) >= t:
        return column[:t]
    if len(column) == 0:
        return np.zeros(t)
    return np.concatenate([column, np.full(t - len(column), column[-1])])


def export_layer(spec: ExportSpec) -> list:
    """Write one DQF1 per input WAV holding T x 1024 layer activations."""
    backend = spec.resolve_backend()
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for wav_path in spec.wav_paths:
        samples = read_wav_16k(wav_path)
        features = backend.extract(samples, spec.layer)
        if features.ndim != 2 or features.shape[1] != backend.dim:
            raise BadAudioError(f"{wav_path}: backend returned shape "
                                f"{features.shape}, expected T x {backend.dim}")
        out_path = spec.out_dir / (Path(wav_path).stem + ".dqf")
        write_dqf1(out_path, features, SSL_HOP)
        written.append(out_path)
    return written


def export_prosody(wav_path, out_path, backend=None, model_path=None) -> Path:
    """Write the prosodic stream: layer-12 SSL features plus two hand-crafted
    columns (loudness, z-normed log-F0), D = 1026, hop 320.

    The hand-crafted columns are computed at the same 320-sample hop and
    length-aligned to the SSL frame count by edge padding.
    """
    if backend is None:
        backend = make_backend("wavlm", model_path)
    samples = read_wav_16k(wav_path)
    ssl = backend.extract(samples, PROSODIC_LAYER)
    t = ssl.shape[0]

    level = _fit_rows(prosody.loudness_column(samples), t)
    pitch = _fit_rows(prosody.znorm_log_f0(prosody.f0_column(samples)), t)

    stacked = np.concatenate(
        [ssl, level[:, None], pitch[:, None]], axis=1).astype(np.float32)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_dqf1(out_path, stacked, SSL_HOP)
    return out_path
