"""SSL feature backends.

A backend is anything with `dim`, `hop_samples`, and
`extract(samples, layer) -> T x dim float32`. The production backend wraps
WavLM-Large through transformers; the filterbank backend is a deterministic
stand-in with the same frame geometry (400-sample receptive field, 320-sample
hop, 1024 dims) for pipeline tests and dry runs without model weights.
"""

import hashlib

import numpy as np

from .errors import ModelUnavailableError

SSL_DIM = 1024
SSL_HOP = 320
SSL_RECEPTIVE = 400


def ssl_frame_count(n_samples: int) -> int:
    if n_samples < SSL_RECEPTIVE:
        return 0
    return 1 + (n_samples - SSL_RECEPTIVE) // SSL_HOP


class WavlmBackend:
    """Layer activations from WavLM-Large via transformers.

    Requires the model to be available locally (a directory path or a
    populated cache); anything else raises ModelUnavailableError.
    """

    dim = SSL_DIM
    hop_samples = SSL_HOP

    def __init__(self, model_path="microsoft/wavlm-large"):
        try:
            import torch
            from transformers import WavLMModel
        except Exception as exc:  # missing torch/transformers
            raise ModelUnavailableError(
                f"torch/transformers unavailable: {exc}") from exc
        try:
            self._model = WavLMModel.from_pretrained(model_path,
                                                     output_hidden_states=True)
        except Exception as exc:
            raise ModelUnavailableError(
                f"cannot load WavLM from {model_path!r}: {exc}") from exc
        self._model.eval()
        self._torch = torch

    def extract(self, samples: np.ndarray, layer: int) -> np.ndarray:
        torch = self._torch
        with torch.no_grad():
            waveform = torch.from_numpy(np.asarray(samples, dtype=np.float32))
            outputs = self._model(waveform[None, :])
            hidden = outputs.hidden_states[layer]
        return hidden[0].cpu().numpy().astype(np.float32)


class FilterbankBackend:
    """Deterministic stand-in: log-spectral frames through a fixed projection.

    Not a speech representation of WavLM quality; it exists so the export
    pipeline, file geometry, and interop contracts can run without model
    weights. The projection matrix is seeded from the layer index, so layers
    produce distinct but reproducible features.
    """

    dim = SSL_DIM
    hop_samples = SSL_HOP

    def extract(self, samples: np.ndarray, layer: int) -> np.ndarray:
        x = np.asarray(samples, dtype=np.float64)
        t = ssl_frame_count(len(x))
        if t == 0:
            return np.zeros((0, SSL_DIM), dtype=np.float32)
        idx = np.arange(SSL_RECEPTIVE)[None, :] + SSL_HOP * np.arange(t)[:, None]
        frames = x[idx] * np.hanning(SSL_RECEPTIVE)
        logmag = np.log(np.abs(np.fft.rfft(frames, axis=1)) + 1e-6)

        seed = int.from_bytes(hashlib.sha256(f"fbank-{layer}".encode()).digest()[:4],
                              "little")
        projection = np.random.default_rng(seed).normal(
            scale=1.0 / np.sqrt(logmag.shape[1]), size=(logmag.shape[1], SSL_DIM))
        return (logmag @ projection).astype(np.float32)


def make_backend(name: str, model_path=None):
    if name == "wavlm":
        return WavlmBackend(**({"model_path": model_path} if model_path else {}))
    if name == "fbank":
        return FilterbankBackend()
    raise ValueError(f"unknown backend {name!r}")
