"""Training-objective kernels as pure functions of signals and features.

The multi-resolution spectral term is log-magnitude L1 plus spectral
convergence, averaged over the configured FFT sizes; the F0 term is voiced
log-F0 MAE. Jitter/shimmer losses compare the scalar clinical measures of two
signals; the prosody-leakage term is the mean absolute difference of two
encoder outputs. The total is their weighted sum.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .audio_io import AudioBuffer
from .errors import (
    DimMismatchError,
    EmptyError,
    LengthMismatchError,
    NonFiniteError,
    TooShortError,
)
from .formats import FeatureSequence
from .metrics import (
    DEFAULT_FRAME_LEN,
    DEFAULT_HOP,
    F0Contour,
    extract_f0,
    extract_periods,
    jitter_ppq5,
    shimmer_local,
)

LOG_EPS = 1e-7


@dataclass(frozen=True)
class LossWeights:
    """Weights of the combined objective; defaults follow the trained system."""

    lambda_s: float = 1.0
    lambda_jit: float = 10.0
    lambda_shim: float = 0.1
    lambda_pro: float = 0.1
    lambda_f0: float = 1.0

    def __post_init__(self):
        vals = (self.lambda_s, self.lambda_jit, self.lambda_shim,
                self.lambda_pro, self.lambda_f0)
        if not all(np.isfinite(v) and v >= 0.0 for v in vals):
            raise ValueError("loss weights must be finite and non-negative")


@dataclass(frozen=True)
class SpectralConfig:
    resolutions: tuple = (64, 128, 256, 512, 1024)
    overlap_fraction: float = 0.75

    def __post_init__(self):
        object.__setattr__(self, "resolutions", tuple(int(r) for r in self.resolutions))
        for r in self.resolutions:
            if r < 32 or (r & (r - 1)) != 0:
                raise ValueError("each resolution must be a power of two >= 32")
        if not 0.0 <= self.overlap_fraction < 1.0:
            raise ValueError("overlap_fraction must lie in [0, 1)")

    def hop(self, resolution: int) -> int:
        return max(1, int(round(resolution * (1.0 - self.overlap_fraction))))


def _magnitude_spectrogram(x: np.ndarray, size: int, hop: int) -> np.ndarray:
    n_frames = 1 + (len(x) - size) // hop
    idx = np.arange(size)[None, :] + hop * np.arange(n_frames)[:, None]
    return np.abs(np.fft.rfft(x[idx] * np.hanning(size), axis=1))


def spectral_loss(x, y, cfg: SpectralConfig = SpectralConfig()) -> float:
    """Multi-resolution spectral distance: mean log-L1 plus spectral convergence."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) != len(y):
        raise LengthMismatchError(f"signal lengths differ: {len(x)} vs {len(y)}")
    if len(x) < max(cfg.resolutions):
        raise TooShortError(
            f"signals must span the largest resolution ({max(cfg.resolutions)})"
        )
    per_resolution = []
    for size in cfg.resolutions:
        s_x = _magnitude_spectrogram(x, size, cfg.hop(size))
        s_y = _magnitude_spectrogram(y, size, cfg.hop(size))
        log_l1 = np.mean(np.abs(np.log(s_x + LOG_EPS) - np.log(s_y + LOG_EPS)))
        ref = np.linalg.norm(s_x)
        convergence = np.linalg.norm(s_x - s_y) / max(ref, 1e-300)
        per_resolution.append(log_l1 + convergence)
    return float(np.mean(per_resolution))


def f0_loss(f0_pred: F0Contour, f0_src: F0Contour) -> float:
    """Mean absolute log-F0 error over frames voiced in both contours.

    Disjoint voicing yields 0 with a RuntimeWarning rather than an error, so
    degenerate pairs still evaluate.
    """
    if len(f0_pred) != len(f0_src):
        raise LengthMismatchError(
            f"contour lengths differ: {len(f0_pred)} vs {len(f0_src)}"
        )
    joint = f0_pred.voiced_mask & f0_src.voiced_mask
    if not np.any(joint):
        warnings.warn("no jointly voiced frames; F0 loss is vacuously 0", RuntimeWarning)
        return 0.0
    return float(np.mean(np.abs(
        np.log(f0_pred.values[joint]) - np.log(f0_src.values[joint])
    )))


def _ppq5_of(buf: AudioBuffer) -> float:
    contour = extract_f0(buf, DEFAULT_FRAME_LEN, DEFAULT_HOP)
    return jitter_ppq5(extract_periods(buf, contour))


def _shimmer_of(buf: AudioBuffer) -> float:
    contour = extract_f0(buf, DEFAULT_FRAME_LEN, DEFAULT_HOP)
    return shimmer_local(extract_periods(buf, contour))


def jitter_loss(x: AudioBuffer, y: AudioBuffer) -> float:
    """Absolute difference between the ppq5 jitter of two signals."""
    return abs(_ppq5_of(x) - _ppq5_of(y))


def shimmer_loss(x: AudioBuffer, y: AudioBuffer) -> float:
    """Absolute difference between the local shimmer of two signals."""
    return abs(_shimmer_of(x) - _shimmer_of(y))


def prosody_leak_loss(r1: FeatureSequence, r2: FeatureSequence) -> float:
    """Mean absolute difference of two encoder outputs, truncated to the shorter."""
    if r1.dim != r2.dim:
        raise DimMismatchError(f"encoder dims differ: {r1.dim} vs {r2.dim}")
    t = min(r1.n_frames, r2.n_frames)
    if t == 0:
        raise EmptyError("no overlapping frames to compare")
    a = r1.frames[:t].astype(np.float64)
    b = r2.frames[:t].astype(np.float64)
    return float(np.mean(np.abs(a - b)))


def total_loss(ls: float, ljit: float, lshim: float, lpro: float, lf0: float,
               w: LossWeights = LossWeights()) -> float:
    """Weighted sum of the five components."""
    comps = (ls, ljit, lshim, lpro, lf0)
    if not all(np.isfinite(c) for c in comps):
        raise NonFiniteError("loss components must be finite")
    return (w.lambda_s * ls + w.lambda_jit * ljit + w.lambda_shim * lshim
            + w.lambda_pro * lpro + w.lambda_f0 * lf0)
