"""Subtractive harmonic-plus-noise synthesis.

The harmonic source is a band-limited sawtooth: the sum over harmonics j of
(1/j)*sin(phase_j), where each phase advances by 2*pi*j*F0(t)/sample_rate per
sample and harmonics at or above Nyquist are muted per sample. The stochastic
source is uniform noise in [-1, 1]. Both pass through per-frame FIR filters
built from log-magnitude frequency samples, and the two filtered branches sum
to the output.

Frame F0 values are anchored at the END of each hop block: a frame's samples
ramp linearly from the previous frame's F0 to its own. This keeps every block
a function of (carry state, current frame) only, so chunked synthesis with a
carried HarmonicState is bit-identical to a single pass. Phases are wrapped
at every frame boundary for the same reason.
"""

from dataclasses import dataclass, replace

import numpy as np

from .audio_io import AudioBuffer
from .errors import BadF0Error, NonFiniteError, SizeMismatchError
from .formats import SynthParamsSeq

HARM_FILTER_LEN = 176
NOISE_FILTER_LEN = 80

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SynthConfig:
    sample_rate: int = 16000
    n_harmonics: int = 150
    frame_hop: int = 160
    fft_size_filter: int = 1024
    noise_seed: int = 0

    def __post_init__(self):
        if self.sample_rate <= 0 or self.n_harmonics < 1 or self.frame_hop < 1:
            raise ValueError("sample_rate, n_harmonics and frame_hop must be positive")
        fft = self.fft_size_filter
        if fft < 2 or (fft & (fft - 1)) != 0:
            raise ValueError("fft_size_filter must be a positive power of two")
        if fft < 2 * self.frame_hop:
            raise ValueError("fft_size_filter must be at least twice the frame hop")
        if fft < max(HARM_FILTER_LEN, NOISE_FILTER_LEN) + self.frame_hop:
            raise ValueError("fft_size_filter too small for the filter widths plus hop")


@dataclass
class HarmonicState:
    """Oscillator state carried across chunked synthesis.

    phases: per-harmonic accumulators wrapped to [0, 2*pi).
    prev_f0: F0 of the last processed frame (ramp start for the next frame);
    None means "no history", which makes the next frame's F0 constant.
    """

    phases: np.ndarray
    prev_f0: float | None = None

    @classmethod
    def initial(cls, cfg: SynthConfig) -> "HarmonicState":
        return cls(phases=np.zeros(cfg.n_harmonics), prev_f0=None)


def _validate_f0(f0: np.ndarray) -> None:
    if not np.all(np.isfinite(f0)):
        raise BadF0Error("F0 contains non-finite values")
    if np.any(f0 < 0.0) or np.any(f0 > 2000.0):
        raise BadF0Error("F0 values must be non-negative and at most 2000 Hz")


def synth_harmonic_unfiltered(f0_hz, cfg: SynthConfig, state: HarmonicState | None = None):
    """Render the band-limited sawtooth source for a frame-wise F0 track.

    Returns the signal of length len(f0)*frame_hop. When `state` is given,
    returns (signal, new_state) so synthesis can continue seamlessly across
    chunks; the passed state is not mutated.

    Frames with F0=0 emit silence and freeze the phase accumulators.
    """
    f0 = np.asarray(f0_hz, dtype=np.float64).reshape(-1)
    _validate_f0(f0)

    chained = state is not None
    if state is None:
        state = HarmonicState.initial(cfg)
    phases = np.array(state.phases, dtype=np.float64)
    if phases.shape != (cfg.n_harmonics,):
        raise SizeMismatchError("state has wrong harmonic count for the config")
    prev_f0 = state.prev_f0

    hop = cfg.frame_hop
    sr = cfg.sample_rate
    nyquist = sr / 2.0
    harmonics = np.arange(1, cfg.n_harmonics + 1, dtype=np.float64)
    inv_j = 1.0 / harmonics

    out = np.zeros(len(f0) * hop)
    ramp = np.arange(1, hop + 1, dtype=np.float64) / hop

    for i, current in enumerate(f0):
        if current == 0.0:
            prev_f0 = 0.0
            continue
        start = current if (prev_f0 is None or prev_f0 <= 0.0) else prev_f0
        f_samples = start + (current - start) * ramp
        delta = TWO_PI * f_samples / sr
        cum = np.cumsum(delta)

        # (J, hop) phase grid relative to the carried per-harmonic phases
        grid = phases[:, None] + harmonics[:, None] * cum[None, :]
        active = (harmonics[:, None] * f_samples[None, :]) < nyquist
        block = np.sum(np.sin(grid) * np.where(active, inv_j[:, None], 0.0), axis=0)
        out[i * hop:(i + 1) * hop] = block

        phases = np.mod(phases + harmonics * cum[-1], TWO_PI)
        prev_f0 = float(current)

    if chained:
        return out, HarmonicState(phases=phases, prev_f0=prev_f0)
    return out


def synth_noise(n_samples: int, seed: int) -> np.ndarray:
    """Deterministic uniform noise in [-1, 1] (numpy PCG64 stream)."""
    if n_samples < 0:
        raise ValueError("n_samples must be non-negative")
    return np.random.default_rng(seed).uniform(-1.0, 1.0, n_samples)


def filters_from_params(rows, fft_size: int) -> np.ndarray:
    """Turn T x F log-magnitude rows into T centered FIR impulse responses.

    Each row samples the log magnitude at F uniform frequencies spanning
    [0, Nyquist]. The magnitude is linearly interpolated onto fft_size/2+1
    bins, inverted to a zero-phase impulse response, rotated so its peak sits
    at the middle, and Hann-windowed to length 2F-1.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows[None, :]
    if not np.all(np.isfinite(rows)):
        raise NonFiniteError("filter parameter rows must be finite")
    width = rows.shape[1]
    if width < 2:
        raise SizeMismatchError("need at least 2 frequency samples per filter")

    n_bins = fft_size // 2 + 1
    mags = np.exp(rows)

    # linear interpolation from F uniform points onto n_bins uniform points
    pos = np.linspace(0.0, width - 1.0, n_bins)
    base = np.clip(pos.astype(np.int64), 0, width - 2)
    frac = pos - base
    mag_bins = mags[:, base] * (1.0 - frac) + mags[:, base + 1] * frac

    ir_len = 2 * width - 1
    ir_full = np.fft.irfft(mag_bins, n=fft_size, axis=1)
    centered = np.roll(ir_full, width - 1, axis=1)[:, :ir_len]
    return centered * np.hanning(ir_len)


def ltv_fir_filter(signal, frame_filters, frame_hop: int, fft_size: int) -> np.ndarray:
    """Apply per-frame FIR filters by FFT overlap-add.

    Each hop-length segment (rectangular) is zero-padded to fft_size,
    multiplied by its frame's filter spectrum, inverse-transformed, and its
    tail overlap-added into later output. Filters are assumed centered (as
    produced by filters_from_params); the (L-1)/2 group delay is compensated
    so a unit impulse response acts as an exact identity. Output length
    equals input length.
    """
    x = np.asarray(signal, dtype=np.float64)
    filters = np.asarray(frame_filters, dtype=np.float64)
    if filters.ndim == 1:
        filters = filters[None, :]
    n_frames, ir_len = filters.shape
    if n_frames * frame_hop < len(x):
        raise SizeMismatchError(
            f"{n_frames} filter frames x hop {frame_hop} cannot cover {len(x)} samples"
        )
    if fft_size < frame_hop + ir_len - 1:
        raise SizeMismatchError(
            f"fft_size {fft_size} < hop {frame_hop} + filter length {ir_len} - 1; "
            "segments would wrap"
        )
    if len(x) == 0:
        return np.zeros(0)

    used = min(n_frames, int(np.ceil(len(x) / frame_hop)))
    segments = np.zeros((used, frame_hop))
    flat = x[:used * frame_hop]
    segments.reshape(-1)[:len(flat)] = flat

    spec = np.fft.rfft(segments, n=fft_size, axis=1) * np.fft.rfft(
        filters[:used], n=fft_size, axis=1
    )
    pieces = np.fft.irfft(spec, n=fft_size, axis=1)

    delay = (ir_len - 1) // 2
    out = np.zeros(len(x) + fft_size + delay)
    for i in range(used):
        start = i * frame_hop
        out[start:start + fft_size] += pieces[i]
    return out[delay:delay + len(x)]


def synthesize(params: SynthParamsSeq, cfg: SynthConfig) -> AudioBuffer:
    """Render a parameter sequence: filtered sawtooth plus filtered noise.

    The hop comes from the parameter sequence itself; cfg supplies sample
    rate, harmonic count, filter FFT size, and the noise seed. Deterministic
    for fixed (params, cfg).
    """
    hop = params.hop_samples
    cfg = replace(cfg, frame_hop=hop)
    t = params.n_frames
    if t == 0:
        return AudioBuffer(np.zeros(0), cfg.sample_rate)

    fft = cfg.fft_size_filter
    harmonic_raw = synth_harmonic_unfiltered(params.f0_hz, cfg)
    noise_raw = synth_noise(t * hop, cfg.noise_seed)

    harm_irs = filters_from_params(params.harm_logmag, fft)
    noise_irs = filters_from_params(params.noise_logmag, fft)

    harmonic = ltv_fir_filter(harmonic_raw, harm_irs, hop, fft)
    stochastic = ltv_fir_filter(noise_raw, noise_irs, hop, fft)
    return AudioBuffer(harmonic + stochastic, cfg.sample_rate)
