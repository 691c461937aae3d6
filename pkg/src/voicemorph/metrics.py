"""F0 tracking, period extraction, and the clinical voice-quality measures.

The jitter quotient sums every position whose full five-point window is in
range (0-indexed i in [2, N-4]) while keeping a 1/(N-1) numerator normalizer,
and divides by the mean period. Local shimmer is the mean absolute difference
of consecutive period amplitudes over the mean amplitude.
"""

from dataclasses import dataclass

import numpy as np

from .audio_io import AudioBuffer
from .errors import (
    AllUnvoicedError,
    LengthMismatchError,
    NoOverlapError,
    NoVoicedRegionError,
    TooFewPeriodsError,
    TooShortError,
    ZeroAmplitudeError,
    ZeroVarianceError,
)
from .formats import F0_MAX_HZ, F0_MIN_HZ, FeatureSequence

DEFAULT_FRAME_LEN = 1024
DEFAULT_HOP = 320

VOICING_THRESHOLD = 0.5
FRAME_RMS_FLOOR = 1e-4
# peaks above this fraction of the global maximum count as equally credible;
# the shortest such lag wins. This prevents octave-down flips on periodic
# signals where r(P) and r(k*P) tie at 1.0 up to rounding, and also covers
# non-integer periods whose integer-lag score dips a couple of percent.
PEAK_RATIO = 0.97

LOUDNESS_FLOOR = 1e-7


@dataclass(frozen=True)
class F0Contour:
    """Frame-wise fundamental frequency in Hz; 0 marks unvoiced frames."""

    values: np.ndarray
    hop_samples: int
    sample_rate: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "values", values)
        if not np.all(np.isfinite(values)):
            raise ValueError("F0 values must be finite")
        voiced = values[values != 0.0]
        if voiced.size and (voiced.min() < F0_MIN_HZ or voiced.max() > F0_MAX_HZ):
            raise ValueError("voiced F0 values must lie in [40, 2000] Hz")
        if self.hop_samples < 1 or self.sample_rate <= 0:
            raise ValueError("hop_samples and sample_rate must be positive")

    @property
    def voiced_mask(self) -> np.ndarray:
        return self.values > 0.0

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class PeriodSequence:
    """Per-cycle period lengths (seconds) and peak amplitudes."""

    period_s: np.ndarray
    peak_amp: np.ndarray

    def __post_init__(self):
        periods = np.asarray(self.period_s, dtype=np.float64).reshape(-1)
        amps = np.asarray(self.peak_amp, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "period_s", periods)
        object.__setattr__(self, "peak_amp", amps)
        if len(periods) != len(amps):
            raise ValueError("period and amplitude arrays must have equal length")
        if periods.size and (periods.min() < 1.0 / F0_MAX_HZ or periods.max() > 1.0 / F0_MIN_HZ):
            raise ValueError("periods must lie in [1/2000, 1/40] s")
        if np.any(amps < 0.0):
            raise ValueError("amplitudes must be non-negative")

    def __len__(self) -> int:
        return len(self.period_s)


def _frame_matrix(x: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    n_frames = 1 + (len(x) - frame_len) // hop
    idx = np.arange(frame_len)[None, :] + hop * np.arange(n_frames)[:, None]
    return x[idx]


def extract_f0(buf: AudioBuffer, frame_len: int = DEFAULT_FRAME_LEN,
               hop: int = DEFAULT_HOP) -> F0Contour:
    """Frame-wise F0 by normalized autocorrelation.

    Per frame the normalized autocorrelation is evaluated over lags covering
    [40, 2000] Hz; the winning lag is the shortest local maximum reaching
    PEAK_RATIO of the global maximum, refined by parabolic interpolation.
    A frame is voiced iff that maximum exceeds 0.5 and the frame RMS exceeds
    1e-4; unvoiced frames report 0.

    Raises TooShortError when the buffer holds less than one frame.
    """
    sr = buf.sample_rate
    if frame_len < 2 * sr / F0_MIN_HZ:
        raise ValueError("frame_len must cover at least two 40 Hz periods")
    x = buf.samples
    if len(x) < frame_len:
        raise TooShortError(f"need at least {frame_len} samples, got {len(x)}")

    lag_min = int(np.ceil(sr / F0_MAX_HZ))
    lag_max = int(np.floor(sr / F0_MIN_HZ))
    lo = lag_min - 1          # one extra lag each side for parabolic neighbors
    hi = lag_max + 1

    frames = _frame_matrix(x, frame_len, hop)
    rms = np.sqrt(np.mean(frames ** 2, axis=1))

    nfft = 1 << int(np.ceil(np.log2(2 * frame_len)))
    spectra = np.fft.rfft(frames, n=nfft, axis=1)
    autocorr = np.fft.irfft(spectra * np.conj(spectra), n=nfft, axis=1)[:, :hi + 1]

    # normalization: ac(tau) / sqrt(E0(tau) * Etau(tau)) with prefix energies
    prefix = np.concatenate(
        [np.zeros((frames.shape[0], 1)), np.cumsum(frames ** 2, axis=1)], axis=1
    )
    taus = np.arange(lo, hi + 1)
    e_head = prefix[:, frame_len - taus]
    e_tail = prefix[:, [frame_len]] - prefix[:, taus]
    score = autocorr[:, lo:hi + 1] / np.sqrt(e_head * e_tail + 1e-300)

    # columns 1..n-2 of `score` are the true lag range [lag_min, lag_max]
    inner = score[:, 1:-1]
    peak_val = inner.max(axis=1)

    is_local_max = (inner >= score[:, :-2]) & (inner >= score[:, 2:])
    credible = is_local_max & (inner >= PEAK_RATIO * peak_val[:, None])
    has_candidate = credible.any(axis=1)
    chosen = np.where(has_candidate, np.argmax(credible, axis=1), np.argmax(inner, axis=1))

    rows = np.arange(inner.shape[0])
    mid = inner[rows, chosen]
    left = score[rows, chosen]          # chosen-1 in score coordinates
    right = score[rows, chosen + 2]
    denom = left - 2.0 * mid + right
    flat = np.abs(denom) <= 1e-300
    shift = np.where(flat, 0.0, 0.5 * (left - right) / np.where(flat, 1.0, denom))
    shift = np.clip(shift, -0.5, 0.5)

    lags = lag_min + chosen + shift
    f0 = np.clip(sr / lags, F0_MIN_HZ, F0_MAX_HZ)

    voiced = (peak_val > VOICING_THRESHOLD) & (rms > FRAME_RMS_FLOOR)
    return F0Contour(np.where(voiced, f0, 0.0), hop_samples=hop, sample_rate=sr)


def _voiced_runs(mask: np.ndarray):
    """Yield (start, stop) frame index pairs for maximal voiced runs."""
    padded = np.concatenate([[False], mask, [False]])
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    for start, stop in zip(edges[::2], edges[1::2]):
        yield int(start), int(stop)


def extract_periods(buf: AudioBuffer, f0: F0Contour) -> PeriodSequence:
    """Locate glottal-cycle landmarks and return per-cycle periods/amplitudes.

    Within each voiced run, successive landmarks are the maximum-|amplitude|
    samples inside windows of [0.8, 1.25] expected periods past the previous
    landmark. Each landmark pair contributes one period (the spacing) and one
    amplitude (|x| at the leading landmark). Periods never bridge an unvoiced
    region, and spacings outside the [1/2000, 1/40] s band are discarded.
    """
    x = buf.samples
    sr = buf.sample_rate
    hop = f0.hop_samples
    values = f0.values
    if not np.any(f0.voiced_mask):
        raise NoVoicedRegionError("contour has no voiced frames")

    def f0_at(sample: int) -> float:
        return float(values[min(sample // hop, len(values) - 1)])

    periods = []
    amps = []
    for start_frame, stop_frame in _voiced_runs(f0.voiced_mask):
        region_start = start_frame * hop
        region_end = min(stop_frame * hop, len(x))
        if region_end <= region_start:
            continue

        first_period = sr / f0_at(region_start)
        seed_end = min(region_start + int(round(first_period)), region_end)
        if seed_end <= region_start:
            continue
        landmark = region_start + int(np.argmax(np.abs(x[region_start:seed_end])))

        run_marks = [landmark]
        while True:
            local_f0 = f0_at(run_marks[-1])
            if local_f0 <= 0.0:
                break
            expected = sr / local_f0
            w_lo = run_marks[-1] + int(np.floor(0.8 * expected))
            w_hi = min(run_marks[-1] + int(np.ceil(1.25 * expected)) + 1, region_end)
            if w_lo >= w_hi:
                break
            nxt = w_lo + int(np.argmax(np.abs(x[w_lo:w_hi])))
            if x[nxt] == 0.0:
                break            # dead window: no cycle peak to latch onto
            run_marks.append(nxt)

        for a, b in zip(run_marks[:-1], run_marks[1:]):
            spacing = (b - a) / sr
            if 1.0 / F0_MAX_HZ <= spacing <= 1.0 / F0_MIN_HZ:
                periods.append(spacing)
                amps.append(abs(x[a]))

    return PeriodSequence(np.array(periods), np.array(amps))


def jitter_ppq5(p: PeriodSequence) -> float:
    """Five-point period perturbation quotient, in percent."""
    t = p.period_s
    n = len(t)
    if n < 5:
        raise TooFewPeriodsError(f"ppq5 needs at least 5 periods, got {n}")
    window_means = np.convolve(t, np.full(5, 0.2), mode="valid")
    numerator = np.sum(np.abs(t[2:n - 2] - window_means)) / (n - 1)
    return float(numerator / np.mean(t) * 100.0)


def shimmer_local(p: PeriodSequence) -> float:
    """Local shimmer: mean absolute consecutive amplitude difference over mean amplitude."""
    a = p.peak_amp
    n = len(a)
    if n < 2:
        raise TooFewPeriodsError(f"local shimmer needs at least 2 periods, got {n}")
    mean_amp = np.mean(a)
    if mean_amp <= 0.0:
        raise ZeroAmplitudeError("mean period amplitude is zero")
    return float(np.mean(np.abs(np.diff(a))) / mean_amp)


def loudness(buf: AudioBuffer, frame_len: int = DEFAULT_FRAME_LEN,
             hop: int = DEFAULT_HOP) -> FeatureSequence:
    """Frame RMS in dB with a 1e-7 floor, as a one-column feature sequence."""
    x = buf.samples
    if len(x) < frame_len:
        frames_db = np.zeros((0, 1))
    else:
        frames = _frame_matrix(x, frame_len, hop)
        rms = np.sqrt(np.mean(frames ** 2, axis=1))
        frames_db = (20.0 * np.log10(rms + LOUDNESS_FLOOR))[:, None]
    return FeatureSequence(frames=frames_db, hop_samples=hop)


def log_f0_znorm(f0: F0Contour) -> FeatureSequence:
    """z-normalised log-F0 over voiced frames; unvoiced frames map to 0.

    Statistics are per-utterance over voiced frames only, with population
    normalization. Raises AllUnvoicedError / ZeroVarianceError on degenerate
    contours.
    """
    voiced = f0.voiced_mask
    if not np.any(voiced):
        raise AllUnvoicedError("no voiced frames to normalize over")
    logs = np.log(f0.values[voiced])
    std = float(np.std(logs))
    # rounding can leave ~1e-16 residue on exactly constant contours
    if std < 1e-12:
        raise ZeroVarianceError("constant voiced contour has zero variance")
    out = np.zeros(len(f0))
    out[voiced] = (logs - np.mean(logs)) / std
    return FeatureSequence(frames=out[:, None], hop_samples=f0.hop_samples)


def pcc(a: F0Contour, b: F0Contour) -> float:
    """Pearson correlation of two contours over frames voiced in both."""
    if len(a) != len(b):
        raise LengthMismatchError(f"contour lengths differ: {len(a)} vs {len(b)}")
    joint = a.voiced_mask & b.voiced_mask
    if np.count_nonzero(joint) < 2:
        raise NoOverlapError("need at least 2 jointly voiced frames")
    va = a.values[joint]
    vb = b.values[joint]
    da = va - va.mean()
    db = vb - vb.mean()
    denom = np.sqrt(np.sum(da ** 2) * np.sum(db ** 2))
    if denom == 0.0:
        raise ZeroVarianceError("a jointly voiced contour is constant")
    return float(np.sum(da * db) / denom)
