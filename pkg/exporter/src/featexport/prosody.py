"""Hand-crafted prosodic features: frame loudness and z-normed log-F0.

These re-implement the consumer toolkit's definitions (same formulas and
constants, documented parity tolerance 1e-5) so the exporter runs without
importing it. The F0 tracker mirrors the same algorithm: normalized
autocorrelation over lags covering [40, 2000] Hz, shortest credible local
maximum at >= 0.97 of the global peak, parabolic refinement, voiced iff the
peak exceeds 0.5 and frame RMS exceeds 1e-4. Written frame-at-a-time on
purpose; it doubles as an independent check of the consumer's vectorized
tracker.
"""

import warnings

import numpy as np

FRAME_LEN = 1024
HOP = 320
SAMPLE_RATE = 16000

F0_MIN = 40.0
F0_MAX = 2000.0
VOICING_THRESHOLD = 0.5
RMS_FLOOR = 1e-4
PEAK_RATIO = 0.97
LOUDNESS_FLOOR = 1e-7


def frame_count(n_samples: int) -> int:
    if n_samples < FRAME_LEN:
        return 0
    return 1 + (n_samples - FRAME_LEN) // HOP


def loudness_column(samples: np.ndarray) -> np.ndarray:
    """Per-frame 20*log10(RMS + 1e-7) in dB."""
    out = np.empty(frame_count(len(samples)))
    for i in range(len(out)):
        frame = samples[i * HOP:i * HOP + FRAME_LEN]
        out[i] = 20.0 * np.log10(np.sqrt(np.mean(frame ** 2)) + LOUDNESS_FLOOR)
    return out


def _frame_f0(frame: np.ndarray) -> float:
    """F0 of one frame in Hz, or 0 when unvoiced."""
    rms = np.sqrt(np.mean(frame ** 2))
    if rms <= RMS_FLOOR:
        return 0.0

    lag_min = int(np.ceil(SAMPLE_RATE / F0_MAX))
    lag_max = int(np.floor(SAMPLE_RATE / F0_MIN))
    lags = np.arange(lag_min - 1, lag_max + 2)

    energy = np.concatenate([[0.0], np.cumsum(frame ** 2)])
    n = len(frame)
    score = np.empty(len(lags))
    for k, lag in enumerate(lags):
        num = float(np.dot(frame[:n - lag], frame[lag:]))
        e_head = energy[n - lag]
        e_tail = energy[n] - energy[lag]
        score[k] = num / np.sqrt(e_head * e_tail + 1e-300)

    inner = score[1:-1]
    peak = inner.max()
    if peak <= VOICING_THRESHOLD:
        return 0.0

    best = None
    for k in range(len(inner)):
        if (inner[k] >= score[k] and inner[k] >= score[k + 2]
                and inner[k] >= PEAK_RATIO * peak):
            best = k
            break
    if best is None:
        best = int(np.argmax(inner))

    left, mid, right = score[best], inner[best], score[best + 2]
    denom = left - 2.0 * mid + right
    shift = 0.0 if abs(denom) <= 1e-300 else 0.5 * (left - right) / denom
    shift = min(max(shift, -0.5), 0.5)
    lag = lag_min + best + shift
    return float(min(max(SAMPLE_RATE / lag, F0_MIN), F0_MAX))


def f0_column(samples: np.ndarray) -> np.ndarray:
    """Per-frame F0 contour; 0 marks unvoiced frames."""
    out = np.empty(frame_count(len(samples)))
    for i in range(len(out)):
        out[i] = _frame_f0(samples[i * HOP:i * HOP + FRAME_LEN])
    return out


def znorm_log_f0(f0: np.ndarray) -> np.ndarray:
    """z-normalised log-F0 over voiced frames; degenerate contours give zeros.

    Silence (no voiced frames) and constant pitch (zero variance) cannot be
    normalized; both produce an all-zero column with a warning so exports of
    degenerate audio still succeed.
    """
    voiced = f0 > 0.0
    out = np.zeros(len(f0))
    if not np.any(voiced):
        warnings.warn("no voiced frames; log-F0 column is all zeros", RuntimeWarning)
        return out
    logs = np.log(f0[voiced])
    std = float(np.std(logs))
    # a dead-flat pitch leaves only sub-milli-Hz estimator jitter (log std
    # ~1e-5 on a pure tone); z-norming that would amplify pure noise, so flag
    # anything below 1e-4 as zero variance. Real intonation sits far above.
    if std < 1e-4:
        warnings.warn("constant voiced pitch (zero variance); log-F0 column is "
                      "all zeros", RuntimeWarning)
        return out
    out[voiced] = (logs - np.mean(logs)) / std
    return out
