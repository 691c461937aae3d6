"""Mono PCM16 WAV reading/writing and the canonical in-memory audio type."""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import NotWavError, UnsupportedEncodingError, WrongRateError

PCM16_SCALE = 32768.0


@dataclass(frozen=True)
class AudioBuffer:
    """Mono sampled waveform. Samples are dimensionless, nominally in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1:
            raise ValueError("AudioBuffer samples must be one-dimensional")
        if not np.all(np.isfinite(samples)):
            raise ValueError("AudioBuffer samples must be finite")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def require_rate(buf: AudioBuffer, rate: int) -> AudioBuffer:
    """Raise WrongRateError unless buf has the given sample rate."""
    if buf.sample_rate != rate:
        raise WrongRateError(
            f"expected {rate} Hz audio, got {buf.sample_rate} Hz"
        )
    return buf


def read_wav(path) -> AudioBuffer:
    """Read a mono 16-bit PCM RIFF/WAVE file.

    Integer samples are scaled to [-1, 1] by dividing by 32768. Resampling is
    deliberately not performed; callers that need 16 kHz use require_rate().
    """
    with open(path, "rb") as fh:
        data = fh.read()

    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise NotWavError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + chunk_size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise NotWavError(f"{path}: truncated fmt chunk")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            payload = body
        # chunks are word-aligned
        pos += 8 + chunk_size + (chunk_size & 1)

    if fmt is None or payload is None:
        raise NotWavError(f"{path}: missing fmt or data chunk")

    audio_format, channels, rate, _byte_rate, _block_align, bits = fmt
    if audio_format != 1:
        raise UnsupportedEncodingError(
            f"{path}: audio_format={audio_format}, only PCM (1) is supported"
        )
    if channels != 1:
        raise UnsupportedEncodingError(f"{path}: {channels} channels, expected mono")
    if bits != 16:
        raise UnsupportedEncodingError(f"{path}: {bits}-bit samples, expected 16")

    raw = np.frombuffer(payload[: len(payload) - (len(payload) % 2)], dtype="<i2")
    return AudioBuffer(raw.astype(np.float64) / PCM16_SCALE, int(rate))


def write_wav(path, buf: AudioBuffer) -> None:
    """Write an AudioBuffer as mono 16-bit PCM.

    Amplitudes are clamped to [-1, 1 - 1/32768], scaled by 32768, and rounded
    to the nearest integer. Clamping (not wrapping) keeps slightly-hot
    synthesiser output audible instead of wrapping it to noise.
    """
    clamped = np.clip(buf.samples, -1.0, 1.0 - 1.0 / PCM16_SCALE)
    ints = np.rint(clamped * PCM16_SCALE).astype("<i2")
    payload = ints.tobytes()

    byte_rate = buf.sample_rate * 2
    header = b"".join([
        b"RIFF",
        struct.pack("<I", 36 + len(payload)),
        b"WAVE",
        b"fmt ",
        struct.pack("<IHHIIHH", 16, 1, 1, buf.sample_rate, byte_rate, 2, 16),
        b"data",
        struct.pack("<I", len(payload)),
    ])
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
