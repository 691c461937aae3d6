"""Minimal mono PCM16 WAV reading, independent of the consumer toolkit."""

import struct

import numpy as np

from .errors import BadAudioError

TARGET_RATE = 16000


def read_wav_16k(path) -> np.ndarray:
    """Read a mono 16-bit PCM WAV at 16 kHz and scale samples to [-1, 1]."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise BadAudioError(f"{path}: {exc}") from exc

    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise BadAudioError(f"{path}: not a RIFF/WAVE file")

    fmt = payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk, size = data[pos:pos + 4], struct.unpack_from("<I", data, pos + 4)[0]
        body = data[pos + 8:pos + 8 + size]
        if chunk == b"fmt " and len(body) >= 16:
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk == b"data":
            payload = body
        pos += 8 + size + (size & 1)

    if fmt is None or payload is None:
        raise BadAudioError(f"{path}: missing fmt or data chunk")
    audio_format, channels, rate, _, _, bits = fmt
    if (audio_format, channels, bits) != (1, 1, 16):
        raise BadAudioError(f"{path}: need mono PCM16, got format={audio_format} "
                            f"channels={channels} bits={bits}")
    if rate != TARGET_RATE:
        raise BadAudioError(f"{path}: need {TARGET_RATE} Hz, got {rate} Hz")

    raw = np.frombuffer(payload[:len(payload) - (len(payload) % 2)], dtype="<i2")
    return raw.astype(np.float64) / 32768.0
