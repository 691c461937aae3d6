"""Writer for the DQF1 feature container consumed by the conversion toolkit.

Layout: magic "DQF1" | version u32=1 | T u32 | D u32 | hop_samples u32 |
T*D float32 little-endian, row-major.
"""

import struct

import numpy as np

MAGIC = b"DQF1"
VERSION = 1


def write_dqf1(path, frames: np.ndarray, hop_samples: int) -> None:
    frames = np.ascontiguousarray(frames, dtype="<f4")
    if frames.ndim != 2 or frames.shape[1] < 1:
        raise ValueError("frames must be a T x D matrix with D >= 1")
    if not np.all(np.isfinite(frames)):
        raise ValueError("frames must be finite")
    t, d = frames.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IIII", VERSION, t, d, int(hop_samples)))
        fh.write(frames.tobytes())
