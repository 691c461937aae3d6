"""Bit-exact binary serialization for features, pools, synth params, and weights.

All containers share the same skeleton: a 4-byte magic tag, a u32 version,
u32 size fields, then float32 little-endian payloads. Writers are
deterministic (identical values produce identical bytes) and readers reject
any file whose declared sizes disagree with its actual byte length.

Layouts (all integers little-endian u32):

    "DQF1" | version=1 | T | D | hop_samples | T*D f32 row-major
    "DQP1" | version=1 | P | D | id_len | id UTF-8 bytes | P*D f32
    "DQS1" | version=1 | T | F_h | F_s | hop_samples | T f32 | T*F_h f32 | T*F_s f32
    "DQW1" | version=1 | tensor_count | per tensor:
                name_len | name UTF-8 | rank | rank*u32 dims | f32 data
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadMagicError,
    FileFormatError,
    TruncatedFileError,
    VersionMismatchError,
)

FEATURE_MAGIC = b"DQF1"
POOL_MAGIC = b"DQP1"
PARAMS_MAGIC = b"DQS1"
WEIGHTS_MAGIC = b"DQW1"
FORMAT_VERSION = 1

F0_MIN_HZ = 40.0
F0_MAX_HZ = 2000.0


def _as_f32_matrix(arr, rows_name: str) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float32)
    if out.ndim != 2:
        raise ValueError(f"{rows_name} must be a 2-D matrix")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{rows_name} must be finite")
    return out


@dataclass(frozen=True)
class FeatureSequence:
    """Frame-major T x D feature matrix with hop metadata."""

    frames: np.ndarray
    hop_samples: int
    dim: int = field(default=0)

    def __post_init__(self):
        frames = _as_f32_matrix(self.frames, "frames")
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "dim", frames.shape[1])
        if self.dim < 1:
            raise ValueError("feature dimension must be >= 1")
        if self.hop_samples < 1:
            raise ValueError("hop_samples must be >= 1")

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True)
class PhonePool:
    """Flat P x D collection of target-speaker phone vectors."""

    vectors: np.ndarray
    source_id: str

    def __post_init__(self):
        vectors = _as_f32_matrix(self.vectors, "vectors")
        object.__setattr__(self, "vectors", vectors)
        if vectors.shape[0] < 1:
            raise ValueError("pool must contain at least one vector")
        norms = np.linalg.norm(vectors.astype(np.float64), axis=1)
        if np.any(norms == 0.0):
            raise ValueError("pool must not contain all-zero vectors")

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class SynthParamsSeq:
    """Per-frame synthesiser parameters: F0 plus filter coefficient rows.

    f0_hz entries are 0 (unvoiced) or in [40, 2000]. harm_logmag / noise_logmag
    rows are interpreted downstream as log-magnitude frequency samples.
    """

    f0_hz: np.ndarray
    harm_logmag: np.ndarray
    noise_logmag: np.ndarray
    hop_samples: int

    def __post_init__(self):
        f0 = np.ascontiguousarray(self.f0_hz, dtype=np.float32).reshape(-1)
        harm = _as_f32_matrix(self.harm_logmag, "harm_logmag")
        noise = _as_f32_matrix(self.noise_logmag, "noise_logmag")
        object.__setattr__(self, "f0_hz", f0)
        object.__setattr__(self, "harm_logmag", harm)
        object.__setattr__(self, "noise_logmag", noise)
        if not np.all(np.isfinite(f0)):
            raise ValueError("f0_hz must be finite")
        voiced = f0[f0 != 0.0]
        if voiced.size and (voiced.min() < F0_MIN_HZ or voiced.max() > F0_MAX_HZ):
            raise ValueError("voiced f0 values must lie in [40, 2000] Hz")
        if not (len(f0) == harm.shape[0] == noise.shape[0]):
            raise ValueError("f0_hz, harm_logmag and noise_logmag must have equal row counts")
        if self.hop_samples < 1:
            raise ValueError("hop_samples must be >= 1")

    @property
    def n_frames(self) -> int:
        return len(self.f0_hz)


@dataclass(frozen=True)
class WeightBundle:
    """Ordered list of named tensors: (name, shape tuple, flat f32 data)."""

    tensors: tuple

    def __post_init__(self):
        seen = set()
        normalized = []
        for name, shape, data in self.tensors:
            if name in seen:
                raise ValueError(f"duplicate tensor name {name!r}")
            seen.add(name)
            shape = tuple(int(s) for s in shape)
            if any(s < 1 for s in shape):
                raise ValueError(f"tensor {name!r} has non-positive dimension")
            flat = np.ascontiguousarray(data, dtype=np.float32).reshape(-1)
            if int(np.prod(shape)) != flat.size:
                raise ValueError(
                    f"tensor {name!r}: shape {shape} implies {int(np.prod(shape))} "
                    f"values, got {flat.size}"
                )
            normalized.append((str(name), shape, flat))
        object.__setattr__(self, "tensors", tuple(normalized))

    def as_dict(self) -> dict:
        return {name: data.reshape(shape) for name, shape, data in self.tensors}


class _Reader:
    """Cursor over a fully loaded file; raises TruncatedFileError on overrun."""

    def __init__(self, path, expected_magic: bytes):
        with open(path, "rb") as fh:
            self.data = fh.read()
        self.path = path
        self.pos = 0
        magic = self._take(4)
        if magic != expected_magic:
            raise BadMagicError(
                f"{path}: magic {magic!r}, expected {expected_magic!r}"
            )
        version = self.u32()
        if version != FORMAT_VERSION:
            raise VersionMismatchError(f"{path}: version {version}, expected {FORMAT_VERSION}")

    def _take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedFileError(f"{self.path}: needs {n} more bytes at offset {self.pos}")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self._take(4))[0]

    def f32s(self, count: int) -> np.ndarray:
        return np.frombuffer(self._take(4 * count), dtype="<f4").copy()

    def text(self, nbytes: int) -> str:
        raw = self._take(nbytes)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FileFormatError(f"{self.path}: invalid UTF-8 string field") from exc

    def done(self) -> None:
        if self.pos != len(self.data):
            raise TruncatedFileError(
                f"{self.path}: {len(self.data) - self.pos} trailing bytes beyond declared sizes"
            )


def _u32(*values) -> bytes:
    return struct.pack(f"<{len(values)}I", *values)


def write_features(path, fs: FeatureSequence) -> None:
    with open(path, "wb") as fh:
        fh.write(FEATURE_MAGIC)
        fh.write(_u32(FORMAT_VERSION, fs.n_frames, fs.dim, fs.hop_samples))
        fh.write(fs.frames.astype("<f4").tobytes())


def _build(path, ctor, **kwargs):
    try:
        return ctor(**kwargs)
    except ValueError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc


def read_features(path) -> FeatureSequence:
    r = _Reader(path, FEATURE_MAGIC)
    t, d, hop = r.u32(), r.u32(), r.u32()
    if d < 1:
        raise FileFormatError(f"{path}: declared feature dimension {d} is invalid")
    frames = r.f32s(t * d).reshape(t, d)
    r.done()
    return _build(path, FeatureSequence, frames=frames, hop_samples=hop)


def write_pool(path, pool: PhonePool) -> None:
    ident = pool.source_id.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(POOL_MAGIC)
        fh.write(_u32(FORMAT_VERSION, pool.size, pool.dim, len(ident)))
        fh.write(ident)
        fh.write(pool.vectors.astype("<f4").tobytes())


def read_pool(path) -> PhonePool:
    r = _Reader(path, POOL_MAGIC)
    p, d, id_len = r.u32(), r.u32(), r.u32()
    if p < 1 or d < 1:
        raise FileFormatError(f"{path}: declared pool shape {p}x{d} is invalid")
    ident = r.text(id_len)
    vectors = r.f32s(p * d).reshape(p, d)
    r.done()
    return _build(path, PhonePool, vectors=vectors, source_id=ident)


def write_params(path, params: SynthParamsSeq) -> None:
    t = params.n_frames
    f_h = params.harm_logmag.shape[1]
    f_s = params.noise_logmag.shape[1]
    with open(path, "wb") as fh:
        fh.write(PARAMS_MAGIC)
        fh.write(_u32(FORMAT_VERSION, t, f_h, f_s, params.hop_samples))
        fh.write(params.f0_hz.astype("<f4").tobytes())
        fh.write(params.harm_logmag.astype("<f4").tobytes())
        fh.write(params.noise_logmag.astype("<f4").tobytes())


def read_params(path) -> SynthParamsSeq:
    r = _Reader(path, PARAMS_MAGIC)
    t, f_h, f_s, hop = r.u32(), r.u32(), r.u32(), r.u32()
    if f_h < 1 or f_s < 1:
        raise FileFormatError(f"{path}: declared filter widths {f_h}/{f_s} are invalid")
    f0 = r.f32s(t)
    harm = r.f32s(t * f_h).reshape(t, f_h)
    noise = r.f32s(t * f_s).reshape(t, f_s)
    r.done()
    return _build(
        path, SynthParamsSeq, f0_hz=f0, harm_logmag=harm, noise_logmag=noise, hop_samples=hop
    )


def write_weights(path, bundle: WeightBundle) -> None:
    with open(path, "wb") as fh:
        fh.write(WEIGHTS_MAGIC)
        fh.write(_u32(FORMAT_VERSION, len(bundle.tensors)))
        for name, shape, data in bundle.tensors:
            encoded = name.encode("utf-8")
            fh.write(_u32(len(encoded)))
            fh.write(encoded)
            fh.write(_u32(len(shape), *shape))
            fh.write(data.astype("<f4").tobytes())


def read_weights(path) -> WeightBundle:
    r = _Reader(path, WEIGHTS_MAGIC)
    count = r.u32()
    tensors = []
    for _ in range(count):
        name = r.text(r.u32())
        rank = r.u32()
        shape = tuple(r.u32() for _ in range(rank))
        data = r.f32s(int(np.prod(shape)) if shape else 1)
        tensors.append((name, shape, data))
    r.done()
    return _build(path, WeightBundle, tensors=tuple(tensors))
