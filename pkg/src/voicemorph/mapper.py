"""Query-by-example phone mapping against a target-speaker pool.

Each query vector is replaced by the softmax-weighted average of its top-M
nearest pool vectors, nearest by cosine distance with weights drawn from a
softmax over inverse distances. Exact full-scan search: pools built from a
few minutes of speech stay small enough that brute force is both fast and
exact.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimMismatchError,
    EmptyPoolError,
    PoolTooSmallError,
    ZeroVectorError,
)
from .formats import FeatureSequence, PhonePool


@dataclass(frozen=True)
class MapperConfig:
    """n_candidates is the spec's M; distance_epsilon floors 1/d at exact matches."""

    n_candidates: int = 4
    distance_epsilon: float = 1e-8

    def __post_init__(self):
        if self.n_candidates < 1:
            raise ValueError("n_candidates must be >= 1")
        if self.distance_epsilon <= 0.0:
            raise ValueError("distance_epsilon must be positive")


def cosine_distance(a, b) -> float:
    """1 - cos(a, b), in [0, 2]. Raises ZeroVectorError on zero-norm input."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise DimMismatchError(f"vector dims differ: {a.shape[0]} vs {b.shape[0]}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("cosine distance undefined for zero vectors")
    return float(1.0 - np.dot(a, b) / (na * nb))


def _map_one(q: np.ndarray, vectors: np.ndarray, norms: np.ndarray,
             m: int, eps: float) -> np.ndarray:
    qn = np.linalg.norm(q)
    if qn == 0.0:
        raise ZeroVectorError("query vector has zero norm")
    dists = 1.0 - (vectors @ q) / (norms * qn)
    # stable sort keeps equal-distance candidates in pool order
    chosen = np.argsort(dists, kind="stable")[:m]
    inv = 1.0 / np.maximum(dists[chosen], eps)
    w = np.exp(inv - inv.max())
    w /= w.sum()
    return (w @ vectors[chosen]) / w.sum()


def map_query(q, pool: PhonePool, cfg: MapperConfig = MapperConfig()) -> np.ndarray:
    """Map one query vector to the weighted average of its top-M pool matches."""
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if q.shape[0] != pool.dim:
        raise DimMismatchError(f"query dim {q.shape[0]} != pool dim {pool.dim}")
    if cfg.n_candidates > pool.size:
        raise PoolTooSmallError(
            f"pool holds {pool.size} vectors, cannot take top {cfg.n_candidates}"
        )
    vectors = pool.vectors.astype(np.float64)
    norms = np.linalg.norm(vectors, axis=1)
    return _map_one(q, vectors, norms, cfg.n_candidates, cfg.distance_epsilon)


def map_sequence(x_phon: FeatureSequence, pool: PhonePool,
                 cfg: MapperConfig = MapperConfig()) -> FeatureSequence:
    """Frame-wise map_query over a feature sequence; frame count and hop preserved."""
    if x_phon.dim != pool.dim:
        raise DimMismatchError(f"sequence dim {x_phon.dim} != pool dim {pool.dim}")
    if cfg.n_candidates > pool.size:
        raise PoolTooSmallError(
            f"pool holds {pool.size} vectors, cannot take top {cfg.n_candidates}"
        )
    vectors = pool.vectors.astype(np.float64)
    norms = np.linalg.norm(vectors, axis=1)
    mapped = np.empty((x_phon.n_frames, x_phon.dim))
    for i, frame in enumerate(x_phon.frames.astype(np.float64)):
        mapped[i] = _map_one(frame, vectors, norms, cfg.n_candidates, cfg.distance_epsilon)
    return FeatureSequence(frames=mapped, hop_samples=x_phon.hop_samples)


def build_pool(utterance_features, source_id: str):
    """Concatenate utterance feature frames into a pool, dropping zero-norm frames.

    Returns (pool, dropped_count). Frame order follows the input order.
    """
    seqs = list(utterance_features)
    if not seqs:
        raise EmptyPoolError("no feature sequences supplied")
    dim = seqs[0].dim
    for s in seqs:
        if s.dim != dim:
            raise DimMismatchError(f"mixed feature dims: {s.dim} != {dim}")
    stacked = np.concatenate([s.frames for s in seqs], axis=0)
    norms = np.linalg.norm(stacked.astype(np.float64), axis=1)
    keep = norms > 0.0
    dropped = int(np.count_nonzero(~keep))
    if not np.any(keep):
        raise EmptyPoolError("all frames have zero norm")
    return PhonePool(vectors=stacked[keep], source_id=source_id), dropped
