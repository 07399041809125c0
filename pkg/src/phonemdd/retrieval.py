"""Exact cosine top-k retrieval and per-frame label assignment.

Search is exact brute force over the pool: dot products accumulate in
float32 (BLAS), the norm division and everything after happens in
float64, and comparisons use raw values with index order breaking
similarity ties. ``classify_frames`` is the literal per-frame composition
of ``top_k`` and ``filter_and_assign``, so the two paths can never
disagree.

Zero-norm vectors have no direction; their cosine is defined as 0 (with a
``ZeroNormWarning``) so degenerate frames fall below any positive
threshold and come out blank.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .corpus import BLANK_ID, UtteranceRecord, ValidationError
from .decoder import FrameLabelSequence
from .pool import PhonemePool, ZeroNormWarning

_F32 = np.dtype("<f4")


class TieBreak(Enum):
    BY_SIMILARITY_SUM = "similarity-sum"
    BY_LOWEST_LABEL_ID = "lowest-label"

    @classmethod
    def parse(cls, text: str) -> "TieBreak":
        key = text.strip().lower().replace("_", "-")
        for member in cls:
            if member.value == key:
                return member
        raise ValidationError(f"unknown tie break {text!r}")


@dataclass(frozen=True)
class RetrievalConfig:
    """Retrieval hyperparameters: neighbor count, similarity floor, tie rule."""

    top_k: int = 10
    threshold: float | None = 0.7
    tie_break: TieBreak = TieBreak.BY_SIMILARITY_SUM

    def __post_init__(self) -> None:
        if self.top_k < 1:
            raise ValidationError(f"top_k must be >= 1, got {self.top_k}")
        if self.threshold is not None and not -1.0 <= self.threshold <= 1.0:
            raise ValidationError(f"threshold {self.threshold} outside [-1, 1]")


class Neighbor(NamedTuple):
    pool_index: int
    similarity: float
    label: int


def cosine_similarity(q: Sequence[float] | np.ndarray, e: Sequence[float] | np.ndarray) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1].

    Either side having zero norm yields 0 and a ZeroNormWarning.
    """
    qa = np.ascontiguousarray(q, dtype=_F32)
    ea = np.ascontiguousarray(e, dtype=_F32)
    if qa.shape != ea.shape or qa.ndim != 1:
        raise ValidationError(f"dimension mismatch: {qa.shape} vs {ea.shape}")
    qq = float(np.einsum("i,i->", qa, qa, dtype=np.float64))
    ee = float(np.einsum("i,i->", ea, ea, dtype=np.float64))
    if qq == 0.0 or ee == 0.0:
        warnings.warn("zero-norm vector in cosine similarity", ZeroNormWarning, stacklevel=2)
        return 0.0
    dot = float(qa @ ea)
    return float(np.clip(dot / np.sqrt(qq * ee), -1.0, 1.0))


def _similarity_row(q: np.ndarray, q_norm: float, pool: PhonemePool) -> np.ndarray:
    """Similarities of one query frame against every pool entry, float64."""
    dots = (q @ pool.entries.T).astype(np.float64)
    denom = q_norm * pool.norms
    sims = np.divide(dots, denom, out=np.zeros_like(dots), where=denom > 0)
    np.clip(sims, -1.0, 1.0, out=sims)
    return sims


def _top_indices(sims: np.ndarray, k: int) -> np.ndarray:
    # stable argsort on -sims orders by similarity desc, then pool index asc
    return np.argsort(-sims, kind="stable")[:k]


def top_k(q: Sequence[float] | np.ndarray, pool: PhonemePool, k: int) -> list[Neighbor]:
    """The min(k, N) most cosine-similar pool entries, best first.

    Equal similarities order by lower pool index, so results are
    deterministic.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    qa = np.ascontiguousarray(q, dtype=_F32)
    if qa.ndim != 1 or qa.shape[0] != pool.dim:
        raise ValidationError(f"query shape {qa.shape} does not match pool dim {pool.dim}")
    q_norm = float(np.sqrt(np.einsum("i,i->", qa, qa, dtype=np.float64)))
    if q_norm == 0.0:
        warnings.warn("zero-norm query frame", ZeroNormWarning, stacklevel=2)
    sims = _similarity_row(qa, q_norm, pool)
    order = _top_indices(sims, min(k, pool.size))
    return [Neighbor(int(i), float(sims[i]), int(pool.labels[i])) for i in order]


def _assign(labels: Sequence[int], sims: Sequence[float], config: RetrievalConfig) -> int:
    """Modal label of the neighbors surviving the threshold; blank if none."""
    if config.threshold is None:
        kept = list(zip(labels, sims))
    else:
        kept = [(l, s) for l, s in zip(labels, sims) if s >= config.threshold]
    if not kept:
        return BLANK_ID
    counts = Counter(l for l, _ in kept)
    best = max(counts.values())
    tied = [l for l, c in counts.items() if c == best]
    if len(tied) == 1:
        return tied[0]
    if config.tie_break is TieBreak.BY_LOWEST_LABEL_ID:
        return min(tied)
    sums = {l: 0.0 for l in tied}
    for l, s in kept:
        if l in sums:
            sums[l] += s
    top = max(sums.values())
    return min(l for l, total in sums.items() if total == top)


def filter_and_assign(neighbors: Sequence[Neighbor], config: RetrievalConfig) -> int:
    """Frame label from a descending-similarity neighbor list.

    Neighbors below the threshold are dropped; an empty surviving set
    yields blank, otherwise the modal label wins with ties broken per
    config (larger summed similarity by default, then lowest label id).
    """
    labels = [n.label for n in neighbors]
    sims = [n.similarity for n in neighbors]
    return _assign(labels, sims, config)


def classify_frames(
    record: UtteranceRecord, pool: PhonemePool, config: RetrievalConfig
) -> FrameLabelSequence:
    """Label every frame of an utterance by pool retrieval.

    Frame t gets exactly ``filter_and_assign(top_k(q_t, pool, k), config)``.
    """
    if record.dim != pool.dim:
        raise ValidationError(
            f"{record.utterance_id}: dim {record.dim} does not match pool dim {pool.dim}"
        )
    queries = record.embeddings
    q_norms = np.sqrt(np.einsum("ij,ij->i", queries, queries, dtype=np.float64))
    degenerate = int((q_norms == 0).sum())
    if degenerate:
        warnings.warn(
            f"{record.utterance_id}: {degenerate} zero-norm frames classify as blank",
            ZeroNormWarning,
            stacklevel=2,
        )
    k = min(config.top_k, pool.size)
    labels = []
    for t in range(record.num_frames):
        sims = _similarity_row(queries[t], float(q_norms[t]), pool)
        order = _top_indices(sims, k)
        labels.append(_assign(pool.labels[order].tolist(), sims[order].tolist(), config))
    return FrameLabelSequence(tuple(labels))
