"""Phoneme embedding pool construction and snapshotting.

The pool is the retrieval reference set: labeled embeddings selected from
training utterances, one of three ways per contiguous non-blank label run
(all frames, the middle frame, or the run mean). Utterance subsampling is
prefix sampling over one seeded permutation, so for a fixed seed a pool of
size m is always a subset of the pool of size m+1.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .corpus import (
    BLANK_ID,
    ArchiveFormatError,
    PhonemeVocabulary,
    UtteranceRecord,
    ValidationError,
    _pack_str,
    _pack_vocabulary,
    _Reader,
    _read_vocabulary,
)

_F32 = np.dtype("<f4")
_U16 = np.dtype("<u2")

SNAPSHOT_MAGIC = b"PPOL"
SNAPSHOT_VERSION = 1


class ZeroNormWarning(UserWarning):
    """Degenerate zero-norm embedding encountered; its cosine is defined as 0."""


class PoolingStrategy(Enum):
    ALL_FRAME = "all"
    MIDDLE_FRAME = "middle"
    MEAN_FRAME = "mean"

    @classmethod
    def parse(cls, text: str) -> "PoolingStrategy":
        key = text.strip().lower().replace("_", "-")
        aliases = {
            "all": cls.ALL_FRAME,
            "all-frame": cls.ALL_FRAME,
            "middle": cls.MIDDLE_FRAME,
            "mid": cls.MIDDLE_FRAME,
            "middle-frame": cls.MIDDLE_FRAME,
            "mid-frame": cls.MIDDLE_FRAME,
            "mean": cls.MEAN_FRAME,
            "mean-frame": cls.MEAN_FRAME,
        }
        if key not in aliases:
            raise ValidationError(f"unknown pooling strategy {text!r}")
        return aliases[key]


@dataclass(frozen=True, eq=False)
class PhonemePool:
    """Immutable retrieval reference set.

    ``entries`` is (N, dim) float32, ``labels`` the matching non-blank
    phoneme ids, ``norms`` precomputed float64 L2 norms of the rows.
    """

    entries: np.ndarray
    labels: np.ndarray
    norms: np.ndarray
    strategy: PoolingStrategy
    source_utterances: tuple[str, ...]

    def __post_init__(self) -> None:
        entries = np.ascontiguousarray(self.entries, dtype=_F32)
        labels = np.ascontiguousarray(self.labels, dtype=_U16)
        norms = np.ascontiguousarray(self.norms, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] == 0:
            raise ValidationError("pool must contain at least one entry")
        if labels.shape != (entries.shape[0],) or norms.shape != (entries.shape[0],):
            raise ValidationError("pool entries, labels, and norms must have equal length")
        if (labels == BLANK_ID).any():
            raise ValidationError("pool entries cannot carry the blank label")
        for arr in (entries, labels, norms):
            arr.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "norms", norms)
        object.__setattr__(self, "source_utterances", tuple(self.source_utterances))

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def dim(self) -> int:
        return self.entries.shape[1]


def _row_norms(entries: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("ij,ij->i", entries, entries, dtype=np.float64))


def iter_label_runs(frame_labels: np.ndarray) -> Iterator[tuple[int, int, int]]:
    """Yield (label, start, end) for contiguous same-label runs; end inclusive."""
    labels = np.asarray(frame_labels)
    if labels.size == 0:
        return
    boundaries = np.flatnonzero(np.diff(labels.astype(np.int64)) != 0) + 1
    starts = np.concatenate(([0], boundaries))
    ends = np.concatenate((boundaries, [labels.size])) - 1
    for s, e in zip(starts, ends):
        yield int(labels[s]), int(s), int(e)


def build_pool(
    records: Sequence[UtteranceRecord],
    strategy: PoolingStrategy = PoolingStrategy.MIDDLE_FRAME,
    sample_size: int | None = None,
    seed: int = 0,
) -> PhonemePool:
    """Build a pool from training records under the given strategy.

    ``sample_size`` of None uses every record. Records are always visited
    in seeded-permutation order and sampling takes the permutation prefix,
    which makes pool-size sweeps nested and the result bit-reproducible
    for identical (records, strategy, sample_size, seed). The PRNG is
    numpy's PCG64 via ``default_rng(seed)``.
    """
    if not records:
        raise ValidationError("cannot build a pool from zero records")
    if sample_size is not None:
        if sample_size < 1:
            raise ValidationError(f"sample_size must be >= 1, got {sample_size}")
        if sample_size > len(records):
            raise ValidationError(
                f"sample_size {sample_size} exceeds the {len(records)} available utterances"
            )
    take = len(records) if sample_size is None else sample_size
    order = np.random.default_rng(seed).permutation(len(records))[:take]
    chosen = [records[i] for i in order]

    dim = chosen[0].dim
    blocks: list[np.ndarray] = []
    labels: list[int] = []
    for record in chosen:
        if record.dim != dim:
            raise ValidationError(
                f"{record.utterance_id}: dim {record.dim} differs from pool dim {dim}"
            )
        for label, s, e in iter_label_runs(record.frame_labels):
            if label == BLANK_ID:
                continue
            if strategy is PoolingStrategy.ALL_FRAME:
                blocks.append(record.embeddings[s : e + 1])
                labels.extend([label] * (e - s + 1))
            elif strategy is PoolingStrategy.MIDDLE_FRAME:
                mid = (s + e) // 2
                blocks.append(record.embeddings[mid : mid + 1])
                labels.append(label)
            else:
                mean = record.embeddings[s : e + 1].mean(axis=0, dtype=np.float64)
                blocks.append(mean.astype(_F32)[None, :])
                labels.append(label)

    if not labels:
        raise ValidationError("empty pool: every sampled frame is blank")
    entries = np.concatenate(blocks, axis=0)
    norms = _row_norms(entries)
    if (norms == 0).any():
        warnings.warn(
            f"{int((norms == 0).sum())} zero-norm pool entries; their similarity is 0",
            ZeroNormWarning,
            stacklevel=2,
        )
    return PhonemePool(
        entries=entries,
        labels=np.asarray(labels, dtype=_U16),
        norms=norms,
        strategy=strategy,
        source_utterances=tuple(r.utterance_id for r in chosen),
    )


def pool_stats(pool: PhonemePool, vocabulary: PhonemeVocabulary) -> dict[str, int]:
    """Entry count per phoneme symbol; phonemes absent from the pool report 0."""
    counts = np.bincount(pool.labels, minlength=len(vocabulary))
    return {
        vocabulary.symbol_of(i): int(counts[i])
        for i in range(len(vocabulary))
        if i != BLANK_ID
    }


def save_pool(pool: PhonemePool, vocabulary: PhonemeVocabulary, path: str | Path) -> None:
    """Cache a pool to disk; reloading reproduces it byte-identically."""
    with open(Path(path), "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<H", SNAPSHOT_VERSION))
        fh.write(_pack_vocabulary(vocabulary))
        fh.write(struct.pack("<B", _strategy_code(pool.strategy)))
        fh.write(struct.pack("<II", pool.size, pool.dim))
        fh.write(pool.entries.tobytes())
        fh.write(pool.labels.tobytes())
        fh.write(struct.pack("<I", len(pool.source_utterances)))
        for utt_id in pool.source_utterances:
            fh.write(_pack_str(utt_id))


def load_pool(path: str | Path) -> tuple[PhonemePool, PhonemeVocabulary]:
    data = Path(path).read_bytes()
    r = _Reader(data)
    if r.take(4, "magic") != SNAPSHOT_MAGIC:
        raise ArchiveFormatError(f"{path}: not a pool snapshot")
    version = r.u16("version")
    if version != SNAPSHOT_VERSION:
        raise ArchiveFormatError(f"{path}: unsupported snapshot version {version}")
    vocabulary = _read_vocabulary(r)
    strategy = _strategy_from_code(r.u8("strategy"))
    size = r.u32("pool size")
    dim = r.u32("pool dim")
    entries = r.array(_F32, size * dim, "pool entries").reshape(size, dim)
    labels = r.array(_U16, size, "pool labels")
    n_src = r.u32("source count")
    sources = tuple(r.string(f"source {i}") for i in range(n_src))
    if r.pos != len(data):
        raise ArchiveFormatError(f"{path}: trailing bytes in pool snapshot")
    pool = PhonemePool(
        entries=entries,
        labels=labels,
        norms=_row_norms(entries),
        strategy=strategy,
        source_utterances=sources,
    )
    if pool.labels.size and int(pool.labels.max()) >= len(vocabulary):
        raise ValidationError(f"{path}: pool label outside vocabulary")
    return pool, vocabulary


_STRATEGY_CODES = {
    PoolingStrategy.ALL_FRAME: 0,
    PoolingStrategy.MIDDLE_FRAME: 1,
    PoolingStrategy.MEAN_FRAME: 2,
}


def _strategy_code(strategy: PoolingStrategy) -> int:
    return _STRATEGY_CODES[strategy]


def _strategy_from_code(code: int) -> PoolingStrategy:
    for strategy, value in _STRATEGY_CODES.items():
        if value == code:
            return strategy
    raise ArchiveFormatError(f"unknown pooling strategy code {code}")
