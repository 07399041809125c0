"""PEMB v1 archive writer (write side only; the engine owns the reader).

Layout, little-endian throughout: magic "PEMB", version u16 (=1), a
vocabulary block (symbol count u16, per symbol u16 byte length + UTF-8,
unknown-symbol policy u8), record count u32, then per record: id (u16
length + UTF-8), num_frames u32, dim u32, frame_hop f32, embeddings
num_frames*dim f32 row-major, labels num_frames u16, canonical u32
length + u16 ids, annotated u32 length + u16 ids with 0 meaning absent.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .phones import ARPABET

MAGIC = b"PEMB"
FORMAT_VERSION = 1
BLANK_SYMBOL = "<blank>"
ERR_SYMBOL = "<err>"

POLICY_REJECT = 0
POLICY_MAP_TO_ERR = 1

_F32 = np.dtype("<f4")
_U16 = np.dtype("<u2")


class UnknownPhoneError(ValueError):
    """A phone outside the vocabulary under the reject policy."""


@dataclass(frozen=True)
class Vocabulary:
    """Blank-first symbol table mirroring the engine's."""

    symbols: tuple[str, ...]
    policy: int = POLICY_REJECT
    _ids: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_ids", {s: i for i, s in enumerate(self.symbols)})

    @classmethod
    def arpabet(cls, policy: int = POLICY_REJECT) -> "Vocabulary":
        symbols = (BLANK_SYMBOL,) + ARPABET
        if policy == POLICY_MAP_TO_ERR:
            symbols = symbols + (ERR_SYMBOL,)
        return cls(symbols, policy)

    def id_of(self, phone: str) -> int:
        label = self._ids.get(phone)
        if label is not None:
            return label
        if self.policy == POLICY_MAP_TO_ERR:
            return self._ids[ERR_SYMBOL]
        raise UnknownPhoneError(f"phone {phone!r} not in the vocabulary")


@dataclass(frozen=True)
class Record:
    utterance_id: str
    frame_hop: float
    embeddings: np.ndarray
    frame_labels: Sequence[int]
    canonical: Sequence[int]
    annotated: Sequence[int] | None


def _pack_str(text: str) -> bytes:
    raw = text.encode("utf-8")
    return struct.pack("<H", len(raw)) + raw


def write_archive(records: Sequence[Record], vocabulary: Vocabulary, path: str | Path) -> None:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", FORMAT_VERSION))
        fh.write(struct.pack("<H", len(vocabulary.symbols)))
        for symbol in vocabulary.symbols:
            fh.write(_pack_str(symbol))
        fh.write(struct.pack("<B", vocabulary.policy))
        fh.write(struct.pack("<I", len(records)))
        for record in records:
            fh.write(_pack_record(record))
    _write_manifest(records, vocabulary, path.with_name(path.name + ".manifest"))


def _pack_record(record: Record) -> bytes:
    embeddings = np.ascontiguousarray(record.embeddings, dtype=_F32)
    num_frames, dim = embeddings.shape
    labels = np.asarray(record.frame_labels, dtype=_U16)
    if labels.shape != (num_frames,):
        raise ValueError(f"{record.utterance_id}: label track does not match frame count")
    annotated = record.annotated or ()
    return b"".join(
        (
            _pack_str(record.utterance_id),
            struct.pack("<IIf", num_frames, dim, record.frame_hop),
            embeddings.tobytes(),
            labels.tobytes(),
            struct.pack("<I", len(record.canonical)),
            np.asarray(record.canonical, dtype=_U16).tobytes(),
            struct.pack("<I", len(annotated)),
            np.asarray(annotated, dtype=_U16).tobytes(),
        )
    )


def _write_manifest(records: Sequence[Record], vocabulary: Vocabulary, path: Path) -> None:
    lines = [
        "# PEMB archive manifest",
        f"# format version: {FORMAT_VERSION}",
        f"# vocabulary: {len(vocabulary.symbols)} symbols (blank={BLANK_SYMBOL!r})",
        f"# records: {len(records)}",
    ]
    lines.extend(f"{r.utterance_id}\t{np.asarray(r.embeddings).shape[0]}" for r in records)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
