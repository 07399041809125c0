"""Phoneme vocabulary, utterance records, and the PEMB archive format.

An archive bundles one vocabulary with any number of utterance records.
Each record carries frame-level embeddings from a speech encoder, a
frame-level phoneme label track derived from time-aligned phoneme spans,
the canonical phoneme sequence, and (for evaluation sets) the sequence a
human annotator heard.

PEMB v1 on-disk layout, all little-endian:

    magic           4 bytes  b"PEMB"
    version         u16      currently 1
    vocabulary      u16 symbol count, then per symbol: u16 byte length +
                    UTF-8 bytes; then u8 unknown-symbol policy
    record count    u32
    per record:
        utterance id    u16 byte length + UTF-8 bytes
        num_frames      u32
        dim             u32
        frame_hop       f32      seconds per frame
        embeddings      num_frames * dim f32, row-major
        frame_labels    num_frames u16
        canonical       u32 length + u16 ids
        annotated       u32 length + u16 ids (length 0 means absent)

Label id 0 is reserved for the blank symbol everywhere; real phonemes
occupy ids >= 1. Write-then-read is a bit-exact round trip, float
payloads included.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import BinaryIO, NamedTuple, Sequence

import numpy as np

MAGIC = b"PEMB"
FORMAT_VERSION = 1
BLANK_ID = 0
BLANK_SYMBOL = "<blank>"
ERR_SYMBOL = "<err>"
MAX_VOCAB_SIZE = 0xFFFF

_F32 = np.dtype("<f4")
_U16 = np.dtype("<u2")


class ValidationError(ValueError):
    """Raised when data violates a structural or vocabulary constraint."""


class ArchiveFormatError(Exception):
    """Raised when a file is not a well-formed PEMB archive."""


class UnknownSymbolPolicy(Enum):
    """How vocabulary lookups treat symbols outside the vocabulary."""

    REJECT = 0
    MAP_TO_ERR = 1


@dataclass(frozen=True)
class PhonemeVocabulary:
    """Ordered phoneme inventory; index 0 is always the blank symbol.

    Symbols are unique, non-empty, and lowercase. Lookups normalize the
    queried symbol to lowercase before resolving it.
    """

    symbols: tuple[str, ...]
    err_policy: UnknownSymbolPolicy = UnknownSymbolPolicy.REJECT

    def __post_init__(self) -> None:
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if len(self.symbols) < 1:
            raise ValidationError("vocabulary must contain at least the blank symbol")
        if len(self.symbols) > MAX_VOCAB_SIZE:
            raise ValidationError(
                f"vocabulary size {len(self.symbols)} exceeds the 16-bit label limit {MAX_VOCAB_SIZE}"
            )
        seen: set[str] = set()
        for sym in self.symbols:
            if not sym:
                raise ValidationError("vocabulary symbols must be non-empty")
            if sym != sym.lower():
                raise ValidationError(f"vocabulary symbol {sym!r} is not lowercase")
            if sym in seen:
                raise ValidationError(f"duplicate vocabulary symbol {sym!r}")
            seen.add(sym)
        if self.err_policy is UnknownSymbolPolicy.MAP_TO_ERR and ERR_SYMBOL not in seen:
            raise ValidationError(
                f"err_policy=MAP_TO_ERR requires {ERR_SYMBOL!r} in the vocabulary"
            )

    @classmethod
    def from_phonemes(
        cls,
        phonemes: Sequence[str],
        err_policy: UnknownSymbolPolicy = UnknownSymbolPolicy.REJECT,
    ) -> "PhonemeVocabulary":
        """Build a vocabulary from real phoneme symbols, prepending blank.

        Symbols are lowercased here; an err symbol is appended when the
        policy maps unknowns to it.
        """
        symbols = [BLANK_SYMBOL] + [p.lower() for p in phonemes]
        if err_policy is UnknownSymbolPolicy.MAP_TO_ERR and ERR_SYMBOL not in symbols:
            symbols.append(ERR_SYMBOL)
        return cls(tuple(symbols), err_policy)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {sym: i for i, sym in enumerate(self.symbols)}

    @property
    def blank_symbol(self) -> str:
        return self.symbols[BLANK_ID]

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, symbol: str) -> bool:
        return symbol.lower() in self._index

    def id_of(self, symbol: str) -> int:
        """Resolve a symbol to its label id, applying the unknown policy."""
        label = self._index.get(symbol.lower())
        if label is not None:
            return label
        if self.err_policy is UnknownSymbolPolicy.MAP_TO_ERR:
            return self._index[ERR_SYMBOL]
        raise ValidationError(f"unknown phoneme symbol {symbol!r}")

    def symbol_of(self, label_id: int) -> str:
        if not 0 <= label_id < len(self.symbols):
            raise ValidationError(f"label id {label_id} outside vocabulary of size {len(self)}")
        return self.symbols[label_id]


@dataclass(frozen=True)
class PhonemeSpan:
    """A time interval [start, end) carrying one non-blank phoneme label."""

    label: int
    start: float
    end: float

    def __post_init__(self) -> None:
        if self.label == BLANK_ID:
            raise ValidationError("phoneme spans cannot carry the blank label")
        if not self.start < self.end:
            raise ValidationError(
                f"span start {self.start} must be strictly before end {self.end}"
            )


def frame_labels_from_spans(
    spans: Sequence[PhonemeSpan], num_frames: int, frame_hop: float
) -> np.ndarray:
    """Assign each frame the label of the span containing its center time.

    Frame t covers [t*hop, (t+1)*hop); its center (t + 0.5)*hop decides the
    label. Spans are half-open [start, end), so a center landing exactly on
    a boundary belongs to the following span. Uncovered frames get blank.

    Spans must be sorted by start and non-overlapping; the first offending
    pair is reported otherwise.
    """
    if num_frames < 0:
        raise ValidationError("num_frames must be non-negative")
    if frame_hop <= 0:
        raise ValidationError("frame_hop must be positive")
    for prev, cur in zip(spans, spans[1:]):
        if cur.start < prev.start:
            raise ValidationError(
                f"spans not sorted by start: ({prev.label}:{prev.start}-{prev.end}) "
                f"precedes ({cur.label}:{cur.start}-{cur.end})"
            )
        if cur.start < prev.end:
            raise ValidationError(
                f"overlapping spans: ({prev.label}:{prev.start}-{prev.end}) and "
                f"({cur.label}:{cur.start}-{cur.end})"
            )

    labels = np.full(num_frames, BLANK_ID, dtype=_U16)
    si = 0
    for t in range(num_frames):
        center = (t + 0.5) * frame_hop
        while si < len(spans) and spans[si].end <= center:
            si += 1
        if si < len(spans) and spans[si].start <= center:
            labels[t] = spans[si].label
    labels.setflags(write=False)
    return labels


@dataclass(frozen=True, eq=False)
class UtteranceRecord:
    """Frame embeddings plus label tracks for one utterance.

    ``embeddings`` is a (num_frames, dim) float32 matrix; ``frame_labels``
    has one id per frame and may include blank. ``canonical`` is the
    phoneme-id sequence the reference text should produce; ``annotated``
    is what a human heard (None outside evaluation sets; an empty
    annotated sequence is normalized to None, matching the file format
    where length 0 means absent). Arrays are frozen after construction,
    and frame_hop is normalized to f32 precision since that is what the
    archive stores.
    """

    utterance_id: str
    frame_hop: float
    embeddings: np.ndarray
    frame_labels: np.ndarray
    canonical: tuple[int, ...]
    annotated: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        emb = np.ascontiguousarray(self.embeddings, dtype=_F32)
        labels = np.ascontiguousarray(self.frame_labels, dtype=_U16)
        if emb.ndim != 2:
            raise ValidationError(
                f"{self.utterance_id}: embeddings must be 2-D, got shape {emb.shape}"
            )
        if emb.shape[1] <= 0:
            raise ValidationError(f"{self.utterance_id}: embedding dim must be positive")
        if labels.ndim != 1 or labels.shape[0] != emb.shape[0]:
            raise ValidationError(
                f"{self.utterance_id}: frame_labels length {labels.shape} does not match "
                f"{emb.shape[0]} embedding rows"
            )
        frame_hop = float(np.float32(self.frame_hop))
        if not frame_hop > 0:
            raise ValidationError(f"{self.utterance_id}: frame_hop must be positive")
        canonical = tuple(int(p) for p in self.canonical)
        annotated = self.annotated
        if annotated is not None:
            annotated = tuple(int(p) for p in annotated) or None
        for name, seq in (("canonical", canonical), ("annotated", annotated or ())):
            if any(p == BLANK_ID for p in seq):
                raise ValidationError(f"{self.utterance_id}: {name} sequence contains blank")
        emb.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "frame_hop", frame_hop)
        object.__setattr__(self, "embeddings", emb)
        object.__setattr__(self, "frame_labels", labels)
        object.__setattr__(self, "canonical", canonical)
        object.__setattr__(self, "annotated", annotated)

    @property
    def num_frames(self) -> int:
        return self.embeddings.shape[0]

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]

    def validate_against(self, vocabulary: PhonemeVocabulary) -> None:
        """Check every label id fits the vocabulary."""
        size = len(vocabulary)
        if self.frame_labels.size and int(self.frame_labels.max()) >= size:
            raise ValidationError(
                f"{self.utterance_id}: frame label {int(self.frame_labels.max())} "
                f">= vocabulary size {size}"
            )
        for name, seq in (("canonical", self.canonical), ("annotated", self.annotated or ())):
            for p in seq:
                if not 0 <= p < size:
                    raise ValidationError(
                        f"{self.utterance_id}: {name} id {p} >= vocabulary size {size}"
                    )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, UtteranceRecord):
            return NotImplemented
        return (
            self.utterance_id == other.utterance_id
            and self.frame_hop == other.frame_hop
            and self.embeddings.shape == other.embeddings.shape
            and self.embeddings.tobytes() == other.embeddings.tobytes()
            and np.array_equal(self.frame_labels, other.frame_labels)
            and self.canonical == other.canonical
            and self.annotated == other.annotated
        )


class LoadedArchive(NamedTuple):
    records: list[UtteranceRecord]
    vocabulary: PhonemeVocabulary


def _pack_str(text: str) -> bytes:
    raw = text.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ValidationError(f"string too long for archive: {text[:32]!r}...")
    return struct.pack("<H", len(raw)) + raw


def _pack_vocabulary(vocabulary: PhonemeVocabulary) -> bytes:
    parts = [struct.pack("<H", len(vocabulary))]
    parts.extend(_pack_str(sym) for sym in vocabulary.symbols)
    parts.append(struct.pack("<B", vocabulary.err_policy.value))
    return b"".join(parts)


def _pack_record(record: UtteranceRecord) -> bytes:
    annotated = record.annotated or ()
    parts = [
        _pack_str(record.utterance_id),
        struct.pack("<IIf", record.num_frames, record.dim, record.frame_hop),
        record.embeddings.astype(_F32, copy=False).tobytes(),
        record.frame_labels.astype(_U16, copy=False).tobytes(),
        struct.pack("<I", len(record.canonical)),
        np.asarray(record.canonical, dtype=_U16).tobytes(),
        struct.pack("<I", len(annotated)),
        np.asarray(annotated, dtype=_U16).tobytes(),
    ]
    return b"".join(parts)


def write_archive(
    records: Sequence[UtteranceRecord],
    vocabulary: PhonemeVocabulary,
    path: str | Path,
    manifest: bool = True,
) -> None:
    """Write records and vocabulary to ``path``; validates everything first.

    A human-readable sidecar manifest (``<path>.manifest``) listing
    utterance ids and frame counts is written unless disabled.
    """
    for record in records:
        record.validate_against(vocabulary)
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", FORMAT_VERSION))
        fh.write(_pack_vocabulary(vocabulary))
        fh.write(struct.pack("<I", len(records)))
        for record in records:
            fh.write(_pack_record(record))
    if manifest:
        write_manifest(records, vocabulary, path.with_name(path.name + ".manifest"))


def write_manifest(
    records: Sequence[UtteranceRecord],
    vocabulary: PhonemeVocabulary,
    path: str | Path,
) -> None:
    lines = [
        "# PEMB archive manifest",
        f"# format version: {FORMAT_VERSION}",
        f"# vocabulary: {len(vocabulary)} symbols (blank={vocabulary.blank_symbol!r})",
        f"# records: {len(records)}",
    ]
    lines.extend(f"{r.utterance_id}\t{r.num_frames}" for r in records)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class _Reader:
    """Cursor over archive bytes; every read is bounds-checked."""

    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.buf):
            raise ArchiveFormatError(
                f"truncated archive: needed {n} bytes for {what} at offset {self.pos}, "
                f"file has {len(self.buf)}"
            )
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def u8(self, what: str) -> int:
        return self.take(1, what)[0]

    def u16(self, what: str) -> int:
        return struct.unpack("<H", self.take(2, what))[0]

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def f32(self, what: str) -> float:
        return struct.unpack("<f", self.take(4, what))[0]

    def string(self, what: str) -> str:
        n = self.u16(f"{what} length")
        return self.take(n, what).decode("utf-8")

    def array(self, dtype: np.dtype, count: int, what: str) -> np.ndarray:
        raw = self.take(dtype.itemsize * count, what)
        arr = np.frombuffer(raw, dtype=dtype)
        arr.setflags(write=False)
        return arr


def read_archive(path: str | Path) -> LoadedArchive:
    """Load an archive, verifying format framing and label validity."""
    data = Path(path).read_bytes()
    r = _Reader(data)
    if r.take(4, "magic") != MAGIC:
        raise ArchiveFormatError(f"{path}: bad magic, not a PEMB archive")
    version = r.u16("version")
    if version != FORMAT_VERSION:
        raise ArchiveFormatError(f"{path}: unsupported format version {version}")
    vocabulary = _read_vocabulary(r)
    count = r.u32("record count")
    records = []
    for i in range(count):
        records.append(_read_record(r, i))
    if r.pos != len(data):
        raise ArchiveFormatError(
            f"{path}: {len(data) - r.pos} trailing bytes after last record"
        )
    for record in records:
        record.validate_against(vocabulary)
    return LoadedArchive(records, vocabulary)


def _read_vocabulary(r: _Reader) -> PhonemeVocabulary:
    count = r.u16("vocabulary size")
    symbols = tuple(r.string(f"vocabulary symbol {i}") for i in range(count))
    policy_value = r.u8("unknown-symbol policy")
    try:
        policy = UnknownSymbolPolicy(policy_value)
    except ValueError:
        raise ArchiveFormatError(f"unknown err policy byte {policy_value}") from None
    return PhonemeVocabulary(symbols, policy)


def _read_record(r: _Reader, index: int) -> UtteranceRecord:
    utt_id = r.string(f"record {index} id")
    num_frames = r.u32(f"{utt_id}: num_frames")
    dim = r.u32(f"{utt_id}: dim")
    if dim == 0:
        raise ArchiveFormatError(f"{utt_id}: zero embedding dim in header")
    frame_hop = r.f32(f"{utt_id}: frame_hop")
    flat = r.array(_F32, num_frames * dim, f"{utt_id}: embeddings")
    embeddings = flat.reshape(num_frames, dim)
    frame_labels = r.array(_U16, num_frames, f"{utt_id}: frame labels")
    n_canon = r.u32(f"{utt_id}: canonical length")
    canonical = tuple(int(p) for p in r.array(_U16, n_canon, f"{utt_id}: canonical"))
    n_ann = r.u32(f"{utt_id}: annotated length")
    annotated = tuple(int(p) for p in r.array(_U16, n_ann, f"{utt_id}: annotated")) or None
    return UtteranceRecord(
        utterance_id=utt_id,
        frame_hop=frame_hop,
        embeddings=embeddings,
        frame_labels=frame_labels,
        canonical=canonical,
        annotated=annotated,
    )
