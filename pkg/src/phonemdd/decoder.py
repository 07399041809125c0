"""Collapse frame-level labels into the predicted phoneme sequence."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import groupby
from typing import Iterable, Iterator

from .corpus import BLANK_ID


@dataclass(frozen=True)
class FrameLabelSequence:
    """Per-frame predicted label ids; may include blank."""

    labels: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(int(l) for l in self.labels))

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self) -> Iterator[int]:
        return iter(self.labels)


def decode(seq: FrameLabelSequence | Iterable[int]) -> list[int]:
    """Collapse consecutive duplicate labels, then drop blanks.

    Collapsing happens first, so a blank between two equal labels keeps
    them as two phonemes: [a, blank, a] -> [a, a].
    """
    labels = seq.labels if isinstance(seq, FrameLabelSequence) else seq
    return [int(k) for k, _ in groupby(labels) if k != BLANK_ID]
