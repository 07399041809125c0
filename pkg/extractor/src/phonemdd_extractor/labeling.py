"""Frame labeling rule, kept in lockstep with the retrieval engine.

A frame's label is the phoneme span containing its center time
(t + 0.5) * hop; spans are half-open [start, end), uncovered frames get
blank (0). The shared conformance vectors under the engine repo's
tests/data/ pin this byte-for-byte against the engine's implementation.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

BLANK_ID = 0


class LabeledSpan(NamedTuple):
    label: int
    start: float
    end: float


def frame_labels(spans: Sequence[LabeledSpan], num_frames: int, frame_hop: float) -> list[int]:
    if num_frames < 0:
        raise ValueError("num_frames must be non-negative")
    if frame_hop <= 0:
        raise ValueError("frame_hop must be positive")
    ordered = list(spans)
    for prev, cur in zip(ordered, ordered[1:]):
        if cur.start < prev.start:
            raise ValueError(f"spans not sorted: {prev} precedes {cur}")
        if cur.start < prev.end:
            raise ValueError(f"overlapping spans: {prev} and {cur}")
    labels = [BLANK_ID] * num_frames
    si = 0
    for t in range(num_frames):
        center = (t + 0.5) * frame_hop
        while si < len(ordered) and ordered[si].end <= center:
            si += 1
        if si < len(ordered) and ordered[si].start <= center:
            labels[t] = ordered[si].label
    return labels
