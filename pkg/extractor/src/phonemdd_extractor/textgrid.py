"""Minimal parser for long-format ("ooTextFile") TextGrid annotation files.

Reads interval tiers only; point tiers are skipped. Returns tiers in file
order so callers can pick the phones tier by name.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path


class TextGridParseError(Exception):
    """File is not a readable long-format TextGrid."""


@dataclass(frozen=True)
class Interval:
    xmin: float
    xmax: float
    text: str


@dataclass(frozen=True)
class IntervalTier:
    name: str
    intervals: tuple[Interval, ...]


_ITEM_RE = re.compile(r"^\s*item\s*\[\d+\]\s*:", re.MULTILINE)
_CLASS_RE = re.compile(r'class\s*=\s*"([^"]*)"')
_NAME_RE = re.compile(r'name\s*=\s*"([^"]*)"')
_INTERVAL_RE = re.compile(
    r"intervals\s*\[\d+\]\s*:\s*"
    r"xmin\s*=\s*([-\d.eE+]+)\s*"
    r"xmax\s*=\s*([-\d.eE+]+)\s*"
    r'text\s*=\s*"(.*)"',
)


def parse_textgrid(path: str | Path) -> list[IntervalTier]:
    try:
        content = Path(path).read_text(encoding="utf-8", errors="replace")
    except OSError as exc:
        raise TextGridParseError(f"{path}: {exc}") from exc
    if '"ooTextFile"' not in content.split("\n", 1)[0]:
        raise TextGridParseError(f"{path}: missing ooTextFile header")
    if '"TextGrid"' not in content:
        raise TextGridParseError(f"{path}: not a TextGrid object")

    tiers: list[IntervalTier] = []
    chunks = _ITEM_RE.split(content)[1:]
    for chunk in chunks:
        class_match = _CLASS_RE.search(chunk)
        name_match = _NAME_RE.search(chunk)
        if class_match is None or name_match is None:
            continue
        if class_match.group(1) != "IntervalTier":
            continue
        intervals = []
        for xmin, xmax, text in _INTERVAL_RE.findall(chunk):
            try:
                lo, hi = float(xmin), float(xmax)
            except ValueError as exc:
                raise TextGridParseError(f"{path}: bad interval bounds {xmin}/{xmax}") from exc
            intervals.append(Interval(lo, hi, text.replace('""', '"')))
        tiers.append(IntervalTier(name_match.group(1), tuple(intervals)))
    if not tiers:
        raise TextGridParseError(f"{path}: no interval tiers found")
    return tiers


def find_tier(tiers: list[IntervalTier], name: str) -> IntervalTier:
    for tier in tiers:
        if tier.name == name:
            return tier
    available = ", ".join(t.name for t in tiers)
    raise TextGridParseError(f"tier {name!r} not found (available: {available})")
