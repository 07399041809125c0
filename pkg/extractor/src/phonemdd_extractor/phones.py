"""ARPAbet phoneme normalization and annotation-tag parsing.

Corpus annotations carry phones like "AH1" (stress-marked) or, on
manually annotated utterances, comma tags "canonical,produced,error"
(e.g. "AH,IH,s" for a substitution; an empty produced field marks a
deletion, an empty canonical field an insertion). Everything normalizes
to lowercase stress-free ARPAbet; silence-like intervals normalize to
None.
"""

from __future__ import annotations

from typing import NamedTuple

ARPABET = (
    "aa", "ae", "ah", "ao", "aw", "ay", "b", "ch", "d", "dh", "eh", "er",
    "ey", "f", "g", "hh", "ih", "iy", "jh", "k", "l", "m", "n", "ng", "ow",
    "oy", "p", "r", "s", "sh", "t", "th", "uh", "uw", "v", "w", "y", "z",
    "zh",
)

SILENCE_TOKENS = frozenset({"", "sil", "sp", "spn", "pau", "br", "brth", "noi"})


def normalize_phone(raw: str) -> str | None:
    """Lowercase, strip stress digits and asterisks; silence becomes None."""
    token = raw.strip().lower().replace("*", "")
    token = token.rstrip("0123456789")
    if token in SILENCE_TOKENS:
        return None
    return token


class AnnotatedPhone(NamedTuple):
    canonical: str | None
    produced: str | None
    error_tag: str | None


def parse_interval_text(text: str) -> AnnotatedPhone:
    """Split one interval label into canonical/produced phones.

    Plain labels mean a correctly produced canonical phone. Comma tags
    override: the produced phone is the second field, empty fields mean
    the phone is absent on that side.
    """
    if "," in text:
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"malformed annotation tag {text!r}: expected 3 fields")
        canonical = normalize_phone(parts[0]) if parts[0] else None
        produced = normalize_phone(parts[1]) if parts[1] else None
        return AnnotatedPhone(canonical, produced, parts[2].lower() or None)
    phone = normalize_phone(text)
    return AnnotatedPhone(phone, phone, None)
