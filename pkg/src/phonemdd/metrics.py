"""Mispronunciation detection/diagnosis tallies and scalar metrics.

Every canonical phoneme position is classified once by joining two
alignments on the canonical index: annotated-vs-canonical tells whether
the learner pronounced it correctly, predicted-vs-canonical tells whether
the system said so. True rejections split into correct diagnosis (the
system predicted what the learner actually produced) and diagnosis error.
Predicted insertions never enter the tally; they only affect the phone
error rate, which is measured against the annotated sequence.

Ratios with zero denominators are undefined, reported as None, and kept
distinct from 0 so tiny corpora stay honest.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Iterable, Sequence

from .aligner import EditOpKind, align, edit_counts
from .corpus import ValidationError


@dataclass(frozen=True)
class MddTally:
    """Raw counts every metric derives from.

    ta/fa/fr/cd/de are per-canonical-position detection counts (tr = cd +
    de by definition); subs/dels/ins/n_ann are predicted-vs-annotated edit
    statistics.
    """

    ta: int = 0
    fa: int = 0
    fr: int = 0
    cd: int = 0
    de: int = 0
    subs: int = 0
    dels: int = 0
    ins: int = 0
    n_ann: int = 0

    def __post_init__(self) -> None:
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValidationError(f"tally field {f.name} must be non-negative")

    @property
    def tr(self) -> int:
        return self.cd + self.de

    def __add__(self, other: "MddTally") -> "MddTally":
        return MddTally(
            **{f.name: getattr(self, f.name) + getattr(other, f.name) for f in fields(self)}
        )


@dataclass(frozen=True)
class MetricReport:
    """Scalar metrics as percentages; None marks an undefined ratio.

    All values live in [0, 100] except per, which insertions can push
    past 100.
    """

    frr: float | None
    far: float | None
    der: float | None
    da: float | None
    pre: float | None
    rec: float | None
    f1: float | None
    per: float | None
    cor: float | None


def _aligned_to_ref(ref: Sequence[int], hyp: Sequence[int]) -> list[int | None]:
    """hyp symbol aligned to each ref position; None where ref was deleted."""
    out: list[int | None] = [None] * len(ref)
    for op in align(ref, hyp).ops:
        if op.kind in (EditOpKind.MATCH, EditOpKind.SUBSTITUTE):
            out[op.ref_idx] = hyp[op.hyp_idx]
    return out


def classify_positions(
    canonical: Sequence[int],
    annotated: Sequence[int],
    predicted: Sequence[int],
) -> MddTally:
    """Tally one utterance triple.

    Per canonical position: both annotated and predicted matching the
    canonical phoneme is a true acceptance; only the prediction matching
    is a false acceptance; only the annotation matching is a false
    rejection; neither matching is a true rejection, split into correct
    diagnosis when prediction and annotation agree (two deletions agree)
    and diagnosis error otherwise. An absent symbol never matches the
    canonical one.
    """
    ann_at = _aligned_to_ref(canonical, annotated)
    pred_at = _aligned_to_ref(canonical, predicted)
    ta = fa = fr = cd = de = 0
    for canon, a, p in zip(canonical, ann_at, pred_at):
        a_ok = a == canon
        p_ok = p == canon
        if a_ok and p_ok:
            ta += 1
        elif not a_ok and p_ok:
            fa += 1
        elif a_ok and not p_ok:
            fr += 1
        elif p == a:
            cd += 1
        else:
            de += 1
    stats = edit_counts(align(annotated, predicted))
    return MddTally(
        ta=ta,
        fa=fa,
        fr=fr,
        cd=cd,
        de=de,
        subs=stats.substitutions,
        dels=stats.deletions,
        ins=stats.insertions,
        n_ann=len(annotated),
    )


def _ratio(num: float, den: float) -> float | None:
    return None if den == 0 else 100.0 * num / den


def compute_metrics(tally: MddTally) -> MetricReport:
    """All scalar metrics from one tally; zero denominators yield None."""
    tr = tally.tr
    pre = _ratio(tr, tr + tally.fr)
    rec = _ratio(tr, tr + tally.fa)
    if pre is None or rec is None or pre + rec == 0:
        f1 = None
    else:
        f1 = 2.0 * pre * rec / (pre + rec)
    return MetricReport(
        frr=_ratio(tally.fr, tally.ta + tally.fr),
        far=_ratio(tally.fa, tally.fa + tr),
        der=_ratio(tally.de, tally.cd + tally.de),
        da=_ratio(tally.ta + tr, tally.ta + tr + tally.fa + tally.fr),
        pre=pre,
        rec=rec,
        f1=f1,
        per=_ratio(tally.subs + tally.dels + tally.ins, tally.n_ann),
        cor=_ratio(tally.n_ann - tally.subs - tally.dels, tally.n_ann),
    )


def sum_tallies(tallies: Iterable[MddTally]) -> MddTally:
    total = MddTally()
    seen = False
    for tally in tallies:
        total = total + tally
        seen = True
    if not seen:
        raise ValidationError("cannot aggregate zero tallies")
    return total


def aggregate(tallies: Iterable[MddTally]) -> MetricReport:
    """Micro-average: sum the tallies, then compute metrics once."""
    return compute_metrics(sum_tallies(tallies))


METRIC_NAMES = ("frr", "far", "der", "pre", "rec", "f1", "da", "per", "cor")


def format_percent(value: float | None) -> str:
    """Two decimal places, half-even; undefined ratios print as such."""
    return "undefined" if value is None else f"{value:.2f}"


def report_to_dict(report: MetricReport) -> dict[str, float | None]:
    return {name: getattr(report, name) for name in METRIC_NAMES}


def tally_to_dict(tally: MddTally) -> dict[str, int]:
    out = {f.name: getattr(tally, f.name) for f in fields(tally)}
    out["tr"] = tally.tr
    return out


def report_text(report: MetricReport, tally: MddTally | None = None) -> str:
    """Flat key-value rendering of a report (and optionally its tally)."""
    lines = [f"{name.upper()}: {format_percent(getattr(report, name))}" for name in METRIC_NAMES]
    if tally is not None:
        lines.extend(f"{key}: {value}" for key, value in tally_to_dict(tally).items())
    return "\n".join(lines) + "\n"
