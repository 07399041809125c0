"""Batch extraction: audio + TextGrid alignments to a PEMB archive."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .audio import load_audio
from .encoder import DEFAULT_MODEL_ID, SAMPLE_RATE, FrameEncoder, PretrainedSpeechEncoder
from .labeling import LabeledSpan, frame_labels
from .pembio import POLICY_REJECT, Record, Vocabulary, write_archive
from .phones import parse_interval_text
from .textgrid import find_tier, parse_textgrid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExtractionJob:
    """One corpus-to-archive conversion.

    The annotation file for <audio_dir>/.../name.wav is the TextGrid with
    the same stem anywhere under annotation_dir. speaker_filter, when
    non-empty, keeps only files whose first directory component below
    audio_dir matches. emit_annotated: "auto" writes the produced-phone
    sequence only for files carrying error tags, "always"/"never"
    override.
    """

    audio_dir: Path
    annotation_dir: Path
    output_archive: Path
    model_id: str = DEFAULT_MODEL_ID
    layer: str | int = "final"
    speaker_filter: tuple[str, ...] = ()
    phones_tier: str = "phones"
    unknown_policy: int = POLICY_REJECT
    emit_annotated: str = "auto"

    def __post_init__(self) -> None:
        for name in ("audio_dir", "annotation_dir", "output_archive"):
            object.__setattr__(self, name, Path(getattr(self, name)))
        if self.emit_annotated not in ("auto", "always", "never"):
            raise ValueError(f"emit_annotated must be auto/always/never, got {self.emit_annotated!r}")


@dataclass
class JobSummary:
    processed: list[str] = field(default_factory=list)
    skipped: list[dict[str, str]] = field(default_factory=list)

    def skip(self, utt_id: str, reason: str) -> None:
        logger.warning("skipping %s: %s", utt_id, reason)
        self.skipped.append({"id": utt_id, "reason": reason})

    def to_dict(self) -> dict:
        return {
            "processed_count": len(self.processed),
            "skipped_count": len(self.skipped),
            "processed": self.processed,
            "skipped": self.skipped,
        }


def _annotation_index(annotation_dir: Path) -> dict[str, Path]:
    index: dict[str, Path] = {}
    candidates = sorted(annotation_dir.rglob("*.TextGrid")) + sorted(
        annotation_dir.rglob("*.textgrid")
    )
    for path in candidates:
        index.setdefault(path.stem, path)
    return index


def _speaker_of(rel_path: Path) -> str:
    return rel_path.parts[0] if len(rel_path.parts) > 1 else ""


def extract(job: ExtractionJob, encoder: FrameEncoder | None = None) -> JobSummary:
    """Run the job; returns the summary, also written next to the archive.

    Unparseable annotations and unknown phones under the reject policy
    skip the file (logged and listed in the summary); the rest of the
    batch still runs.
    """
    if encoder is None:
        encoder = PretrainedSpeechEncoder(model_id=job.model_id, layer=job.layer)
    vocabulary = Vocabulary.arpabet(job.unknown_policy)
    annotations = _annotation_index(job.annotation_dir)

    records: list[Record] = []
    summary = JobSummary()
    for wav_path in sorted(job.audio_dir.rglob("*.wav")):
        rel = wav_path.relative_to(job.audio_dir)
        utt_id = rel.with_suffix("").as_posix()
        if job.speaker_filter and _speaker_of(rel) not in job.speaker_filter:
            continue
        annotation = annotations.get(wav_path.stem)
        if annotation is None:
            summary.skip(utt_id, "no annotation file")
            continue
        try:
            record = _extract_one(utt_id, wav_path, annotation, job, encoder, vocabulary)
        except Exception as exc:  # noqa: BLE001 - batch robustness is the contract
            summary.skip(utt_id, f"{type(exc).__name__}: {exc}")
            continue
        records.append(record)
        summary.processed.append(utt_id)

    job.output_archive.parent.mkdir(parents=True, exist_ok=True)
    write_archive(records, vocabulary, job.output_archive)
    summary_path = job.output_archive.with_name(job.output_archive.name + ".summary.json")
    summary_path.write_text(json.dumps(summary.to_dict(), indent=2) + "\n", encoding="utf-8")
    logger.info(
        "wrote %s: %d records, %d skipped", job.output_archive, len(records), len(summary.skipped)
    )
    return summary


def _extract_one(
    utt_id: str,
    wav_path: Path,
    annotation_path: Path,
    job: ExtractionJob,
    encoder: FrameEncoder,
    vocabulary: Vocabulary,
) -> Record:
    tier = find_tier(parse_textgrid(annotation_path), job.phones_tier)

    canonical: list[int] = []
    annotated: list[int] = []
    spans: list[LabeledSpan] = []
    has_tags = False
    for interval in tier.intervals:
        has_tags = has_tags or "," in interval.text
        phone = parse_interval_text(interval.text)
        if phone.canonical is not None:
            canonical.append(vocabulary.id_of(phone.canonical))
        if phone.produced is not None:
            produced_id = vocabulary.id_of(phone.produced)
            annotated.append(produced_id)
            spans.append(LabeledSpan(produced_id, interval.xmin, interval.xmax))

    embeddings = encoder.encode(load_audio(wav_path, SAMPLE_RATE))
    labels = frame_labels(spans, len(embeddings), encoder.frame_hop)

    write_annotated = job.emit_annotated == "always" or (
        job.emit_annotated == "auto" and has_tags
    )
    return Record(
        utterance_id=utt_id,
        frame_hop=encoder.frame_hop,
        embeddings=embeddings,
        frame_labels=labels,
        canonical=canonical,
        annotated=annotated if write_annotated else None,
    )
