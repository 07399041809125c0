"""Command line for archive extraction."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

from .encoder import DEFAULT_MODEL_ID, make_encoder
from .jobs import ExtractionJob, extract
from .pembio import POLICY_MAP_TO_ERR, POLICY_REJECT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phonemdd-extract",
        description="Convert audio + TextGrid phoneme alignments into a PEMB embedding archive",
    )
    parser.add_argument("--audio-dir", required=True)
    parser.add_argument("--annotation-dir", required=True)
    parser.add_argument("--output-archive", required=True)
    parser.add_argument("--model-id", default=DEFAULT_MODEL_ID)
    parser.add_argument(
        "--layer", default="final",
        help="'final' or a hidden_states index (0 = convolutional front end)",
    )
    parser.add_argument(
        "--encoder", choices=("pretrained", "synthetic"), default="pretrained",
        help="'synthetic' is a deterministic no-download encoder for smoke tests",
    )
    parser.add_argument("--speakers", default="", help="comma-separated speaker directories")
    parser.add_argument("--phones-tier", default="phones")
    parser.add_argument("--unknown-symbols", choices=("reject", "err"), default="reject")
    parser.add_argument("--emit-annotated", choices=("auto", "always", "never"), default="auto")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    layer: str | int = args.layer if args.layer == "final" else int(args.layer)
    job = ExtractionJob(
        audio_dir=args.audio_dir,
        annotation_dir=args.annotation_dir,
        output_archive=args.output_archive,
        model_id=args.model_id,
        layer=layer,
        speaker_filter=tuple(s for s in args.speakers.split(",") if s.strip()),
        phones_tier=args.phones_tier,
        unknown_policy=POLICY_REJECT if args.unknown_symbols == "reject" else POLICY_MAP_TO_ERR,
        emit_annotated=args.emit_annotated,
    )
    try:
        encoder = make_encoder(args.encoder, args.model_id, layer)
        summary = extract(job, encoder)
    except Exception as exc:  # noqa: BLE001
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1
    sys.stdout.write(
        f"processed {len(summary.processed)} utterances, skipped {len(summary.skipped)}\n"
    )
    sys.stdout.write(f"archive: {job.output_archive}\n")
    return 0


def entrypoint() -> None:
    raise SystemExit(main())
