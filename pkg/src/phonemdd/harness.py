"""Experiment orchestration: pool building, inference, evaluation, ablations.

A run is fully determined by its config: archives are hashed into the
report, sampling is seeded, and reruns of the same config produce
byte-identical prediction files and reports. One experiment may run per
output directory at a time (guarded by a lock file).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

from filelock import FileLock

from .corpus import LoadedArchive, PhonemeVocabulary, UtteranceRecord, ValidationError, read_archive
from .decoder import decode
from .metrics import (
    MddTally,
    MetricReport,
    classify_positions,
    compute_metrics,
    format_percent,
    report_text,
    report_to_dict,
    sum_tallies,
    tally_to_dict,
)
from .pool import PhonemePool, PoolingStrategy, build_pool
from .retrieval import RetrievalConfig, TieBreak, classify_frames

PREDICTIONS_FILENAME = "predictions.tsv"
REPORT_TEXT_FILENAME = "report.txt"
REPORT_JSON_FILENAME = "report.json"
LOCK_FILENAME = ".phonemdd.lock"


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one evaluation run depends on."""

    train_archive: Path
    test_archive: Path
    output_dir: Path
    strategy: PoolingStrategy = PoolingStrategy.MIDDLE_FRAME
    sample_size: int | None = 500
    seed: int = 0
    top_k: int = 10
    threshold: float | None = 0.7
    tie_break: TieBreak = TieBreak.BY_SIMILARITY_SUM

    def __post_init__(self) -> None:
        object.__setattr__(self, "train_archive", Path(self.train_archive))
        object.__setattr__(self, "test_archive", Path(self.test_archive))
        object.__setattr__(self, "output_dir", Path(self.output_dir))

    def retrieval(self) -> RetrievalConfig:
        return RetrievalConfig(
            top_k=self.top_k, threshold=self.threshold, tie_break=self.tie_break
        )

    def to_dict(self) -> dict[str, object]:
        return {
            "train_archive": str(self.train_archive),
            "test_archive": str(self.test_archive),
            "output_dir": str(self.output_dir),
            "strategy": self.strategy.value,
            "sample_size": self.sample_size,
            "seed": self.seed,
            "top_k": self.top_k,
            "threshold": self.threshold,
            "tie_break": self.tie_break.value,
        }


@dataclass(frozen=True)
class ExperimentResult:
    report: MetricReport
    tally: MddTally
    predictions: tuple[tuple[str, tuple[int, ...]], ...]
    predictions_path: Path
    report_text_path: Path
    report_json_path: Path


@dataclass(frozen=True)
class AblationRow:
    config: ExperimentConfig
    result: ExperimentResult | None
    error: str | None


class RunCaches:
    """Shared archive and pool caches for grids of related runs."""

    def __init__(self) -> None:
        self.archives: dict[str, LoadedArchive] = {}
        self.pools: dict[tuple[str, PoolingStrategy, int | None, int], PhonemePool] = {}

    def archive(self, path: Path) -> LoadedArchive:
        key = str(Path(path).resolve())
        if key not in self.archives:
            self.archives[key] = read_archive(path)
        return self.archives[key]

    def pool(self, config: ExperimentConfig) -> PhonemePool:
        key = (
            str(config.train_archive.resolve()),
            config.strategy,
            config.sample_size,
            config.seed,
        )
        if key not in self.pools:
            records, _ = self.archive(config.train_archive)
            self.pools[key] = build_pool(
                records, config.strategy, config.sample_size, config.seed
            )
        return self.pools[key]


def sha256_of_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def predict_utterances(
    records: Sequence[UtteranceRecord],
    pool: PhonemePool,
    retrieval: RetrievalConfig,
) -> list[tuple[str, tuple[int, ...]]]:
    """Classify, then collapse, every utterance; order follows the input."""
    out = []
    for record in records:
        frame_labels = classify_frames(record, pool, retrieval)
        out.append((record.utterance_id, tuple(decode(frame_labels))))
    return out


def write_predictions(
    predictions: Sequence[tuple[str, tuple[int, ...]]],
    vocabulary: PhonemeVocabulary,
    path: Path,
) -> None:
    """One line per utterance: id, tab, space-joined predicted phonemes."""
    lines = [
        f"{utt_id}\t{' '.join(vocabulary.symbol_of(p) for p in phonemes)}"
        for utt_id, phonemes in predictions
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _check_vocabularies(train: LoadedArchive, test: LoadedArchive) -> None:
    if train.vocabulary.symbols != test.vocabulary.symbols:
        raise ValidationError(
            "train and test archives carry different vocabularies; "
            "rebuild them with a shared phoneme inventory"
        )


def _require_annotated(records: Sequence[UtteranceRecord]) -> None:
    missing = [r.utterance_id for r in records if r.annotated is None]
    if missing:
        raise ValidationError(
            f"{len(missing)} test records lack annotated sequences: {', '.join(missing)}"
        )


def run_experiment(
    config: ExperimentConfig, caches: RunCaches | None = None
) -> ExperimentResult:
    """Build the pool, classify the test set, score it, write the outputs.

    Outputs land in config.output_dir: predictions.tsv plus the metric
    report in flat text and JSON form, both embedding the resolved config
    and archive checksums.
    """
    caches = caches or RunCaches()
    for path in (config.train_archive, config.test_archive):
        if not Path(path).is_file():
            raise FileNotFoundError(f"archive not found: {path}")
    out_dir = config.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    with FileLock(str(out_dir / LOCK_FILENAME)):
        train = caches.archive(config.train_archive)
        test = caches.archive(config.test_archive)
        _check_vocabularies(train, test)
        _require_annotated(test.records)
        pool = caches.pool(config)
        retrieval = config.retrieval()

        predictions = predict_utterances(test.records, pool, retrieval)
        tallies = [
            classify_positions(record.canonical, record.annotated, predicted)
            for record, (_, predicted) in zip(test.records, predictions)
        ]
        tally = sum_tallies(tallies)
        report = compute_metrics(tally)

        predictions_path = out_dir / PREDICTIONS_FILENAME
        write_predictions(predictions, test.vocabulary, predictions_path)
        text_path = out_dir / REPORT_TEXT_FILENAME
        json_path = out_dir / REPORT_JSON_FILENAME
        provenance = {
            "config": config.to_dict(),
            "archives": {
                "train": {
                    "path": str(config.train_archive),
                    "sha256": sha256_of_file(config.train_archive),
                },
                "test": {
                    "path": str(config.test_archive),
                    "sha256": sha256_of_file(config.test_archive),
                },
            },
            "pool": {
                "size": pool.size,
                "dim": pool.dim,
                "strategy": pool.strategy.value,
                "source_utterance_count": len(pool.source_utterances),
            },
            "tally": tally_to_dict(tally),
            "metrics": report_to_dict(report),
        }
        json_path.write_text(
            json.dumps(provenance, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        text_path.write_text(_flat_report(provenance, report, tally), encoding="utf-8")

    return ExperimentResult(
        report=report,
        tally=tally,
        predictions=tuple(predictions),
        predictions_path=predictions_path,
        report_text_path=text_path,
        report_json_path=json_path,
    )


def _flat_report(provenance: Mapping[str, object], report: MetricReport, tally: MddTally) -> str:
    lines = []
    for key, value in sorted(provenance["config"].items()):
        lines.append(f"config.{key}: {value}")
    for split in ("train", "test"):
        info = provenance["archives"][split]
        lines.append(f"archive.{split}.sha256: {info['sha256']}")
    lines.append(f"pool.size: {provenance['pool']['size']}")
    return "\n".join(lines) + "\n" + report_text(report, tally)


def run_ablation(
    grid: Sequence[ExperimentConfig], table_dir: Path | str
) -> list[AblationRow]:
    """Run every config, reusing pools across rows that share one.

    A failing row is recorded and the rest still run. Writes a
    comparative table (text and JSON) under table_dir.
    """
    if not grid:
        raise ValidationError("ablation grid is empty")
    table_dir = Path(table_dir)
    table_dir.mkdir(parents=True, exist_ok=True)
    caches = RunCaches()
    rows: list[AblationRow] = []
    for config in grid:
        try:
            rows.append(AblationRow(config, run_experiment(config, caches), None))
        except Exception as exc:  # noqa: BLE001 - per-row isolation is the contract
            rows.append(AblationRow(config, None, f"{type(exc).__name__}: {exc}"))
    _write_ablation_outputs(rows, table_dir)
    return rows


_TABLE_COLUMNS = ("frr", "far", "der", "pre", "rec", "f1", "da", "per", "cor")


def _write_ablation_outputs(rows: Sequence[AblationRow], table_dir: Path) -> None:
    header = (
        f"{'row':>3}  {'top_k':>5}  {'pool':>6}  {'thresh':>6}  {'strategy':>8}  "
        + "  ".join(f"{name.upper():>9}" for name in _TABLE_COLUMNS)
    )
    lines = [header, "-" * len(header)]
    payload = []
    for idx, row in enumerate(rows):
        cfg = row.config
        pool_text = "all" if cfg.sample_size is None else str(cfg.sample_size)
        thresh_text = "none" if cfg.threshold is None else f"{cfg.threshold:g}"
        prefix = (
            f"{idx:>3}  {cfg.top_k:>5}  {pool_text:>6}  {thresh_text:>6}  "
            f"{cfg.strategy.value:>8}  "
        )
        if row.result is not None:
            cells = "  ".join(
                f"{format_percent(getattr(row.result.report, name)):>9}"
                for name in _TABLE_COLUMNS
            )
            lines.append(prefix + cells)
        else:
            lines.append(prefix + f"FAILED: {row.error}")
        payload.append(
            {
                "row": idx,
                "config": cfg.to_dict(),
                "metrics": report_to_dict(row.result.report) if row.result else None,
                "tally": tally_to_dict(row.result.tally) if row.result else None,
                "error": row.error,
            }
        )
    (table_dir / "ablation_table.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (table_dir / "ablation_results.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def grid_from_sweeps(
    base: ExperimentConfig,
    top_k: Sequence[int] = (),
    sample_size: Sequence[int | None] = (),
    threshold: Sequence[float | None] = (),
    strategy: Sequence[PoolingStrategy] = (),
) -> list[ExperimentConfig]:
    """One row per swept value, each varying a single axis off the base.

    Every row gets its own output subdirectory under the base output dir.
    """
    rows: list[ExperimentConfig] = [base]
    rows.extend(replace(base, top_k=v) for v in top_k)
    rows.extend(replace(base, sample_size=v) for v in sample_size)
    rows.extend(replace(base, threshold=v) for v in threshold)
    rows.extend(replace(base, strategy=v) for v in strategy)
    return [
        replace(cfg, output_dir=base.output_dir / f"row-{i:03d}") for i, cfg in enumerate(rows)
    ]
