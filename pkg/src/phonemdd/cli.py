"""Command-line interface.

Subcommands: build-pool, infer, evaluate, ablate, inspect-archive. Every
experiment parameter is settable by flag or by a JSON config file
(--config); flags win. Failures exit nonzero and print one JSON object on
stderr with a machine-readable error category:

    exit 2  config   bad parameter values or config file
    exit 3  validation  data violating a contract (vocab, sampling, ...)
    exit 4  format   malformed archive or snapshot file
    exit 5  io       missing or unreadable files
    exit 1  internal anything else
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

from .corpus import ArchiveFormatError, ValidationError, read_archive, write_manifest
from .harness import (
    ExperimentConfig,
    RunCaches,
    grid_from_sweeps,
    predict_utterances,
    run_ablation,
    run_experiment,
    sha256_of_file,
    write_predictions,
)
from .metrics import report_text
from .pool import PoolingStrategy, build_pool, load_pool, pool_stats, save_pool
from .retrieval import RetrievalConfig, TieBreak


class ConfigError(ValueError):
    """Bad CLI parameter or config file content."""


def _parse_sample_size(text: str) -> int | None:
    if text.strip().lower() == "all":
        return None
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"--sample-size must be an integer or 'all', got {text!r}") from None


def _parse_threshold(text: str) -> float | None:
    if text.strip().lower() == "none":
        return None
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"--threshold must be a number or 'none', got {text!r}") from None


def _parse_list(text: str, item: Callable[[str], Any]) -> list[Any]:
    return [item(part) for part in text.split(",") if part.strip()]


_DEFAULTS: dict[str, Any] = {
    "strategy": "middle",
    "sample_size": 500,
    "seed": 0,
    "top_k": 10,
    "threshold": 0.7,
    "tie_break": "similarity-sum",
}


def _load_config_file(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        loaded = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(loaded, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return loaded


def _resolve(args: argparse.Namespace, file_cfg: dict[str, Any], key: str) -> Any:
    flag_value = getattr(args, key, None)
    if flag_value is not None:
        return flag_value
    if key in file_cfg:
        return file_cfg[key]
    return _DEFAULTS.get(key)


def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    file_cfg = _load_config_file(getattr(args, "config", None))

    def value(key: str) -> Any:
        return _resolve(args, file_cfg, key)

    for key in ("train_archive", "test_archive", "output_dir"):
        if value(key) is None:
            raise ConfigError(f"missing required parameter --{key.replace('_', '-')}")
    raw_sample = value("sample_size")
    raw_threshold = value("threshold")
    return ExperimentConfig(
        train_archive=Path(value("train_archive")),
        test_archive=Path(value("test_archive")),
        output_dir=Path(value("output_dir")),
        strategy=PoolingStrategy.parse(str(value("strategy"))),
        sample_size=_parse_sample_size(str(raw_sample)) if raw_sample is not None else None,
        seed=int(value("seed")),
        top_k=int(value("top_k")),
        threshold=_parse_threshold(str(raw_threshold)) if raw_threshold is not None else None,
        tie_break=TieBreak.parse(str(value("tie_break"))),
    )


def _add_experiment_flags(parser: argparse.ArgumentParser, require_train: bool = True) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its values")
    parser.add_argument("--train-archive", dest="train_archive", required=False)
    parser.add_argument("--test-archive", dest="test_archive", required=False)
    parser.add_argument("--output-dir", dest="output_dir", required=False)
    parser.add_argument("--strategy", help="pooling strategy: all, middle, or mean")
    parser.add_argument("--sample-size", dest="sample_size", help="utterance count or 'all'")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--top-k", dest="top_k", type=int)
    parser.add_argument("--threshold", help="similarity floor in [-1, 1] or 'none'")
    parser.add_argument("--tie-break", dest="tie_break", help="similarity-sum or lowest-label")


def _cmd_evaluate(args: argparse.Namespace) -> int:
    config = _experiment_config(args)
    result = run_experiment(config)
    sys.stdout.write(report_text(result.report, result.tally))
    sys.stdout.write(f"predictions: {result.predictions_path}\n")
    sys.stdout.write(f"report: {result.report_json_path}\n")
    return 0


def _cmd_build_pool(args: argparse.Namespace) -> int:
    file_cfg = _load_config_file(args.config)
    train = _resolve(args, file_cfg, "train_archive")
    if train is None:
        raise ConfigError("missing required parameter --train-archive")
    records, vocabulary = read_archive(train)
    raw_sample = _resolve(args, file_cfg, "sample_size")
    pool = build_pool(
        records,
        PoolingStrategy.parse(str(_resolve(args, file_cfg, "strategy"))),
        _parse_sample_size(str(raw_sample)) if raw_sample is not None else None,
        int(_resolve(args, file_cfg, "seed")),
    )
    save_pool(pool, vocabulary, args.out)
    sys.stdout.write(
        f"pool: {pool.size} entries x {pool.dim} dims "
        f"({pool.strategy.value}-frame, {len(pool.source_utterances)} utterances)\n"
    )
    for symbol, count in sorted(pool_stats(pool, vocabulary).items()):
        sys.stdout.write(f"{symbol}\t{count}\n")
    return 0


def _cmd_infer(args: argparse.Namespace) -> int:
    if (args.pool is None) == (getattr(args, "train_archive", None) is None):
        raise ConfigError("infer needs exactly one of --pool or --train-archive")
    file_cfg = _load_config_file(args.config)

    test_path = _resolve(args, file_cfg, "test_archive")
    output_dir = _resolve(args, file_cfg, "output_dir")
    if test_path is None or output_dir is None:
        raise ConfigError("infer needs --test-archive and --output-dir")
    test_records, test_vocab = read_archive(test_path)

    if args.pool is not None:
        pool, pool_vocab = load_pool(args.pool)
        if pool_vocab.symbols != test_vocab.symbols:
            raise ValidationError("pool snapshot vocabulary differs from the test archive's")
    else:
        train_records, train_vocab = read_archive(_resolve(args, file_cfg, "train_archive"))
        if train_vocab.symbols != test_vocab.symbols:
            raise ValidationError("train archive vocabulary differs from the test archive's")
        raw_sample = _resolve(args, file_cfg, "sample_size")
        pool = build_pool(
            train_records,
            PoolingStrategy.parse(str(_resolve(args, file_cfg, "strategy"))),
            _parse_sample_size(str(raw_sample)) if raw_sample is not None else None,
            int(_resolve(args, file_cfg, "seed")),
        )

    raw_threshold = _resolve(args, file_cfg, "threshold")
    retrieval = RetrievalConfig(
        top_k=int(_resolve(args, file_cfg, "top_k")),
        threshold=_parse_threshold(str(raw_threshold)) if raw_threshold is not None else None,
        tie_break=TieBreak.parse(str(_resolve(args, file_cfg, "tie_break"))),
    )
    predictions = predict_utterances(test_records, pool, retrieval)
    out_dir = Path(output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "predictions.tsv"
    write_predictions(predictions, test_vocab, out_path)
    sys.stdout.write(f"predictions: {out_path}\n")
    return 0


def _cmd_ablate(args: argparse.Namespace) -> int:
    base = _experiment_config(args)
    grid = grid_from_sweeps(
        base,
        top_k=_parse_list(args.sweep_top_k or "", int),
        sample_size=_parse_list(args.sweep_sample_size or "", _parse_sample_size),
        threshold=_parse_list(args.sweep_threshold or "", _parse_threshold),
        strategy=_parse_list(args.sweep_strategy or "", PoolingStrategy.parse),
    )
    rows = run_ablation(grid, base.output_dir)
    table = (base.output_dir / "ablation_table.txt").read_text(encoding="utf-8")
    sys.stdout.write(table)
    failures = sum(1 for row in rows if row.error is not None)
    if failures:
        sys.stdout.write(f"{failures} of {len(rows)} rows failed; see ablation_results.json\n")
    return 0


def _cmd_inspect_archive(args: argparse.Namespace) -> int:
    records, vocabulary = read_archive(args.archive)
    sys.stdout.write(f"archive: {args.archive}\n")
    sys.stdout.write(f"sha256: {sha256_of_file(Path(args.archive))}\n")
    sys.stdout.write(
        f"vocabulary: {len(vocabulary)} symbols (blank={vocabulary.blank_symbol!r})\n"
    )
    sys.stdout.write(f"records: {len(records)}\n")
    total_frames = 0
    with_annotated = 0
    for record in records:
        total_frames += record.num_frames
        with_annotated += record.annotated is not None
        sys.stdout.write(
            f"  {record.utterance_id}\tframes={record.num_frames}\tdim={record.dim}\t"
            f"hop={record.frame_hop:g}\tcanonical={len(record.canonical)}\t"
            f"annotated={'yes' if record.annotated is not None else 'no'}\n"
        )
    sys.stdout.write(f"total frames: {total_frames}\n")
    sys.stdout.write(f"records with annotations: {with_annotated}\n")
    if args.write_manifest:
        manifest_path = Path(args.archive + ".manifest")
        write_manifest(records, vocabulary, manifest_path)
        sys.stdout.write(f"manifest: {manifest_path}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phonemdd",
        description="Retrieval-based mispronunciation detection over phoneme embedding archives",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("evaluate", help="run one full experiment and score it")
    _add_experiment_flags(p_eval)
    p_eval.set_defaults(func=_cmd_evaluate)

    p_pool = sub.add_parser("build-pool", help="build and snapshot a retrieval pool")
    _add_experiment_flags(p_pool)
    p_pool.add_argument("--out", required=True, help="pool snapshot output path")
    p_pool.set_defaults(func=_cmd_build_pool)

    p_infer = sub.add_parser("infer", help="predict phoneme sequences without scoring")
    _add_experiment_flags(p_infer)
    p_infer.add_argument("--pool", help="pool snapshot to reuse instead of --train-archive")
    p_infer.set_defaults(func=_cmd_infer)

    p_ablate = sub.add_parser("ablate", help="sweep hyperparameters off a base config")
    _add_experiment_flags(p_ablate)
    p_ablate.add_argument("--sweep-top-k", help="comma-separated k values")
    p_ablate.add_argument("--sweep-sample-size", help="comma-separated sizes or 'all'")
    p_ablate.add_argument("--sweep-threshold", help="comma-separated thresholds or 'none'")
    p_ablate.add_argument("--sweep-strategy", help="comma-separated strategies")
    p_ablate.set_defaults(func=_cmd_ablate)

    p_inspect = sub.add_parser("inspect-archive", help="summarize an archive's contents")
    p_inspect.add_argument("--archive", required=True)
    p_inspect.add_argument("--write-manifest", action="store_true")
    p_inspect.set_defaults(func=_cmd_inspect_archive)

    return parser


_ERROR_EXITS: tuple[tuple[type[Exception], str, int], ...] = (
    (ConfigError, "config", 2),
    (ValidationError, "validation", 3),
    (ArchiveFormatError, "format", 4),
    (FileNotFoundError, "io", 5),
    (OSError, "io", 5),
)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single exit point maps errors to categories
        for exc_type, category, code in _ERROR_EXITS:
            if isinstance(exc, exc_type):
                _print_error(category, exc)
                return code
        _print_error("internal", exc)
        return 1


def _print_error(category: str, exc: Exception) -> None:
    sys.stderr.write(json.dumps({"error": {"category": category, "message": str(exc)}}) + "\n")


def entrypoint() -> None:
    raise SystemExit(main())
