"""Training-free mispronunciation detection via phoneme embedding retrieval.

Pipeline: labeled frame embeddings are pooled per phoneme span, each test
frame is classified by exact cosine top-k retrieval with threshold
filtering and a mode vote, frame labels collapse into a phoneme sequence,
and alignment against the canonical and human-annotated sequences yields
the detection/diagnosis tallies and scalar metrics.
"""

from .aligner import AlignmentTrace, EditCounts, EditOp, EditOpKind, align, edit_counts
from .corpus import (
    BLANK_ID,
    ArchiveFormatError,
    LoadedArchive,
    PhonemeSpan,
    PhonemeVocabulary,
    UnknownSymbolPolicy,
    UtteranceRecord,
    ValidationError,
    frame_labels_from_spans,
    read_archive,
    write_archive,
    write_manifest,
)
from .decoder import FrameLabelSequence, decode
from .harness import (
    AblationRow,
    ExperimentConfig,
    ExperimentResult,
    RunCaches,
    grid_from_sweeps,
    run_ablation,
    run_experiment,
)
from .metrics import (
    MddTally,
    MetricReport,
    aggregate,
    classify_positions,
    compute_metrics,
    format_percent,
    report_text,
    sum_tallies,
)
from .pool import (
    PhonemePool,
    PoolingStrategy,
    ZeroNormWarning,
    build_pool,
    load_pool,
    pool_stats,
    save_pool,
)
from .retrieval import (
    Neighbor,
    RetrievalConfig,
    TieBreak,
    classify_frames,
    cosine_similarity,
    filter_and_assign,
    top_k,
)

__version__ = "0.1.0"

__all__ = [
    "AblationRow",
    "AlignmentTrace",
    "ArchiveFormatError",
    "BLANK_ID",
    "EditCounts",
    "EditOp",
    "EditOpKind",
    "ExperimentConfig",
    "ExperimentResult",
    "FrameLabelSequence",
    "LoadedArchive",
    "MddTally",
    "MetricReport",
    "Neighbor",
    "PhonemePool",
    "PhonemeSpan",
    "PhonemeVocabulary",
    "PoolingStrategy",
    "RetrievalConfig",
    "RunCaches",
    "TieBreak",
    "UnknownSymbolPolicy",
    "UtteranceRecord",
    "ValidationError",
    "ZeroNormWarning",
    "aggregate",
    "align",
    "build_pool",
    "classify_frames",
    "classify_positions",
    "compute_metrics",
    "cosine_similarity",
    "decode",
    "edit_counts",
    "filter_and_assign",
    "format_percent",
    "frame_labels_from_spans",
    "grid_from_sweeps",
    "load_pool",
    "pool_stats",
    "read_archive",
    "report_text",
    "run_ablation",
    "run_experiment",
    "save_pool",
    "sum_tallies",
    "top_k",
    "write_archive",
    "write_manifest",
]
