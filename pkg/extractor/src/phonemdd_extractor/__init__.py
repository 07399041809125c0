"""Speech corpus to PEMB embedding archive extraction."""

from .encoder import (
    DEFAULT_MODEL_ID,
    SAMPLE_RATE,
    FrameEncoder,
    PretrainedSpeechEncoder,
    SyntheticLogSpectrumEncoder,
    make_encoder,
)
from .jobs import ExtractionJob, JobSummary, extract
from .labeling import BLANK_ID, LabeledSpan, frame_labels
from .pembio import (
    POLICY_MAP_TO_ERR,
    POLICY_REJECT,
    Record,
    UnknownPhoneError,
    Vocabulary,
    write_archive,
)
from .phones import ARPABET, AnnotatedPhone, normalize_phone, parse_interval_text
from .textgrid import Interval, IntervalTier, TextGridParseError, find_tier, parse_textgrid

__version__ = "0.1.0"

__all__ = [
    "ARPABET",
    "AnnotatedPhone",
    "BLANK_ID",
    "DEFAULT_MODEL_ID",
    "ExtractionJob",
    "FrameEncoder",
    "Interval",
    "IntervalTier",
    "JobSummary",
    "LabeledSpan",
    "POLICY_MAP_TO_ERR",
    "POLICY_REJECT",
    "PretrainedSpeechEncoder",
    "Record",
    "SAMPLE_RATE",
    "SyntheticLogSpectrumEncoder",
    "TextGridParseError",
    "UnknownPhoneError",
    "Vocabulary",
    "extract",
    "find_tier",
    "frame_labels",
    "make_encoder",
    "normalize_phone",
    "parse_interval_text",
    "parse_textgrid",
    "write_archive",
]
