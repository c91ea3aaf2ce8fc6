"""Corpus ingestion: WAV files, event annotations, splits, synthetic data."""

from .audio import AudioClip, load_wav, write_wav
from .corpus import Corpus, load_corpus, load_corpus_splits
from .events import (
    LABELS,
    NUM_CLASSES,
    Label,
    RespiratoryEvent,
    load_annotations,
    parse_label,
    patient_id_from_recording,
    slice_event,
    write_annotations,
)
from .splits import (
    SPLIT_NAMES,
    DatasetSplit,
    format_split_summary,
    load_manifest,
    make_splits,
    normalize_split_name,
    write_manifest,
)
from .synth import SYNTHETIC_LABELS, SYNTHETIC_RATE_HZ, generate_synthetic_corpus

__all__ = [
    "AudioClip",
    "Corpus",
    "DatasetSplit",
    "LABELS",
    "Label",
    "NUM_CLASSES",
    "RespiratoryEvent",
    "SPLIT_NAMES",
    "SYNTHETIC_LABELS",
    "SYNTHETIC_RATE_HZ",
    "format_split_summary",
    "generate_synthetic_corpus",
    "load_annotations",
    "load_corpus",
    "load_corpus_splits",
    "load_manifest",
    "load_wav",
    "make_splits",
    "normalize_split_name",
    "parse_label",
    "patient_id_from_recording",
    "slice_event",
    "write_annotations",
    "write_manifest",
    "write_wav",
]
