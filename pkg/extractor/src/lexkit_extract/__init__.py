"""Feature extraction front end for the lexicon-learning toolkit.

Reads utterance audio plus a word-level alignment file, computes frame
features at a fixed 20 ms period, slices one segment per aligned word and
writes a ``manifest.jsonl`` + ``features/*.lxk`` directory that the
downstream toolkit loads directly. The two packages share only those file
formats and the command line; neither imports the other.
"""

from .alignment import AlignedWord, AlignmentError, parse_alignment
from .extract import ExtractionSpec, ExtractionSummary, extract, frame_span, speaker_of
from .features import ExtractorError, FRAME_PERIOD_S, compute_features, validate_layer

__version__ = "0.1.0"

__all__ = [
    "AlignedWord",
    "AlignmentError",
    "ExtractionSpec",
    "ExtractionSummary",
    "ExtractorError",
    "FRAME_PERIOD_S",
    "compute_features",
    "extract",
    "frame_span",
    "parse_alignment",
    "speaker_of",
    "validate_layer",
    "__version__",
]
