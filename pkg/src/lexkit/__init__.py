"""lexkit: learn a lexicon of word-like types from pre-segmented speech features."""

__version__ = "0.1.0"
