"""Word-level alignment files.

One tab-separated row per aligned word:

    utterance_id <TAB> word <TAB> start_s <TAB> end_s <TAB> phones

``phones`` is a space-separated phone string and may be left empty. Times
are seconds from the start of the utterance. Rows are grouped by
utterance in file order; blank lines are ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path


class AlignmentError(ValueError):
    """Malformed alignment file."""


# utterance ids become file names downstream, so keep them path-safe
_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


@dataclass(frozen=True)
class AlignedWord:
    """One aligned word token inside an utterance."""

    utterance_id: str
    word: str
    start_s: float
    end_s: float
    phones: tuple[str, ...] | None = None


def parse_alignment(path: str | Path) -> dict[str, list[AlignedWord]]:
    """Parse an alignment file into per-utterance word lists, in file order."""
    path = Path(path)
    if not path.is_file():
        raise AlignmentError(f"alignment file not found: {path}")
    out: dict[str, list[AlignedWord]] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 5:
                raise AlignmentError(
                    f"{path}:{lineno}: expected 5 tab-separated columns, got {len(cols)}")
            utt, word, start_txt, end_txt, phones_txt = (c.strip() for c in cols)
            if not _ID_RE.match(utt):
                raise AlignmentError(f"{path}:{lineno}: bad utterance id {utt!r}")
            if not word:
                raise AlignmentError(f"{path}:{lineno}: empty word")
            try:
                start_s = float(start_txt)
                end_s = float(end_txt)
            except ValueError as exc:
                raise AlignmentError(f"{path}:{lineno}: bad time value: {exc}") from exc
            if start_s < 0.0:
                raise AlignmentError(f"{path}:{lineno}: negative start time {start_s}")
            if not end_s > start_s:
                raise AlignmentError(
                    f"{path}:{lineno}: end ({end_s}) must be > start ({start_s})")
            phones = tuple(phones_txt.split()) or None
            out.setdefault(utt, []).append(
                AlignedWord(utt, word, start_s, end_s, phones))
    return out


def word_count(words_by_utterance: dict[str, list[AlignedWord]]) -> int:
    return sum(len(words) for words in words_by_utterance.values())
