"""Command line front end.

    lexkit-extract extract --model logmel --layer 0 \
        --audio wavs/ --align words.tsv --out corpus/

Writes ``manifest.jsonl`` and ``features/*.lxk`` under ``--out`` and prints
the reconciliation counts. Warnings about skipped utterances and dropped
words go to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .alignment import AlignmentError
from .audio import AudioError
from .extract import ExtractionSpec, extract
from .features import ExtractorError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexkit-extract",
        description="Slice word-level frame features out of aligned audio "
                    "into a corpus directory the clustering toolkit reads.")
    parser.add_argument("--version", action="version",
                        version="lexkit-extract 0.1.0")
    sub = parser.add_subparsers(dest="command", required=True)
    ex = sub.add_parser("extract", help="extract one corpus directory")
    ex.add_argument("--model", default="logmel",
                    help="front end: logmel (offline), wavlm-large, "
                         "mhubert-base, or any checkpoint id (default: logmel)")
    ex.add_argument("--layer", type=int, default=0,
                    help="hidden-state layer index (logmel has only layer 0)")
    ex.add_argument("--audio", required=True, help="directory of <utterance_id>.wav")
    ex.add_argument("--align", required=True, help="word alignment file (TSV)")
    ex.add_argument("--out", required=True, help="output corpus directory")
    ex.add_argument("--workers", type=int, default=1,
                    help="worker threads over utterances (default: 1)")
    ex.set_defaults(func=cmd_extract)
    return parser


def cmd_extract(args: argparse.Namespace) -> int:
    spec = ExtractionSpec(model=args.model, layer=args.layer,
                          audio_dir=args.audio, alignment_path=args.align,
                          out_dir=args.out)
    summary = extract(spec, workers=args.workers)
    print(f"wrote {summary.emitted_segments} segments to {args.out}")
    print(f"aligned words: {summary.aligned_words}  "
          f"emitted: {summary.emitted_segments}  "
          f"dropped: {summary.dropped_words}  "
          f"skipped: {summary.skipped_words}")
    if summary.skipped_utterances:
        print("skipped utterances: " + ", ".join(summary.skipped_utterances))
    return 0 if summary.reconciles() else 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage or version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)
    try:
        return args.func(args)
    except (AlignmentError, AudioError, ExtractorError, OSError) as exc:
        print(f"lexkit-extract: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
