import json
import logging
import struct

import numpy as np
import pytest

from lexkit_extract.cli import main
from lexkit_extract.extract import ExtractionSpec, extract, frame_span, speaker_of

from sample_data import build_sample, tone_track, write_alignment, write_wav


def spec_for(audio_dir, align_path, out_dir) -> ExtractionSpec:
    return ExtractionSpec(model="logmel", layer=0, audio_dir=audio_dir,
                          alignment_path=align_path, out_dir=out_dir)


def one_utterance(root, rows, duration_s=0.5, utt="spk0-utt00"):
    audio_dir = root / "wavs"
    audio_dir.mkdir()
    write_wav(audio_dir / f"{utt}.wav", tone_track([], duration_s, seed=4))
    align = root / "words.tsv"
    write_alignment(align, [(utt, w, s, e, p) for (w, s, e, p) in rows])
    return audio_dir, align


def read_lxk_header(path) -> tuple[int, int, int]:
    raw = path.read_bytes()
    assert raw[:4] == b"LXK1"
    t, d, tag = struct.unpack("<IIB", raw[4:13])
    assert len(raw) == 13 + t * d * 4
    return t, d, tag


# ---------------------------------------------------------------------------
# frame rounding
# ---------------------------------------------------------------------------

def test_word_spanning_100_to_300ms_gets_exactly_ten_frames(tmp_path):
    audio_dir, align = one_utterance(tmp_path, [("cat", 0.10, 0.30, "k ae t")])
    summary = extract(spec_for(audio_dir, align, tmp_path / "out"))
    assert summary.emitted_segments == 1
    t, d, tag = read_lxk_header(tmp_path / "out" / "features" / "spk0-utt00_w000.lxk")
    assert (t, d, tag) == (10, 40, 0)


def test_frame_span_rounds_outward_on_the_20ms_grid():
    assert frame_span(0.10, 0.30, 100) == (5, 15)
    assert frame_span(0.40, 0.62, 100) == (20, 31)
    assert frame_span(0.10, 0.12, 100) == (5, 6)
    # straddling boundaries rounds outward, never inward
    assert frame_span(0.11, 0.33, 100) == (5, 17)
    # clamped at the end of the audio
    assert frame_span(0.40, 0.50, 24) == (20, 24)
    # entirely past the audio, or shorter than one frame: no segment
    assert frame_span(0.49, 0.55, 24) is None
    assert frame_span(0.50, 0.51, 100) is None


def test_subframe_word_is_dropped_with_warning(tmp_path, caplog):
    rows = [("cat", 0.10, 0.30, "k"), ("uh", 0.50, 0.51, ""), ("dog", 0.60, 0.80, "d")]
    audio_dir, align = one_utterance(tmp_path, rows, duration_s=1.0)
    with caplog.at_level(logging.WARNING, logger="lexkit_extract"):
        summary = extract(spec_for(audio_dir, align, tmp_path / "out"))
    assert summary.dropped_words == 1
    assert summary.emitted_segments == 2
    assert any("dropped" in rec.message for rec in caplog.records)
    # segment ids keep the alignment row index, so drops leave a visible gap
    names = sorted(p.name for p in (tmp_path / "out" / "features").iterdir())
    assert names == ["spk0-utt00_w000.lxk", "spk0-utt00_w002.lxk"]


def test_word_past_end_of_audio_is_dropped_with_warning(tmp_path, caplog):
    # 0.5 s of audio yields 24 frames; this word starts on frame 24
    rows = [("cat", 0.10, 0.30, "k"), ("late", 0.49, 0.55, "l")]
    audio_dir, align = one_utterance(tmp_path, rows, duration_s=0.5)
    with caplog.at_level(logging.WARNING, logger="lexkit_extract"):
        summary = extract(spec_for(audio_dir, align, tmp_path / "out"))
    assert summary.dropped_words == 1
    assert summary.emitted_segments == 1
    assert any("no usable frames" in rec.message for rec in caplog.records)


def test_word_overhanging_the_last_frame_is_clamped_not_dropped(tmp_path):
    audio_dir, align = one_utterance(tmp_path, [("tail", 0.40, 0.50, "t")],
                                     duration_s=0.5)
    summary = extract(spec_for(audio_dir, align, tmp_path / "out"))
    assert summary.emitted_segments == 1
    t, _, _ = read_lxk_header(tmp_path / "out" / "features" / "spk0-utt00_w000.lxk")
    assert t == 4  # frames 20..24 of the 24 available


# ---------------------------------------------------------------------------
# skipping and reconciliation
# ---------------------------------------------------------------------------

def test_audio_without_alignment_rows_is_skipped_with_warning(tmp_path, caplog):
    audio_dir, align = build_sample(tmp_path, n_utts=2)
    write_wav(audio_dir / "spk9-zzz.wav", tone_track([], 0.3, seed=8))
    with caplog.at_level(logging.WARNING, logger="lexkit_extract"):
        summary = extract(spec_for(audio_dir, align, tmp_path / "out"))
    assert "spk9-zzz" in summary.skipped_utterances
    assert summary.skipped_words == 0  # that utterance had no alignment rows
    assert summary.emitted_segments == 6
    assert any("no alignment rows" in rec.message for rec in caplog.records)


def test_alignment_rows_without_audio_are_skipped_and_counted(tmp_path, caplog):
    audio_dir, align = build_sample(tmp_path, n_utts=2)
    with align.open("a") as fh:
        fh.write("ghost-utt99\thello\t0.1\t0.4\thh\n")
        fh.write("ghost-utt99\tworld\t0.5\t0.8\tw\n")
    with caplog.at_level(logging.WARNING, logger="lexkit_extract"):
        summary = extract(spec_for(audio_dir, align, tmp_path / "out"))
    assert "ghost-utt99" in summary.skipped_utterances
    assert summary.skipped_words == 2
    assert summary.aligned_words == 8
    assert summary.emitted_segments == 6
    assert summary.reconciles()
    assert any("no audio file" in rec.message for rec in caplog.records)


def test_counts_reconcile_in_a_mixed_run(tmp_path):
    audio_dir, align = build_sample(tmp_path, n_utts=3)
    write_wav(audio_dir / "noalign-utt.wav", tone_track([], 0.3, seed=8))
    with align.open("a") as fh:
        fh.write("spk0-utt00\tblip\t0.96\t0.965\tb\n")   # sub-frame: dropped
        fh.write("ghost-utt99\thello\t0.1\t0.4\thh\n")   # no audio: skipped
    summary = extract(spec_for(audio_dir, align, tmp_path / "out"))
    assert summary.aligned_words == 11
    assert summary.emitted_segments == 9
    assert summary.dropped_words == 1
    assert summary.skipped_words == 1
    assert summary.reconciles()
    manifest_lines = (tmp_path / "out" / "manifest.jsonl").read_text().splitlines()
    assert len(manifest_lines) == summary.emitted_segments


# ---------------------------------------------------------------------------
# manifest content
# ---------------------------------------------------------------------------

def test_speaker_id_is_the_prefix_of_the_utterance_id():
    assert speaker_of("spk0-utt00") == "spk0"
    assert speaker_of("spk1_utt3") == "spk1"
    assert speaker_of("x-y_z") == "x"
    assert speaker_of("solo") == "solo"


def test_manifest_rows_follow_alignment_order_with_labels_and_phones(tmp_path):
    audio_dir, align = build_sample(tmp_path, n_utts=2)
    extract(spec_for(audio_dir, align, tmp_path / "out"))
    rows = [json.loads(line) for line in
            (tmp_path / "out" / "manifest.jsonl").read_text().splitlines()]
    assert [r["segment_id"] for r in rows] == [
        "spk0-utt00_w000", "spk0-utt00_w001", "spk0-utt00_w002",
        "spk1-utt01_w000", "spk1-utt01_w001", "spk1-utt01_w002"]
    assert rows[0]["utterance_id"] == "spk0-utt00"
    assert rows[0]["speaker_id"] == "spk0"
    assert rows[0]["start_s"] == 0.10 and rows[0]["end_s"] == 0.30
    assert rows[0]["word_label"] == "alpha"
    assert rows[0]["phones"] == ["a", "l", "p"]


def test_outputs_load_through_the_downstream_reader(tmp_path):
    from lexkit import io as lexkit_io

    audio_dir, align = build_sample(tmp_path, n_utts=3)
    extract(spec_for(audio_dir, align, tmp_path / "out"))
    manifest = lexkit_io.read_manifest(tmp_path / "out" / "manifest.jsonl")
    seqs = lexkit_io.read_features(tmp_path / "out" / "features", manifest)
    assert len(manifest) == len(seqs) == 9
    assert manifest.labels()[:3] == ["alpha", "bravo", "carol"]
    assert all(seq.dim == 40 for seq in seqs)
    assert all(seq.num_frames >= 1 for seq in seqs)


# ---------------------------------------------------------------------------
# determinism
# ---------------------------------------------------------------------------

def corpus_bytes(out_dir) -> dict[str, bytes]:
    blobs = {"manifest": (out_dir / "manifest.jsonl").read_bytes()}
    for p in sorted((out_dir / "features").iterdir()):
        blobs[p.name] = p.read_bytes()
    return blobs


def test_outputs_are_byte_identical_across_runs_and_workers(tmp_path):
    audio_dir, align = build_sample(tmp_path, n_utts=4)
    extract(spec_for(audio_dir, align, tmp_path / "a"), workers=1)
    extract(spec_for(audio_dir, align, tmp_path / "b"), workers=1)
    extract(spec_for(audio_dir, align, tmp_path / "c"), workers=3)
    a = corpus_bytes(tmp_path / "a")
    assert a == corpus_bytes(tmp_path / "b")
    assert a == corpus_bytes(tmp_path / "c")


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------

def test_cli_extracts_and_reports_counts(tmp_path, capsys):
    audio_dir, align = build_sample(tmp_path, n_utts=2)
    code = main(["extract", "--audio", str(audio_dir), "--align", str(align),
                 "--out", str(tmp_path / "out")])
    out = capsys.readouterr().out
    assert code == 0
    assert "wrote 6 segments" in out
    assert "aligned words: 6  emitted: 6  dropped: 0  skipped: 0" in out
    assert (tmp_path / "out" / "manifest.jsonl").is_file()


def test_cli_rejects_bad_layer_for_logmel(tmp_path, capsys):
    audio_dir, align = build_sample(tmp_path, n_utts=1)
    code = main(["extract", "--layer", "1", "--audio", str(audio_dir),
                 "--align", str(align), "--out", str(tmp_path / "out")])
    err = capsys.readouterr().err
    assert code == 1
    assert err.startswith("lexkit-extract: error: ExtractorError")
    assert "layers 0..0" in err


def test_cli_reports_missing_alignment_file(tmp_path, capsys):
    code = main(["extract", "--audio", str(tmp_path), "--align",
                 str(tmp_path / "nope.tsv"), "--out", str(tmp_path / "out")])
    assert code == 1
    assert capsys.readouterr().err.startswith("lexkit-extract: error: AlignmentError")


def test_cli_requires_the_io_flags(capsys):
    assert main(["extract", "--audio", "x"]) == 2
    capsys.readouterr()


def test_cli_version_flag(capsys):
    assert main(["--version"]) == 0
    assert "lexkit-extract" in capsys.readouterr().out
