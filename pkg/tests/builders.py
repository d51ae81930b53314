"""Shared corpus builders for the test suite."""

import numpy as np

from lexkit.io import FrameFeatureSequence, Manifest, SegmentMetadata


def build_manifest(labels, phones=None, duration_each=0.5):
    """Manifest with one segment per label; phones default to the label's
    characters so same-label segments are phonetically identical."""
    segments = []
    for i, lab in enumerate(labels):
        p = phones[i] if phones is not None else tuple(lab)
        segments.append(SegmentMetadata(
            segment_id=f"s{i:03d}",
            utterance_id=f"u{i // 4:03d}",
            speaker_id=f"spk{i % 3}",
            start_s=(i % 4) * duration_each,
            end_s=(i % 4) * duration_each + duration_each,
            word_label=lab,
            phones=tuple(p),
        ))
    return Manifest(tuple(segments))


def build_sequences(manifest, rng, dim=6, length=5):
    return [FrameFeatureSequence(seg.segment_id,
                                 rng.standard_normal((length, dim)).astype(np.float32))
            for seg in manifest]
