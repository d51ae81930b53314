"""Frame-level feature front ends.

Every front end emits one float32 row per 20 ms of audio, so frame ``t``
covers ``[t * 0.02, t * 0.02 + window)`` seconds. The default ``logmel``
front end is a log mel filterbank computed with numpy alone and works
offline. Pretrained speech models (WavLM, mHuBERT, any HuggingFace
checkpoint id) are configuration: they import torch and transformers
lazily and fail with an install hint when those are absent.
"""

from __future__ import annotations

import numpy as np

FRAME_PERIOD_S = 0.02
WINDOW_S = 0.025
MODEL_RATE = 16000

# layer counts for front ends whose depth is known without loading them;
# a hidden-state stack of depth n exposes layers 0 .. n - 1
KNOWN_MODEL_LAYERS = {
    "logmel": 1,
    "wavlm-large": 25,
    "mhubert-base": 13,
}

# short names for checkpoints used as published configurations
_CHECKPOINT_IDS = {
    "wavlm-large": "microsoft/wavlm-large",
    "mhubert-base": "utter-project/mHuBERT-147",
}

_MODEL_CACHE: dict[str, object] = {}


class ExtractorError(ValueError):
    """Invalid extraction configuration or unusable front end."""


def validate_layer(model: str, layer: int) -> None:
    """Reject layer indices that are out of range for the chosen model."""
    if layer < 0:
        raise ExtractorError(f"layer index must be >= 0, got {layer}")
    depth = KNOWN_MODEL_LAYERS.get(model)
    if depth is not None and layer >= depth:
        raise ExtractorError(
            f"model {model!r} exposes layers 0..{depth - 1}, got {layer}")


def _mel_filterbank(n_mels: int, n_fft: int, sample_rate: float) -> np.ndarray:
    """Triangular mel filters over the rFFT bins, shape (n_mels, n_fft//2 + 1)."""
    def to_mel(hz):
        return 2595.0 * np.log10(1.0 + hz / 700.0)

    def to_hz(mel):
        return 700.0 * (10.0 ** (mel / 2595.0) - 1.0)

    edges_hz = to_hz(np.linspace(to_mel(0.0), to_mel(sample_rate / 2.0), n_mels + 2))
    edges = edges_hz * n_fft / sample_rate  # fractional bin positions
    bins = np.arange(n_fft // 2 + 1, dtype=np.float64)
    fb = np.zeros((n_mels, bins.size))
    for m in range(n_mels):
        left, center, right = edges[m], edges[m + 1], edges[m + 2]
        rise = (bins - left) / max(center - left, 1e-9)
        fall = (right - bins) / max(right - center, 1e-9)
        fb[m] = np.maximum(0.0, np.minimum(rise, fall))
    return fb


def logmel_features(samples: np.ndarray, sample_rate: int, n_mels: int = 40) -> np.ndarray:
    """Log mel filterbank frames: 25 ms Hann window, 20 ms hop, float32 (T, n_mels)."""
    if sample_rate <= 0:
        raise ExtractorError(f"bad sample rate {sample_rate}")
    hop = int(round(FRAME_PERIOD_S * sample_rate))
    win = int(round(WINDOW_S * sample_rate))
    x = np.asarray(samples, dtype=np.float64)
    if x.size < win:
        # always emit at least one frame for non-empty audio
        x = np.pad(x, (0, win - x.size))
    n_frames = 1 + (x.size - win) // hop
    idx = hop * np.arange(n_frames)[:, None] + np.arange(win)[None, :]
    frames = x[idx] * np.hanning(win)[None, :]
    n_fft = 1 << (win - 1).bit_length()
    power = np.abs(np.fft.rfft(frames, n=n_fft, axis=1)) ** 2
    fb = _mel_filterbank(n_mels, n_fft, sample_rate)
    feats = np.log(power @ fb.T + 1e-10)
    return np.ascontiguousarray(feats, dtype=np.float32)


def _resample_to_model_rate(samples: np.ndarray, sample_rate: int) -> np.ndarray:
    if sample_rate == MODEL_RATE:
        return samples
    duration = samples.size / sample_rate
    n_out = max(1, int(round(duration * MODEL_RATE)))
    t_out = np.arange(n_out) / MODEL_RATE
    t_in = np.arange(samples.size) / sample_rate
    return np.interp(t_out, t_in, samples)


def model_features(samples: np.ndarray, sample_rate: int, model: str,
                   layer: int) -> np.ndarray:
    """Hidden states of a pretrained speech model at its native 20 ms stride."""
    try:
        import torch
        from transformers import AutoModel
    except ImportError as exc:
        raise ExtractorError(
            f"model {model!r} needs the optional dependencies torch and "
            f"transformers (pip install 'lexkit-extract[models]'): {exc}") from exc
    checkpoint = _CHECKPOINT_IDS.get(model, model)
    net = _MODEL_CACHE.get(checkpoint)
    if net is None:
        net = AutoModel.from_pretrained(checkpoint)
        net.eval()
        _MODEL_CACHE[checkpoint] = net
    depth = net.config.num_hidden_layers + 1  # hidden_states includes the input embedding
    if layer >= depth:
        raise ExtractorError(
            f"model {model!r} exposes layers 0..{depth - 1}, got {layer}")
    x = _resample_to_model_rate(np.asarray(samples, dtype=np.float64), sample_rate)
    with torch.no_grad():
        wave_t = torch.from_numpy(x[None, :].astype(np.float32))
        out = net(wave_t, output_hidden_states=True)
    feats = out.hidden_states[layer][0].cpu().numpy()
    return np.ascontiguousarray(feats, dtype=np.float32)


def compute_features(samples: np.ndarray, sample_rate: int, model: str,
                     layer: int) -> np.ndarray:
    """Dispatch to the configured front end; rows are 20 ms apart."""
    validate_layer(model, layer)
    if model == "logmel":
        return logmel_features(samples, sample_rate)
    return model_features(samples, sample_rate, model, layer)
