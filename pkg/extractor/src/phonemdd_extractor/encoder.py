"""Frame encoders: pretrained speech models and a deterministic test stand-in.

An encoder maps a mono 16 kHz waveform to a (num_frames, dim) float32
matrix with a fixed hop in seconds. The pretrained encoder wraps a
transformers checkpoint (HuBERT / wav2vec2 / data2vec-audio all share the
20 ms convolutional stride) and exports a chosen hidden representation;
which layer retrieval likes best is model-dependent, so it stays a flag
with the final hidden state as the default.
"""

from __future__ import annotations

from typing import Protocol

import numpy as np

SAMPLE_RATE = 16_000
DEFAULT_MODEL_ID = "facebook/hubert-large-ls960-ft"


class FrameEncoder(Protocol):
    dim: int
    frame_hop: float

    def encode(self, waveform: np.ndarray) -> np.ndarray:
        """(num_frames, dim) float32 features of a mono 16 kHz waveform."""


class SyntheticLogSpectrumEncoder:
    """Deterministic toy encoder for tests and smoke runs.

    Frames the signal like the pretrained stack (400-sample window, 320
    hop) and projects the log power spectrum through a fixed seeded
    matrix. No model download, fully reproducible.
    """

    window = 400
    hop = 320

    def __init__(self, dim: int = 24, seed: int = 0):
        self.dim = dim
        self.frame_hop = self.hop / SAMPLE_RATE
        rng = np.random.default_rng(seed)
        self._projection = rng.normal(size=(self.window // 2 + 1, dim)).astype(np.float32)

    def encode(self, waveform: np.ndarray) -> np.ndarray:
        samples = np.asarray(waveform, dtype=np.float32)
        if len(samples) < self.window:
            samples = np.pad(samples, (0, self.window - len(samples)))
        num_frames = 1 + (len(samples) - self.window) // self.hop
        frames = np.lib.stride_tricks.sliding_window_view(samples, self.window)[:: self.hop]
        frames = frames[:num_frames] * np.hanning(self.window).astype(np.float32)
        power = np.abs(np.fft.rfft(frames, axis=1)) ** 2
        features = np.log1p(power).astype(np.float32) @ self._projection
        return np.ascontiguousarray(features, dtype=np.float32)


class PretrainedSpeechEncoder:
    """Hidden states of a transformers speech checkpoint.

    ``layer`` is "final" for the last hidden state or an integer index
    into hidden_states (0 is the convolutional front end's output).
    """

    def __init__(self, model_id: str = DEFAULT_MODEL_ID, layer: str | int = "final",
                 device: str = "cpu"):
        import torch
        from transformers import AutoFeatureExtractor, AutoModel

        self._torch = torch
        self.model_id = model_id
        self.layer = layer
        self._device = torch.device(device)
        self._extractor = AutoFeatureExtractor.from_pretrained(model_id)
        self._model = AutoModel.from_pretrained(model_id).to(self._device).eval()
        config = self._model.config
        self.dim = int(config.hidden_size)
        stride = int(np.prod(getattr(config, "conv_stride", [320])))
        self.frame_hop = stride / SAMPLE_RATE

    def encode(self, waveform: np.ndarray) -> np.ndarray:
        torch = self._torch
        inputs = self._extractor(
            np.asarray(waveform, dtype=np.float32),
            sampling_rate=SAMPLE_RATE,
            return_tensors="pt",
        )
        with torch.no_grad():
            outputs = self._model(
                inputs.input_values.to(self._device), output_hidden_states=True
            )
        if self.layer == "final":
            hidden = outputs.last_hidden_state
        else:
            hidden = outputs.hidden_states[int(self.layer)]
        return hidden.squeeze(0).cpu().numpy().astype(np.float32)


def make_encoder(kind: str, model_id: str, layer: str | int, dim: int = 24) -> FrameEncoder:
    if kind == "synthetic":
        return SyntheticLogSpectrumEncoder(dim=dim)
    if kind == "pretrained":
        return PretrainedSpeechEncoder(model_id=model_id, layer=layer)
    raise ValueError(f"unknown encoder kind {kind!r}")
