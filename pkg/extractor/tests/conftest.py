"""Helpers to synthesize tiny wav + TextGrid fixtures."""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np
import pytest


def render_textgrid(intervals: list[tuple[float, float, str]], tier_name: str = "phones",
                    xmax: float | None = None) -> str:
    xmax = xmax if xmax is not None else (intervals[-1][1] if intervals else 1.0)
    lines = [
        'File type = "ooTextFile"',
        'Object class = "TextGrid"',
        "",
        "xmin = 0 ",
        f"xmax = {xmax} ",
        "tiers? <exists> ",
        "size = 1 ",
        "item []: ",
        "    item [1]:",
        '        class = "IntervalTier" ',
        f'        name = "{tier_name}" ',
        "        xmin = 0 ",
        f"        xmax = {xmax} ",
        f"        intervals: size = {len(intervals)} ",
    ]
    for i, (lo, hi, text) in enumerate(intervals, start=1):
        lines.extend(
            [
                f"        intervals [{i}]:",
                f"            xmin = {lo} ",
                f"            xmax = {hi} ",
                f'            text = "{text}" ',
            ]
        )
    return "\n".join(lines) + "\n"


def write_wav(path: Path, seconds: float, rate: int = 16_000, seed: int = 0) -> None:
    rng = np.random.default_rng(seed)
    t = np.arange(int(seconds * rate)) / rate
    signal = 0.3 * np.sin(2 * np.pi * 220.0 * t) + 0.05 * rng.normal(size=len(t))
    pcm = (np.clip(signal, -1, 1) * 32767).astype("<i2")
    path.parent.mkdir(parents=True, exist_ok=True)
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(rate)
        wav.writeframes(pcm.tobytes())


@pytest.fixture
def corpus_dirs(tmp_path):
    """A two-speaker toy corpus: one clean train file, one tagged test file."""
    audio = tmp_path / "audio"
    annotation = tmp_path / "annotation"

    write_wav(audio / "SPK1" / "utt_001.wav", 1.0, seed=1)
    (annotation / "SPK1").mkdir(parents=True)
    (annotation / "SPK1" / "utt_001.TextGrid").write_text(
        render_textgrid(
            [
                (0.0, 0.10, "sil"),
                (0.10, 0.30, "AH1"),
                (0.30, 0.55, "T"),
                (0.55, 0.80, "IY2"),
                (0.80, 1.00, "sp"),
            ]
        )
    )

    write_wav(audio / "SPK2" / "utt_002.wav", 1.2, seed=2)
    (annotation / "SPK2").mkdir(parents=True)
    (annotation / "SPK2" / "utt_002.TextGrid").write_text(
        render_textgrid(
            [
                (0.0, 0.10, "sil"),
                (0.10, 0.35, "AE1,EH,s"),   # substitution: produced eh
                (0.35, 0.60, "D"),           # correct
                (0.60, 0.70, "T,,d"),        # deletion: nothing produced
                (0.70, 0.95, ",IY,a"),       # insertion: produced iy, no canonical
                (0.95, 1.20, "sp"),
            ]
        )
    )

    return audio, annotation
