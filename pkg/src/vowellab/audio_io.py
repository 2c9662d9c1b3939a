"""Mono 16-bit PCM WAV and JSONL persistence helpers."""
from __future__ import annotations

import json
import wave
from pathlib import Path

import numpy as np


def write_wav(path, waveform: np.ndarray, sr: float = 44100.0) -> None:
    """Write mono 16-bit PCM; float input is expected within [-1, 1]."""
    x = np.clip(np.asarray(waveform, dtype=np.float64), -1.0, 1.0)
    pcm = np.round(x * 32767.0).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(int(round(sr)))
        fh.writeframes(pcm.tobytes())


def read_wav(path) -> tuple:
    """Return (waveform float64 in [-1, 1], sample_rate)."""
    with wave.open(str(path), "rb") as fh:
        if fh.getnchannels() != 1 or fh.getsampwidth() != 2:
            raise ValueError(f"{path}: expected mono 16-bit PCM")
        sr = fh.getframerate()
        raw = fh.readframes(fh.getnframes())
    pcm = np.frombuffer(raw, dtype="<i2")
    return pcm.astype(np.float64) / 32767.0, float(sr)


def dump_json_line(obj: dict) -> str:
    """Canonical single-line JSON; key order fixed so files are byte-stable."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_jsonl(rows, path) -> int:
    n = 0
    with open(path, "w") as fh:
        for row in rows:
            fh.write(dump_json_line(row) + "\n")
            n += 1
    return n


def iter_jsonl(path):
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())
