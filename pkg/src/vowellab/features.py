"""Log-mel and MFCC feature extraction with the 10-variant enumeration.

Filterbank construction, for bit-exact reimplementation elsewhere:
mel(f) = 2595*log10(1 + f/700). 28 points are spaced uniformly in mel
between mel(0) and mel(10000) and mapped back to Hz; filter i (1..26) is
a triangle that is linear in Hz, rising from point i-1 to a unit peak at
point i and falling to zero at point i+1, evaluated at the FFT bin
frequencies of a 1024-point transform. No area normalization.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.fft import dct, idct

from .errors import DimsMismatch, EmptyCorpus, SignalTooShort

N_MEL_FILTERS = 26
MEL_F_MAX_HZ = 10000.0
FRAME_LEN = 1024
HOP_LEN = 512
N_FFT = 1024
PREEMPHASIS = 0.97
LIFTER_L = 22
LOG_FLOOR = 1e-10
CMVN_STD_FLOOR = 1e-8


@dataclass(frozen=True)
class FeatureParams:
    """Extraction knobs; the defaults are the declared analysis settings."""

    frame_len: int = FRAME_LEN
    hop_len: int = HOP_LEN
    preemphasis: float = PREEMPHASIS
    lifter_l: int = LIFTER_L
    n_filters: int = N_MEL_FILTERS
    f_max_hz: float = MEL_F_MAX_HZ
    include_c0: bool = True
    log_base: str = "e"         # "e" or "10"

    def __post_init__(self):
        if self.log_base not in ("e", "10"):
            raise ValueError("log_base must be 'e' or '10'")
        if self.frame_len < 2 or not 0 < self.hop_len <= self.frame_len:
            raise ValueError("bad framing parameters")


DEFAULT_PARAMS = FeatureParams()


class FeatureBase(str, Enum):
    LOGMEL = "logmel"
    MFCC12 = "mfcc12"
    MFCC22 = "mfcc22"


@dataclass(frozen=True)
class FeatureVariant:
    base: FeatureBase
    hf_emphasis: bool = False
    cmvn: bool = False

    def __post_init__(self):
        if self.base is FeatureBase.LOGMEL and self.cmvn:
            raise ValueError("cmvn only applies to cepstral bases")

    @property
    def dims(self) -> int:
        return {FeatureBase.LOGMEL: 26, FeatureBase.MFCC12: 12, FeatureBase.MFCC22: 22}[self.base]

    @property
    def name(self) -> str:
        parts = [self.base.value]
        if self.hf_emphasis:
            parts.append("hf")
        if self.cmvn:
            parts.append("cmvn")
        return "_".join(parts)

    def descriptor(self) -> dict:
        return {"base": self.base.value, "hf_emphasis": self.hf_emphasis, "cmvn": self.cmvn}

    @classmethod
    def from_descriptor(cls, d: dict) -> "FeatureVariant":
        return cls(base=FeatureBase(d["base"]), hf_emphasis=bool(d["hf_emphasis"]),
                   cmvn=bool(d["cmvn"]))

    @classmethod
    def from_name(cls, name: str) -> "FeatureVariant":
        parts = name.split("_")
        return cls(base=FeatureBase(parts[0]), hf_emphasis="hf" in parts[1:],
                   cmvn="cmvn" in parts[1:])


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray        # frames x dims
    variant: FeatureVariant

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("values must be a frames x dims matrix")
        # cepstral widths are fixed by the variant; log-mel width follows the
        # configured filter count (26 under defaults)
        expected = {FeatureBase.MFCC12: 12, FeatureBase.MFCC22: 22}.get(self.variant.base)
        if expected is not None and v.shape[1] != expected:
            raise DimsMismatch(f"{v.shape[1]} dims for variant {self.variant.name}")
        if not np.all(np.isfinite(v)):
            raise ValueError("feature values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def frames(self) -> int:
        return self.values.shape[0]

    @property
    def dims(self) -> int:
        return self.values.shape[1]

    def to_json(self) -> str:
        return json.dumps({
            "variant": self.variant.descriptor(),
            "frames": self.frames,
            "dims": self.dims,
            "values": [float(x) for x in self.values.ravel()],
        })

    @classmethod
    def from_json(cls, text: str) -> "FeatureMatrix":
        d = json.loads(text)
        values = np.asarray(d["values"], dtype=np.float64).reshape(d["frames"], d["dims"])
        return cls(values=values, variant=FeatureVariant.from_descriptor(d["variant"]))


@dataclass(frozen=True)
class CmvnStats:
    mean: np.ndarray
    std: np.ndarray
    corpus_size: int

    def __post_init__(self):
        m = np.asarray(self.mean, dtype=np.float64)
        s = np.asarray(self.std, dtype=np.float64)
        if m.shape != s.shape or m.ndim != 1:
            raise ValueError("mean and std must be matching 1-d vectors")
        if np.any(s <= 0.0):
            raise ValueError("std must be strictly positive")
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "std", s)

    def to_json(self) -> str:
        return json.dumps({"mean": list(self.mean), "std": list(self.std),
                           "corpus_size": self.corpus_size})

    @classmethod
    def from_json(cls, text: str) -> "CmvnStats":
        d = json.loads(text)
        return cls(mean=np.asarray(d["mean"]), std=np.asarray(d["std"]),
                   corpus_size=int(d["corpus_size"]))


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(sr: float, n_fft: int = N_FFT, n_filters: int = N_MEL_FILTERS,
                   f_max: float = MEL_F_MAX_HZ) -> np.ndarray:
    """Unit-peak triangular filters, n_filters x (n_fft//2 + 1)."""
    points_hz = mel_to_hz(np.linspace(hz_to_mel(0.0), hz_to_mel(f_max), n_filters + 2))
    bin_freqs = np.arange(n_fft // 2 + 1) * sr / n_fft
    bank = np.zeros((n_filters, bin_freqs.size))
    for i in range(n_filters):
        left, center, right = points_hz[i], points_hz[i + 1], points_hz[i + 2]
        up = (bin_freqs - left) / (center - left)
        down = (right - bin_freqs) / (right - center)
        bank[i] = np.clip(np.minimum(up, down), 0.0, 1.0)
    return bank


def filter_centers_hz(n_filters: int = N_MEL_FILTERS, f_max: float = MEL_F_MAX_HZ) -> np.ndarray:
    points = mel_to_hz(np.linspace(hz_to_mel(0.0), hz_to_mel(f_max), n_filters + 2))
    return points[1:-1]


def _frame(x: np.ndarray, frame_len: int, hop_len: int) -> np.ndarray:
    if x.size < frame_len:
        raise SignalTooShort(f"need at least {frame_len} samples, got {x.size}")
    n_frames = 1 + (x.size - frame_len) // hop_len
    idx = np.arange(frame_len)[None, :] + hop_len * np.arange(n_frames)[:, None]
    return x[idx]


def _log_mel_values(waveform: np.ndarray, sr: float, hf_emphasis: bool,
                    p: FeatureParams) -> np.ndarray:
    if sr < 20000.0:
        raise ValueError("sample rate must be >= 20 kHz")
    x = np.asarray(waveform, dtype=np.float64)
    if hf_emphasis and x.size:
        x = np.concatenate(([x[0]], x[1:] - p.preemphasis * x[:-1]))
    frames = _frame(x, p.frame_len, p.hop_len) * np.hanning(p.frame_len)
    power = np.abs(np.fft.rfft(frames, n=p.frame_len, axis=1)) ** 2
    bank = mel_filterbank(sr, n_fft=p.frame_len, n_filters=p.n_filters, f_max=p.f_max_hz)
    energies = power @ bank.T
    logs = np.log(np.maximum(energies, LOG_FLOOR))
    if p.log_base == "10":
        logs = logs / np.log(10.0)
    return logs


def log_mel(waveform: np.ndarray, sr: float, hf_emphasis: bool = False,
            params: FeatureParams = DEFAULT_PARAMS) -> FeatureMatrix:
    """26-channel log mel spectrogram (natural log, floor 1e-10, under defaults)."""
    values = _log_mel_values(waveform, sr, hf_emphasis, params)
    return FeatureMatrix(values=values, variant=FeatureVariant(FeatureBase.LOGMEL, hf_emphasis))


def _lifter_weights(n: int, lifter_l: int) -> np.ndarray:
    k = np.arange(n)
    return 1.0 + (lifter_l / 2.0) * np.sin(np.pi * k / lifter_l)


def _truncate(cepstra: np.ndarray, n: int, include_c0: bool) -> np.ndarray:
    return cepstra[:, :n] if include_c0 else cepstra[:, 1 : n + 1]


def mfcc(waveform: np.ndarray, sr: float, n: int = 12, hf_emphasis: bool = False,
         apply_lifter=None, params: FeatureParams = DEFAULT_PARAMS) -> FeatureMatrix:
    """MFCCs as the orthonormal DCT-II of the log mel energies.

    Coefficients 0..n-1 are kept (the 0th included) unless params says
    otherwise. Sinusoidal liftering (L=22) follows hf_emphasis unless
    apply_lifter overrides it.
    """
    if n not in (12, 22):
        raise ValueError("n must be 12 or 22")
    logmel = _log_mel_values(waveform, sr, hf_emphasis, params)
    cepstra = _truncate(dct(logmel, type=2, norm="ortho", axis=1), n, params.include_c0)
    if apply_lifter is None:
        apply_lifter = hf_emphasis
    if apply_lifter:
        cepstra = cepstra * _lifter_weights(n, params.lifter_l)
    base = FeatureBase.MFCC12 if n == 12 else FeatureBase.MFCC22
    return FeatureMatrix(values=cepstra, variant=FeatureVariant(base, hf_emphasis))


def extract(waveform: np.ndarray, sr: float, variant: FeatureVariant,
            params: FeatureParams = DEFAULT_PARAMS) -> FeatureMatrix:
    """Extract one non-CMVN variant (CMVN needs corpus stats, applied separately)."""
    if variant.cmvn:
        raise ValueError("cmvn variants require corpus stats; use apply_cmvn")
    if variant.base is FeatureBase.LOGMEL:
        return log_mel(waveform, sr, variant.hf_emphasis, params)
    n = 12 if variant.base is FeatureBase.MFCC12 else 22
    return mfcc(waveform, sr, n, variant.hf_emphasis, params=params)


def extract_bases(waveform: np.ndarray, sr: float,
                  params: FeatureParams = DEFAULT_PARAMS) -> dict:
    """All 6 non-CMVN variants from two shared mel passes, keyed by name."""
    out = {}
    for hf in (False, True):
        logmel_values = _log_mel_values(waveform, sr, hf, params)
        out[FeatureVariant(FeatureBase.LOGMEL, hf).name] = FeatureMatrix(
            values=logmel_values, variant=FeatureVariant(FeatureBase.LOGMEL, hf))
        cepstra = dct(logmel_values, type=2, norm="ortho", axis=1)
        for n, base in ((12, FeatureBase.MFCC12), (22, FeatureBase.MFCC22)):
            values = _truncate(cepstra, n, params.include_c0)
            if hf:
                values = values * _lifter_weights(n, params.lifter_l)
            out[FeatureVariant(base, hf).name] = FeatureMatrix(
                values=values, variant=FeatureVariant(base, hf))
    return out


def compute_cmvn_stats(corpus) -> CmvnStats:
    """Pooled per-dimension mean and population std, std floored at 1e-8."""
    corpus = list(corpus)
    if not corpus:
        raise EmptyCorpus("no feature matrices")
    variant = corpus[0].variant
    for fm in corpus[1:]:
        if fm.variant != variant:
            raise ValueError("corpus mixes feature variants")
    pooled = np.concatenate([fm.values for fm in corpus], axis=0)
    if pooled.shape[0] < 2:
        raise EmptyCorpus("need at least 2 frames for stats")
    mean = pooled.mean(axis=0)
    std = np.maximum(pooled.std(axis=0), CMVN_STD_FLOOR)
    return CmvnStats(mean=mean, std=std, corpus_size=len(corpus))


def apply_cmvn(fm: FeatureMatrix, stats: CmvnStats) -> FeatureMatrix:
    if fm.dims != stats.mean.size:
        raise DimsMismatch(f"matrix has {fm.dims} dims, stats have {stats.mean.size}")
    values = (fm.values - stats.mean) / stats.std
    return FeatureMatrix(values=values, variant=replace(fm.variant, cmvn=True))


def invert_cmvn(fm: FeatureMatrix, stats: CmvnStats) -> FeatureMatrix:
    if fm.dims != stats.mean.size:
        raise DimsMismatch(f"matrix has {fm.dims} dims, stats have {stats.mean.size}")
    values = fm.values * stats.std + stats.mean
    return FeatureMatrix(values=values, variant=replace(fm.variant, cmvn=False))


def inverse_mel_dct(cepstra: np.ndarray) -> np.ndarray:
    """Inverse of the orthonormal DCT-II over a full 26-coefficient frame set."""
    return idct(cepstra, type=2, norm="ortho", axis=1)


def enumerate_variants() -> list:
    """The 10 valid variants in stable order."""
    variants = [FeatureVariant(FeatureBase.LOGMEL, hf) for hf in (False, True)]
    for base in (FeatureBase.MFCC12, FeatureBase.MFCC22):
        for hf in (False, True):
            for cmvn in (False, True):
                variants.append(FeatureVariant(base, hf, cmvn))
    return variants
