"""Built-in target inventory: five vowels from a smaller reference speaker.

The targets are produced by the same articulatory model as the candidates,
with every tube length scaled by ``TARGET_LENGTH_SCALE`` so the reference
speaker is anatomically close to, but not identical with, the adult learner.
Formant statistics for the reference speaker come from a cloud of perturbed
renditions around each vowel rather than from the five points alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .acoustics import FormantPoint, pick_formants, synthesize_vowel, transfer_function
from .audio_io import read_json, read_wav, write_json, write_wav
from .errors import ConfigError, MissingTarget, VowellabError
from .tract import (
    AreaFunction,
    Model,
    PARAM_NAMES,
    PARAM_RANGES,
    VocalTractShape,
    neutral_params,
    shape_to_area,
)

VOWEL_LABELS = ("a", "e", "i", "o", "u")

TARGET_LENGTH_SCALE = 0.93
RENDITIONS_PER_VOWEL = 10
RENDITION_SIGMA = 0.03      # parameter jitter as a fraction of each range
RENDITION_SEED = 77
TARGETS_FILENAME = "targets.json"

# Perturbed draws that seal the tract are discarded and redrawn; this caps the
# loop so a badly placed custom target fails loudly instead of spinning.
_MAX_REDRAWS = 500

_PARAM_INDEX = {name: i for i, name in enumerate(PARAM_NAMES)}

# Hand-tuned articulations. Values not listed stay at the neutral mid-range.
# Tuned so the five points spread into the classic triangle while keeping the
# minimum cross-section comfortably above the closure threshold.
TARGET_ARTICULATIONS: dict[str, dict[str, float]] = {
    "a": {"jaw": 0.95, "constriction_pos": 0.32, "constriction_degree": 0.32,
          "body_height": 0.35, "lip_area": 3.2, "lip_protrusion": 0.1,
          "pharynx_width": 0.6},
    "e": {"jaw": 0.5, "constriction_pos": 0.78, "constriction_degree": 0.5,
          "body_height": 0.5, "lip_area": 1.6, "lip_protrusion": 0.0,
          "pharynx_width": 1.15},
    "i": {"jaw": 0.25, "constriction_pos": 0.82, "constriction_degree": 0.64,
          "body_height": 0.5, "lip_area": 1.2, "lip_protrusion": 0.0,
          "pharynx_width": 1.4},
    "o": {"jaw": 0.45, "constriction_pos": 0.3, "constriction_degree": 0.4,
          "body_height": 0.55, "lip_area": 0.45, "lip_protrusion": 1.2,
          "pharynx_width": 0.8},
    "u": {"jaw": 0.3, "constriction_pos": 0.35, "constriction_degree": 0.45,
          "body_height": 0.6, "lip_area": 0.25, "lip_protrusion": 1.7,
          "pharynx_width": 1.0},
}


def target_params(label: str) -> np.ndarray:
    if label not in TARGET_ARTICULATIONS:
        raise MissingTarget(f"no built-in articulation for vowel {label!r}")
    p = neutral_params()
    for name, value in TARGET_ARTICULATIONS[label].items():
        p[_PARAM_INDEX[name]] = value
    return p


def scaled_area(params: np.ndarray, length_scale: float) -> AreaFunction:
    """Adult-geometry area function with every section length rescaled."""
    if length_scale <= 0.0:
        raise ConfigError(f"length_scale must be > 0, got {length_scale}")
    af = shape_to_area(VocalTractShape(params=np.asarray(params, dtype=np.float64),
                                       model=Model.ADULT))
    return AreaFunction(areas=af.areas, lengths=af.lengths * length_scale,
                        total_length=af.total_length * length_scale)


@dataclass(frozen=True)
class TargetVowel:
    label: str
    audio: np.ndarray
    sample_rate_hz: int
    formants: FormantPoint

    def __post_init__(self):
        if self.audio.ndim != 1 or self.audio.size == 0:
            raise ValueError("target audio must be a non-empty 1-d signal")


@dataclass(frozen=True)
class TargetSet:
    """Five targets plus the rendition cloud that defines the speaker's stats."""

    targets: tuple[TargetVowel, ...]
    rendition_formants: tuple[FormantPoint, ...]
    length_scale: float = TARGET_LENGTH_SCALE

    def __post_init__(self):
        labels = [t.label for t in self.targets]
        if sorted(labels) != sorted(VOWEL_LABELS):
            raise ConfigError(
                f"target set must contain exactly the vowels {VOWEL_LABELS}, got {labels}")
        if len(self.rendition_formants) < 2:
            raise ConfigError("need at least 2 rendition formant points for speaker stats")

    def vowel(self, label: str) -> TargetVowel:
        for t in self.targets:
            if t.label == label:
                return t
        raise MissingTarget(f"vowel {label!r} not in target set")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(t.label for t in self.targets)


def _valid_rendition(params: np.ndarray, length_scale: float,
                     tf_kwargs: dict) -> FormantPoint | None:
    try:
        area = scaled_area(params, length_scale)
        return pick_formants(transfer_function(area, **tf_kwargs))
    except VowellabError:
        return None


def build_target_set(
    *,
    f0_hz: float = 120.0,
    duration_s: float = 0.5,
    sample_rate_hz: int = 44100,
    length_scale: float = TARGET_LENGTH_SCALE,
    renditions_per_vowel: int = RENDITIONS_PER_VOWEL,
    rendition_sigma: float = RENDITION_SIGMA,
    seed: int = RENDITION_SEED,
    tf_kwargs: dict | None = None,
) -> TargetSet:
    """Synthesize the built-in targets and their rendition formant cloud.

    Perturbed rendition draws that occlude the tract (or lose a formant) are
    rejected and redrawn from the same stream, so the result is deterministic
    for a fixed seed regardless of how many draws get discarded.
    """
    tf_kwargs = dict(tf_kwargs or {})
    if renditions_per_vowel < 1:
        raise ConfigError("renditions_per_vowel must be >= 1")
    widths = PARAM_RANGES[:, 1] - PARAM_RANGES[:, 0]
    targets = []
    rendition_points: list[FormantPoint] = []
    for label_idx, label in enumerate(VOWEL_LABELS):
        base = target_params(label)
        area = scaled_area(base, length_scale)
        audio = synthesize_vowel(area, f0=f0_hz, dur=duration_s,
                                 sr=sample_rate_hz, **tf_kwargs)
        formants = pick_formants(transfer_function(area, **tf_kwargs))
        targets.append(TargetVowel(label=label, audio=audio,
                                   sample_rate_hz=sample_rate_hz, formants=formants))
        rng = np.random.default_rng([seed, label_idx])
        kept = 0
        for _ in range(_MAX_REDRAWS):
            if kept == renditions_per_vowel:
                break
            draw = base + rendition_sigma * widths * rng.standard_normal(len(base))
            draw = np.clip(draw, PARAM_RANGES[:, 0], PARAM_RANGES[:, 1])
            point = _valid_rendition(draw, length_scale, tf_kwargs)
            if point is not None:
                rendition_points.append(point)
                kept += 1
        if kept < renditions_per_vowel:
            raise ConfigError(
                f"could not draw {renditions_per_vowel} valid renditions for /{label}/ "
                f"within {_MAX_REDRAWS} attempts")
    return TargetSet(targets=tuple(targets), rendition_formants=tuple(rendition_points),
                     length_scale=length_scale)


def write_target_set(target_set: TargetSet, out_dir: str | Path) -> Path:
    """Write audio and metadata so a directory can stand in for the built-ins."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for t in target_set.targets:
        wav_name = f"target_{t.label}.wav"
        write_wav(out / wav_name, t.audio, t.sample_rate_hz)
        entries.append({"label": t.label, "wav": wav_name,
                        "f1_hz": t.formants.f1, "f2_hz": t.formants.f2})
    doc = {
        "schema": 1,
        "length_scale": target_set.length_scale,
        "targets": entries,
        "rendition_formants": [
            {"f1_hz": p.f1, "f2_hz": p.f2} for p in target_set.rendition_formants
        ],
    }
    path = out / TARGETS_FILENAME
    write_json(doc, path)
    return path


def load_target_set(target_dir: str | Path) -> TargetSet:
    """Load a target directory written by ``write_target_set`` or by hand.

    A hand-built directory may omit ``rendition_formants``; the five target
    points then double as the stats cloud, which is legal but gives the
    reference speaker a coarser normalization.
    """
    target_dir = Path(target_dir)
    path = target_dir / TARGETS_FILENAME
    if not path.is_file():
        raise ConfigError(f"no {TARGETS_FILENAME} in {target_dir}")
    doc = read_json(path)
    if doc.get("schema") != 1:
        raise ConfigError(f"unsupported targets schema: {doc.get('schema')!r}")
    targets = []
    for entry in doc.get("targets", []):
        audio, sr = read_wav(target_dir / entry["wav"])
        targets.append(TargetVowel(label=entry["label"], audio=audio, sample_rate_hz=sr,
                                   formants=FormantPoint(f1=float(entry["f1_hz"]),
                                                         f2=float(entry["f2_hz"]))))
    renditions = [FormantPoint(f1=float(r["f1_hz"]), f2=float(r["f2_hz"]))
                  for r in doc.get("rendition_formants", [])]
    if not renditions:
        renditions = [t.formants for t in targets]
    return TargetSet(targets=tuple(targets), rendition_formants=tuple(renditions),
                     length_scale=float(doc.get("length_scale", TARGET_LENGTH_SCALE)))


def target_set_from_config(cfg: dict) -> TargetSet:
    """Build the built-in target set using campaign audio and target settings."""
    camp = cfg["campaign"]
    tgt = cfg["targets"]
    ac = cfg["acoustics"]
    tf_kwargs = {
        "df": ac["df_hz"],
        "f_max": ac["f_max_hz"],
        "speed_of_sound": ac["speed_of_sound_cm_s"],
        "loss_coeff": ac["loss_coeff"],
        "radiation": ac["radiation"],
    }
    return build_target_set(
        f0_hz=camp["f0_hz"],
        duration_s=camp["duration_s"],
        sample_rate_hz=camp["sample_rate_hz"],
        length_scale=tgt["length_scale"],
        renditions_per_vowel=tgt["renditions_per_vowel"],
        rendition_sigma=tgt["rendition_sigma"],
        seed=tgt["seed"],
        tf_kwargs=tf_kwargs,
    )
