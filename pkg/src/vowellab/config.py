"""Harness configuration: documented defaults, JSON file merge, echo.

Resolution order is defaults < config file < explicit overrides (CLI
flags). Unknown keys anywhere in the tree are rejected so typos cannot
silently fall back to defaults.
"""
from __future__ import annotations

import copy
import json
from pathlib import Path

from .errors import ConfigError
from .features import FeatureParams

CONFIG_SCHEMA_VERSION = 1

# Every key below is a documented default; see README for the full table.
DEFAULT_CONFIG = {
    "campaign": {
        "model": "adult",           # adult | child
        "runs": 5,
        "steps": 4000,
        "seed": 1,
        "mode": "walk",             # walk (neutral start) | iid (uniform draws)
        "walk_sigma": 0.1,          # step stddev as a fraction of each range
        "f0_hz": 120.0,
        "duration_s": 0.5,
        "sample_rate_hz": 44100.0,
    },
    "tract": {
        "child_length_scale": 0.7,
        "child_area_scale": 0.75,
        "closure_threshold_cm2": 0.1,
    },
    "acoustics": {
        "df_hz": 5.0,
        "f_max_hz": 10000.0,
        "speed_of_sound_cm_s": 35000.0,
        "loss_coeff": 2.0e-4,       # alpha = loss_coeff*sqrt(f)/radius per section
        "radiation": "baffle",      # baffle | resistive | none
        "peak_prominence_db": 3.0,
        "formant_search_hz": [150.0, 5000.0],
        "lf_energy_theta": 0.01,
        "lf_band_hz": 500.0,
    },
    "features": {
        "frame_len": 1024,
        "hop_len": 512,
        "preemphasis": 0.97,
        "lifter_l": 22,
        "n_mel_filters": 26,
        "mel_f_max_hz": 10000.0,
        "include_c0": True,         # open question: 0th cepstral coefficient kept
        "log_base": "e",            # open question: natural log by default
    },
    "metrics": {
        "framewise": False,         # open question: pooled static comparison by default
    },
    "ranges": {
        # plausible adult F1/F2 screening bounds; child bounds scaled up
        "adult_f1_hz": [150.0, 1100.0],
        "adult_f2_hz": [500.0, 3000.0],
        "child_scale": 1.3,
    },
    "targets": {
        "length_scale": 0.93,       # target speaker tract length relative to adult
        "renditions_per_vowel": 10, # 5 vowels -> 50 rendition formant points
        "rendition_sigma": 0.03,    # perturbation stddev, fraction of each range
        "seed": 77,
    },
    "mushra": {
        "clip_above_one": False,    # open question: only negatives clipped by default
        "shuffle_seed": 9,
    },
}


def _merge(base: dict, override: dict, path: str) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        here = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key: {here}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{here} must be an object")
            out[key] = _merge(base[key], value, here)
        else:
            out[key] = value
    return out


def _check_types(cfg: dict) -> None:
    camp = cfg["campaign"]
    if camp["model"] not in ("adult", "child"):
        raise ConfigError(f"campaign.model must be adult or child, got {camp['model']!r}")
    if camp["mode"] not in ("walk", "iid"):
        raise ConfigError(f"campaign.mode must be walk or iid, got {camp['mode']!r}")
    for key in ("runs", "steps", "seed"):
        if not isinstance(camp[key], int) or camp[key] < 0:
            raise ConfigError(f"campaign.{key} must be a non-negative integer")
    if camp["runs"] < 1:
        raise ConfigError("campaign.runs must be >= 1")
    if cfg["acoustics"]["radiation"] not in ("baffle", "resistive", "none"):
        raise ConfigError("acoustics.radiation must be baffle, resistive or none")
    r = cfg["ranges"]
    if not (r["adult_f1_hz"][0] < r["adult_f1_hz"][1]
            and r["adult_f2_hz"][0] < r["adult_f2_hz"][1]):
        raise ConfigError("formant range mins must be below maxes")
    try:
        feature_params(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def resolve_config(config_file=None, overrides: dict | None = None) -> dict:
    """Defaults merged with an optional JSON file, then explicit overrides."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if config_file is not None:
        text = Path(config_file).read_text()
        try:
            loaded = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg = _merge(cfg, loaded, "")
    if overrides:
        cfg = _merge(cfg, overrides, "")
    _check_types(cfg)
    return cfg


def feature_params(cfg: dict) -> FeatureParams:
    f = cfg["features"]
    return FeatureParams(
        frame_len=f["frame_len"], hop_len=f["hop_len"], preemphasis=f["preemphasis"],
        lifter_l=f["lifter_l"], n_filters=f["n_mel_filters"], f_max_hz=f["mel_f_max_hz"],
        include_c0=f["include_c0"], log_base=f["log_base"],
    )


def write_resolved(cfg: dict, out_dir) -> Path:
    """Echo the fully resolved config beside a command's outputs."""
    path = Path(out_dir) / "config.resolved.json"
    payload = {"config_schema_version": CONFIG_SCHEMA_VERSION, **cfg}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def read_resolved(out_dir) -> dict | None:
    path = Path(out_dir) / "config.resolved.json"
    if not path.exists():
        return None
    data = json.loads(path.read_text())
    data.pop("config_schema_version", None)
    return data
