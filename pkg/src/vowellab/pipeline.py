"""Sampling campaign: generate shapes, filter, synthesize, persist.

Stage order per candidate is prefilter -> transfer function -> formant
picking -> formant range postfilter -> synthesis -> low-frequency energy
check; each stage only removes candidates. Acoustic failures (too few
peaks, overflow) count as stage failures and never abort the campaign.

Dataset layout under the output directory:
  dataset.jsonl   one row per retained candidate, (run_id, step_id) order
  summary.json    {attempted, pass_prefilter, pass_formant, retained, retention_pct}
  campaign.json   model/runs/steps/seed and synthesis settings
  wav/            one mono 16-bit PCM file per retained candidate
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .acoustics import pick_formants, synthesize_vowel, transfer_function, low_frequency_energy_ok
from .audio_io import dump_json_line, write_json, write_wav
from .errors import VowellabError
from .tract import Model, prefilter_shape, sample_run, shape_to_area


@dataclass(frozen=True)
class FormantRange:
    f1_min: float
    f1_max: float
    f2_min: float
    f2_max: float

    def __post_init__(self):
        if not (self.f1_min < self.f1_max and self.f2_min < self.f2_max):
            raise ValueError("formant range mins must lie below maxes")

    @classmethod
    def from_config(cls, cfg: dict, model: Model) -> "FormantRange":
        r = cfg["ranges"]
        scale = r["child_scale"] if model is Model.CHILD else 1.0
        return cls(
            f1_min=r["adult_f1_hz"][0] * scale, f1_max=r["adult_f1_hz"][1] * scale,
            f2_min=r["adult_f2_hz"][0] * scale, f2_max=r["adult_f2_hz"][1] * scale,
        )


def formant_postfilter(fp, frange: FormantRange) -> bool:
    """True iff F1 and F2 lie inside the closed per-model ranges."""
    return (frange.f1_min <= fp.f1 <= frange.f1_max
            and frange.f2_min <= fp.f2 <= frange.f2_max)


def _wav_name(run_id: int, step_id: int) -> str:
    return f"wav/r{run_id:02d}_s{step_id:06d}.wav"


def _process_run(run_id: int, cfg: dict, out_dir: str) -> tuple:
    """Worker for one run: applies all stages, writes retained WAVs."""
    camp, ac, tr = cfg["campaign"], cfg["acoustics"], cfg["tract"]
    model = Model(camp["model"])
    frange = FormantRange.from_config(cfg, model)
    thr = tr["closure_threshold_cm2"]
    counts = {"attempted": 0, "pass_prefilter": 0, "pass_formant": 0, "retained": 0}
    rows = []
    out = Path(out_dir)

    for shape in sample_run(model, run_id, camp["steps"], camp["seed"],
                            sigma=camp["walk_sigma"], mode=camp["mode"]):
        counts["attempted"] += 1
        area = shape_to_area(shape, child_length_scale=tr["child_length_scale"],
                             child_area_scale=tr["child_area_scale"])
        if not prefilter_shape(area, closure_threshold=thr):
            continue
        counts["pass_prefilter"] += 1
        try:
            tf = transfer_function(
                area, f_max=ac["f_max_hz"], df=ac["df_hz"],
                speed_of_sound=ac["speed_of_sound_cm_s"], loss_coeff=ac["loss_coeff"],
                radiation=ac["radiation"], closure_threshold=thr)
            fp = pick_formants(tf, prominence_db=ac["peak_prominence_db"],
                               search_hz=tuple(ac["formant_search_hz"]))
        except VowellabError:
            continue
        if not formant_postfilter(fp, frange):
            continue
        counts["pass_formant"] += 1
        try:
            wave = synthesize_vowel(
                area, camp["f0_hz"], camp["duration_s"], camp["sample_rate_hz"],
                closure_threshold=thr, speed_of_sound=ac["speed_of_sound_cm_s"],
                loss_coeff=ac["loss_coeff"], radiation=ac["radiation"])
        except VowellabError:
            continue
        if not low_frequency_energy_ok(wave, camp["sample_rate_hz"],
                                       theta=ac["lf_energy_theta"], band_hz=ac["lf_band_hz"]):
            continue
        counts["retained"] += 1
        wav_rel = _wav_name(run_id, shape.step_id)
        write_wav(out / wav_rel, wave, camp["sample_rate_hz"])
        rows.append({
            "run_id": run_id,
            "step_id": shape.step_id,
            "params": [float(x) for x in shape.params],
            "f1_hz": fp.f1,
            "f2_hz": fp.f2,
            "wav": wav_rel,
        })
    return counts, rows


def run_campaign(cfg: dict, out_dir, jobs: int = 1) -> dict:
    """Execute the campaign described by cfg; returns the summary dict.

    Runs are independent and processed in parallel when jobs > 1; output
    files are identical either way (rows ordered by (run_id, step_id),
    WAVs named by their position).
    """
    camp = cfg["campaign"]
    out = Path(out_dir)
    (out / "wav").mkdir(parents=True, exist_ok=True)

    totals = {"attempted": 0, "pass_prefilter": 0, "pass_formant": 0, "retained": 0}
    all_rows = []
    run_ids = list(range(camp["runs"])) if camp["steps"] > 0 else []
    if jobs > 1 and len(run_ids) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(run_ids))) as pool:
            results = list(pool.map(_process_run, run_ids,
                                    [cfg] * len(run_ids), [str(out)] * len(run_ids)))
    else:
        results = [_process_run(r, cfg, str(out)) for r in run_ids]
    for counts, rows in results:
        for key in totals:
            totals[key] += counts[key]
        all_rows.extend(rows)

    with open(out / "dataset.jsonl", "w") as fh:
        for row in all_rows:
            fh.write(dump_json_line(row) + "\n")

    summary = dict(totals)
    summary["retention_pct"] = (100.0 * totals["retained"] / totals["attempted"]
                                if totals["attempted"] else 0.0)
    write_json(summary, out / "summary.json")
    write_json({
        "model": camp["model"], "runs": camp["runs"], "steps": camp["steps"],
        "seed": camp["seed"], "mode": camp["mode"], "f0_hz": camp["f0_hz"],
        "duration_s": camp["duration_s"], "sample_rate_hz": camp["sample_rate_hz"],
    }, out / "campaign.json")
    return summary
