"""Campaign behavior on small runs: stage monotonicity, determinism, layout.
The desk-scale statistics live in the acceptance suite; these stay fast."""

import json
from pathlib import Path

import numpy as np
import pytest

from vowellab.acoustics import FormantPoint
from vowellab.audio_io import iter_jsonl, read_json, read_wav
from vowellab.config import resolve_config
from vowellab.pipeline import FormantRange, formant_postfilter, run_campaign
from vowellab.tract import Model


def small_cfg(**campaign):
    base = {"model": "adult", "runs": 2, "steps": 150, "seed": 11}
    base.update(campaign)
    return resolve_config(overrides={"campaign": base})


def read_all(out_dir):
    return list(iter_jsonl(Path(out_dir) / "dataset.jsonl"))


class TestCampaign:
    def test_counts_are_monotone_and_consistent(self, tmp_path):
        s = run_campaign(small_cfg(), tmp_path)
        assert s["attempted"] == 300
        assert (s["attempted"] >= s["pass_prefilter"] >= s["pass_formant"]
                >= s["retained"] >= 0)
        assert s["retention_pct"] == pytest.approx(100.0 * s["retained"] / 300)
        rows = read_all(tmp_path)
        assert len(rows) == s["retained"]

    def test_rows_sorted_and_wavs_exist(self, tmp_path):
        run_campaign(small_cfg(), tmp_path)
        rows = read_all(tmp_path)
        keys = [(r["run_id"], r["step_id"]) for r in rows]
        assert keys == sorted(keys)
        for row in rows[:5]:
            assert row["wav"] == f"wav/r{row['run_id']:02d}_s{row['step_id']:06d}.wav"
            wave, sr = read_wav(tmp_path / row["wav"])
            assert sr == 44100.0 and wave.size == 22050
            assert len(row["params"]) == 8

    def test_bit_identical_determinism(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run_campaign(small_cfg(), a)
        run_campaign(small_cfg(), b)
        assert (a / "dataset.jsonl").read_bytes() == (b / "dataset.jsonl").read_bytes()
        row = read_all(a)[0]
        assert (a / row["wav"]).read_bytes() == (b / row["wav"]).read_bytes()

    def test_seed_changes_output(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run_campaign(small_cfg(), a)
        run_campaign(small_cfg(seed=12), b)
        assert (a / "dataset.jsonl").read_bytes() != (b / "dataset.jsonl").read_bytes()

    def test_zero_steps(self, tmp_path):
        s = run_campaign(small_cfg(steps=0), tmp_path)
        assert s == {"attempted": 0, "pass_prefilter": 0, "pass_formant": 0,
                     "retained": 0, "retention_pct": 0.0}
        assert read_all(tmp_path) == []

    def test_child_campaign_runs_and_stamps_model(self, tmp_path):
        s = run_campaign(small_cfg(model="child", steps=100), tmp_path)
        assert s["retained"] > 0
        meta = read_json(tmp_path / "campaign.json")
        assert meta["model"] == "child"
        assert meta["runs"] == 2 and meta["steps"] == 100 and meta["seed"] == 11

    def test_summary_file_matches_return(self, tmp_path):
        s = run_campaign(small_cfg(steps=50), tmp_path)
        assert read_json(tmp_path / "summary.json") == s

    def test_iid_mode_differs_from_walk(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        sa = run_campaign(small_cfg(), a)
        sb = run_campaign(small_cfg(mode="iid"), b)
        assert read_all(a) != read_all(b)
        assert sa["attempted"] == sb["attempted"] == 300


class TestFormantRange:
    def test_adult_from_config(self):
        fr = FormantRange.from_config(resolve_config(), Model.ADULT)
        assert (fr.f1_min, fr.f1_max) == (150.0, 1100.0)
        assert (fr.f2_min, fr.f2_max) == (500.0, 3000.0)

    def test_child_ranges_scaled(self):
        fr = FormantRange.from_config(resolve_config(), Model.CHILD)
        assert fr.f1_min == pytest.approx(150.0 * 1.3)
        assert fr.f2_max == pytest.approx(3000.0 * 1.3)

    def test_postfilter_boundaries_inclusive(self):
        fr = FormantRange(f1_min=150.0, f1_max=1100.0, f2_min=500.0, f2_max=3000.0)
        assert formant_postfilter(FormantPoint(150.0, 3000.0), fr)
        assert formant_postfilter(FormantPoint(500.0, 1500.0), fr)
        assert not formant_postfilter(FormantPoint(149.9, 1500.0), fr)
        assert not formant_postfilter(FormantPoint(500.0, 3000.1), fr)

    def test_inverted_range_rejected(self):
        with pytest.raises(ValueError):
            FormantRange(f1_min=900.0, f1_max=300.0, f2_min=500.0, f2_max=3000.0)
