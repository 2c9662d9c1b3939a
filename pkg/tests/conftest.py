"""Shared fixtures: one desk-scale adult campaign, a small two-model corpus,
and the built-in target set, all session-scoped because they are expensive."""

import time

import pytest

from vowellab.config import resolve_config
from vowellab.evaluation import load_dataset
from vowellab.pipeline import run_campaign
from vowellab.targets import target_set_from_config, write_target_set


@pytest.fixture(scope="session")
def default_config():
    return resolve_config()


@pytest.fixture(scope="session")
def desk_campaign(tmp_path_factory, default_config):
    """Adult 5 runs x 4000 steps, seed 1: the reference desk-scale corpus."""
    out = tmp_path_factory.mktemp("desk_adult")
    t0 = time.time()
    summary = run_campaign(default_config, out)
    return {"dir": out, "summary": summary, "elapsed_s": time.time() - t0,
            "config": default_config}


@pytest.fixture(scope="session")
def desk_dataset(desk_campaign):
    t0 = time.time()
    dataset = load_dataset(desk_campaign["dir"])
    desk_campaign["load_elapsed_s"] = time.time() - t0
    return dataset


@pytest.fixture(scope="session")
def builtin_targets(default_config, tmp_path_factory):
    ts = target_set_from_config(default_config)
    tdir = tmp_path_factory.mktemp("targets_builtin")
    write_target_set(ts, tdir)
    return {"set": ts, "dir": tdir}


def _small_config(model: str, runs: int = 2, steps: int = 200, seed: int = 11):
    return resolve_config(overrides={"campaign": {
        "model": model, "runs": runs, "steps": steps, "seed": seed}})


@pytest.fixture(scope="session")
def mini_duo(tmp_path_factory):
    """Small adult + child campaigns for multi-model paths (reports, studies)."""
    dirs = {}
    for model in ("adult", "child"):
        out = tmp_path_factory.mktemp(f"mini_{model}")
        cfg = _small_config(model)
        summary = run_campaign(cfg, out)
        dirs[model] = {"dir": out, "summary": summary, "config": cfg}
    return dirs
