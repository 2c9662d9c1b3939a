"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error. Every data-producing
subcommand writes the fully resolved configuration next to its outputs so a
run can be reproduced from the artifacts alone.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .audio_io import read_json, write_json
from .config import (
    CONFIG_SCHEMA_VERSION,
    feature_params,
    read_resolved,
    resolve_config,
    write_resolved,
)
from .errors import ConfigError, VowellabError
from .evaluation import (
    StatsSource,
    aggregate_report,
    evaluate_grid,
    formant_stats,
    load_dataset,
    pair_error_samples,
    read_results,
    write_report,
    write_results,
    zscore_formants,
)
from .mushra import (
    DEFAULT_SELECTED_PAIRS,
    MANIFEST_FILENAME,
    normalize_scores,
    parse_pair,
    prepare_manifest,
    read_score_sets,
    serve,
    write_normalized,
)
from .pipeline import run_campaign
from .surface import build_surface, export_surface
from .targets import load_target_set, target_set_from_config, write_target_set

META_FILENAME = "meta.json"


def _campaign_overrides(args) -> dict:
    section = {}
    for flag, key in (("model", "model"), ("runs", "runs"), ("steps", "steps"),
                      ("seed", "seed"), ("mode", "mode"), ("f0", "f0_hz"),
                      ("duration", "duration_s")):
        value = getattr(args, flag)
        if value is not None:
            section[key] = value
    return {"campaign": section} if section else {}


def _cmd_campaign(args) -> int:
    cfg = resolve_config(args.config, _campaign_overrides(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_resolved(cfg, out)
    summary = run_campaign(cfg, out, jobs=args.jobs)
    print(f"retained {summary['retained']}/{summary['attempted']} "
          f"({summary['retention_pct']:.1f}%) -> {out}")
    return 0


def _load_targets(args, cfg, out: Path):
    """Target directory if given, else the built-ins (echoed beside outputs)."""
    if args.targets:
        return load_target_set(args.targets), Path(args.targets)
    ts = target_set_from_config(cfg)
    tdir = out / "targets"
    write_target_set(ts, tdir)
    return ts, tdir


def _parse_pairs(spec: str | None):
    if spec is None or spec == "all":
        return None
    pairs = []
    for name in spec.split(","):
        name = name.strip()
        if name:
            pairs.append(parse_pair(name))
    if not pairs:
        raise ConfigError(f"no pairs in {spec!r}")
    return pairs


def _cmd_evaluate(args) -> int:
    cfg = resolve_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_resolved(cfg, out)
    dataset = load_dataset(args.dataset, params=feature_params(cfg), jobs=args.jobs)
    targets, targets_dir = _load_targets(args, cfg, out)
    results = evaluate_grid(dataset, targets, pairs=_parse_pairs(args.pairs))
    n = write_results(results, out / "results.jsonl")
    write_json({"dataset": str(Path(args.dataset).resolve()),
                "targets": str(targets_dir.resolve())}, out / META_FILENAME)
    print(f"wrote {n} results -> {out / 'results.jsonl'}")
    return 0


def _cmd_report(args) -> int:
    cfg = resolve_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_resolved(cfg, out)
    rows = []
    targets = None
    targets_dir = None
    for dataset_dir in args.dataset:
        dataset = load_dataset(dataset_dir, params=feature_params(cfg), jobs=args.jobs)
        if targets is None:
            targets, targets_dir = _load_targets(args, cfg, out)
        rows.extend(evaluate_grid(dataset, targets))
    n = write_results(rows, out / "results.jsonl")
    write_json({"dataset": [str(Path(d).resolve()) for d in args.dataset],
                "targets": str(targets_dir.resolve())}, out / META_FILENAME)
    report = aggregate_report(rows)
    write_report(report, out)
    for note in report.annotations:
        print(note)
    print(f"aggregated {n} results -> {out / 'report.json'}")
    return 0


def _cmd_surface(args) -> int:
    results_dir = Path(args.results)
    meta = read_json(results_dir / META_FILENAME)
    cfg = read_resolved(results_dir) or resolve_config()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_resolved(cfg, out)
    dataset_dirs = meta["dataset"]
    if isinstance(dataset_dirs, str):
        dataset_dirs = [dataset_dirs]
    variant, metric = parse_pair(args.pair)
    targets = load_target_set(meta["targets"])
    target_stats = formant_stats(targets.rendition_formants,
                                 StatsSource.TARGET_RENDITIONS)
    target_marker = zscore_formants(targets.vowel(args.vowel).formants, target_stats)
    written = []
    for dataset_dir in dataset_dirs:
        dataset = load_dataset(dataset_dir, params=feature_params(cfg),
                               jobs=args.jobs)
        samples = pair_error_samples(dataset, targets, variant, metric, args.vowel)
        grid = build_surface(samples, args.vowel, variant, metric,
                             dataset.model, target_marker)
        stem = f"surface_{dataset.model.value}_{variant.name}_{metric.value}_{args.vowel}"
        written.append(export_surface(grid, Path(args.out) / f"{stem}.csv"))
    for path in written:
        print(f"wrote {path} (+ sidecar)")
    return 0


def _cmd_mushra_prep(args) -> int:
    cfg = resolve_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_resolved(cfg, out)
    rows = []
    dataset_dirs = {}
    targets = None
    for results_dir in args.results:
        results_dir = Path(results_dir)
        rows.extend(read_results(results_dir / "results.jsonl"))
        meta = read_json(results_dir / META_FILENAME)
        datasets = meta["dataset"]
        if isinstance(datasets, str):
            datasets = [datasets]
        for dataset_dir in datasets:
            camp = read_json(Path(dataset_dir) / "campaign.json")
            dataset_dirs[camp["model"]] = dataset_dir
        if targets is None:
            targets = load_target_set(meta["targets"])
    pairs = args.pairs.split(",") if args.pairs else None
    seed = args.seed if args.seed is not None else cfg["mushra"]["shuffle_seed"]
    manifest = prepare_manifest(rows, dataset_dirs, targets, out,
                                selected_pairs=pairs, shuffle_seed=seed)
    print(f"wrote {len(manifest['screens'])} screens -> {out / MANIFEST_FILENAME}")
    return 0


def _cmd_mushra_normalize(args) -> int:
    cfg = resolve_config(args.config)
    manifest = read_json(args.manifest)
    score_sets = []
    for spec in args.scores:
        path = Path(spec)
        if path.is_dir():
            for child in sorted(path.glob("*.json")):
                score_sets.extend(read_score_sets(child))
        else:
            score_sets.extend(read_score_sets(path))
    clip = args.clip_above_one or cfg["mushra"]["clip_above_one"]
    normalized = normalize_scores(score_sets, manifest, clip_above_one=clip)
    write_normalized(normalized, args.out)
    print(f"normalized {len(normalized['rows'])} scores "
          f"({len(normalized['excluded'])} screens excluded) -> {args.out}")
    return 0


def _cmd_mushra_serve(args) -> int:
    serve(args.root, port=args.port, results_dir=args.results_dir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vowellab",
        description="Campaigns of simulated vowels, feature-metric evaluation, "
                    "error surfaces, and listening-test utilities.")
    parser.add_argument("--version", action="version",
                        version=f"vowellab {__version__} "
                                f"(config schema {CONFIG_SCHEMA_VERSION})")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file merged over defaults")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       help="worker processes (default: available parallelism)")

    p = sub.add_parser("campaign", help="synthesize a corpus of articulations")
    add_common(p)
    p.add_argument("--model", choices=["adult", "child"])
    p.add_argument("--runs", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=["walk", "iid"])
    p.add_argument("--f0", type=float)
    p.add_argument("--duration", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_campaign)

    p = sub.add_parser("evaluate", help="run the feature-metric grid on a campaign")
    add_common(p)
    p.add_argument("--dataset", required=True, help="campaign output directory")
    p.add_argument("--targets", help="target directory (default: built-in set)")
    p.add_argument("--out", required=True)
    p.add_argument("--pairs", help='"all" or comma-separated list like mfcc12+mse')
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("report", help="evaluate and aggregate the impact tables")
    add_common(p)
    p.add_argument("--dataset", required=True, action="append",
                   help="campaign directory (repeat for more models)")
    p.add_argument("--targets", help="target directory (default: built-in set)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("surface", help="export an error surface for one pair/vowel")
    add_common(p)
    p.add_argument("--results", required=True, help="evaluate output directory")
    p.add_argument("--pair", required=True, help="pair descriptor like mfcc12+mse")
    p.add_argument("--vowel", required=True, choices=list("aeiou"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_surface)

    p = sub.add_parser("mushra", help="listening-test utilities")
    msub = p.add_subparsers(dest="mushra_command", required=True)

    mp = msub.add_parser("prep", help="prepare a study directory from results")
    add_common(mp)
    mp.add_argument("--results", required=True, action="append",
                    help="evaluate output directory (repeat for more models)")
    mp.add_argument("--out", required=True)
    mp.add_argument("--pairs",
                    help="comma-separated pair descriptors "
                         f"(default: {','.join(DEFAULT_SELECTED_PAIRS)})")
    mp.add_argument("--seed", type=int, help="shuffle seed (default from config)")
    mp.set_defaults(func=_cmd_mushra_prep)

    mn = msub.add_parser("normalize", help="normalize collected rater scores")
    add_common(mn)
    mn.add_argument("--manifest", required=True)
    mn.add_argument("--scores", required=True, action="append",
                    help="scores JSON file or directory of uploads (repeatable)")
    mn.add_argument("--out", required=True)
    mn.add_argument("--clip-above-one", action="store_true",
                    help="also clip normalized scores above 1")
    mn.set_defaults(func=_cmd_mushra_normalize)

    ms = msub.add_parser("serve", help="serve a prepared study over HTTP")
    ms.add_argument("--root", required=True, help="directory with manifest.json")
    ms.add_argument("--port", type=int, default=8000)
    ms.add_argument("--results-dir", help="upload directory (default: ROOT/results)")
    ms.set_defaults(func=_cmd_mushra_serve)

    return parser


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage problems and 0 for --help/--version
        return 0 if not exc.code else 1
    try:
        return args.func(args)
    except VowellabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> int:
    return dispatch()


if __name__ == "__main__":
    sys.exit(main())
