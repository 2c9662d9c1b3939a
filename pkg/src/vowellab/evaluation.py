"""Speaker-normalized formant errors, per-run optimum selection, impact reports.

Feature distances decide which candidate wins each (vowel, run) split; the
z-space formant error is computed for the winner afterwards and never feeds
back into the selection. Candidate z-scores use the retained dataset's own
statistics, target z-scores use the statistics of the target speaker's
rendition cloud.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .acoustics import FormantPoint
from .audio_io import dump_json_line, iter_jsonl, read_json, read_wav, write_json
from .errors import (
    EmptyCorpus,
    EmptyRun,
    IncompleteGrid,
    MissingTarget,
    ZeroVector,
)
from .features import (
    CMVN_STD_FLOOR,
    CmvnStats,
    DEFAULT_PARAMS,
    FeatureParams,
    FeatureVariant,
    enumerate_variants,
    extract_bases,
)
from .metrics import ALL_METRICS, DistanceMetric, reduce_static
from .targets import TargetSet, TargetVowel, VOWEL_LABELS
from .tract import Model

__all__ = [
    "StatsSource", "SpeakerFormantStats", "CandidateEntry", "ModelDataset",
    "OptimizationResult", "ImpactReport", "TargetVowel",
    "formant_stats", "zscore_formants", "formant_error", "load_dataset",
    "pair_distances", "optimize_pair", "evaluate_grid", "pair_error_samples",
    "results_to_rows", "write_results", "read_results", "aggregate_report",
    "write_report",
]

RESULTS_FILENAME = "results.jsonl"
REPORT_FILENAME = "report.json"

# Population std of a degenerate cloud is 0; the same floor as CMVN keeps the
# stats invariant (std > 0) without distorting any real spread.
_STD_FLOOR = CMVN_STD_FLOOR


class StatsSource(str, Enum):
    MODEL_DATASET = "model_dataset"
    TARGET_RENDITIONS = "target_renditions"


@dataclass(frozen=True)
class SpeakerFormantStats:
    mean_f1: float
    std_f1: float
    mean_f2: float
    std_f2: float
    source: StatsSource

    def __post_init__(self):
        if self.std_f1 <= 0.0 or self.std_f2 <= 0.0:
            raise ValueError("formant stds must be strictly positive")


def formant_stats(points, source: StatsSource) -> SpeakerFormantStats:
    """Pooled mean and population std of a formant cloud."""
    pts = np.asarray([(p.f1, p.f2) for p in points], dtype=np.float64)
    if pts.shape[0] < 1:
        raise EmptyCorpus("no formant points for speaker stats")
    mean = pts.mean(axis=0)
    std = np.maximum(pts.std(axis=0), _STD_FLOOR)
    return SpeakerFormantStats(mean_f1=float(mean[0]), std_f1=float(std[0]),
                               mean_f2=float(mean[1]), std_f2=float(std[1]),
                               source=source)


def zscore_formants(fp: FormantPoint, stats: SpeakerFormantStats) -> tuple:
    return ((fp.f1 - stats.mean_f1) / stats.std_f1,
            (fp.f2 - stats.mean_f2) / stats.std_f2)


def formant_error(z_cand, z_target) -> float:
    dz1 = z_cand[0] - z_target[0]
    dz2 = z_cand[1] - z_target[1]
    return float(np.hypot(dz1, dz2))


@dataclass(frozen=True)
class CandidateEntry:
    run_id: int
    step_id: int
    formants: FormantPoint
    wav: str


# The six variants without normalization; CMVN rows derive from these by an
# affine map, so only these need cached per-candidate vectors.
_BASE_VARIANTS = tuple(v for v in enumerate_variants() if not v.cmvn)
_BASE_NAMES = tuple(v.name for v in _BASE_VARIANTS)


@dataclass
class ModelDataset:
    """Retained campaign output with per-candidate static feature vectors."""

    model: Model
    root: Path
    entries: list
    run_ids: tuple
    feature_params: FeatureParams
    reduced: dict            # base variant name -> (n_entries, dims) array
    cmvn: dict               # base variant name -> CmvnStats over pooled frames
    formant_stats: SpeakerFormantStats

    def __post_init__(self):
        index = {}
        for i, e in enumerate(self.entries):
            index.setdefault(e.run_id, []).append(i)
        self._run_index = {run: np.asarray(idx, dtype=np.intp)
                           for run, idx in index.items()}

    @property
    def n_entries(self) -> int:
        return len(self.entries)

    def run_indices(self, run_id: int) -> np.ndarray:
        idx = self._run_index.get(run_id)
        if idx is None or idx.size == 0:
            raise EmptyRun(f"run {run_id} has no retained candidates")
        return idx


def _extract_chunk(root: str, chunk: list, params: FeatureParams):
    """Worker: reduced vectors and frame accumulators for a slice of entries."""
    root_path = Path(root)
    idxs = []
    vectors = {name: [] for name in _BASE_NAMES}
    acc = {name: None for name in _BASE_NAMES}
    for idx, wav_rel in chunk:
        waveform, sr = read_wav(root_path / wav_rel)
        bases = extract_bases(waveform, sr, params)
        idxs.append(idx)
        for name in _BASE_NAMES:
            values = bases[name].values
            vectors[name].append(values.mean(axis=0))
            s = values.sum(axis=0)
            ss = (values ** 2).sum(axis=0)
            if acc[name] is None:
                acc[name] = [s, ss, values.shape[0]]
            else:
                acc[name][0] += s
                acc[name][1] += ss
                acc[name][2] += values.shape[0]
    stacked = {name: np.asarray(v) for name, v in vectors.items()}
    return idxs, stacked, acc


def load_dataset(dataset_dir, params: FeatureParams = DEFAULT_PARAMS,
                 jobs: int = 1) -> ModelDataset:
    """Load a campaign directory and cache static vectors for all base variants.

    CMVN statistics are pooled over every frame of every retained candidate;
    because CMVN is per-dimension affine and the static reduction is a frame
    mean, normalized static vectors follow exactly from the cached base
    vectors, so no feature matrices are kept in memory.
    """
    root = Path(dataset_dir)
    meta = read_json(root / "campaign.json")
    model = Model(meta["model"])
    rows = sorted(iter_jsonl(root / "dataset.jsonl"),
                  key=lambda r: (r["run_id"], r["step_id"]))
    if not rows:
        raise EmptyCorpus(f"no retained candidates in {root}")
    entries = [CandidateEntry(run_id=int(r["run_id"]), step_id=int(r["step_id"]),
                              formants=FormantPoint(f1=float(r["f1_hz"]),
                                                    f2=float(r["f2_hz"])),
                              wav=r["wav"])
               for r in rows]
    work = [(i, e.wav) for i, e in enumerate(entries)]
    if jobs > 1 and len(work) > 1:
        n_chunks = min(jobs * 4, len(work))
        chunks = [work[i::n_chunks] for i in range(n_chunks)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_extract_chunk, [str(root)] * len(chunks), chunks,
                                  [params] * len(chunks)))
    else:
        parts = [_extract_chunk(str(root), work, params)]

    dims = {name: v.dims for name, v in zip(_BASE_NAMES, _BASE_VARIANTS)}
    reduced = {name: np.empty((len(entries), dims[name])) for name in _BASE_NAMES}
    acc = {name: None for name in _BASE_NAMES}
    for idxs, stacked, part_acc in parts:
        for name in _BASE_NAMES:
            reduced[name][idxs] = stacked[name]
            if acc[name] is None:
                acc[name] = part_acc[name]
            else:
                acc[name][0] += part_acc[name][0]
                acc[name][1] += part_acc[name][1]
                acc[name][2] += part_acc[name][2]
    cmvn = {}
    for name in _BASE_NAMES:
        s, ss, n = acc[name]
        mean = s / n
        var = np.maximum(ss / n - mean ** 2, 0.0)
        std = np.maximum(np.sqrt(var), CMVN_STD_FLOOR)
        cmvn[name] = CmvnStats(mean=mean, std=std, corpus_size=len(entries))

    stats = formant_stats([e.formants for e in entries], StatsSource.MODEL_DATASET)
    run_ids = tuple(range(int(meta["runs"])))
    return ModelDataset(model=model, root=root, entries=entries, run_ids=run_ids,
                        feature_params=params, reduced=reduced, cmvn=cmvn,
                        formant_stats=stats)


@dataclass(frozen=True)
class OptimizationResult:
    variant: FeatureVariant
    metric: DistanceMetric
    vowel: str
    run_id: int
    best_candidate: CandidateEntry
    feature_error: float
    formant_error_z: float
    z_cand: tuple
    z_target: tuple
    model: Model


def pair_distances(vectors: np.ndarray, target_vec: np.ndarray,
                   metric: DistanceMetric) -> np.ndarray:
    """Row-wise distances; agrees elementwise with the scalar metric."""
    diff = vectors - target_vec
    if metric is DistanceMetric.MSE:
        return np.mean(diff ** 2, axis=1)
    if metric is DistanceMetric.COSINE:
        tn = np.linalg.norm(target_vec)
        vn = np.linalg.norm(vectors, axis=1)
        if tn == 0.0 or np.any(vn == 0.0):
            raise ZeroVector("cosine distance undefined for zero vectors")
        return 1.0 - (vectors @ target_vec) / (vn * tn)
    if metric is DistanceMetric.MANHATTAN:
        return np.abs(diff).sum(axis=1)
    if metric is DistanceMetric.CHEBYSHEV:
        return np.abs(diff).max(axis=1)
    raise ValueError(f"unknown metric: {metric!r}")


def _target_static_vectors(targets: TargetSet, params: FeatureParams) -> dict:
    """label -> base variant name -> static feature vector."""
    out = {}
    for t in targets.targets:
        bases = extract_bases(t.audio, t.sample_rate_hz, params)
        out[t.label] = {name: reduce_static(bases[name]) for name in _BASE_NAMES}
    return out


def optimize_pair(dataset: ModelDataset, targets: TargetSet,
                  variant: FeatureVariant, metric: DistanceMetric,
                  cmvn_stats: CmvnStats | None = None,
                  *, target_vectors: dict | None = None) -> list:
    """Exhaustive per-(vowel, run) argmin of the feature distance.

    Normalized variants use CMVN statistics from the model's own dataset
    (or the explicit override) on both the candidate and the target side.
    Ties go to the lowest (run_id, step_id). The z-space formant error is
    attached to each winner afterwards and plays no part in the selection.
    """
    base_name = replace(variant, cmvn=False).name
    vectors = dataset.reduced[base_name]
    if target_vectors is None:
        target_vectors = _target_static_vectors(targets, dataset.feature_params)
    if variant.cmvn:
        stats = cmvn_stats if cmvn_stats is not None else dataset.cmvn[base_name]
        vectors = (vectors - stats.mean) / stats.std
    target_stats = formant_stats(targets.rendition_formants,
                                 StatsSource.TARGET_RENDITIONS)
    results = []
    for label in VOWEL_LABELS:
        target = targets.vowel(label)     # raises MissingTarget
        tvec = target_vectors[label][base_name]
        if variant.cmvn:
            tvec = (tvec - stats.mean) / stats.std
        z_target = zscore_formants(target.formants, target_stats)
        for run_id in dataset.run_ids:
            idx = dataset.run_indices(run_id)    # raises EmptyRun
            dist = pair_distances(vectors[idx], tvec, metric)
            j = int(np.argmin(dist))             # first minimum = lowest step_id
            best = dataset.entries[int(idx[j])]
            z_cand = zscore_formants(best.formants, dataset.formant_stats)
            results.append(OptimizationResult(
                variant=variant, metric=metric, vowel=label, run_id=run_id,
                best_candidate=best, feature_error=float(dist[j]),
                formant_error_z=formant_error(z_cand, z_target),
                z_cand=z_cand, z_target=z_target, model=dataset.model))
    return results


def default_pairs() -> list:
    """The full grid: every feature variant crossed with every metric."""
    return [(v, m) for v in enumerate_variants() for m in ALL_METRICS]


def evaluate_grid(dataset: ModelDataset, targets: TargetSet,
                  pairs: list | None = None, jobs: int = 1) -> list:
    """Run optimize_pair over the grid; deterministic result order."""
    if pairs is None:
        pairs = default_pairs()
    target_vectors = _target_static_vectors(targets, dataset.feature_params)
    results = []
    for variant, metric in pairs:
        results.extend(optimize_pair(dataset, targets, variant, metric,
                                     target_vectors=target_vectors))
    return results


def pair_error_samples(dataset: ModelDataset, targets: TargetSet,
                       variant: FeatureVariant, metric: DistanceMetric,
                       vowel: str, cmvn_stats: CmvnStats | None = None) -> np.ndarray:
    """(z1, z2, error) for every retained candidate against one vowel target."""
    base_name = replace(variant, cmvn=False).name
    vectors = dataset.reduced[base_name]
    target = targets.vowel(vowel)
    tvec = _target_static_vectors(targets, dataset.feature_params)[vowel][base_name]
    if variant.cmvn:
        stats = cmvn_stats if cmvn_stats is not None else dataset.cmvn[base_name]
        vectors = (vectors - stats.mean) / stats.std
        tvec = (tvec - stats.mean) / stats.std
    dist = pair_distances(vectors, tvec, metric)
    z = np.asarray([zscore_formants(e.formants, dataset.formant_stats)
                    for e in dataset.entries])
    return np.column_stack([z, dist])


def results_to_rows(results) -> list:
    rows = []
    for r in results:
        if isinstance(r, dict):
            rows.append(r)
            continue
        rows.append({
            "model": r.model.value,
            "variant": r.variant.name,
            "metric": r.metric.value,
            "vowel": r.vowel,
            "run_id": r.run_id,
            "step_id": r.best_candidate.step_id,
            "wav": r.best_candidate.wav,
            "f1_hz": r.best_candidate.formants.f1,
            "f2_hz": r.best_candidate.formants.f2,
            "feature_error": r.feature_error,
            "formant_error_z": r.formant_error_z,
            "z_cand": list(r.z_cand),
            "z_target": list(r.z_target),
        })
    return rows


def write_results(results, path) -> int:
    rows = results_to_rows(results)
    with open(path, "w") as fh:
        for row in rows:
            fh.write(dump_json_line(row) + "\n")
    return len(rows)


def read_results(path) -> list:
    return list(iter_jsonl(path))


@dataclass
class ImpactReport:
    hf_impact: list
    metric_impact: list
    feature_impact: list
    annotations: list
    models: list
    n_results: int

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "models": self.models,
            "n_results": self.n_results,
            "hf_impact": self.hf_impact,
            "metric_impact": self.metric_impact,
            "feature_impact": self.feature_impact,
            "annotations": self.annotations,
        }


def _mean(values) -> float:
    return float(np.mean(values))


def _check_grid(rows) -> None:
    """Every model must carry all 40 pairs over an identical cell set."""
    by_model = {}
    for r in rows:
        by_model.setdefault(r["model"], []).append(r)
    expected_pairs = {(v.name, m.value) for v in enumerate_variants()
                      for m in ALL_METRICS}
    problems = []
    for model, mrows in sorted(by_model.items()):
        cells_by_pair = {}
        for r in mrows:
            cells_by_pair.setdefault((r["variant"], r["metric"]), set()).add(
                (r["vowel"], r["run_id"]))
        missing = sorted(expected_pairs - set(cells_by_pair))
        if missing:
            names = ", ".join(f"{v}+{m}" for v, m in missing)
            problems.append(f"{model}: missing pairs {names}")
        if cells_by_pair:
            all_cells = set().union(*cells_by_pair.values())
            for pair, cells in sorted(cells_by_pair.items()):
                if cells != all_cells:
                    lost = sorted(all_cells - cells)
                    problems.append(
                        f"{model}: pair {pair[0]}+{pair[1]} lacks cells {lost}")
    if problems:
        raise IncompleteGrid(problems)


def aggregate_report(results) -> ImpactReport:
    """Three aggregate tables over the full 40-pair grid, means over all minima."""
    rows = results_to_rows(list(results))
    if not rows:
        raise IncompleteGrid(["no results to aggregate"])
    _check_grid(rows)
    models = sorted({r["model"] for r in rows})
    variants = {v.name: v for v in enumerate_variants()}

    hf_rows = []
    for model in models:
        bases = []
        for v in enumerate_variants():
            if v.base.value not in bases:
                bases.append(v.base.value)
        for base in bases:
            sel = {True: [], False: []}
            for r in rows:
                if r["model"] != model:
                    continue
                v = variants[r["variant"]]
                if v.base.value == base:
                    sel[v.hf_emphasis].append(r["formant_error_z"])
            hf_rows.append({
                "model": model, "base": base,
                "hf_off_mean": _mean(sel[False]), "hf_on_mean": _mean(sel[True]),
                "delta": _mean(sel[True]) - _mean(sel[False]),
                "n_off": len(sel[False]), "n_on": len(sel[True]),
            })

    metric_rows = []
    for model in models:
        for metric in ALL_METRICS:
            errs = [r["formant_error_z"] for r in rows
                    if r["model"] == model and r["metric"] == metric.value
                    and not variants[r["variant"]].hf_emphasis
                    and not variants[r["variant"]].cmvn]
            metric_rows.append({"model": model, "metric": metric.value,
                                "mean_error": _mean(errs), "n": len(errs)})

    feature_rows = []
    for model in models:
        for vowel in VOWEL_LABELS:
            for name in variants:
                errs = [r["formant_error_z"] for r in rows
                        if r["model"] == model and r["vowel"] == vowel
                        and r["variant"] == name]
                if errs:
                    feature_rows.append({"model": model, "vowel": vowel,
                                         "variant": name,
                                         "mean_error": _mean(errs), "n": len(errs)})

    annotations = []
    for model in models:
        on = [r["formant_error_z"] for r in rows
              if r["model"] == model and variants[r["variant"]].hf_emphasis]
        off = [r["formant_error_z"] for r in rows
               if r["model"] == model and not variants[r["variant"]].hf_emphasis]
        direction = "raises" if _mean(on) > _mean(off) else "does not raise"
        annotations.append(
            f"{model}: high-frequency emphasis {direction} the mean formant error "
            f"(on {_mean(on):.4f} vs off {_mean(off):.4f}; expected direction: raises)")
        ranked = sorted((row for row in metric_rows if row["model"] == model),
                        key=lambda row: row["mean_error"])
        best = ranked[0]
        annotations.append(
            f"{model}: lowest mean error over plain features comes from "
            f"{best['metric']} ({best['mean_error']:.4f}; expected: mse)")

    return ImpactReport(hf_impact=hf_rows, metric_impact=metric_rows,
                        feature_impact=feature_rows, annotations=annotations,
                        models=models, n_results=len(rows))


def _write_csv(path, rows, columns) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def write_report(report: ImpactReport, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / REPORT_FILENAME
    write_json(report.to_json_dict(), path)
    _write_csv(out / "hf_impact.csv", report.hf_impact,
               ["model", "base", "hf_off_mean", "hf_on_mean", "delta", "n_off", "n_on"])
    _write_csv(out / "metric_impact.csv", report.metric_impact,
               ["model", "metric", "mean_error", "n"])
    _write_csv(out / "feature_impact.csv", report.feature_impact,
               ["model", "vowel", "variant", "mean_error", "n"])
    return path
