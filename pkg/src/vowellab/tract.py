"""Articulatory parameter space, tube geometry, and random-walk sampling.

The vocal tract is a cascade of 40 cylindrical sections from glottis to
lips. Eight articulatory parameters shape the area profile; a neutral
(mid-range) setting gives a near-uniform schwa tube. The child model is
the adult geometry with all section lengths and areas scaled down.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

N_SECTIONS = 40

# (low, high) per articulatory parameter, in declaration order
PARAM_RANGES = np.array([
    (0.0, 1.0),     # jaw opening
    (0.15, 0.9),    # tongue constriction position, fraction of tract length
    (0.0, 1.0),     # tongue constriction degree
    (0.0, 1.0),     # tongue body height
    (0.05, 4.0),    # lip opening area, cm^2
    (0.0, 2.0),     # lip protrusion length, cm
    (0.5, 1.5),     # larynx/pharynx width factor
    (0.0, 1.0),     # velum factor (acoustically inert, vowel-only model)
])
PARAM_NAMES = (
    "jaw", "constriction_pos", "constriction_degree", "body_height",
    "lip_area", "lip_protrusion", "pharynx_width", "velum",
)
N_PARAMS = len(PARAM_NAMES)

ADULT_BASE_LENGTH_CM = 16.5     # tract length before lip protrusion is added
BASE_AREA_CM2 = 2.5             # neutral tube cross-section
CLOSURE_FLOOR_CM2 = 0.01        # hard floor reached under full constriction
CHILD_LENGTH_SCALE = 0.7
CHILD_AREA_SCALE = 0.75

# Constriction depth ramps from 0 to full closure over this degree interval;
# below the onset the notch is shallow so mid-range degrees stay schwa-like.
CONSTRICTION_ONSET = 0.4
CONSTRICTION_SPAN = 0.5
CONSTRICTION_WIDTH = 0.07       # Gaussian notch width, fraction of tract length
BODY_CONSTRICTION_GAIN = 1.3    # raised tongue body deepens the constriction
PHARYNX_CONSTRICTION_GAIN = 2.0  # retracted tongue root does too
CONSTRICTION_OVERDRIVE = 1.7    # lets moderate degrees already reach full closure
PHARYNX_EXPONENT = 2.5          # pharynx width factor strength in the back cavity
BODY_EXPONENT = 2.2             # body height factor strength at the palate
LIP_JAW_FLOOR = 0.1             # lip area multiplier at a fully lowered jaw
LIP_JAW_GAIN = 1.8

WALK_SIGMA = 0.1                # step std as a fraction of each parameter range


class Model(str, Enum):
    ADULT = "adult"
    CHILD = "child"


@dataclass(frozen=True)
class VocalTractShape:
    """A point in the articulatory parameter space."""

    params: np.ndarray
    model: Model
    run_id: int = 0
    step_id: int = 0

    def __post_init__(self):
        p = np.asarray(self.params, dtype=np.float64)
        if p.shape != (N_PARAMS,):
            raise ValueError(f"expected {N_PARAMS} parameters, got shape {p.shape}")
        lo, hi = PARAM_RANGES[:, 0], PARAM_RANGES[:, 1]
        if np.any(p < lo) or np.any(p > hi):
            bad = [PARAM_NAMES[i] for i in range(N_PARAMS) if not lo[i] <= p[i] <= hi[i]]
            raise ValueError(f"parameters out of range: {bad}")
        if self.run_id < 0 or self.step_id < 0:
            raise ValueError("run_id and step_id must be >= 0")
        object.__setattr__(self, "params", p)

    def to_row(self) -> dict:
        return {
            "model": self.model.value,
            "run_id": self.run_id,
            "step_id": self.step_id,
            "params": [float(v) for v in self.params],
        }

    @classmethod
    def from_row(cls, row: dict) -> "VocalTractShape":
        return cls(
            params=np.asarray(row["params"], dtype=np.float64),
            model=Model(row["model"]),
            run_id=int(row["run_id"]),
            step_id=int(row["step_id"]),
        )


@dataclass(frozen=True)
class AreaFunction:
    """Tube sections from glottis to lips: per-section area (cm^2) and length (cm)."""

    areas: np.ndarray
    lengths: np.ndarray
    total_length: float

    def __post_init__(self):
        a = np.asarray(self.areas, dtype=np.float64)
        l = np.asarray(self.lengths, dtype=np.float64)
        if a.shape != l.shape or a.ndim != 1:
            raise ValueError("areas and lengths must be 1-d arrays of equal size")
        if np.any(a < 0.0):
            raise ValueError("section areas must be >= 0")
        if np.any(l <= 0.0):
            raise ValueError("section lengths must be > 0")
        if abs(float(l.sum()) - self.total_length) > 1e-9:
            raise ValueError("total_length does not match the sum of section lengths")
        object.__setattr__(self, "areas", a)
        object.__setattr__(self, "lengths", l)

    @property
    def sections(self):
        return list(zip(self.areas.tolist(), self.lengths.tolist()))

    @classmethod
    def uniform(cls, length_cm: float, area_cm2: float, n: int = N_SECTIONS) -> "AreaFunction":
        lengths = np.full(n, length_cm / n)
        return cls(areas=np.full(n, area_cm2), lengths=lengths, total_length=float(length_cm))


def neutral_params() -> np.ndarray:
    """Mid-range value of every parameter (the schwa configuration)."""
    return PARAM_RANGES.mean(axis=1)


def neutral_shape(model: Model = Model.ADULT) -> VocalTractShape:
    return VocalTractShape(params=neutral_params(), model=model)


def _smoothstep(t: np.ndarray | float):
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def _raised_cosine_fade(x: np.ndarray, start: float, stop: float) -> np.ndarray:
    """1 before start, 0 after stop, half-cosine in between."""
    t = np.clip((x - start) / (stop - start), 0.0, 1.0)
    return 0.5 * (1.0 + np.cos(np.pi * t))


def shape_to_area(
    shape: VocalTractShape,
    child_length_scale: float = CHILD_LENGTH_SCALE,
    child_area_scale: float = CHILD_AREA_SCALE,
) -> AreaFunction:
    """Map articulatory parameters to a 40-section tube area function.

    The adult profile starts from a uniform 2.5 cm^2 tube and is reshaped by
    the pharynx width factor (glottal half), jaw opening and tongue body
    height (oral half), a Gaussian constriction notch whose depth saturates
    to full closure for high constriction degrees, and a lip section blended
    toward the lip opening area. Child output is the adult profile with all
    lengths and areas scaled.
    """
    jaw, cpos, cdeg, body, lip_area, protrusion, pharynx, _velum = shape.params

    total = ADULT_BASE_LENGTH_CM + protrusion
    x = (np.arange(N_SECTIONS) + 0.5) / N_SECTIONS  # section centers, 0=glottis, 1=lips

    a = np.full(N_SECTIONS, BASE_AREA_CM2)
    # pharynx region: width factor active below mid-tract, fading out by x=0.5
    a *= pharynx ** (PHARYNX_EXPONENT * _raised_cosine_fade(x, 0.15, 0.5))
    # oral region: jaw opening scales the front cavity
    a *= (0.5 + jaw) ** _smoothstep((x - 0.5) / 0.35)
    # tongue body height narrows the palatal region
    a *= (1.5 - body) ** (BODY_EXPONENT * np.exp(-0.5 * ((x - 0.65) / 0.12) ** 2))
    # tongue constriction notch. Raised body and retracted root deepen it
    # (coupled articulators) and the overdrive saturates moderate degrees to
    # a full seal, so a large share of random articulations occludes -- the
    # sampling campaign is supposed to discard most of what it draws.
    cdeg_eff = (cdeg + BODY_CONSTRICTION_GAIN * max(0.0, body - 0.5)
                + PHARYNX_CONSTRICTION_GAIN * max(0.0, 0.75 - pharynx))
    depth = min(1.0, CONSTRICTION_OVERDRIVE
                * _smoothstep((cdeg_eff - CONSTRICTION_ONSET) / CONSTRICTION_SPAN))
    a *= 1.0 - depth * np.exp(-0.5 * ((x - cpos) / CONSTRICTION_WIDTH) ** 2)
    # lip section blends toward the lip opening area; a lowered jaw narrows it
    lip_eff = lip_area * (LIP_JAW_FLOOR + LIP_JAW_GAIN * jaw)
    w_lip = _smoothstep((x - 0.86) / 0.14)
    a = a * (1.0 - w_lip) + lip_eff * w_lip

    a = np.maximum(a, CLOSURE_FLOOR_CM2)
    lengths = np.full(N_SECTIONS, total / N_SECTIONS)

    if shape.model is Model.CHILD:
        a = a * child_area_scale
        lengths = lengths * child_length_scale
        total = total * child_length_scale

    return AreaFunction(areas=a, lengths=lengths, total_length=float(total))


def sample_walk(
    model: Model,
    n_runs: int,
    steps_per_run: int,
    seed: int,
    sigma: float = WALK_SIGMA,
    mode: str = "walk",
):
    """Generate sampling runs of vocal tract shapes.

    Every run starts at the neutral shape. In "walk" mode each step adds
    clipped Gaussian noise with std sigma*range per parameter; in "iid" mode
    the remaining steps are independent uniform draws over the box. Runs use
    independent substreams derived from (seed, run_id), so any run can be
    regenerated in isolation and the full sequence is reproducible.

    Yields shapes in (run_id, step_id) order, n_runs*steps_per_run in total.
    """
    if n_runs < 1 or steps_per_run < 1:
        raise ValueError("n_runs and steps_per_run must be >= 1")
    for run_id in range(n_runs):
        yield from sample_run(model, run_id, steps_per_run, seed, sigma, mode)


def sample_run(
    model: Model,
    run_id: int,
    steps_per_run: int,
    seed: int,
    sigma: float = WALK_SIGMA,
    mode: str = "walk",
):
    """One run's shapes; substream (seed, run_id) makes runs independent."""
    if mode not in ("walk", "iid"):
        raise ValueError(f"unknown sampling mode: {mode!r}")
    lo, hi = PARAM_RANGES[:, 0], PARAM_RANGES[:, 1]
    step_std = sigma * (hi - lo)
    rng = np.random.default_rng([seed, run_id])
    params = neutral_params()
    yield VocalTractShape(params=params, model=model, run_id=run_id, step_id=0)
    for step_id in range(1, steps_per_run):
        if mode == "walk":
            params = np.clip(params + rng.normal(0.0, step_std), lo, hi)
        else:
            params = rng.uniform(lo, hi)
        yield VocalTractShape(params=params, model=model, run_id=run_id, step_id=step_id)


def prefilter_shape(area: AreaFunction, closure_threshold: float = 0.1) -> bool:
    """True iff the tract stays open: no section area below the closure threshold.

    The threshold is inclusive (a section exactly at it passes). Full seals
    from the constriction notch or the lip opening both surface as sections
    below the threshold, so a single min-area test covers them.
    """
    return bool(np.min(area.areas) >= closure_threshold)


def write_shapes_jsonl(shapes, path) -> int:
    n = 0
    with open(path, "w") as fh:
        for shape in shapes:
            fh.write(json.dumps(shape.to_row()) + "\n")
            n += 1
    return n


def iter_shapes_jsonl(path):
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield VocalTractShape.from_row(json.loads(line))
