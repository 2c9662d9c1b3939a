"""Error surfaces over the normalized F1-F2 plane.

Per-sample errors are scaled so the largest equals 1, binned on a fixed
30x30 grid spanning [-3, 3] on each z axis, and averaged per bin. Bins are
half-open [lo, hi) except the topmost, which is closed so z = 3.0 lands in
bin 29. Empty bins are filled afterwards: piecewise-cubic scattered-data
interpolation inside the convex hull of occupied bin centers, nearest
occupied bin outside it, everything clamped to [0, 1]. Occupied bins are
never modified by the fill.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.interpolate import griddata
from scipy.spatial import QhullError

from .audio_io import read_json, write_json
from .errors import AllOutsideRange, NoSamples

N_BINS = 30
Z_RANGE = (-3.0, 3.0)
BIN_WIDTH = (Z_RANGE[1] - Z_RANGE[0]) / N_BINS   # 0.2

FILL_CUBIC = "cubic+nearest"
FILL_NEAREST = "nearest"
FILL_NONE = "none"


# Multiplying by the exact reciprocal (5.0) avoids the edge artifacts that
# dividing by the inexact binary 0.2 would introduce, e.g. 3.0 // 0.2 == 14.
_INV_WIDTH = N_BINS / (Z_RANGE[1] - Z_RANGE[0])


def bin_index(z: float) -> int:
    """Index of the bin containing z; requires z in [-3, 3]."""
    if not Z_RANGE[0] <= z <= Z_RANGE[1]:
        raise ValueError(f"z out of range: {z}")
    return min(int(np.floor((z - Z_RANGE[0]) * _INV_WIDTH)), N_BINS - 1)


def bin_centers() -> np.ndarray:
    return Z_RANGE[0] + BIN_WIDTH * (np.arange(N_BINS) + 0.5)


def _descriptor(x) -> str:
    if isinstance(x, Enum):
        return str(x.value)
    v = getattr(x, "name", None)   # FeatureVariant carries its own name
    if isinstance(v, str):
        return v
    return str(x)


@dataclass(frozen=True)
class ErrorSurfaceGrid:
    bins: np.ndarray          # 30x30 means in [0, 1] once filled
    counts: np.ndarray        # 30x30 sample counts
    second_moment: np.ndarray  # 30x30 mean of squared scaled errors (0 where empty)
    variant: str
    metric: str
    vowel: str
    model: str
    minimum_marker: tuple     # (z1, z2) of the unbinned minimum-error sample
    target_marker: tuple
    n_dropped: int            # samples outside the z-range
    fill_method: str

    def __post_init__(self):
        for name in ("bins", "counts", "second_moment"):
            arr = np.asarray(getattr(self, name))
            if arr.shape != (N_BINS, N_BINS):
                raise ValueError(f"{name} must be {N_BINS}x{N_BINS}")
        if np.any(self.counts < 0):
            raise ValueError("counts must be >= 0")
        if self.fill_method != FILL_NONE or not np.any(self.counts == 0):
            if not np.all(np.isfinite(self.bins)):
                raise ValueError("filled surface must be finite everywhere")
            if self.bins.min() < 0.0 or self.bins.max() > 1.0:
                raise ValueError("filled surface must lie in [0, 1]")


def fill_empty_bins(bins: np.ndarray, counts: np.ndarray) -> tuple:
    """Fill count-0 cells; returns (filled bins, fill method string).

    Needs at least 4 occupied, non-collinear bin centers for the cubic pass;
    otherwise the whole fill falls back to nearest-occupied-bin, and the
    method string records that.
    """
    bins = np.asarray(bins, dtype=np.float64).copy()
    counts = np.asarray(counts)
    occupied = counts > 0
    if not np.any(occupied):
        raise NoSamples("cannot fill a surface with no occupied bins")
    if np.all(occupied):
        return bins, FILL_NONE
    centers = bin_centers()
    g1, g2 = np.meshgrid(centers, centers, indexing="ij")
    pts = np.column_stack([g1[occupied], g2[occupied]])
    vals = bins[occupied]
    empty = ~occupied
    query = np.column_stack([g1[empty], g2[empty]])
    method = FILL_CUBIC
    filled_vals = None
    if pts.shape[0] < 4:
        method = FILL_NEAREST
    else:
        try:
            filled_vals = griddata(pts, vals, query, method="cubic")
        except QhullError:
            method = FILL_NEAREST
    nearest_vals = griddata(pts, vals, query, method="nearest")
    if filled_vals is None:
        filled_vals = nearest_vals
    else:
        hole = ~np.isfinite(filled_vals)   # outside the convex hull
        filled_vals[hole] = nearest_vals[hole]
    bins[empty] = np.clip(filled_vals, 0.0, 1.0)
    return bins, method


def build_surface(errors, vowel, variant, metric, model,
                  target_marker, fill: bool = True) -> ErrorSurfaceGrid:
    """Bin (z1, z2, error) samples into an averaged, max-scaled surface.

    Samples outside the z-range are dropped and counted. Errors must be
    finite and >= 0 with at least one strictly positive value.
    """
    arr = np.asarray(list(errors), dtype=np.float64)
    if arr.size == 0:
        raise NoSamples("no error samples")
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError("errors must be (z1, z2, error) triples")
    if not np.all(np.isfinite(arr)):
        raise ValueError("samples must be finite")
    if np.any(arr[:, 2] < 0.0):
        raise ValueError("errors must be >= 0")
    in_range = ((arr[:, 0] >= Z_RANGE[0]) & (arr[:, 0] <= Z_RANGE[1])
                & (arr[:, 1] >= Z_RANGE[0]) & (arr[:, 1] <= Z_RANGE[1]))
    kept = arr[in_range]
    n_dropped = int(arr.shape[0] - kept.shape[0])
    if kept.shape[0] == 0:
        raise AllOutsideRange(f"all {arr.shape[0]} samples outside the z-range")
    max_err = float(kept[:, 2].max())
    if max_err <= 0.0:
        raise ValueError("max error must be > 0 to scale the surface")
    scaled = kept[:, 2] / max_err

    i1 = np.minimum(np.floor((kept[:, 0] - Z_RANGE[0]) * _INV_WIDTH).astype(np.intp),
                    N_BINS - 1)
    i2 = np.minimum(np.floor((kept[:, 1] - Z_RANGE[0]) * _INV_WIDTH).astype(np.intp),
                    N_BINS - 1)
    sums = np.zeros((N_BINS, N_BINS))
    sumsq = np.zeros((N_BINS, N_BINS))
    counts = np.zeros((N_BINS, N_BINS), dtype=np.int64)
    np.add.at(sums, (i1, i2), scaled)
    np.add.at(sumsq, (i1, i2), scaled ** 2)
    np.add.at(counts, (i1, i2), 1)
    occupied = counts > 0
    bins = np.full((N_BINS, N_BINS), np.nan)
    bins[occupied] = sums[occupied] / counts[occupied]
    m2 = np.zeros((N_BINS, N_BINS))
    m2[occupied] = sumsq[occupied] / counts[occupied]

    j = int(np.argmin(kept[:, 2]))
    minimum_marker = (float(kept[j, 0]), float(kept[j, 1]))

    fill_method = FILL_NONE
    if fill:
        bins, fill_method = fill_empty_bins(bins, counts)
    return ErrorSurfaceGrid(
        bins=bins, counts=counts, second_moment=m2,
        variant=_descriptor(variant), metric=_descriptor(metric),
        vowel=str(vowel), model=_descriptor(model),
        minimum_marker=minimum_marker,
        target_marker=(float(target_marker[0]), float(target_marker[1])),
        n_dropped=n_dropped, fill_method=fill_method)


_CSV_HEADER = (
    "# error surface: rows are z1 bins, columns are z2 bins\n"
    "# bin i covers [{lo}+{w}*i, {lo}+{w}*(i+1)) on each axis; the last bin "
    "is closed; z1 increases down the rows, z2 across the columns\n"
).format(lo=Z_RANGE[0], w=BIN_WIDTH)


def export_surface(grid: ErrorSurfaceGrid, csv_path) -> Path:
    """Write the 30x30 bin means as CSV plus a JSON sidecar; byte-stable."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    lines = [_CSV_HEADER.rstrip("\n"),
             f"# variant={grid.variant} metric={grid.metric} "
             f"vowel={grid.vowel} model={grid.model}"]
    for row in grid.bins:
        lines.append(",".join(repr(float(v)) for v in row))
    csv_path.write_text("\n".join(lines) + "\n")
    sidecar = {
        "schema": 1,
        "variant": grid.variant,
        "metric": grid.metric,
        "vowel": grid.vowel,
        "model": grid.model,
        "minimum_marker": list(grid.minimum_marker),
        "target_marker": list(grid.target_marker),
        "n_dropped": grid.n_dropped,
        "fill_method": grid.fill_method,
        "counts": grid.counts.tolist(),
        "second_moment": grid.second_moment.tolist(),
    }
    write_json(sidecar, csv_path.with_suffix(".json"))
    return csv_path


def load_surface(csv_path) -> ErrorSurfaceGrid:
    """Parse an exported surface back into a grid (round-trip fidelity)."""
    csv_path = Path(csv_path)
    rows = []
    for line in csv_path.read_text().splitlines():
        if line.startswith("#") or not line.strip():
            continue
        rows.append([float(tok) for tok in line.split(",")])
    bins = np.asarray(rows)
    side = read_json(csv_path.with_suffix(".json"))
    return ErrorSurfaceGrid(
        bins=bins,
        counts=np.asarray(side["counts"], dtype=np.int64),
        second_moment=np.asarray(side["second_moment"]),
        variant=side["variant"], metric=side["metric"],
        vowel=side["vowel"], model=side["model"],
        minimum_marker=tuple(side["minimum_marker"]),
        target_marker=tuple(side["target_marker"]),
        n_dropped=int(side["n_dropped"]),
        fill_method=side["fill_method"])
