"""The scale-invariant observables X and Y, and their empirical CDFs.

For a walk and a scale ``c``:

* ``X`` is the distance from the walk's vertices to ``(c, 0)``, over ``c``;
* ``Y`` is the height of the lowest point where the walk meets the vertical
  line ``x = c``, over ``c``; undefined when the walk never reaches the line.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .walk import LatticeWalk

X_FLOOR = 1e-12
GRID_POINTS = 1000
T_MAX_X = 1.0
T_MAX_Y = 20.0
NU = 0.75


@dataclass(frozen=True)
class ScaleSpec:
    n_steps: int
    s: float

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if not self.s > 0:
            raise ValueError("s must be positive")

    @property
    def c(self) -> float:
        return self.s * self.n_steps**NU


def _as_walk_arrays(w):
    if isinstance(w, LatticeWalk):
        return w.xs, w.ys
    arr = np.asarray(w)
    return arr[:, 0], arr[:, 1]


def _scale(scale) -> float:
    c = scale.c if isinstance(scale, ScaleSpec) else float(scale)
    if not c > 0:
        raise ValueError("scale c must be positive")
    return c


def observe_x(w, scale) -> float:
    """Vertex distance to ``(c, 0)`` divided by ``c``, floored at 1e-12."""
    c = _scale(scale)
    xs, ys = _as_walk_arrays(w)
    d2 = np.min((xs - c) ** 2 + ys.astype(np.float64) ** 2)
    return max(math.sqrt(d2) / c, X_FLOOR)


def observe_y(w, scale) -> float | None:
    """Lowest crossing height of the line ``x = c`` divided by ``c``.

    Horizontal edges straddling the line cross at their own height; vertices
    lying exactly on the line count with their own height. Returns ``None``
    if there is no crossing.
    """
    c = _scale(scale)
    xs, ys = _as_walk_arrays(w)
    rel = xs - c
    straddle = rel[:-1] * rel[1:] < 0
    on_line = rel == 0
    heights = []
    if straddle.any():
        heights.append(ys[:-1][straddle].min())
    if on_line.any():
        heights.append(ys[on_line].min())
    if not heights:
        return None
    return float(min(heights)) / c


def uniform_grid(t_max: float, points: int = GRID_POINTS) -> np.ndarray:
    """``points`` equally spaced values ``t_k = (k + 1) t_max / points``."""
    return (np.arange(points) + 1) * (t_max / points)


@dataclass
class EmpiricalCdf:
    """Counts of samples ``<= t`` on a fixed grid.

    The raw sample stream (``nan`` for undefined samples) is kept alongside
    the counts; batch-means error bars are computed from it.
    """

    t_grid: np.ndarray
    hit_counts: np.ndarray = None
    n_samples: int = 0
    n_undefined: int = 0
    samples: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.t_grid = np.asarray(self.t_grid, dtype=np.float64)
        if self.t_grid.ndim != 1 or len(self.t_grid) == 0:
            raise ValueError("t_grid must be a non-empty 1-d array")
        if np.any(np.diff(self.t_grid) <= 0):
            raise ValueError("t_grid must be strictly increasing")
        if self.hit_counts is None:
            self.hit_counts = np.zeros(len(self.t_grid), dtype=np.int64)

    @classmethod
    def for_x(cls) -> EmpiricalCdf:
        return cls(uniform_grid(T_MAX_X))

    @classmethod
    def for_y(cls) -> EmpiricalCdf:
        return cls(uniform_grid(T_MAX_Y))

    @property
    def ecdf(self) -> np.ndarray:
        if self.n_samples == 0:
            raise ValueError("empirical CDF has no samples")
        return self.hit_counts / self.n_samples

    @property
    def undefined_fraction(self) -> float:
        return self.n_undefined / self.n_samples if self.n_samples else float("nan")

    def sample_array(self) -> np.ndarray:
        return np.asarray(self.samples, dtype=np.float64)

    def same_grid(self, other: EmpiricalCdf) -> bool:
        return np.array_equal(self.t_grid, other.t_grid)


def accumulate(cdf: EmpiricalCdf, sample: float | None) -> EmpiricalCdf:
    """Add one sample (``None`` or ``nan`` = undefined) in place."""
    cdf.n_samples += 1
    if sample is None or math.isnan(sample):
        cdf.n_undefined += 1
        cdf.samples.append(math.nan)
        return cdf
    k = int(np.searchsorted(cdf.t_grid, sample, side="left"))
    if k < len(cdf.t_grid):
        cdf.hit_counts[k:] += 1
    cdf.samples.append(float(sample))
    return cdf


def accumulate_many(cdf: EmpiricalCdf, samples) -> EmpiricalCdf:
    """Vectorized :func:`accumulate` for an array of samples (nan = undefined)."""
    arr = np.asarray(samples, dtype=np.float64)
    undefined = np.isnan(arr)
    k = np.searchsorted(cdf.t_grid, arr[~undefined], side="left")
    cdf.hit_counts += np.cumsum(np.bincount(k, minlength=len(cdf.t_grid) + 1)[:-1])
    cdf.n_samples += len(arr)
    cdf.n_undefined += int(undefined.sum())
    cdf.samples.extend(arr.tolist())
    return cdf


def merge(*cdfs: EmpiricalCdf) -> EmpiricalCdf:
    """Combine accumulators on one grid; sample streams concatenate in order."""
    if not cdfs:
        raise ValueError("nothing to merge")
    first = cdfs[0]
    out = EmpiricalCdf(first.t_grid.copy())
    for cdf in cdfs:
        if not first.same_grid(cdf):
            raise ValueError("cannot merge CDFs on different grids")
        out.hit_counts += cdf.hit_counts
        out.n_samples += cdf.n_samples
        out.n_undefined += cdf.n_undefined
        out.samples.extend(cdf.samples)
    return out


# --- CSV ------------------------------------------------------------------------

CDF_HEADER = ["t", "count", "n_samples", "n_undefined"]


def write_cdf_csv(cdf: EmpiricalCdf, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CDF_HEADER)
        for t, count in zip(cdf.t_grid.tolist(), cdf.hit_counts.tolist()):
            w.writerow([repr(t), count, cdf.n_samples, cdf.n_undefined])


def read_cdf_csv(path) -> EmpiricalCdf:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or list(rows[0]) != CDF_HEADER:
        raise ValueError(f"{path}: expected header {','.join(CDF_HEADER)}")
    return EmpiricalCdf(
        t_grid=np.array([float(r["t"]) for r in rows]),
        hit_counts=np.array([int(r["count"]) for r in rows], dtype=np.int64),
        n_samples=int(rows[0]["n_samples"]),
        n_undefined=int(rows[0]["n_undefined"]),
    )


def write_samples_csv(cdf: EmpiricalCdf, path) -> None:
    """Sample stream in measurement order; ``nan`` marks undefined samples."""
    with open(path, "w", newline="") as fh:
        fh.write("index,value\n")
        for k, v in enumerate(cdf.samples):
            fh.write(f"{k},{v!r}\n")


def read_samples_csv(path) -> list[float]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [float(r["value"]) for r in rows]


def attach_samples(cdf: EmpiricalCdf, samples) -> EmpiricalCdf:
    """Rebuild a CDF from a sample stream and check it against ``cdf``."""
    rebuilt = accumulate_many(EmpiricalCdf(cdf.t_grid.copy()), samples)
    if rebuilt.n_samples != cdf.n_samples or not np.array_equal(rebuilt.hit_counts, cdf.hit_counts):
        raise ValueError("sample stream does not reproduce the stored counts")
    return rebuilt
