"""Error bars, autocorrelation diagnostics and comparison tables."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .exact import RESTRICTION_EXPONENT
from .observables import EmpiricalCdf


class QualityWarning(UserWarning):
    pass


def batch_stderr(cdf: EmpiricalCdf, n_batches: int) -> np.ndarray:
    """Batch-means standard error of the ECDF at each grid point.

    The sample stream is cut into ``n_batches`` contiguous batches of near
    equal size; undefined samples stay in their batch's denominator.
    """
    if n_batches < 2:
        raise ValueError("need at least two batches")
    samples = cdf.sample_array()
    if len(samples) != cdf.n_samples:
        raise ValueError("batch errors need the full sample stream")
    if cdf.n_samples < 2 * n_batches:
        raise ValueError(f"{cdf.n_samples} samples is too few for {n_batches} batches")
    means = np.empty((n_batches, len(cdf.t_grid)))
    for b, chunk in enumerate(np.array_split(samples, n_batches)):
        defined = np.sort(chunk[~np.isnan(chunk)])
        means[b] = np.searchsorted(defined, cdf.t_grid, side="right") / len(chunk)
    return means.std(axis=0, ddof=1) / np.sqrt(n_batches)


def _autocorrelation(x: np.ndarray) -> np.ndarray:
    n = len(x)
    y = x - x.mean()
    size = 1 << int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(y, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n] / n
    return acov / acov[0]


def integrated_autocorrelation(series, window_factor: float = 6.0) -> float:
    """Integrated autocorrelation time with a self-consistent window.

    ``tau = 1/2 + sum_{k=1}^{M} rho(k)`` with ``M`` the first lag satisfying
    ``M >= window_factor * tau(M)``. Estimates below 1/2 (anticorrelated
    series) raise a :class:`QualityWarning` and are clipped to 1/2.
    """
    x = np.asarray(series, dtype=np.float64)
    if len(x) < 1000:
        raise ValueError("need at least 1000 points")
    if np.all(x == x[0]):
        raise ValueError("autocorrelation of a constant series is undefined")
    rho = _autocorrelation(x)
    taus = 0.5 + np.cumsum(rho[1:])
    lags = np.arange(1, len(rho))
    ok = lags >= window_factor * taus
    m = int(np.argmax(ok)) if ok.any() else len(taus) - 1
    tau = float(taus[m])
    if tau < 0.5:
        warnings.warn(f"integrated autocorrelation {tau:.3g} < 1/2: anticorrelated series", QualityWarning)
        return 0.5
    return tau


def ks_distance(cdf: EmpiricalCdf, exact: Callable) -> float:
    """Largest gap between ECDF and ``exact`` over the grid points."""
    return float(np.max(np.abs(cdf.ecdf - exact(cdf.t_grid))))


def inverse_transform_sample(u, which: str):
    """Inverse of the exact CDF of X (``which='x'``) or Y (``which='y'``)."""
    arr = np.asarray(u, dtype=np.float64)
    if np.any((arr <= 0) | (arr >= 1)) or np.any(np.isnan(arr)):
        raise ValueError("u must lie in (0, 1)")
    q = 1.0 - arr
    if which == "x":
        out = np.sqrt(1.0 - q ** (1.0 / RESTRICTION_EXPONENT))
    elif which == "y":
        out = np.sqrt(q ** (-2.0 / RESTRICTION_EXPONENT) - 1.0)
    else:
        raise ValueError(f"which must be 'x' or 'y', got {which!r}")
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ComparisonRow:
    t: float
    ecdf: float
    exact: float
    diff: float
    stderr: float

    @property
    def stderr2(self) -> float:
        return 2.0 * self.stderr


COMPARISON_HEADER = ["t", "ecdf", "exact", "diff", "stderr2"]


def emit_comparison(cdf: EmpiricalCdf, exact: Callable, stderr) -> list[ComparisonRow]:
    """One row per grid point, ordered by ``t``."""
    if cdf.n_samples == 0:
        raise ValueError("no samples to compare")
    stderr = np.asarray(stderr, dtype=np.float64)
    if stderr.shape != cdf.t_grid.shape:
        raise ValueError("stderr does not match the CDF grid")
    ecdf = cdf.ecdf
    ex = np.asarray(exact(cdf.t_grid), dtype=np.float64)
    return [
        ComparisonRow(t, e, x, e - x, s)
        for t, e, x, s in zip(cdf.t_grid.tolist(), ecdf.tolist(), ex.tolist(), stderr.tolist())
    ]


def write_comparison_csv(rows: Iterable[ComparisonRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COMPARISON_HEADER)
        for r in rows:
            w.writerow([repr(r.t), repr(r.ecdf), repr(r.exact), repr(r.diff), repr(r.stderr2)])


def read_comparison_csv(path) -> list[ComparisonRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != COMPARISON_HEADER:
            raise ValueError(f"{path}: expected header {','.join(COMPARISON_HEADER)}")
        return [
            ComparisonRow(
                float(r["t"]), float(r["ecdf"]), float(r["exact"]), float(r["diff"]), float(r["stderr2"]) / 2.0
            )
            for r in reader
        ]
