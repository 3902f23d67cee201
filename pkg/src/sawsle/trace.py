"""Discretized chordal Loewner evolution.

The driving function is piecewise constant on a time grid
``0 = t_0 < t_1 < ... < t_n = T``. Over one interval the Loewner flow with
constant driving is a vertical slit map, so the trace point at ``t_k`` is

    gamma(t_k) = f_1(f_2(... f_k(0) ...)),   f_m(z) = sqrt(z^2 - 4 dt_m) + dw_m

where ``dw_m`` is the driving increment over interval ``m`` and the square
root is the branch mapping the upper half plane into itself.

The grid is ``t_k = T (k / n)^p``. ``p = 1`` is the uniform grid; larger
``p`` crowds increments near ``t = 0``, where the trace sets the small-scale
geometry around its starting point. The exact law of X has infinite slope at
``X = 1`` (trace stays close to the origin), so that region needs resolution
far below what a uniform grid of a few thousand steps provides.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from .observables import X_FLOOR

DEFAULT_GRID_EXPONENT = 3.0
# horizon in units of c^2 for the X/Y estimators
DEFAULT_HORIZON = 25.0


@dataclass(frozen=True)
class TraceConfig:
    kappa: float
    n_increments: int
    dt: float
    seed: int = 0
    grid_exponent: float = DEFAULT_GRID_EXPONENT

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("kappa must be non-negative")
        if self.n_increments < 1:
            raise ValueError("n_increments must be >= 1")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.grid_exponent >= 1:
            raise ValueError("grid_exponent must be >= 1")

    @property
    def total_time(self) -> float:
        return self.n_increments * self.dt

    @classmethod
    def for_horizon(cls, kappa, n_increments, horizon=DEFAULT_HORIZON, **kw) -> TraceConfig:
        return cls(kappa, n_increments, horizon / n_increments, **kw)

    def times(self) -> np.ndarray:
        n = self.n_increments
        return self.total_time * (np.arange(n + 1) / n) ** self.grid_exponent


@dataclass(frozen=True)
class DrivingPath:
    """Driving increments ``sqrt(kappa) (B(t_k) - B(t_{k-1}))`` on ``times``."""

    times: np.ndarray
    increments: np.ndarray
    kappa: float

    def __post_init__(self):
        if len(self.increments) != len(self.times) - 1:
            raise ValueError("need one increment per time interval")

    @property
    def dts(self) -> np.ndarray:
        return np.diff(self.times)

    @classmethod
    def sample(cls, cfg: TraceConfig, rng: np.random.Generator) -> DrivingPath:
        times = cfg.times()
        normals = rng.standard_normal(cfg.n_increments)
        return cls(times, np.sqrt(cfg.kappa * np.diff(times)) * normals, cfg.kappa)

    def coarsen(self) -> DrivingPath:
        """Same Brownian path on every other grid time."""
        if len(self.increments) % 2:
            raise ValueError("coarsening needs an even number of increments")
        inc = self.increments.reshape(-1, 2).sum(axis=1)
        return DrivingPath(self.times[::2].copy(), inc, self.kappa)


@dataclass(frozen=True)
class TraceSample:
    times: np.ndarray
    points: np.ndarray  # complex128, points[k] ~ gamma(times[k])
    kappa: float


def elementary_inverse_map(delta_w: float, dt: float, z: complex) -> complex:
    """Inverse slit map ``sqrt(z^2 - 4 dt) + delta_w`` with image in the closed
    upper half plane (the branch that behaves like ``z`` at infinity)."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    z = complex(z)
    if z.imag == 0:
        z = complex(z.real, 0.0)  # approach the real axis from above
    h = 2.0 * math.sqrt(dt)
    return cmath.sqrt(z - h) * cmath.sqrt(z + h) + delta_w


def forward_slit_map(dt: float, z: complex) -> complex:
    """Zero-driving Loewner solution ``sqrt(z^2 + 4 dt)`` over one step."""
    z = complex(z)
    s = cmath.sqrt(z * z + 4.0 * dt)
    if s.imag < 0 or (s.imag == 0 and s.real * z.real < 0):
        s = -s
    return s


@nb.njit(cache=True)
def _compose(increments, dts):
    # points are advanced jointly: at stage m every point k >= m gets f_m
    n = increments.shape[0]
    z = np.zeros(n + 1, dtype=np.complex128)
    for m in range(n, 0, -1):
        dw = increments[m - 1]
        a2 = 4.0 * dts[m - 1]
        for k in range(m, n + 1):
            w = z[k]
            s = np.sqrt(w * w - a2)
            if s.imag < 0.0 or (s.imag == 0.0 and s.real * w.real < 0.0):
                s = -s
            z[k] = s + dw
    return z


def trace_from_path(path: DrivingPath) -> TraceSample:
    """Trace points for a given driving path; O(n^2) map evaluations."""
    points = _compose(np.ascontiguousarray(path.increments), np.ascontiguousarray(path.dts))
    return TraceSample(path.times, points, path.kappa)


def trace_rng(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def sample_trace(cfg: TraceConfig, stream: int = 0) -> TraceSample:
    """Trace for substream ``stream`` of ``cfg.seed``; deterministic."""
    return trace_from_path(DrivingPath.sample(cfg, trace_rng(cfg.seed, stream)))


def trace_observe_x(tr: TraceSample, c: float) -> float:
    """Distance from the sampled trace points to ``(c, 0)``, over ``c``."""
    if not c > 0:
        raise ValueError("c must be positive")
    return max(float(np.min(np.abs(tr.points - c))) / c, X_FLOOR)


def trace_observe_y(tr: TraceSample, c: float) -> float | None:
    """Lowest crossing of ``Re z = c`` by the polygon through the trace points,
    over ``c``; ``None`` if the sampled trace never reaches the line."""
    if not c > 0:
        raise ValueError("c must be positive")
    p = tr.points
    re = p.real - c
    hits = []
    on = re == 0
    if on.any():
        hits.append(p.imag[on].min())
    cross = re[:-1] * re[1:] < 0
    if cross.any():
        r0, r1 = re[:-1][cross], re[1:][cross]
        y0, y1 = p.imag[:-1][cross], p.imag[1:][cross]
        hits.append(np.min(y0 + (y1 - y0) * r0 / (r0 - r1)))
    if not hits:
        return None
    return float(min(hits)) / c


def min_in_final_fraction(tr: TraceSample, c: float, fraction: float = 0.1) -> bool:
    """True if the closest approach to ``(c, 0)`` happens in the last
    ``fraction`` of the time horizon (truncation diagnostic)."""
    k = int(np.argmin(np.abs(tr.points - c)))
    return bool(tr.times[k] >= (1.0 - fraction) * tr.times[-1])
