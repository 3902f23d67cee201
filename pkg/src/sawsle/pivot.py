"""Pivot-algorithm Markov chain for self-avoiding walks in the upper half plane.

The chain state keeps a *stored* copy of the walk together with a global
lattice isometry ``frame`` mapping stored to actual coordinates::

    actual = R @ stored + tau,   frame = (R00, R01, R10, R11, tau_x, tau_y)

A proposal pivots the tail ``sites[i+1:]`` about ``sites[i]``. Because the
pivoted walk equals the global image of "head pivoted by the inverse
symmetry", the kernel physically moves whichever side is shorter and folds
the difference into ``frame``. The sequence of actual walks is exactly that
of the textbook tail-moving chain; only the cost changes, to
``O(min(i, N - i))`` hash operations per accepted pivot.

Self-intersections are searched from the pivot outward against a
point -> index hash table of the stored walk, aborting at the first hit;
the half-plane test runs in the same sweep.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numba as nb
import numpy as np

from . import _table
from ._table import lookup, pack
from .walk import (
    MAX_STEPS,
    SYMMETRY_MATRICES,
    LatticeWalk,
    OccupancySet,
    SymmetryOp,
    dump_walk,
    parse_walk,
)

N_OPS = len(SymmetryOp)
_IDENTITY_FRAME = np.array([1, 0, 0, 1, 0, 0], dtype=np.int64)
# keeps the per-chunk draw buffer small
_MAX_CHUNK = 1 << 16


@dataclass(frozen=True)
class ChainConfig:
    n_steps: int
    seed: int = 0
    warmup_iterations: int | None = None
    measure_stride: int | None = None
    stream: int = 0

    def __post_init__(self):
        if not 1 <= self.n_steps <= MAX_STEPS:
            raise ValueError(f"n_steps must be in [1, {MAX_STEPS}], got {self.n_steps}")
        if self.warmup_iterations is None:
            object.__setattr__(self, "warmup_iterations", 20 * self.n_steps)
        if self.measure_stride is None:
            object.__setattr__(self, "measure_stride", max(1, self.n_steps // 10))
        if self.warmup_iterations < 0:
            raise ValueError("warmup_iterations must be >= 0")
        if self.measure_stride < 1:
            raise ValueError("measure_stride must be >= 1")
        if self.seed < 0 or self.stream < 0:
            raise ValueError("seed and stream must be non-negative")

    def make_rng(self) -> np.random.Generator:
        """PCG64 generator on substream ``stream`` of ``seed``."""
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass
class ChainState:
    cfg: ChainConfig
    sx: np.ndarray  # stored coordinates, see module docstring
    sy: np.ndarray
    frame: np.ndarray
    occupancy: OccupancySet
    rng: np.random.Generator = field(repr=False)
    iteration_count: int = 0
    accepted_count: int = 0

    @property
    def n_steps(self) -> int:
        return self.cfg.n_steps

    @property
    def walk(self) -> LatticeWalk:
        r00, r01, r10, r11, tx, ty = self.frame
        sites = np.empty((self.sx.shape[0], 2), dtype=np.int64)
        sites[:, 0] = r00 * self.sx + r01 * self.sy + tx
        sites[:, 1] = r10 * self.sx + r11 * self.sy + ty
        return LatticeWalk(sites)

    @property
    def acceptance_fraction(self) -> float:
        if self.iteration_count == 0:
            return float("nan")
        return self.accepted_count / self.iteration_count

    def check_consistency(self) -> None:
        """Raise ``RuntimeError`` if walk or occupancy invariants are broken."""
        w = self.walk
        if w.n_steps != self.n_steps:
            raise RuntimeError("walk length changed")
        try:
            w.validate()
        except ValueError as exc:
            raise RuntimeError(f"chain left the state space: {exc}") from exc
        occ = self.occupancy
        if not _table_matches(occ._table, self.sx, self.sy, occ._shift):
            raise RuntimeError("occupancy table out of sync with walk")
        if _table.count(occ._table) != self.n_steps + 1:
            raise RuntimeError("occupancy table holds stale entries")


def init_chain(cfg: ChainConfig) -> ChainState:
    """Fresh chain on the vertical rod, counters zeroed."""
    rod = LatticeWalk.rod(cfg.n_steps)
    return _state_from_walk(cfg, rod, cfg.make_rng())


def _state_from_walk(cfg, walk, rng, iteration_count=0, accepted_count=0):
    return ChainState(
        cfg=cfg,
        sx=walk.xs.copy(),
        sy=walk.ys.copy(),
        frame=_IDENTITY_FRAME.copy(),
        occupancy=OccupancySet.from_walk(walk),
        rng=rng,
        iteration_count=iteration_count,
        accepted_count=accepted_count,
    )


# --- kernel ------------------------------------------------------------------


@nb.njit(cache=True)
def _try_pivot(sx, sy, frame, table, shift, i, a, b, c, d):
    """Attempt one pivot of the tail about site ``i`` by the actual-frame
    matrix (a, b; c, d). Mutates state and returns True on acceptance."""
    n = sx.shape[0] - 1
    r00 = frame[0]
    r01 = frame[1]
    r10 = frame[2]
    r11 = frame[3]
    tx = frame[4]
    ty = frame[5]
    # M R, then the stored-frame symmetry G = R^T M R
    m00 = a * r00 + b * r10
    m01 = a * r01 + b * r11
    m10 = c * r00 + d * r10
    m11 = c * r01 + d * r11
    g00 = r00 * m00 + r10 * m10
    g01 = r00 * m01 + r10 * m11
    g10 = r01 * m00 + r11 * m10
    g11 = r01 * m01 + r11 * m11
    cx = sx[i]
    cy = sy[i]

    if n - i <= i:
        # move the tail by G about the pivot
        for j in range(i + 1, n + 1):
            dx = sx[j] - cx
            dy = sy[j] - cy
            nx = cx + g00 * dx + g01 * dy
            ny = cy + g10 * dx + g11 * dy
            if r10 * nx + r11 * ny + ty < 0:
                return False
            v = lookup(table, pack(nx, ny), shift)
            if v >= 0 and v < i:
                return False
        for j in range(i + 1, n + 1):
            _table.remove(table, pack(sx[j], sy[j]), shift)
        for j in range(i + 1, n + 1):
            dx = sx[j] - cx
            dy = sy[j] - cy
            sx[j] = cx + g00 * dx + g01 * dy
            sy[j] = cy + g10 * dx + g11 * dy
            _table.insert(table, pack(sx[j], sy[j]), j, shift)
        return True

    # move the head by G^-1 = G^T and re-anchor through the frame
    ax = r00 * cx + r01 * cy + tx
    ay = r10 * cx + r11 * cy + ty
    ntx = ax - (a * ax + b * ay) + (a * tx + b * ty)
    nty = ay - (c * ax + d * ay) + (c * tx + d * ty)
    kmax = i if i > n - i else n - i
    for k in range(1, kmax + 1):
        if k <= i:
            j = i - k
            dx = sx[j] - cx
            dy = sy[j] - cy
            v = lookup(table, pack(cx + g00 * dx + g10 * dy, cy + g01 * dx + g11 * dy), shift)
            if v > i:
                return False
        j = i + k
        if j <= n and m10 * sx[j] + m11 * sy[j] + nty < 0:
            return False
    for j in range(i):
        _table.remove(table, pack(sx[j], sy[j]), shift)
    for j in range(i):
        dx = sx[j] - cx
        dy = sy[j] - cy
        sx[j] = cx + g00 * dx + g10 * dy
        sy[j] = cy + g01 * dx + g11 * dy
        _table.insert(table, pack(sx[j], sy[j]), j, shift)
    frame[0] = m00
    frame[1] = m01
    frame[2] = m10
    frame[3] = m11
    frame[4] = ntx
    frame[5] = nty
    return True


@nb.njit(cache=True)
def _run_draws(sx, sy, frame, table, shift, draws, mats):
    accepted = 0
    for t in range(draws.shape[0]):
        r = draws[t]
        i = r // 7
        g = r - 7 * i
        if _try_pivot(sx, sy, frame, table, shift, i, mats[g, 0], mats[g, 1], mats[g, 2], mats[g, 3]):
            accepted += 1
    return accepted


@nb.njit(cache=True)
def _table_matches(table, sx, sy, shift):
    for j in range(sx.shape[0]):
        if lookup(table, pack(sx[j], sy[j]), shift) != j:
            return False
    return True


def _draw(state: ChainState, k: int) -> np.ndarray:
    # one draw encodes both choices, keeping the stream independent of chunking
    return state.rng.integers(0, N_OPS * state.n_steps, size=k, dtype=np.int64)


def _advance(state: ChainState, draws: np.ndarray) -> int:
    occ = state.occupancy
    acc = int(_run_draws(state.sx, state.sy, state.frame, occ._table, occ._shift, draws, SYMMETRY_MATRICES))
    state.iteration_count += len(draws)
    state.accepted_count += acc
    return acc


# --- public operations ---------------------------------------------------------


def pivot_step(state: ChainState, pivot: int | None = None, op: SymmetryOp | None = None):
    """One pivot proposal; returns ``(state, accepted)``.

    With ``pivot`` and ``op`` both given the proposal is forced and no
    random numbers are consumed.
    """
    if (pivot is None) != (op is None):
        raise ValueError("give both pivot and op, or neither")
    if pivot is None:
        draws = _draw(state, 1)
    else:
        if not 0 <= pivot < state.n_steps:
            raise ValueError(f"pivot index must be in [0, {state.n_steps - 1}]")
        draws = np.array([N_OPS * pivot + int(op)], dtype=np.int64)
    accepted = _advance(state, draws) == 1
    return state, accepted


def run_chain(
    state: ChainState,
    iterations: int,
    observer: Callable[[ChainState], None] | None = None,
    debug: bool = False,
) -> ChainState:
    """Advance ``iterations`` pivot steps.

    ``observer(state)`` fires whenever the global iteration count passes
    ``warmup + k * stride`` for k >= 1. Occupancy consistency is checked at
    every observation, and after every single step when ``debug`` is set.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    warmup = state.cfg.warmup_iterations
    stride = state.cfg.measure_stride
    remaining = iterations
    while remaining > 0:
        k = min(remaining, _MAX_CHUNK)
        if observer is not None:
            it = state.iteration_count
            if it < warmup + stride:
                nxt = warmup + stride
            else:
                nxt = it + stride - (it - warmup) % stride
            k = min(k, nxt - it)
        if debug:
            for _ in range(k):
                _advance(state, _draw(state, 1))
                state.check_consistency()
        else:
            _advance(state, _draw(state, k))
        remaining -= k
        it = state.iteration_count
        if observer is not None and it > warmup and (it - warmup) % stride == 0:
            state.check_consistency()
            observer(state)
    return state


# --- brute-force oracle ---------------------------------------------------------

MAX_ENUMERATION_STEPS = 12
# lexicographic order of the unit steps as (dx, dy) tuples
_STEPS = ((-1, 0), (0, -1), (0, 1), (1, 0))


def enumerate_half_plane_saws(n_steps: int) -> list[LatticeWalk]:
    """All N-step SAWs from the origin with y >= 0, in lexicographic order
    of their step sequences (steps ordered as (dx, dy) tuples)."""
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    if n_steps > MAX_ENUMERATION_STEPS:
        raise ValueError(f"enumeration is capped at {MAX_ENUMERATION_STEPS} steps")
    out = []
    path = [(0, 0)]
    seen = {(0, 0)}

    def extend():
        if len(path) == n_steps + 1:
            out.append(LatticeWalk(path))
            return
        x, y = path[-1]
        for dx, dy in _STEPS:
            p = (x + dx, y + dy)
            if p[1] < 0 or p in seen:
                continue
            path.append(p)
            seen.add(p)
            extend()
            seen.remove(p)
            path.pop()

    extend()
    return out


# --- checkpoints -----------------------------------------------------------------


def save_checkpoint(state: ChainState, path) -> None:
    """Walk (plain-text walk format) followed by a ``[metadata]`` block."""
    cfg = state.cfg
    meta = {
        "seed": cfg.seed,
        "stream": cfg.stream,
        "n_steps": cfg.n_steps,
        "warmup_iterations": cfg.warmup_iterations,
        "measure_stride": cfg.measure_stride,
        "iteration_count": state.iteration_count,
        "accepted_count": state.accepted_count,
        "rng_state": json.dumps(state.rng.bit_generator.state, sort_keys=True),
    }
    with open(path, "w") as fh:
        dump_walk(state.walk, fh)
        fh.write("[metadata]\n")
        for key, value in meta.items():
            fh.write(f"{key}={value}\n")


def load_checkpoint(path) -> ChainState:
    with open(path) as fh:
        lines = fh.read().splitlines()
    walk = parse_walk(lines)
    try:
        start = lines.index("[metadata]")
    except ValueError:
        raise ValueError(f"{path}: missing [metadata] block") from None
    meta = dict(line.split("=", 1) for line in lines[start + 1 :] if "=" in line)
    cfg = ChainConfig(
        n_steps=int(meta["n_steps"]),
        seed=int(meta["seed"]),
        warmup_iterations=int(meta["warmup_iterations"]),
        measure_stride=int(meta["measure_stride"]),
        stream=int(meta["stream"]),
    )
    if walk.n_steps != cfg.n_steps:
        raise ValueError(f"{path}: walk length disagrees with metadata")
    walk.validate()
    rng = np.random.Generator(np.random.PCG64())
    rng.bit_generator.state = json.loads(meta["rng_state"])
    return _state_from_walk(
        cfg, walk, rng, int(meta["iteration_count"]), int(meta["accepted_count"])
    )
