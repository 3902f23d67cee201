"""Run orchestration: independent chains or trace batches, deterministic merge,
CSV outputs and a JSON metadata sidecar."""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import analysis, observables
from .exact import EXACT_CDFS, exact_table
from .observables import EmpiricalCdf, ScaleSpec, accumulate, merge, uniform_grid
from .pivot import ChainConfig, init_chain, run_chain, save_checkpoint
from .trace import (
    DEFAULT_GRID_EXPONENT,
    DEFAULT_HORIZON,
    DrivingPath,
    TraceConfig,
    min_in_final_fraction,
    trace_from_path,
    trace_observe_x,
    trace_observe_y,
    trace_rng,
)

log = logging.getLogger(__name__)

HALF_PLANE_CONVENTION = "y >= 0 for every site"


@dataclass
class RunConfig:
    mode: str = "saw"  # saw | sle | exact | analyze
    steps: int = 1000
    iters: int = 100_000  # per chain, after warmup
    warmup: int | None = None
    stride: int | None = None
    s: float = 0.1
    s_y: float | None = None
    seed: int = 0
    chains: int = 1
    workers: int = 1
    batches: int = 20
    kappa: float = 8.0 / 3.0
    dt: float | None = None
    n_increments: int = 2000
    grid_exponent: float = DEFAULT_GRID_EXPONENT
    samples: int = 1000
    refine: bool = False
    which: str = "x"
    points: int = observables.GRID_POINTS
    t_max: float | None = None
    cdf: str | None = None
    sample_file: str | None = None
    t_max_x: float = observables.T_MAX_X
    t_max_y: float = observables.T_MAX_Y
    out: str = "out"

    def __post_init__(self):
        if self.mode not in ("saw", "sle", "exact", "analyze"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.batches < 2:
            raise ValueError("batches must be >= 2")
        if self.chains < 1 or self.workers < 1:
            raise ValueError("chains and workers must be >= 1")
        if self.iters < 0 or self.samples < 1:
            raise ValueError("iters must be >= 0 and samples >= 1")
        if self.which not in ("x", "y"):
            raise ValueError("which must be 'x' or 'y'")
        if self.s_y is None:
            self.s_y = self.s / 10.0
        if self.mode == "saw":
            self.chain_config(0)
            self.scales()
        if self.mode == "sle":
            self.trace_config()

    def chain_config(self, stream: int) -> ChainConfig:
        return ChainConfig(self.steps, self.seed, self.warmup, self.stride, stream)

    def scales(self) -> tuple[ScaleSpec, ScaleSpec]:
        return ScaleSpec(self.steps, self.s), ScaleSpec(self.steps, self.s_y)

    def trace_config(self) -> TraceConfig:
        dt = self.dt if self.dt is not None else DEFAULT_HORIZON / self.n_increments
        return TraceConfig(self.kappa, self.n_increments, dt, self.seed, self.grid_exponent)

    def grids(self):
        return uniform_grid(self.t_max_x, self.points), uniform_grid(self.t_max_y, self.points)

    def as_dict(self) -> dict:
        return asdict(self)


# --- outputs ----------------------------------------------------------------------


# tau_int needs at least this many measurements; shorter series report None
TAU_MIN_SERIES = 1000


def _safe_tau(series):
    try:
        return analysis.integrated_autocorrelation(series)
    except ValueError:
        return None


def _write_observable(out: Path, prefix: str, which: str, cdf: EmpiricalCdf, n_batches: int) -> dict:
    observables.write_cdf_csv(cdf, out / f"{prefix}_{which}_cdf.csv")
    observables.write_samples_csv(cdf, out / f"{prefix}_{which}_samples.csv")
    exact = EXACT_CDFS[which]
    summary = {"n_samples": cdf.n_samples, "undefined_fraction": cdf.undefined_fraction}
    if cdf.n_samples == 0:
        return summary
    if cdf.n_samples >= 2 * n_batches:
        stderr = analysis.batch_stderr(cdf, n_batches)
    else:
        log.warning("%s %s: too few samples for %d batches, error bars set to 0", prefix, which, n_batches)
        stderr = np.zeros(len(cdf.t_grid))
    rows = analysis.emit_comparison(cdf, exact, stderr)
    analysis.write_comparison_csv(rows, out / f"{prefix}_{which}_comparison.csv")
    summary["ks_distance"] = analysis.ks_distance(cdf, exact)
    summary["max_stderr2"] = float(2 * stderr.max())
    return summary


def _write_metadata(out: Path, name: str, meta: dict) -> None:
    with open(out / name, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


# --- SAW ------------------------------------------------------------------------------


def _saw_chain(cfg: RunConfig, stream: int, checkpoint_dir: str | None):
    chain_cfg = cfg.chain_config(stream)
    scale_x, scale_y = cfg.scales()
    grid_x, grid_y = cfg.grids()
    cdf_x, cdf_y = EmpiricalCdf(grid_x), EmpiricalCdf(grid_y)
    c_x, c_y = scale_x.c, scale_y.c

    def observe(state):
        w = state.walk
        accumulate(cdf_x, observables.observe_x(w, c_x))
        accumulate(cdf_y, observables.observe_y(w, c_y))

    state = init_chain(chain_cfg)
    run_chain(state, chain_cfg.warmup_iterations)
    warm_it, warm_acc = state.iteration_count, state.accepted_count
    run_chain(state, cfg.iters, observe)
    if checkpoint_dir is not None:
        save_checkpoint(state, Path(checkpoint_dir) / f"chain_{stream:03d}.txt")
    xs = cdf_x.sample_array()
    ys = cdf_y.sample_array()
    info = {
        "stream": stream,
        "iterations": state.iteration_count - warm_it,
        "accepted": state.accepted_count - warm_acc,
        "measurements": len(xs),
        "tau_int_x": _safe_tau(xs) if len(xs) >= TAU_MIN_SERIES else None,
        "tau_int_y_le_1": _safe_tau(np.nan_to_num(ys, nan=np.inf) <= 1.0) if len(ys) >= TAU_MIN_SERIES else None,
    }
    return cdf_x, cdf_y, info


def run_saw(cfg: RunConfig) -> dict:
    out = Path(cfg.out)
    ckpt = out / "checkpoints"
    ckpt.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    streams = range(cfg.chains)
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_saw_chain, [cfg] * cfg.chains, streams, [str(ckpt)] * cfg.chains))
    else:
        results = [_saw_chain(cfg, k, str(ckpt)) for k in streams]
    # merge in stream order regardless of completion order
    cdf_x = merge(*(r[0] for r in results))
    cdf_y = merge(*(r[1] for r in results))
    infos = [r[2] for r in results]
    iterations = sum(i["iterations"] for i in infos)
    accepted = sum(i["accepted"] for i in infos)
    scale_x, scale_y = cfg.scales()
    meta = {
        "config": cfg.as_dict(),
        "chain": asdict(cfg.chain_config(0)),
        "half_plane_convention": HALF_PLANE_CONVENTION,
        "c_x": scale_x.c,
        "c_y": scale_y.c,
        "iterations_after_warmup": iterations,
        "acceptance_fraction": accepted / iterations if iterations else None,
        "chains": infos,
        "x": _write_observable(out, "saw", "x", cdf_x, cfg.batches),
        "y": _write_observable(out, "saw", "y", cdf_y, cfg.batches),
        "wall_time_s": time.perf_counter() - start,
    }
    _write_metadata(out, "saw_metadata.json", meta)
    return {"x": cdf_x, "y": cdf_y, "metadata": meta}


# --- SLE ------------------------------------------------------------------------------


def _sle_batch(cfg: RunConfig, streams: range):
    """X, Y and truncation flags for the given sample streams.

    Each driving path is drawn on the doubled grid and coarsened, so the
    main estimate does not depend on whether the refined one is wanted.
    """
    tc = cfg.trace_config()
    fine_cfg = TraceConfig(tc.kappa, 2 * tc.n_increments, tc.dt / 2, tc.seed, tc.grid_exponent)
    rows = []
    for k in streams:
        fine = DrivingPath.sample(fine_cfg, trace_rng(tc.seed, k))
        tr = trace_from_path(fine.coarsen())
        if not np.all(np.isfinite(tr.points)):
            raise FloatingPointError(f"non-finite trace point in sample {k}")
        row = [trace_observe_x(tr, 1.0), trace_observe_y(tr, 1.0), min_in_final_fraction(tr, 1.0)]
        if cfg.refine:
            row.append(trace_observe_x(trace_from_path(fine), 1.0))
        rows.append(row)
    return rows


def sle_first_trace(cfg: RunConfig):
    tc = cfg.trace_config()
    fine_cfg = TraceConfig(tc.kappa, 2 * tc.n_increments, tc.dt / 2, tc.seed, tc.grid_exponent)
    return trace_from_path(DrivingPath.sample(fine_cfg, trace_rng(tc.seed, 0)).coarsen())


def run_sle(cfg: RunConfig) -> dict:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    n = cfg.samples
    if cfg.workers > 1:
        chunks = [range(k, min(n, k + 64)) for k in range(0, n, 64)]
        with ProcessPoolExecutor(cfg.workers) as pool:
            rows = [r for part in pool.map(_sle_batch, [cfg] * len(chunks), chunks) for r in part]
    else:
        rows = _sle_batch(cfg, range(n))
    grid_x, grid_y = cfg.grids()
    cdf_x, cdf_y = EmpiricalCdf(grid_x), EmpiricalCdf(grid_y)
    for r in rows:
        accumulate(cdf_x, r[0])
        accumulate(cdf_y, r[1])
    tr = sle_first_trace(cfg)
    with open(out / "sle_trace_0.csv", "w") as fh:
        fh.write("t,re,im\n")
        for t, z in zip(tr.times.tolist(), tr.points.tolist()):
            fh.write(f"{t!r},{z.real!r},{z.imag!r}\n")
    tc = cfg.trace_config()
    meta = {
        "config": cfg.as_dict(),
        "trace": asdict(tc),
        "total_time": tc.total_time,
        "truncation_fraction": float(np.mean([r[2] for r in rows])),
        "x": _write_observable(out, "sle", "x", cdf_x, cfg.batches),
        "y": _write_observable(out, "sle", "y", cdf_y, cfg.batches),
    }
    result = {"x": cdf_x, "y": cdf_y, "metadata": meta}
    if cfg.refine:
        cdf_fine = EmpiricalCdf(grid_x)
        for r in rows:
            accumulate(cdf_fine, r[3])
        meta["x_refined"] = _write_observable(out, "sle_refined", "x", cdf_fine, cfg.batches)
        result["x_refined"] = cdf_fine
    meta["wall_time_s"] = time.perf_counter() - start
    _write_metadata(out, "sle_metadata.json", meta)
    return result


# --- exact tables and offline analysis -----------------------------------------------------


def run_exact(cfg: RunConfig) -> Path:
    t_max = cfg.t_max if cfg.t_max is not None else (cfg.t_max_x if cfg.which == "x" else cfg.t_max_y)
    grid = uniform_grid(t_max, cfg.points)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"exact_{cfg.which}.csv"
    with open(path, "w") as fh:
        fh.write("t,cdf\n")
        for t, v in exact_table(cfg.which, grid):
            fh.write(f"{t!r},{v!r}\n")
    return path


def run_analyze(cfg: RunConfig) -> dict:
    if cfg.cdf is None or cfg.sample_file is None:
        raise ValueError("analyze needs both a CDF dump and its sample stream")
    stored = observables.read_cdf_csv(cfg.cdf)
    cdf = observables.attach_samples(stored, observables.read_samples_csv(cfg.sample_file))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    stderr = analysis.batch_stderr(cdf, cfg.batches)
    exact = EXACT_CDFS[cfg.which]
    rows = analysis.emit_comparison(cdf, exact, stderr)
    analysis.write_comparison_csv(rows, out / f"analyze_{cfg.which}_comparison.csv")
    samples = cdf.sample_array()
    defined = samples[~np.isnan(samples)]
    meta = {
        "config": cfg.as_dict(),
        "n_samples": cdf.n_samples,
        "undefined_fraction": cdf.undefined_fraction,
        "ks_distance": analysis.ks_distance(cdf, exact),
        "tau_int": _safe_tau(defined) if len(defined) >= TAU_MIN_SERIES else None,
    }
    _write_metadata(out, f"analyze_{cfg.which}_metadata.json", meta)
    return meta
