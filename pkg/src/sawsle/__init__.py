"""Half-plane self-avoiding walks by the pivot algorithm, measured against
exact SLE(8/3) hitting distributions."""

from .analysis import (
    ComparisonRow,
    batch_stderr,
    emit_comparison,
    integrated_autocorrelation,
    inverse_transform_sample,
    ks_distance,
)
from .exact import HullKind, HullMap, avoid_probability, exact_cdf_x, exact_cdf_y, phi, phi_prime_at_zero
from .observables import EmpiricalCdf, ScaleSpec, accumulate, merge, observe_x, observe_y
from .pivot import (
    ChainConfig,
    ChainState,
    enumerate_half_plane_saws,
    init_chain,
    pivot_step,
    run_chain,
)
from .trace import DrivingPath, TraceConfig, TraceSample, elementary_inverse_map, sample_trace, trace_observe_x
from .walk import LatticePoint, LatticeWalk, OccupancySet, SymmetryOp, apply_symmetry, is_half_plane, is_self_avoiding

__version__ = "0.1.0"
