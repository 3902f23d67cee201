import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sawsle.observables import (
    EmpiricalCdf,
    ScaleSpec,
    X_FLOOR,
    accumulate,
    accumulate_many,
    attach_samples,
    merge,
    observe_x,
    observe_y,
    read_cdf_csv,
    read_samples_csv,
    uniform_grid,
    write_cdf_csv,
    write_samples_csv,
)
from sawsle.pivot import ChainConfig, init_chain, run_chain
from sawsle.walk import LatticeWalk


def test_scale_spec():
    s = ScaleSpec(10_000, 0.1)
    assert s.c == 0.1 * 10_000**0.75
    assert math.isclose(s.c, 100.0, rel_tol=1e-15)
    with pytest.raises(ValueError):
        ScaleSpec(100, 0.0)


def test_observe_x_examples():
    w = LatticeWalk([(0, 0), (0, 1), (1, 1), (1, 2)])
    assert observe_x(w, 2.0) == pytest.approx(math.sqrt(2) / 2, abs=1e-12)
    assert observe_x(LatticeWalk([(0, 0), (1, 0), (2, 0), (3, 0)]), 2.0) == X_FLOOR
    n = 4096
    assert observe_x(LatticeWalk.rod(n), n**0.75) == 1.0


def test_observe_x_accepts_scale_spec():
    w = LatticeWalk([(0, 0), (1, 0), (1, 1)])
    spec = ScaleSpec(16, 0.25)  # c = 2
    assert observe_x(w, spec) == observe_x(w, 2.0) == 0.5


def test_observe_y_examples():
    w = LatticeWalk([(0, 0), (0, 1), (1, 1), (2, 1), (2, 2), (1, 2)])
    assert observe_y(w, 1.5) == pytest.approx(1 / 1.5, abs=1e-12)
    assert observe_y(LatticeWalk.rod(10), 0.5) is None
    single = LatticeWalk([(0, 0), (0, 1), (0, 2), (0, 3), (1, 3), (1, 4)])
    assert observe_y(single, 0.7) == pytest.approx(3 / 0.7)


def test_observe_y_integer_c_counts_vertices_on_line():
    w = LatticeWalk([(0, 0), (0, 1), (0, 2), (1, 2), (1, 3)])
    assert observe_y(w, 1.0) == 2.0


def test_observables_deterministic_on_chain_walk():
    s = init_chain(ChainConfig(2000, seed=4))
    run_chain(s, 50_000)
    w = s.walk
    c = ScaleSpec(2000, 0.1).c
    assert observe_x(w, c) == observe_x(w, c)
    x = observe_x(w, c)
    assert X_FLOOR <= x <= 1.0


def test_accumulate_example_on_x_grid():
    cdf = EmpiricalCdf.for_x()
    accumulate(cdf, 0.5)
    # t_k = (k + 1) / 1000, so t_499 = 0.5 is the first grid point >= 0.5
    assert np.array_equal(np.nonzero(cdf.hit_counts)[0], np.arange(499, 1000))
    assert cdf.n_samples == 1


def test_accumulate_undefined_and_out_of_range():
    cdf = EmpiricalCdf.for_y()
    accumulate(cdf, None)
    assert cdf.hit_counts.sum() == 0 and cdf.n_undefined == 1 and cdf.n_samples == 1
    accumulate(cdf, 25.0)
    assert cdf.hit_counts.sum() == 0 and cdf.n_samples == 2 and cdf.n_undefined == 1


def test_uniform_grid():
    g = uniform_grid(20.0)
    assert len(g) == 1000 and g[0] == 0.02 and g[-1] == 20.0


samples_st = st.lists(st.one_of(st.none(), st.floats(0, 1.2, allow_nan=False)), max_size=60)


def _filled(samples):
    cdf = EmpiricalCdf.for_x()
    for v in samples:
        accumulate(cdf, v)
    return cdf


@given(samples_st)
def test_ecdf_monotone_and_bounded(samples):
    cdf = _filled(samples)
    assert np.all(np.diff(cdf.hit_counts) >= 0)
    assert np.all((0 <= cdf.hit_counts) & (cdf.hit_counts <= cdf.n_samples))


@given(samples_st, samples_st, samples_st)
def test_merge_commutative_associative_and_exact(a, b, c):
    A, B, C = _filled(a), _filled(b), _filled(c)
    ab = merge(A, B)
    ba = merge(B, A)
    assert np.array_equal(ab.hit_counts, ba.hit_counts)
    assert (ab.n_samples, ab.n_undefined) == (ba.n_samples, ba.n_undefined)
    left = merge(merge(A, B), C)
    right = merge(A, merge(B, C))
    assert np.array_equal(left.hit_counts, right.hit_counts)
    assert left.samples == right.samples or np.allclose(left.samples, right.samples, equal_nan=True)
    whole = _filled(a + b + c)
    assert np.array_equal(left.hit_counts, whole.hit_counts)
    assert (left.n_samples, left.n_undefined) == (whole.n_samples, whole.n_undefined)


@given(samples_st)
def test_accumulate_many_matches_accumulate(samples):
    one = _filled(samples)
    many = accumulate_many(EmpiricalCdf.for_x(), [math.nan if v is None else v for v in samples])
    assert np.array_equal(one.hit_counts, many.hit_counts)
    assert one.n_undefined == many.n_undefined


def test_merge_rejects_grid_mismatch():
    with pytest.raises(ValueError):
        merge(EmpiricalCdf.for_x(), EmpiricalCdf.for_y())


def test_csv_roundtrip(tmp_path):
    cdf = _filled([0.1, None, 0.95, 0.3333, 1.0])
    write_cdf_csv(cdf, tmp_path / "cdf.csv")
    write_samples_csv(cdf, tmp_path / "s.csv")
    assert (tmp_path / "cdf.csv").read_text().splitlines()[0] == "t,count,n_samples,n_undefined"
    back = read_cdf_csv(tmp_path / "cdf.csv")
    assert np.array_equal(back.t_grid, cdf.t_grid)
    assert np.array_equal(back.hit_counts, cdf.hit_counts)
    assert (back.n_samples, back.n_undefined) == (5, 1)
    full = attach_samples(back, read_samples_csv(tmp_path / "s.csv"))
    assert np.allclose(full.samples, cdf.samples, equal_nan=True)
    with pytest.raises(ValueError):
        attach_samples(back, [0.5])
