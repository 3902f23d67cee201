import math
import warnings

import numpy as np
import pytest

from sawsle.analysis import (
    COMPARISON_HEADER,
    QualityWarning,
    batch_stderr,
    emit_comparison,
    integrated_autocorrelation,
    inverse_transform_sample,
    ks_distance,
    read_comparison_csv,
    write_comparison_csv,
)
from sawsle.exact import exact_cdf_x, exact_cdf_y
from sawsle.observables import EmpiricalCdf, accumulate, accumulate_many, uniform_grid


def _cdf(samples, t_max=1.0, points=1000):
    return accumulate_many(EmpiricalCdf(uniform_grid(t_max, points)), samples)


def ar1(phi, n, seed):
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = e[0] / math.sqrt(1 - phi * phi)
    for k in range(1, n):
        x[k] = phi * x[k - 1] + e[k]
    return x


def test_batch_stderr_of_identical_samples_is_zero():
    cdf = _cdf([0.3] * 200)
    assert np.all(batch_stderr(cdf, 10) == 0)


def _bernoulli_stderr(n, seed, n_batches=20):
    rng = np.random.default_rng(seed)
    cdf = _cdf(rng.choice([0.25, 0.75], n))
    return batch_stderr(cdf, n_batches)[499]


def test_batch_stderr_bernoulli():
    # a single 20-batch estimate scatters by ~16%, so compare the RMS of replicates
    se = np.array([_bernoulli_stderr(100_000, seed) for seed in range(30)])
    rms = math.sqrt(np.mean(se**2))
    assert abs(rms / math.sqrt(0.25 / 100_000) - 1) < 0.2


def test_batch_stderr_shrinks_with_more_samples():
    small = np.array([_bernoulli_stderr(20_000, seed) for seed in range(30)])
    big = np.array([_bernoulli_stderr(40_000, 1000 + seed) for seed in range(30)])
    ratio = math.sqrt(np.mean(big**2) / np.mean(small**2))
    assert abs(ratio * math.sqrt(2) - 1) < 0.2


def test_batch_stderr_needs_enough_samples():
    with pytest.raises(ValueError):
        batch_stderr(_cdf([0.1, 0.2, 0.3]), 2)
    with pytest.raises(ValueError):
        batch_stderr(_cdf([0.1] * 10), 1)


def test_batch_count_stability():
    rng = np.random.default_rng(5)
    cdf = _cdf(rng.random(4000))
    a, b = batch_stderr(cdf, 2)[200:800], batch_stderr(cdf, 4)[200:800]
    ratio = a.mean() / b.mean()
    assert 1 / 3 < ratio < 3


def test_tau_int_iid():
    x = np.random.default_rng(2).standard_normal(100_000)
    with warnings.catch_warnings():
        # an iid estimate lands on either side of 1/2
        warnings.simplefilter("ignore", QualityWarning)
        assert integrated_autocorrelation(x) == pytest.approx(0.5, rel=0.1)


@pytest.mark.parametrize("phi", [0.5, 0.9])
def test_tau_int_ar1(phi):
    x = ar1(phi, 200_000, 3)
    assert integrated_autocorrelation(x) == pytest.approx((1 + phi) / (2 * (1 - phi)), rel=0.2)


def test_tau_int_anticorrelated_warns():
    x = np.tile([1.0, -1.0], 1000)
    with pytest.warns(QualityWarning):
        assert integrated_autocorrelation(x) == 0.5


def test_tau_int_errors():
    with pytest.raises(ValueError):
        integrated_autocorrelation(np.ones(2000))
    with pytest.raises(ValueError):
        integrated_autocorrelation(np.arange(10.0))


def test_ks_distance_examples():
    cdf = _cdf([0.5])
    assert ks_distance(cdf, lambda t: np.zeros_like(t)) == 1.0
    assert ks_distance(cdf, lambda t: (t >= 0.5).astype(float)) == 0.0


def test_inverse_transform_examples():
    assert inverse_transform_sample(1 - 0.8 ** (5 / 4), "x") == pytest.approx(0.6, rel=1e-12)
    assert inverse_transform_sample(1 - 2 ** (-5 / 16), "y") == pytest.approx(1.0, rel=1e-12)
    u = np.linspace(0.01, 0.99, 99)
    assert np.allclose(exact_cdf_x(inverse_transform_sample(u, "x")), u, atol=1e-12)
    assert np.allclose(exact_cdf_y(inverse_transform_sample(u, "y")), u, atol=1e-12)
    for bad in (0.0, 1.0, -0.5):
        with pytest.raises(ValueError):
            inverse_transform_sample(bad, "x")
    with pytest.raises(ValueError):
        inverse_transform_sample(0.5, "z")


def test_emit_comparison(tmp_path):
    rng = np.random.default_rng(4)
    cdf = _cdf(inverse_transform_sample(rng.random(500), "x"))
    se = batch_stderr(cdf, 10)
    rows = emit_comparison(cdf, exact_cdf_x, se)
    assert len(rows) == 1000
    assert [r.t for r in rows] == sorted(r.t for r in rows)
    for r in rows[::50]:
        assert r.diff == r.ecdf - r.exact
        assert r.stderr2 == 2 * r.stderr
    write_comparison_csv(rows, tmp_path / "c.csv")
    assert (tmp_path / "c.csv").read_text().splitlines()[0] == ",".join(COMPARISON_HEADER)
    assert read_comparison_csv(tmp_path / "c.csv") == rows


def test_emit_comparison_errors():
    empty = EmpiricalCdf.for_x()
    with pytest.raises(ValueError):
        emit_comparison(empty, exact_cdf_x, np.zeros(1000))
    cdf = _cdf([0.5])
    with pytest.raises(ValueError):
        emit_comparison(cdf, exact_cdf_x, np.zeros(10))


def test_undefined_samples_count_in_batch_denominators():
    cdf = EmpiricalCdf.for_y()
    for _ in range(50):
        accumulate(cdf, 1.0)
        accumulate(cdf, None)
    se = batch_stderr(cdf, 5)
    assert cdf.ecdf[-1] == 0.5
    assert np.all(se == 0)
