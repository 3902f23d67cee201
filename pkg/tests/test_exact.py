import cmath
import math

import mpmath
import numpy as np
import pytest

from sawsle.exact import (
    HullMap,
    avoid_probability,
    exact_cdf_x,
    exact_cdf_y,
    phi,
    phi_prime_at_zero,
)

mpmath.mp.dps = 40


def test_half_disc_map_examples():
    h = HullMap.half_disc(0.5)
    assert phi(h, 0) == 0
    top = phi(h, 1 + 0.5j)
    assert abs(top - 1.25) < 1e-15


def test_slit_map_fixes_origin():
    assert abs(phi(HullMap.vertical_slit(1.0), 0)) < 1e-15


def test_hull_validation():
    for bad in (0.0, 1.0, -0.2):
        with pytest.raises(ValueError):
            HullMap.half_disc(bad)
    with pytest.raises(ValueError):
        HullMap.vertical_slit(0.0)
    with pytest.raises(ValueError):
        phi(HullMap.half_disc(0.5), 1 + 0.2j)
    with pytest.raises(ValueError):
        phi(HullMap.half_disc(0.5), 1)
    with pytest.raises(ValueError):
        phi(HullMap.vertical_slit(1.0), 0.3 - 0.1j)


def test_phi_prime_examples():
    assert phi_prime_at_zero(HullMap.half_disc(1e-9)) == pytest.approx(1.0, abs=1e-15)
    assert phi_prime_at_zero(HullMap.half_disc(0.5)) == 0.75
    assert phi_prime_at_zero(HullMap.vertical_slit(1.0)) == pytest.approx(1 / math.sqrt(2), rel=1e-15)


def test_avoid_probability_against_high_precision():
    assert avoid_probability(HullMap.half_disc(1e-9)) == pytest.approx(1.0, abs=1e-15)
    ref = mpmath.power(mpmath.mpf("0.64"), mpmath.mpf(5) / 8)
    assert avoid_probability(HullMap.half_disc(0.6)) == pytest.approx(float(ref), rel=1e-14)
    assert float(ref) == pytest.approx(0.75659, abs=5e-6)
    ref = mpmath.power(2, -mpmath.mpf(5) / 16)
    assert avoid_probability(HullMap.vertical_slit(1.0)) == pytest.approx(float(ref), rel=1e-14)
    assert float(ref) == pytest.approx(0.80525, abs=5e-6)


def test_exact_cdf_examples():
    assert exact_cdf_x(0.0) == 0.0
    assert exact_cdf_x(1.0) == 1.0
    ref = 1 - mpmath.power(mpmath.mpf("0.64"), mpmath.mpf(5) / 8)
    assert exact_cdf_x(0.6) == pytest.approx(float(ref), abs=1e-15)
    assert float(ref) == pytest.approx(0.24341, abs=5e-6)
    assert exact_cdf_y(0.0) == 0.0
    ref = 1 - mpmath.power(2, -mpmath.mpf(5) / 16)
    assert exact_cdf_y(1.0) == pytest.approx(float(ref), abs=1e-15)
    assert float(ref) == pytest.approx(0.19475, abs=5e-6)
    assert exact_cdf_y(1e6) > 1 - 1e-3
    with pytest.raises(ValueError):
        exact_cdf_x(1.01)
    with pytest.raises(ValueError):
        exact_cdf_y(-0.1)


@pytest.mark.parametrize("hull", [HullMap.half_disc(0.3), HullMap.half_disc(0.9), HullMap.vertical_slit(0.5), HullMap.vertical_slit(4.0)])
def test_unit_derivative_at_infinity(hull):
    for angle in np.linspace(0.01, math.pi - 0.01, 9):
        z = 1e8 * cmath.exp(1j * angle)
        assert abs(phi(hull, z) / z - 1) < 1e-6


@pytest.mark.parametrize("a", [0.1, 0.5, 0.95])
def test_half_disc_boundary_maps_to_real_axis(a):
    h = HullMap.half_disc(a)
    for theta in np.linspace(0, math.pi, 41):
        w = phi(h, 1 + a * cmath.exp(1j * theta))
        assert abs(w.imag) < 1e-10
    for x in (-5.0, -0.3, 0.0, 1 - a - 1e-3, 1 + a + 1e-3, 7.0):
        assert abs(phi(h, x).imag) < 1e-10


@pytest.mark.parametrize("a", [0.2, 1.0, 3.0])
def test_slit_boundary_maps_to_real_axis(a):
    h = HullMap.vertical_slit(a)
    for y in np.linspace(0, a, 21):
        for side in (-0.0, 0.0):
            w = phi(h, complex(1 + side, y))
            assert abs(w.imag) < 1e-10
    for x in (-4.0, 0.0, 0.999, 1.001, 9.0):
        assert abs(phi(h, x).imag) < 1e-10


@pytest.mark.parametrize("hull", [HullMap.half_disc(0.4), HullMap.vertical_slit(1.5)])
def test_interior_maps_into_upper_half_plane(hull):
    rng = np.random.default_rng(0)
    for _ in range(500):
        z = complex(rng.uniform(-5, 7), rng.uniform(1e-3, 6))
        if hull.kind.value == "half_disc" and abs(z - 1) <= hull.a:
            continue
        assert phi(hull, z).imag > 0


@pytest.mark.parametrize("hull", [HullMap.half_disc(0.25), HullMap.half_disc(0.8), HullMap.vertical_slit(0.3), HullMap.vertical_slit(2.0)])
def test_finite_difference_derivative_at_origin(hull):
    h = 1e-6
    fd = (phi(hull, 0.0) - phi(hull, -h)).real / h
    assert abs(fd / phi_prime_at_zero(hull) - 1) < 1e-4


def test_cdfs_monotone_and_consistent_with_restriction_formula():
    tx = np.linspace(0, 1, 10_000)
    ty = np.linspace(0, 20, 10_000)
    fx, fy = exact_cdf_x(tx), exact_cdf_y(ty)
    assert np.all(np.diff(fx) >= 0) and np.all(np.diff(fy) >= 0)
    for t in tx[1:-1:97]:
        assert abs(exact_cdf_x(t) - (1 - avoid_probability(HullMap.half_disc(t)))) <= 1e-14
    for t in ty[1::97]:
        assert abs(exact_cdf_y(t) - (1 - avoid_probability(HullMap.vertical_slit(t)))) <= 1e-14
