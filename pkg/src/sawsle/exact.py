"""Closed-form SLE(8/3) hitting probabilities for two explicit hulls.

Both hulls sit at unit distance from the origin (``c = 1``): the half disc
of radius ``a`` centred at 1, and the vertical slit from 1 to ``1 + ia``.
Each comes with the conformal map from its complement in the upper half
plane back onto the half plane, normalized to fix 0 and infinity with unit
derivative at infinity. The probability that the SLE(8/3) trace avoids a
hull is the map's derivative at the origin raised to the power 5/8.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

RESTRICTION_EXPONENT = 5.0 / 8.0


class HullKind(Enum):
    HALF_DISC = "half_disc"
    VERTICAL_SLIT = "vertical_slit"


@dataclass(frozen=True)
class HullMap:
    kind: HullKind
    a: float

    def __post_init__(self):
        if self.kind is HullKind.HALF_DISC and not 0 < self.a < 1:
            raise ValueError(f"half-disc radius must lie in (0, 1), got {self.a}")
        if self.kind is HullKind.VERTICAL_SLIT and not self.a > 0:
            raise ValueError(f"slit height must be positive, got {self.a}")

    @classmethod
    def half_disc(cls, a: float) -> HullMap:
        return cls(HullKind.HALF_DISC, a)

    @classmethod
    def vertical_slit(cls, a: float) -> HullMap:
        return cls(HullKind.VERTICAL_SLIT, a)


def phi(hull: HullMap, z: complex) -> complex:
    """Conformal map from the upper half plane minus ``hull`` onto the half plane.

    Points on the real axis and on the hull boundary are accepted and
    evaluated as limits from inside the domain.
    """
    z = complex(z)
    if z.imag < 0:
        raise ValueError(f"{z} is below the real axis")
    a = hull.a
    w = z - 1.0
    if hull.kind is HullKind.HALF_DISC:
        if w == 0:
            raise ValueError("z = 1 is the pole of the half-disc map")
        if abs(w) < a * (1.0 - 1e-12):
            raise ValueError(f"{z} lies inside the half disc of radius {a}")
        return w + a * a / w + 1.0 + a * a
    # -(z-1)^2 - a^2 with its imaginary part signed as the limit from inside H
    u, v = w.real, w.imag
    im = -2.0 * u * v if v > 0 else math.copysign(0.0, -u)
    root = cmath.sqrt(complex(v * v - u * u - a * a, im))
    return 1j * root + math.sqrt(1.0 + a * a)


def phi_prime_at_zero(hull: HullMap) -> float:
    if hull.kind is HullKind.HALF_DISC:
        return 1.0 - hull.a**2
    return 1.0 / math.sqrt(1.0 + hull.a**2)


def avoid_probability(hull: HullMap) -> float:
    """Probability that the SLE(8/3) trace misses ``hull``."""
    return phi_prime_at_zero(hull) ** RESTRICTION_EXPONENT


def exact_cdf_x(t):
    """``P(X <= t) = 1 - (1 - t^2)^(5/8)`` on ``[0, 1]``; scalar or array."""
    arr = np.asarray(t, dtype=np.float64)
    if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
        raise ValueError("exact_cdf_x is defined on [0, 1]")
    out = 1.0 - (1.0 - arr * arr) ** RESTRICTION_EXPONENT
    return float(out) if out.ndim == 0 else out


def exact_cdf_y(t):
    """``P(Y <= t) = 1 - (1 + t^2)^(-5/16)`` for ``t >= 0``; scalar or array."""
    arr = np.asarray(t, dtype=np.float64)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("exact_cdf_y is defined for t >= 0")
    out = 1.0 - (1.0 + arr * arr) ** (-RESTRICTION_EXPONENT / 2.0)
    return float(out) if out.ndim == 0 else out


EXACT_CDFS = {"x": exact_cdf_x, "y": exact_cdf_y}


def exact_table(which: str, t_grid) -> list[tuple[float, float]]:
    cdf = EXACT_CDFS[which]
    grid = np.asarray(t_grid, dtype=np.float64)
    return list(zip(grid.tolist(), np.atleast_1d(cdf(grid)).tolist()))
