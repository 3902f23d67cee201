"""Square-lattice geometry for half-plane self-avoiding walks.

Sites are integer points with unit lattice spacing. A walk is stored as an
``(N + 1, 2)`` int64 array whose first row is the origin.
"""

from __future__ import annotations

from enum import IntEnum
from pathlib import Path
from typing import IO, Iterable, NamedTuple

import numpy as np

from . import _table

# Packed hash keys need |x|, |y| < 2**30; the stored copy of a walk used by
# the pivot chain can sit up to 1.5 N from the origin.
MAX_STEPS = 1 << 20


class LatticePoint(NamedTuple):
    x: int
    y: int


class SymmetryOp(IntEnum):
    """Non-identity elements of the square-lattice point group."""

    ROT90 = 0  # counter-clockwise
    ROT180 = 1
    ROT270 = 2
    REFL_X = 3  # mirror in the x-axis: y -> -y
    REFL_Y = 4  # mirror in the y-axis: x -> -x
    REFL_DIAG = 5  # (x, y) -> (y, x)
    REFL_ANTIDIAG = 6  # (x, y) -> (-y, -x)

    @property
    def matrix(self) -> np.ndarray:
        return SYMMETRY_MATRICES[self].reshape(2, 2).copy()

    @property
    def inverse(self) -> SymmetryOp:
        if self is SymmetryOp.ROT90:
            return SymmetryOp.ROT270
        if self is SymmetryOp.ROT270:
            return SymmetryOp.ROT90
        return self


# Row-major (a, b, c, d): (dx, dy) -> (a dx + b dy, c dx + d dy).
SYMMETRY_MATRICES = np.array(
    [
        [0, -1, 1, 0],
        [-1, 0, 0, -1],
        [0, 1, -1, 0],
        [1, 0, 0, -1],
        [-1, 0, 0, 1],
        [0, 1, 1, 0],
        [0, -1, -1, 0],
    ],
    dtype=np.int64,
)


def apply_symmetry(op: SymmetryOp, center, p) -> LatticePoint:
    """Image of ``p`` under ``op`` acting about ``center``."""
    a, b, c, d = SYMMETRY_MATRICES[op]
    dx = p[0] - center[0]
    dy = p[1] - center[1]
    return LatticePoint(int(center[0] + a * dx + b * dy), int(center[1] + c * dx + d * dy))


class LatticeWalk:
    """A nearest-neighbour walk on Z^2, rooted at the origin."""

    __slots__ = ("sites",)

    def __init__(self, sites):
        arr = np.array(sites, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
            raise ValueError("sites must be a non-empty sequence of (x, y) pairs")
        self.sites = arr

    @classmethod
    def rod(cls, n_steps: int) -> LatticeWalk:
        """Vertical straight rod (0,0), (0,1), ..., (0,N)."""
        sites = np.zeros((n_steps + 1, 2), dtype=np.int64)
        sites[:, 1] = np.arange(n_steps + 1)
        return cls(sites)

    @property
    def n_steps(self) -> int:
        return self.sites.shape[0] - 1

    @property
    def xs(self) -> np.ndarray:
        return self.sites[:, 0]

    @property
    def ys(self) -> np.ndarray:
        return self.sites[:, 1]

    def __len__(self):
        return self.sites.shape[0]

    def __getitem__(self, k) -> LatticePoint:
        x, y = self.sites[k]
        return LatticePoint(int(x), int(y))

    def __iter__(self):
        for x, y in self.sites.tolist():
            yield LatticePoint(x, y)

    def __eq__(self, other):
        if not isinstance(other, LatticeWalk):
            return NotImplemented
        return np.array_equal(self.sites, other.sites)

    def __repr__(self):
        if self.n_steps <= 8:
            return f"LatticeWalk({self.sites.tolist()})"
        return f"LatticeWalk(N={self.n_steps})"

    def is_nearest_neighbor(self) -> bool:
        steps = np.abs(np.diff(self.sites, axis=0)).sum(axis=1)
        return bool(np.all(steps == 1))

    def validate(self) -> None:
        """Raise ``ValueError`` unless this is a rooted half-plane SAW."""
        if tuple(self.sites[0]) != (0, 0):
            raise ValueError("walk must start at the origin")
        if not self.is_nearest_neighbor():
            raise ValueError("consecutive sites must be lattice neighbours")
        if not is_half_plane(self):
            raise ValueError("walk leaves the half plane y >= 0")
        if not is_self_avoiding(self):
            raise ValueError("walk intersects itself")


def is_half_plane(walk: LatticeWalk) -> bool:
    return bool(np.all(walk.ys >= 0))


class OccupancySet:
    """Hash set of lattice points, each tagged with an integer (a walk index).

    Backed by the open-addressing table in :mod:`sawsle._table`; grows by
    rehashing when the load factor passes 1/2.
    """

    def __init__(self, capacity_hint: int = 16):
        self._table, self._shift = _table.new_table(capacity_hint)
        self._size = 0

    @classmethod
    def from_walk(cls, walk: LatticeWalk) -> OccupancySet:
        occ = cls(len(walk))
        _table.fill(occ._table, walk.xs.copy(), walk.ys.copy(), occ._shift)
        occ._size = _table.count(occ._table)
        return occ

    def _grow(self):
        old = self._table[self._table[:, 0] != _table.EMPTY]
        self._table, self._shift = _table.new_table(2 * len(self._table))
        for key, value in old:
            _table.insert(self._table, key, value, self._shift)

    def insert(self, p, value: int = 0) -> bool:
        _check_coord(p)
        if 2 * (self._size + 1) > self._table.shape[0]:
            self._grow()
        added = _table.insert(self._table, _table.pack(int(p[0]), int(p[1])), value, self._shift)
        self._size += added
        return added

    def remove(self, p) -> bool:
        _check_coord(p)
        gone = _table.remove(self._table, _table.pack(int(p[0]), int(p[1])), self._shift)
        self._size -= gone
        return gone

    def get(self, p, default=None):
        _check_coord(p)
        v = _table.lookup(self._table, _table.pack(int(p[0]), int(p[1])), self._shift)
        return default if v < 0 else int(v)

    def __contains__(self, p) -> bool:
        return self.get(p) is not None

    def __len__(self):
        return self._size


def _check_coord(p):
    if abs(p[0]) >= _table.COORD_OFFSET or abs(p[1]) >= _table.COORD_OFFSET:
        raise ValueError(f"lattice point {tuple(p)} outside the supported coordinate range")


def is_self_avoiding(walk: LatticeWalk) -> bool:
    occ = OccupancySet(len(walk))
    for p in walk.sites.tolist():
        if not occ.insert(p):
            return False
    return True


# --- plain-text serialization -------------------------------------------------


def dump_walk(walk: LatticeWalk, stream: IO[str]) -> None:
    """Write ``N=<steps>`` followed by one ``x y`` line per site."""
    stream.write(f"N={walk.n_steps}\n")
    stream.writelines(f"{x} {y}\n" for x, y in walk.sites.tolist())


def parse_walk(lines: Iterable[str]) -> LatticeWalk:
    it = iter(lines)
    header = next(it, "").strip()
    if not header.startswith("N="):
        raise ValueError(f"expected 'N=<steps>' header, got {header!r}")
    n = int(header[2:])
    sites = []
    # stop after N + 1 sites so callers can keep reading trailing blocks
    while len(sites) < n + 1:
        line = next(it, None)
        if line is None:
            raise ValueError(f"header says N={n} but found {len(sites)} sites")
        line = line.strip()
        if line:
            x, y = line.split()
            sites.append((int(x), int(y)))
    return LatticeWalk(sites)


def save_walk(walk: LatticeWalk, path) -> None:
    with open(path, "w") as fh:
        dump_walk(walk, fh)


def load_walk(path) -> LatticeWalk:
    with open(Path(path)) as fh:
        return parse_walk(fh)
