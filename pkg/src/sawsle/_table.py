"""Open-addressing hash table from lattice points to walk indices.

The table is a ``(capacity, 2)`` int64 array: column 0 holds the packed
key, column 1 the value. Capacity is a power of two, probing is linear and
deletion uses backward shifting, so there are no tombstones.
"""

import numba as nb
import numpy as np

EMPTY = -1
COORD_OFFSET = 1 << 30
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


# pack and _home are inlined into the cached pivot kernels; numba does not
# see that dependency, so clear __pycache__ after editing them
@nb.njit(inline="always")
def pack(x, y):
    return (x + COORD_OFFSET) * 4294967296 + (y + COORD_OFFSET)


@nb.njit(inline="always")
def _home(key, shift):
    return np.int64((np.uint64(key) * _GOLDEN) >> np.uint64(shift))


@nb.njit(cache=True)
def lookup(table, key, shift):
    """Value stored under ``key``, or -1."""
    mask = table.shape[0] - 1
    s = _home(key, shift)
    while True:
        k = table[s, 0]
        if k == key:
            return table[s, 1]
        if k == EMPTY:
            return -1
        s = (s + 1) & mask


@nb.njit(cache=True)
def insert(table, key, value, shift):
    """Insert or overwrite; returns True if the key was new."""
    mask = table.shape[0] - 1
    s = _home(key, shift)
    while True:
        k = table[s, 0]
        if k == key:
            table[s, 1] = value
            return False
        if k == EMPTY:
            table[s, 0] = key
            table[s, 1] = value
            return True
        s = (s + 1) & mask


@nb.njit(cache=True)
def remove(table, key, shift):
    """Delete ``key``; returns True if it was present."""
    mask = table.shape[0] - 1
    i = _home(key, shift)
    while table[i, 0] != key:
        if table[i, 0] == EMPTY:
            return False
        i = (i + 1) & mask
    j = i
    while True:
        j = (j + 1) & mask
        kj = table[j, 0]
        if kj == EMPTY:
            break
        h = _home(kj, shift)
        # move j into the hole at i unless its home lies cyclically in (i, j]
        if (j > i and (h <= i or h > j)) or (j < i and h <= i and h > j):
            table[i, 0] = kj
            table[i, 1] = table[j, 1]
            i = j
    table[i, 0] = EMPTY
    table[i, 1] = 0
    return True


def new_table(min_entries):
    """Allocate an empty table sized for ``min_entries`` at load <= 1/4.

    Returns ``(table, shift)`` where ``shift = 64 - log2(capacity)``.
    """
    bits = max(4, int(np.ceil(np.log2(4 * max(1, min_entries)))))
    table = np.full((1 << bits, 2), EMPTY, dtype=np.int64)
    table[:, 1] = 0
    return table, 64 - bits


@nb.njit(cache=True)
def fill(table, xs, ys, shift):
    """Insert every site of a walk, valued by its index."""
    for j in range(xs.shape[0]):
        insert(table, pack(xs[j], ys[j]), j, shift)


@nb.njit(cache=True)
def count(table):
    n = 0
    for s in range(table.shape[0]):
        if table[s, 0] != EMPTY:
            n += 1
    return n
