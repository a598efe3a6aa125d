"""Tabulated objective values with a value-sorted index and query accounting.

The full value table over a grid is materialized once (those build-time
evaluations model the oracle's existence and are never charged), then a
stable value-sorted permutation gives O(log N) counting of indices whose
value lies strictly below a threshold, plus uniform sampling from that
marked set or its complement. Charged reads go through ``value_at`` and
feed an :class:`EffortLedger`.

A small binary cache format avoids rebuilding large tables across CLI
invocations: little-endian, magic+version header ``GOPT1``, then n and P
as unsigned 64-bit integers, then N float64 values, then N uint64 sorted
indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .grid import GridSpec
    from .testbed import TestFunction

CACHE_MAGIC = b"GOPT1"

# Largest table the build will materialize (values + permutation in memory).
# 2**25 points comfortably covers the 256**3 and 2048**2 benchmark grids.
MAX_GRID_POINTS = 1 << 25


class CapacityError(ValueError):
    """Requested grid is larger than the in-memory table limit."""


class EmptySetError(ValueError):
    """Sampling was requested from an empty marked set or complement."""


class CacheFormatError(ValueError):
    """Cache file is missing, truncated, or has a foreign layout."""


@dataclass
class EffortLedger:
    """Cumulative query counters for one run.

    ``n1`` counts Grover rotations (one oracle query each), ``n2`` counts
    classical objective evaluations, and ``measurements`` counts
    measurement events.
    """

    n1: int = 0
    n2: int = 0
    measurements: int = 0

    def add_rotations(self, r: int):
        if r < 0:
            raise ValueError("rotation count must be non-negative")
        self.n1 += int(r)

    def add_evaluations(self, count: int = 1):
        if count < 0:
            raise ValueError("evaluation count must be non-negative")
        self.n2 += int(count)

    def add_measurement(self):
        self.measurements += 1

    @property
    def effort(self) -> int:
        """Charged evaluations plus measurements."""
        return self.n1 + self.n2 + self.measurements


class DiscretizedObjective:
    """Immutable value table over {0..N-1} with a stable value-sorted index."""

    def __init__(self, values, grid: Optional["GridSpec"] = None, sorted_perm=None):
        vals = np.ascontiguousarray(values, dtype=np.float64)
        if vals.ndim != 1 or vals.size < 1:
            raise ValueError("values must be a non-empty 1-d array")
        if sorted_perm is None:
            perm = np.argsort(vals, kind="stable").astype(np.int64)
        else:
            perm = np.ascontiguousarray(sorted_perm, dtype=np.int64)
            if perm.shape != vals.shape:
                raise ValueError("sorted_perm must match values in length")
            if np.any(np.diff(vals[perm]) < 0):
                raise ValueError("sorted_perm does not sort values ascending")
        self.values = vals
        self.grid = grid
        self.sorted_perm = perm
        self._sorted_values = vals[perm]
        for arr in (self.values, self.sorted_perm, self._sorted_values):
            arr.flags.writeable = False

    @classmethod
    def build(
        cls,
        fn: "TestFunction",
        grid: "GridSpec",
        max_points: int = MAX_GRID_POINTS,
        chunk: int = 1 << 18,
    ) -> "DiscretizedObjective":
        """Evaluate the objective at every grid point (uncharged) and index it."""
        if grid.size > max_points:
            raise CapacityError(
                f"grid has {grid.size} points, above the in-memory limit of "
                f"{max_points}"
            )
        values = np.empty(grid.size, dtype=np.float64)
        for start in range(0, grid.size, chunk):
            stop = min(start + chunk, grid.size)
            idx = np.arange(start, stop, dtype=np.int64)
            values[start:stop] = fn.eval_batch(grid.points_for(idx))
        return cls(values, grid)

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def min_value(self) -> float:
        return float(self._sorted_values[0])

    @property
    def argmin(self) -> int:
        """Index of the smallest value; ties resolve to the smallest index."""
        return int(self.sorted_perm[0])

    def count_below(self, y: float) -> int:
        """Number of indices whose value is strictly below ``y``."""
        return int(np.searchsorted(self._sorted_values, y, side="left"))

    def sample_below(self, y: float, rng: np.random.Generator) -> int:
        """Uniform index from the marked set {i : values[i] < y}."""
        m = self.count_below(y)
        if m == 0:
            raise EmptySetError(f"no values strictly below {y}")
        return int(self.sorted_perm[rng.integers(m)])

    def sample_geq(self, y: float, rng: np.random.Generator) -> int:
        """Uniform index from the complement {i : values[i] >= y}."""
        m = self.count_below(y)
        if m == self.size:
            raise EmptySetError(f"no values at or above {y}")
        return int(self.sorted_perm[m + rng.integers(self.size - m)])

    def value_at(self, i: int, ledger: EffortLedger) -> float:
        """Charged read: returns values[i] and counts one classical evaluation."""
        if not 0 <= i < self.size:
            raise IndexError(f"index {i} out of range [0, {self.size})")
        ledger.add_evaluations()
        return float(self.values[i])


def write_cache(obj: DiscretizedObjective, path) -> None:
    """Serialize (n, P, values, sorted_perm) in the GOPT1 binary layout."""
    if obj.grid is None:
        raise ValueError("only grid-backed objectives can be cached")
    header = np.array([obj.grid.n, obj.grid.points_per_axis], dtype="<u8")
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(header.tobytes())
        fh.write(obj.values.astype("<f8").tobytes())
        fh.write(obj.sorted_perm.astype("<u8").tobytes())
    tmp.replace(path)


def read_cache(path) -> tuple[int, int, np.ndarray, np.ndarray]:
    """Read a GOPT1 cache file back to (n, P, values, sorted_perm)."""
    raw = Path(path).read_bytes()
    if raw[: len(CACHE_MAGIC)] != CACHE_MAGIC:
        raise CacheFormatError(f"{path}: bad magic header")
    offset = len(CACHE_MAGIC)
    header = np.frombuffer(raw, dtype="<u8", count=2, offset=offset)
    n, p = int(header[0]), int(header[1])
    size = p**n
    offset += header.nbytes
    expected = offset + 16 * size
    if len(raw) != expected:
        raise CacheFormatError(
            f"{path}: expected {expected} bytes for n={n} P={p}, got {len(raw)}"
        )
    values = np.frombuffer(raw, dtype="<f8", count=size, offset=offset)
    offset += values.nbytes
    perm = np.frombuffer(raw, dtype="<u8", count=size, offset=offset)
    return n, p, values.astype(np.float64), perm.astype(np.int64)


def load_cached_objective(path, grid: "GridSpec") -> DiscretizedObjective:
    """Rebuild an objective from a cache file, validating it against the grid."""
    n, p, values, perm = read_cache(path)
    if n != grid.n or p != grid.points_per_axis:
        raise CacheFormatError(
            f"{path}: cached n={n} P={p} does not match grid n={grid.n} "
            f"P={grid.points_per_axis}"
        )
    return DiscretizedObjective(values, grid, sorted_perm=perm)
