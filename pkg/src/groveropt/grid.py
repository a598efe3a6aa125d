"""Uniform discretization of a box domain onto the index set {0..N-1}.

Each axis is sampled at P endpoint-inclusive points, giving N = P**n grid
points in total. Indices are mixed-radix base-P integers with axis 0 as
the least significant digit, so index 0 is the lower corner and N-1 the
upper corner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .testbed import BoxDomain, DomainError


@dataclass(frozen=True, eq=False)
class GridSpec:
    """An endpoint-inclusive P**n grid over a box domain."""

    domain: BoxDomain
    points_per_axis: int

    def __post_init__(self):
        if self.points_per_axis < 2:
            raise ValueError("need at least 2 points per axis")

    @property
    def n(self) -> int:
        return self.domain.n

    @property
    def size(self) -> int:
        return self.points_per_axis**self.n

    @property
    def eps(self) -> np.ndarray:
        """Per-axis spacing (upper - lower) / (P - 1)."""
        return self.domain.width / (self.points_per_axis - 1)

    def _digits(self, indices: np.ndarray) -> np.ndarray:
        p = self.points_per_axis
        radix = p ** np.arange(self.n, dtype=np.int64)
        return (indices[:, np.newaxis] // radix) % p

    def points_for(self, indices: np.ndarray) -> np.ndarray:
        """Decode an array of indices to an (m, n) array of grid points."""
        indices = np.asarray(indices, dtype=np.int64)
        if indices.size and (indices.min() < 0 or indices.max() >= self.size):
            raise IndexError(f"grid index out of range [0, {self.size})")
        digits = self._digits(indices)
        return self.domain.lower + digits * self.domain.width / (
            self.points_per_axis - 1
        )

    def index_to_point(self, i: int) -> np.ndarray:
        """Decode one index to its grid point."""
        if not 0 <= i < self.size:
            raise IndexError(f"grid index {i} out of range [0, {self.size})")
        return self.points_for(np.array([i]))[0]

    def point_to_index(self, x) -> int:
        """Snap a point to the nearest grid point and return its index.

        Per-axis digits round half away from zero and clamp to [0, P-1];
        points more than one cell outside the box are rejected.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.n,):
            raise ValueError(f"expected a point with {self.n} coordinates")
        eps = self.eps
        if np.any(x < self.domain.lower - eps) or np.any(x > self.domain.upper + eps):
            raise DomainError(
                f"point {x.tolist()} lies more than one cell outside the box"
            )
        rel = (x - self.domain.lower) / eps
        digits = np.clip(np.floor(rel + 0.5), 0, self.points_per_axis - 1)
        radix = self.points_per_axis ** np.arange(self.n, dtype=np.int64)
        return int((digits.astype(np.int64) * radix).sum())
