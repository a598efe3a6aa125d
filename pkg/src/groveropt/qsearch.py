"""Exact classical simulation of Grover-search measurement statistics.

A measurement taken after r Grover iterations over N items, of which
``marked`` are marked, yields a marked item with probability
sin^2((2r+1) * theta) where sin^2(theta) = marked/N. Sampling that
Bernoulli outcome and then drawing uniformly from the corresponding set
reproduces the full measurement distribution in O(1) per measurement,
with no state vector. An independent two-amplitude recurrence is kept
alongside as a correctness oracle for the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .oracle import DiscretizedObjective, EffortLedger


@dataclass(frozen=True)
class BbhtParams:
    """Growth schedule for the unknown-marked-count search loop."""

    lam: float = 8.0 / 7.0
    initial_m: float = 1.0
    m_cap: Optional[float] = None  # defaults to sqrt(N) of the searched table

    def __post_init__(self):
        if not 1.0 < self.lam <= 1.34:
            raise ValueError("growth factor must satisfy 1 < lam <= 1.34")
        if self.initial_m < 1.0:
            raise ValueError("initial m must be at least 1")


def _validate(r, marked, n_total: int):
    if n_total < 1:
        raise ValueError("N must be at least 1")
    if np.any(np.asarray(r) < 0):
        raise ValueError("rotation count must be non-negative")
    m = np.asarray(marked)
    if np.any(m < 0) or np.any(m > n_total):
        raise ValueError("marked count must lie in [0, N]")


def success_probability(r, marked, n_total: int):
    """Probability that measuring after ``r`` Grover iterations hits a marked index.

    Accepts scalars or broadcastable arrays for ``r`` and ``marked``.
    """
    _validate(r, marked, n_total)
    m = np.asarray(marked, dtype=float)
    rr = np.asarray(r, dtype=float)
    theta = np.arcsin(np.sqrt(m / n_total))
    p = np.sin((2.0 * rr + 1.0) * theta) ** 2
    p = np.where(m == 0, 0.0, np.where(m == n_total, 1.0, p))
    if np.ndim(marked) == 0 and np.ndim(r) == 0:
        return float(p)
    return p


def amplitude_recurrence_probability(r: int, marked, n_total: int):
    """Same probability via the two-amplitude Grover recurrence.

    Tracks the per-item amplitudes (a for marked, b for unmarked) from the
    uniform state a = b = 1/sqrt(N) through r oracle+diffusion steps and
    returns marked * a**2. Exists purely as an independent cross-check of
    :func:`success_probability`; ``marked`` may be an array.
    """
    _validate(r, marked, n_total)
    m = np.asarray(marked, dtype=float)
    a = np.full(m.shape, math.sqrt(1.0 / n_total))
    b = np.full(m.shape, math.sqrt(1.0 / n_total))
    for _ in range(int(r)):
        a, b = (
            (n_total - 2.0 * m) / n_total * a + 2.0 * (n_total - m) / n_total * b,
            -2.0 * m / n_total * a + (n_total - 2.0 * m) / n_total * b,
        )
    p = m * a * a
    if np.ndim(marked) == 0:
        return float(p)
    return p


def measure(
    d: DiscretizedObjective,
    threshold: float,
    rotations: int,
    rng: np.random.Generator,
    ledger: EffortLedger,
) -> int:
    """Simulate one measurement after ``rotations`` Grover iterations.

    Marked means strictly below ``threshold``. Charges ``rotations`` to n1
    and one measurement to the ledger; returns the measured index.
    """
    m = d.count_below(threshold)
    p = success_probability(rotations, m, d.size)
    ledger.add_rotations(rotations)
    ledger.add_measurement()
    if rng.random() < p:
        return d.sample_below(threshold, rng)
    return d.sample_geq(threshold, rng)


def bbht_search(
    d: DiscretizedObjective,
    threshold: float,
    params: BbhtParams,
    rng: np.random.Generator,
    ledger: EffortLedger,
    rotation_budget: Optional[float] = None,
) -> Optional[int]:
    """Find an index with value strictly below ``threshold``.

    Repeatedly draws a rotation count j uniformly from {0..ceil(m)-1},
    measures, and verifies the outcome with one charged evaluation. On
    failure m grows by the configured factor up to sqrt(N). Returns None
    once more than ``rotation_budget`` rotations were spent in this call;
    an unlimited budget always returns a marked index when one exists.
    """
    cap = params.m_cap if params.m_cap is not None else math.sqrt(d.size)
    m = params.initial_m
    n1_start = ledger.n1
    while rotation_budget is None or ledger.n1 - n1_start <= rotation_budget:
        j = int(rng.integers(math.ceil(m)))
        candidate = measure(d, threshold, j, rng, ledger)
        if d.value_at(candidate, ledger) < threshold:
            return candidate
        m = min(params.lam * m, cap)
    return None
