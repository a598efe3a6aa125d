"""Adaptive-threshold minimization over a discretized objective.

Three strategies share the same skeleton: measure against the current
best value, keep the outcome when it improves, and grow the rotation
window otherwise.

* ``dh``     -- growth factor 8/7, window reset to 1 after every
                improvement, stops once the accumulated rotations exceed
                22.5*sqrt(N) + 1.4*log2(N)**2.
* ``bbw``    -- growth factor 1.34, window grown monotonically (set to 1
                only once, at the start), stops after 2.46*sqrt(N)
                rotations.
* ``hybrid`` -- classical local descent to a minimum, then Grover
                measurements to escape it; each escape that lands below
                the threshold triggers another descent. Stops when the
                weighted rotation/evaluation budget is exhausted.

Every run produces a :class:`RunRecord` with full query accounting and a
first-passage trace of (effort, best value) pairs, where effort counts
rotations, classical evaluations, and measurements spent before the
improving value was revealed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .localopt import LocalOptimizerConfig, minimize_local
from .oracle import DiscretizedObjective, EffortLedger
from .qsearch import measure
from .testbed import TestFunction

SUCCESS_TOL = 1e-12

SCHEDULES = {
    "dh": (8.0 / 7.0, True),  # growth factor, reset window on improvement
    "bbw": (1.34, False),
}


@dataclass
class AlgorithmState:
    """Loop state threaded through a minimization run."""

    best_index: int
    best_value: float
    m: float = 1.0
    iteration: int = 0


@dataclass
class RunRecord:
    """Outcome and accounting of one minimization run."""

    algorithm: str
    found_index: int
    found_value: float
    success: bool
    n1: int
    n2: int
    measurements: int
    reference_value: float
    trace: list = field(default_factory=list)  # (effort before reveal, best value)

    @property
    def evaluations(self) -> int:
        """Charged objective evaluations: one per rotation plus classical."""
        return self.n1 + self.n2

    @property
    def effort(self) -> int:
        return self.n1 + self.n2 + self.measurements

    def first_passage(self, tol: float = SUCCESS_TOL) -> Optional[int]:
        """Effort spent before the reference value was first reached."""
        for effort, value in self.trace:
            if value <= self.reference_value + tol:
                return effort
        return None


def termination_met(ledger: EffortLedger, n_points: int, n_vars: int) -> bool:
    """Weighted budget check: n1 + (sqrt(N)/log2(N)**n) * n2 > 2.46*sqrt(N)."""
    if n_points < 2 or n_vars < 1:
        raise ValueError("need N >= 2 and n >= 1")
    root = math.sqrt(n_points)
    weight = root / math.log2(n_points) ** n_vars
    return ledger.n1 + weight * ledger.n2 > 2.46 * root


def default_rotation_budget(schedule: str, n_points: int) -> float:
    root = math.sqrt(n_points)
    if schedule == "dh":
        return 22.5 * root + 1.4 * math.log2(n_points) ** 2
    if schedule == "bbw":
        return 2.46 * root
    raise ValueError(f"unknown schedule {schedule!r}")


class _Run:
    """Delta accounting against a (possibly shared) ledger."""

    def __init__(self, ledger: Optional[EffortLedger]):
        self.ledger = ledger if ledger is not None else EffortLedger()
        self._n1 = self.ledger.n1
        self._n2 = self.ledger.n2
        self._meas = self.ledger.measurements

    @property
    def rotations(self) -> int:
        return self.ledger.n1 - self._n1

    @property
    def effort(self) -> int:
        return (
            (self.ledger.n1 - self._n1)
            + (self.ledger.n2 - self._n2)
            + (self.ledger.measurements - self._meas)
        )

    def deltas(self) -> tuple[int, int, int]:
        return (
            self.ledger.n1 - self._n1,
            self.ledger.n2 - self._n2,
            self.ledger.measurements - self._meas,
        )

    def delta_ledger(self) -> EffortLedger:
        n1, n2, meas = self.deltas()
        return EffortLedger(n1=n1, n2=n2, measurements=meas)


def _record(algorithm, state, run, reference, trace) -> RunRecord:
    n1, n2, meas = run.deltas()
    return RunRecord(
        algorithm=algorithm,
        found_index=state.best_index,
        found_value=state.best_value,
        success=state.best_value <= reference + SUCCESS_TOL,
        n1=n1,
        n2=n2,
        measurements=meas,
        reference_value=reference,
        trace=trace,
    )


def gas_minimize(
    d: DiscretizedObjective,
    schedule: str,
    rng: np.random.Generator,
    ledger: Optional[EffortLedger] = None,
    rotation_budget: Optional[float] = None,
    target_value: Optional[float] = None,
    rotation_cap: Optional[float] = None,
) -> RunRecord:
    """Threshold-descent minimization with the given growth schedule.

    With ``target_value`` set, the rotation budget is ignored and the loop
    runs until the best value reaches the target (run-to-optimum mode);
    ``rotation_cap`` remains as a hard safety stop.
    """
    if schedule not in SCHEDULES:
        raise ValueError(f"unknown schedule {schedule!r}, pick from {sorted(SCHEDULES)}")
    lam, reset_on_improvement = SCHEDULES[schedule]
    if rotation_budget is None:
        rotation_budget = default_rotation_budget(schedule, d.size)
    run = _Run(ledger)
    m_cap = math.sqrt(d.size)

    start = int(rng.integers(d.size))
    effort_before = run.effort
    y0 = d.value_at(start, run.ledger)
    state = AlgorithmState(best_index=start, best_value=y0)
    trace = [(effort_before, y0)]

    while True:
        if target_value is not None:
            if state.best_value <= target_value + SUCCESS_TOL:
                break
        elif run.rotations > rotation_budget:
            break
        if rotation_cap is not None and run.rotations > rotation_cap:
            break
        state.iteration += 1
        r = int(rng.integers(math.ceil(state.m)))
        outcome = measure(d, state.best_value, r, rng, run.ledger)
        effort_before = run.effort
        value = d.value_at(outcome, run.ledger)
        if value < state.best_value:
            state.best_index, state.best_value = outcome, value
            trace.append((effort_before, value))
            if reset_on_improvement:
                state.m = 1.0
        else:
            state.m = min(lam * state.m, m_cap)

    reference = d.min_value if target_value is None else target_value
    return _record(schedule, state, run, reference, trace)


def dh_minimize(
    d: DiscretizedObjective,
    rng: np.random.Generator,
    ledger: Optional[EffortLedger] = None,
    rotation_budget: Optional[float] = None,
    target_value: Optional[float] = None,
    rotation_cap: Optional[float] = None,
) -> RunRecord:
    """Minimum finding with window reset on improvement (growth 8/7)."""
    return gas_minimize(
        d,
        "dh",
        rng,
        ledger=ledger,
        rotation_budget=rotation_budget,
        target_value=target_value,
        rotation_cap=rotation_cap,
    )


def _descend_to_grid(d, fn, start_index, start_value, cfg, run, trace, value_known=False):
    """Local descent from a grid point; snap the result back to the grid.

    Returns the best (index, value) among the start and the snapped end
    point, charging one evaluation for the snapped read. The start keeps
    priority when snapping would make things worse, so thresholds never
    move up. ``value_known`` marks starts whose value was already charged
    (the membership check), so the routine does not pay for it again.
    """
    grid = d.grid
    result = minimize_local(
        fn,
        grid.domain,
        grid.index_to_point(start_index),
        cfg,
        run.ledger,
        start_value=start_value if value_known else None,
    )
    snapped = grid.point_to_index(result.point)
    if snapped == start_index:
        return start_index, start_value
    effort_before = run.effort
    snapped_value = d.value_at(snapped, run.ledger)
    if snapped_value < start_value:
        trace.append((effort_before, snapped_value))
        return snapped, snapped_value
    return start_index, start_value


def hybrid_minimize(
    d: DiscretizedObjective,
    fn: TestFunction,
    cfg: Optional[LocalOptimizerConfig] = None,
    rng: Optional[np.random.Generator] = None,
    ledger: Optional[EffortLedger] = None,
    target_value: Optional[float] = None,
    rotation_cap: Optional[float] = None,
    lam: float = 1.34,
) -> RunRecord:
    """Classical local descent plus Grover escapes from local minima.

    Starts with a descent from a uniform random grid point, then loops:
    measure with a rotation count drawn from the growing window, check
    membership below the threshold with one charged evaluation, descend
    again from improving outcomes, and grow the window otherwise. Without
    ``target_value`` the loop stops on the weighted rotation/evaluation
    budget; with it, the loop runs until the target value is reached.
    """
    if d.grid is None:
        raise ValueError("hybrid minimization needs a grid-backed objective")
    if rng is None:
        rng = np.random.default_rng()
    if cfg is None:
        cfg = LocalOptimizerConfig.for_grid(d.grid)
    run = _Run(ledger)
    n_points, n_vars = d.size, d.grid.n
    m_cap = math.sqrt(n_points)

    start = int(rng.integers(n_points))
    start_value = float(d.values[start])  # revealed by the descent's first eval
    trace = [(run.effort, start_value)]
    best_i, best_v = _descend_to_grid(d, fn, start, start_value, cfg, run, trace)
    state = AlgorithmState(best_index=best_i, best_value=best_v)

    while True:
        if target_value is not None:
            if state.best_value <= target_value + SUCCESS_TOL:
                break
        elif termination_met(run.delta_ledger(), n_points, n_vars):
            break
        if rotation_cap is not None and run.rotations > rotation_cap:
            break
        state.iteration += 1
        r = int(rng.integers(math.ceil(state.m)))
        outcome = measure(d, state.best_value, r, rng, run.ledger)
        effort_before = run.effort
        value = d.value_at(outcome, run.ledger)
        if value < state.best_value:
            trace.append((effort_before, value))
            state.best_index, state.best_value = _descend_to_grid(
                d, fn, outcome, value, cfg, run, trace, value_known=True
            )
        else:
            state.m = min(lam * state.m, m_cap)

    reference = d.min_value if target_value is None else target_value
    return _record("hybrid", state, run, reference, trace)
