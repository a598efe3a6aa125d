"""Seeded experiment harness: batches of runs, statistics, curves, CSV.

Every repetition draws its random stream from (master seed, repetition
index), so batches are reproducible and independent of scheduling order.
Two modes mirror the two kinds of experiments: ``terminated`` runs each
algorithm with its own stopping rule and reports the success rate, while
``run-to-optimum`` disables the stopping rule and runs until the true
grid minimum value is attained, which makes evaluation counts the metric.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .algorithms import RunRecord, gas_minimize, hybrid_minimize
from .grid import GridSpec
from .localopt import ROUTINES, LocalOptimizerConfig
from .oracle import (
    CacheFormatError,
    DiscretizedObjective,
    load_cached_objective,
    write_cache,
)
from .testbed import FUNCTIONS, TestFunction

ALGORITHMS = ("dh", "bbw", "hybrid")
MODES = ("terminated", "run-to-optimum")

CURVE_HEADER = ["effort", "success_prob", "samples"]
TABLE_HEADER = [
    "function",
    "n",
    "P",
    "algorithm",
    "routine",
    "mean_evals",
    "stddev_evals",
    "success_rate",
    "reps",
    "seed",
]


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field."""


@dataclass(frozen=True)
class ExperimentConfig:
    function: str
    n: int
    points_per_axis: int
    algorithm: str
    routine: str = "qmodel"
    repetitions: int = 1000
    seed: int = 0
    mode: str = "terminated"

    def validate(self) -> "ExperimentConfig":
        if self.function not in FUNCTIONS:
            raise ConfigError(f"function: unknown name {self.function!r}")
        fn = FUNCTIONS[self.function]
        if self.n not in fn.arity_range:
            raise ConfigError(
                f"n: {self.function} supports {sorted(fn.arity_range)}, got {self.n}"
            )
        if self.points_per_axis < 2:
            raise ConfigError("points_per_axis: must be at least 2")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm: pick one of {ALGORITHMS}")
        if self.algorithm == "hybrid" and self.routine not in ROUTINES:
            raise ConfigError(f"routine: pick one of {sorted(ROUTINES)}")
        if self.repetitions < 1:
            raise ConfigError("repetitions: must be at least 1")
        if self.seed < 0:
            raise ConfigError("seed: must be non-negative")
        if self.mode not in MODES:
            raise ConfigError(f"mode: pick one of {MODES}")
        return self


def run_rng(master_seed: int, index: int) -> np.random.Generator:
    """Stream for repetition ``index`` of a batch seeded by ``master_seed``."""
    return np.random.default_rng([master_seed, index])


def build_objective(
    cfg: ExperimentConfig, cache_dir=None
) -> tuple[TestFunction, DiscretizedObjective]:
    """Build (or load from the binary cache) the discretized objective."""
    cfg.validate()
    fn = FUNCTIONS[cfg.function]
    grid = GridSpec(fn.domain_for(cfg.n), cfg.points_per_axis)
    if cache_dir is not None:
        path = Path(cache_dir) / f"{cfg.function}_n{cfg.n}_P{cfg.points_per_axis}.gopt"
        if path.exists():
            try:
                return fn, load_cached_objective(path, grid)
            except CacheFormatError:
                pass  # stale or foreign file: rebuild below
        d = DiscretizedObjective.build(fn, grid)
        path.parent.mkdir(parents=True, exist_ok=True)
        write_cache(d, path)
        return fn, d
    return fn, DiscretizedObjective.build(fn, grid)


def run_single(
    fn: TestFunction, d: DiscretizedObjective, cfg: ExperimentConfig, index: int
) -> RunRecord:
    rng = run_rng(cfg.seed, index)
    target = d.min_value if cfg.mode == "run-to-optimum" else None
    if cfg.algorithm == "hybrid":
        local_cfg = LocalOptimizerConfig.for_grid(d.grid, cfg.routine)
        return hybrid_minimize(d, fn, local_cfg, rng, target_value=target)
    return gas_minimize(d, cfg.algorithm, rng, target_value=target)


def run_batch(
    cfg: ExperimentConfig,
    objective: Optional[tuple[TestFunction, DiscretizedObjective]] = None,
    cache_dir=None,
) -> list[RunRecord]:
    """Run ``cfg.repetitions`` independent seeded repetitions, in index order."""
    cfg.validate()
    fn, d = objective if objective is not None else build_objective(cfg, cache_dir)
    return [run_single(fn, d, cfg, i) for i in range(cfg.repetitions)]


@dataclass(frozen=True)
class SummaryStats:
    mean_evals: float
    stddev_evals: float
    success_rate: float


def summarize(records: Sequence[RunRecord]) -> SummaryStats:
    """Mean and population standard deviation of charged evaluations, plus
    the fraction of successful runs."""
    if not records:
        raise ValueError("no records to summarize")
    evals = np.array([r.evaluations for r in records], dtype=float)
    hits = np.array([r.success for r in records], dtype=float)
    return SummaryStats(
        mean_evals=float(evals.mean()),
        stddev_evals=float(evals.std(ddof=0)),
        success_rate=float(hits.mean()),
    )


@dataclass(frozen=True)
class PerformanceCurve:
    """Empirical first-passage success probability against effort."""

    efforts: tuple
    probabilities: tuple
    samples: int


def first_passage_efforts(records: Sequence[RunRecord]) -> np.ndarray:
    """Per-record effort at which the reference value was first reached
    (inf for runs that never reached it)."""
    return np.array(
        [math.inf if (fp := r.first_passage()) is None else fp for r in records],
        dtype=float,
    )


def effort_quantile(records: Sequence[RunRecord], q: float) -> float:
    """Smallest effort at which a fraction ``q`` of the runs had succeeded."""
    fps = np.sort(first_passage_efforts(records))
    return float(fps[min(len(fps) - 1, math.ceil(q * len(fps)) - 1)])


def performance_curve(
    records: Sequence[RunRecord], efforts: Optional[Sequence[int]] = None
) -> PerformanceCurve:
    """First-passage curve over a log-spaced effort grid (64 points by default)."""
    if not records:
        raise ValueError("no records for a curve")
    fps = first_passage_efforts(records)
    if efforts is None:
        top = max(1, max((r.effort for r in records), default=1))
        raw = np.unique(np.rint(np.geomspace(1, top, 64)).astype(np.int64))
        efforts = raw.tolist()
    probs = [float((fps <= e).mean()) for e in efforts]
    return PerformanceCurve(tuple(int(e) for e in efforts), tuple(probs), len(records))


# ---------------------------------------------------------------------------
# CSV emission (floats via repr for exact round-trips)

def write_curve_csv(curve: PerformanceCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CURVE_HEADER)
        for effort, prob in zip(curve.efforts, curve.probabilities):
            writer.writerow([effort, repr(prob), curve.samples])


def read_curve_csv(path) -> PerformanceCurve:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return PerformanceCurve(
        tuple(int(r["effort"]) for r in rows),
        tuple(float(r["success_prob"]) for r in rows),
        int(rows[0]["samples"]) if rows else 0,
    )


def table_row(cfg: ExperimentConfig, stats: SummaryStats) -> dict:
    return {
        "function": cfg.function,
        "n": cfg.n,
        "P": cfg.points_per_axis,
        "algorithm": cfg.algorithm,
        "routine": cfg.routine if cfg.algorithm == "hybrid" else "",
        "mean_evals": repr(stats.mean_evals),
        "stddev_evals": repr(stats.stddev_evals),
        "success_rate": repr(stats.success_rate),
        "reps": cfg.repetitions,
        "seed": cfg.seed,
    }


def write_table_csv(rows: Sequence[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=TABLE_HEADER)
        writer.writeheader()
        writer.writerows(rows)


def read_table_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def sweep_functions(cfg: ExperimentConfig, include_degenerate: bool = False):
    """Configs for every registry function at the given arity, skipping
    arities marked degenerate unless asked otherwise."""
    for name, fn in FUNCTIONS.items():
        if cfg.n not in fn.arity_range:
            continue
        if not include_degenerate and cfg.n in fn.degenerate_arities:
            continue
        yield replace(cfg, function=name)
