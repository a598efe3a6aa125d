"""Quantum-assisted global optimization testbed.

Discretizes continuous box-constrained objectives onto {0..N-1}, simulates
Grover-search measurement statistics exactly, and benchmarks threshold-
descent minimization strategies (window-resetting, monotone-window, and a
hybrid that escapes classical local minima with Grover measurements)
under precise oracle-query accounting.
"""

from .algorithms import (
    AlgorithmState,
    RunRecord,
    dh_minimize,
    gas_minimize,
    hybrid_minimize,
    termination_met,
)
from .bench import (
    ExperimentConfig,
    PerformanceCurve,
    SummaryStats,
    performance_curve,
    run_batch,
    summarize,
)
from .grid import GridSpec
from .localopt import LocalOptimizerConfig, LocalResult, minimize_local
from .oracle import DiscretizedObjective, EffortLedger
from .qsearch import (
    BbhtParams,
    amplitude_recurrence_probability,
    bbht_search,
    measure,
    success_probability,
)
from .testbed import (
    FUNCTIONS,
    ArityError,
    BoxDomain,
    DomainError,
    TestFunction,
    reference_global_min,
)

__version__ = "0.1.0"

__all__ = [
    "AlgorithmState",
    "ArityError",
    "BbhtParams",
    "BoxDomain",
    "DiscretizedObjective",
    "DomainError",
    "EffortLedger",
    "ExperimentConfig",
    "FUNCTIONS",
    "GridSpec",
    "LocalOptimizerConfig",
    "LocalResult",
    "PerformanceCurve",
    "RunRecord",
    "SummaryStats",
    "TestFunction",
    "amplitude_recurrence_probability",
    "bbht_search",
    "dh_minimize",
    "gas_minimize",
    "hybrid_minimize",
    "measure",
    "minimize_local",
    "performance_curve",
    "reference_global_min",
    "run_batch",
    "success_probability",
    "summarize",
    "termination_met",
]
