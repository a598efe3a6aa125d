"""Continuous test functions for global optimization benchmarks.

Ten classic testbed functions with box domains, vectorized evaluators,
analytic gradients, and reference minima where they are known in closed
form. Each function is implemented exactly in its conventional printed
form, including sign conventions that place minima on the domain boundary
(Raydan, Schwefel on [-20, 20]) and index conventions that make some
low-arity cases degenerate (Rosenbrock and Michalewicz collapse to a
constant for one variable).

All functions are addressable by lowercase name through ``FUNCTIONS``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .grid import GridSpec


class DomainError(ValueError):
    """Point lies outside the function's box domain."""


class ArityError(ValueError):
    """Requested number of variables is not supported."""


@dataclass(frozen=True, eq=False)
class BoxDomain:
    """Axis-aligned box of valid inputs."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float)
        hi = np.array(self.upper, dtype=float)
        if lo.ndim != 1 or lo.shape != hi.shape or lo.size < 1:
            raise ValueError("bounds must be 1-d arrays of equal, nonzero length")
        if not np.all(lo < hi):
            raise ValueError("each lower bound must be strictly below its upper bound")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def n(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, x: np.ndarray, rel_slack: float = 1e-9) -> bool:
        slack = rel_slack * self.width
        return bool(np.all(x >= self.lower - slack) and np.all(x <= self.upper + slack))

    def clamp(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)


@dataclass(frozen=True)
class ReferenceMin:
    """A known global minimum: value, location, and where it comes from."""

    value: float
    site: tuple
    provenance: str


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A named objective with one shared (lo, hi) bound per axis.

    ``batch`` maps an (m, n) array of points to an (m,) array of values.
    ``grad`` returns the analytic gradient at a single point; when it is
    None the gradient falls back to central finite differences with step
    1e-6 times the axis width.
    """

    name: str
    bounds: tuple
    batch: Callable[[np.ndarray], np.ndarray]
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    arity_range: frozenset = frozenset({1, 2, 3})
    minima: Mapping[int, ReferenceMin] = field(default_factory=dict)
    degenerate_arities: frozenset = frozenset()

    def _check_arity(self, n: int):
        if n not in self.arity_range:
            raise ArityError(
                f"{self.name} supports n in {sorted(self.arity_range)}, got {n}"
            )

    def domain_for(self, n: int) -> BoxDomain:
        self._check_arity(n)
        lo, hi = self.bounds
        return BoxDomain(np.full(n, lo), np.full(n, hi))

    def eval(self, x) -> float:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        self._check_arity(x.size)
        if not self.domain_for(x.size).contains(x):
            raise DomainError(f"point {x.tolist()} outside domain of {self.name}")
        return float(self.batch(x[np.newaxis, :])[0])

    def eval_batch(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.ndim != 2:
            raise ValueError("expected an (m, n) array of points")
        self._check_arity(points.shape[1])
        return np.asarray(self.batch(points), dtype=float)

    def gradient(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        self._check_arity(x.size)
        if self.grad is not None:
            return np.asarray(self.grad(x), dtype=float)
        return self._fd_gradient(x)

    def _fd_gradient(self, x: np.ndarray) -> np.ndarray:
        lo, hi = self.bounds
        h = 1e-6 * (hi - lo)
        g = np.empty_like(x)
        for k in range(x.size):
            xp = x.copy()
            xm = x.copy()
            xp[k] = min(x[k] + h, hi)
            xm[k] = max(x[k] - h, lo)
            g[k] = (self.eval(xp) - self.eval(xm)) / (xp[k] - xm[k])
        return g

    def reference_min(self, n: int) -> Optional[ReferenceMin]:
        self._check_arity(n)
        return self.minima.get(n)


# ---------------------------------------------------------------------------
# Evaluators and gradients

def _neumaier(x: np.ndarray) -> np.ndarray:
    """Neumaier (Trid): sum of (x_i - 1)^2 minus adjacent products."""
    return ((x - 1.0) ** 2).sum(axis=1) - (x[:, 1:] * x[:, :-1]).sum(axis=1)


def _neumaier_grad(x: np.ndarray) -> np.ndarray:
    g = 2.0 * (x - 1.0)
    g[1:] -= x[:-1]
    g[:-1] -= x[1:]
    return g


def _griewank(x: np.ndarray) -> np.ndarray:
    """Griewank: quadratic bowl plus a product-of-cosines ripple; min 0 at 0."""
    scale = np.sqrt(np.arange(1.0, x.shape[1] + 1.0))
    return (x**2).sum(axis=1) / 4000.0 - np.cos(x / scale).prod(axis=1) + 1.0


def _griewank_grad(x: np.ndarray) -> np.ndarray:
    n = x.size
    scale = np.sqrt(np.arange(1.0, n + 1.0))
    c = np.cos(x / scale)
    g = x / 2000.0
    for k in range(n):
        rest = np.prod(np.delete(c, k))
        g[k] += np.sin(x[k] / scale[k]) / scale[k] * rest
    return g


def _rosenbrock(x: np.ndarray) -> np.ndarray:
    """Rosenbrock valley; the sum is empty (constant 0) for one variable."""
    a = x[:, :-1]
    b = x[:, 1:]
    return ((1.0 - a) ** 2 + 100.0 * (b - a**2) ** 2).sum(axis=1)


def _rosenbrock_grad(x: np.ndarray) -> np.ndarray:
    g = np.zeros_like(x)
    a = x[:-1]
    b = x[1:]
    g[:-1] += -2.0 * (1.0 - a) - 400.0 * a * (b - a**2)
    g[1:] += 200.0 * (b - a**2)
    return g


def _dejong(x: np.ndarray) -> np.ndarray:
    """De Jong sphere; min 0 at the origin."""
    return (x**2).sum(axis=1)


def _dejong_grad(x: np.ndarray) -> np.ndarray:
    return 2.0 * x


def _ackley(x: np.ndarray) -> np.ndarray:
    """Ackley: exponential well plus cosine ripple; min 0 at the origin."""
    n = x.shape[1]
    radial = np.sqrt((x**2).sum(axis=1) / n)
    return (
        -20.0 * np.exp(-0.2 * radial)
        - np.exp(np.cos(2.0 * np.pi * x).sum(axis=1) / n)
        + 20.0
        + math.e
    )


def _ackley_grad(x: np.ndarray) -> np.ndarray:
    n = x.size
    radial = math.sqrt(float((x**2).sum()) / n)
    ripple = np.exp(np.cos(2.0 * np.pi * x).sum() / n)
    g = ripple * (2.0 * np.pi / n) * np.sin(2.0 * np.pi * x)
    if radial > 0.0:
        g += 4.0 * np.exp(-0.2 * radial) * x / (n * radial)
    return g


def _schwefel(x: np.ndarray) -> np.ndarray:
    """Schwefel on [-20, 20]; the minimum sits on the lower boundary."""
    return -(x * np.sin(np.sqrt(np.abs(x)))).sum(axis=1)


def _schwefel_grad(x: np.ndarray) -> np.ndarray:
    root = np.sqrt(np.abs(x))
    # d/dx [x sin(sqrt|x|)] = sin(sqrt|x|) + (sqrt|x|/2) cos(sqrt|x|), odd in x
    return -(np.sin(root) + 0.5 * root * np.cos(root))


def _rastrigin(x: np.ndarray) -> np.ndarray:
    """Rastrigin; min 0 at the origin."""
    return (x**2 - 10.0 * np.cos(2.0 * np.pi * x) + 10.0).sum(axis=1)


def _rastrigin_grad(x: np.ndarray) -> np.ndarray:
    return 2.0 * x + 20.0 * np.pi * np.sin(2.0 * np.pi * x)


def _raydan(x: np.ndarray) -> np.ndarray:
    """Raydan with a leading minus, so the minimum is at the upper corner."""
    w = np.arange(1.0, x.shape[1] + 1.0) / 10.0
    return -(w * (np.exp(x) - x)).sum(axis=1)


def _raydan_grad(x: np.ndarray) -> np.ndarray:
    w = np.arange(1.0, x.size + 1.0) / 10.0
    return -w * (np.exp(x) - 1.0)


DEFAULT_MICHALEWICZ_STEEPNESS = 10

# Shekel-5 coefficients rescaled linearly onto [-1, 1] via a -> (a - 5) / 5.
DEFAULT_SHEKEL_CENTERS = (
    (-0.2, -0.2, -0.2, -0.2),
    (-0.8, -0.8, -0.8, -0.8),
    (0.6, 0.6, 0.6, 0.6),
    (0.2, 0.2, 0.2, 0.2),
    (-0.4, 0.4, -0.4, 0.4),
)
DEFAULT_SHEKEL_WEIGHTS = (0.1, 0.2, 0.2, 0.4, 0.4)


def make_michalewicz(steepness: int = DEFAULT_MICHALEWICZ_STEEPNESS) -> TestFunction:
    """Michalewicz with axis-index-weighted oscillation.

    The oscillation argument is scaled by the zero-based axis index, so the
    first axis contributes nothing and the one-variable case is identically
    zero.
    """

    def batch(x: np.ndarray) -> np.ndarray:
        idx = np.arange(x.shape[1], dtype=float)
        return -(np.sin(x) * np.sin(idx * x**2 / np.pi) ** (2 * steepness)).sum(axis=1)

    def grad(x: np.ndarray) -> np.ndarray:
        idx = np.arange(x.size, dtype=float)
        s = np.sin(idx * x**2 / np.pi)
        c = np.cos(idx * x**2 / np.pi)
        return -(
            np.cos(x) * s ** (2 * steepness)
            + np.sin(x)
            * 2.0
            * steepness
            * s ** (2 * steepness - 1)
            * c
            * (2.0 * idx * x / np.pi)
        )

    return TestFunction("michalewicz", (0.0, 10.0), batch, grad)


def make_shekel(
    centers=DEFAULT_SHEKEL_CENTERS, weights=DEFAULT_SHEKEL_WEIGHTS
) -> TestFunction:
    """Shekel as a sum of positive peaks 1 / (c_i + |x - a_i|^2).

    All values are positive, so the smallest values (the minima of this
    form) lie far from every center.
    """
    a = np.array(centers, dtype=float)
    c = np.array(weights, dtype=float)
    if a.ndim != 2 or c.shape != (a.shape[0],):
        raise ValueError("centers must be (terms, dims) and weights (terms,)")
    max_n = a.shape[1]

    def batch(x: np.ndarray) -> np.ndarray:
        n = x.shape[1]
        out = np.zeros(x.shape[0])
        for i in range(a.shape[0]):
            out += 1.0 / (c[i] + ((x - a[i, :n]) ** 2).sum(axis=1))
        return out

    def grad(x: np.ndarray) -> np.ndarray:
        n = x.size
        g = np.zeros(n)
        for i in range(a.shape[0]):
            diff = x - a[i, :n]
            denom = c[i] + float((diff**2).sum())
            g += -2.0 * diff / denom**2
        return g

    return TestFunction(
        "shekel",
        (-1.0, 1.0),
        batch,
        grad,
        arity_range=frozenset(range(1, max_n + 1)) & frozenset({1, 2, 3}),
    )


def _origin_min(n: int) -> ReferenceMin:
    return ReferenceMin(0.0, (0.0,) * n, "analytic")


FUNCTIONS: dict[str, TestFunction] = {
    fn.name: fn
    for fn in (
        TestFunction(
            "neumaier",
            (0.0, 4.0),
            _neumaier,
            _neumaier_grad,
            minima={
                1: ReferenceMin(0.0, (1.0,), "analytic"),
                2: ReferenceMin(-2.0, (2.0, 2.0), "analytic"),
                3: ReferenceMin(-7.0, (3.0, 4.0, 3.0), "analytic"),
            },
        ),
        TestFunction(
            "griewank",
            (-40.0, 40.0),
            _griewank,
            _griewank_grad,
            minima={n: _origin_min(n) for n in (1, 2, 3)},
        ),
        make_shekel(),
        TestFunction(
            "rosenbrock",
            (-30.0, 30.0),
            _rosenbrock,
            _rosenbrock_grad,
            minima={n: ReferenceMin(0.0, (1.0,) * n, "analytic") for n in (2, 3)},
            degenerate_arities=frozenset({1}),
        ),
        make_michalewicz(),
        TestFunction(
            "dejong",
            (-5.12, 5.12),
            _dejong,
            _dejong_grad,
            minima={n: _origin_min(n) for n in (1, 2, 3)},
        ),
        TestFunction(
            "ackley",
            (-15.0, 20.0),
            _ackley,
            _ackley_grad,
            minima={n: _origin_min(n) for n in (1, 2, 3)},
        ),
        TestFunction("schwefel", (-20.0, 20.0), _schwefel, _schwefel_grad),
        TestFunction(
            "rastrigin",
            (-5.12, 5.12),
            _rastrigin,
            _rastrigin_grad,
            minima={n: _origin_min(n) for n in (1, 2, 3)},
        ),
        TestFunction("raydan", (-5.12, 5.12), _raydan, _raydan_grad),
    )
}


def evaluate(fn: TestFunction, x) -> float:
    """Evaluate ``fn`` at a point inside its domain."""
    return fn.eval(x)


def reference_global_min(fn: TestFunction, n: int, grid: "GridSpec") -> tuple[int, float]:
    """Exhaustively scan every grid point and return (index, value) of the
    smallest objective value, ties broken by the smallest index."""
    fn._check_arity(n)
    if grid.n != n:
        raise ArityError(f"grid has {grid.n} axes, expected {n}")
    best_idx = -1
    best_val = math.inf
    chunk = 1 << 18
    for start in range(0, grid.size, chunk):
        idx = np.arange(start, min(start + chunk, grid.size), dtype=np.int64)
        vals = fn.eval_batch(grid.points_for(idx))
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val = float(vals[k])
            best_idx = int(idx[k])
    return best_idx, best_val
