"""Local minimization routines with evaluation accounting.

Three routines share one calling convention: ``nmead`` (Nelder-Mead
simplex), ``lbfgs`` (low-storage quasi-Newton with Armijo backtracking),
and ``qmodel`` (a derivative-free diagonal quadratic-model trust-region
method in the spirit of BOBYQA, not bit-compatible with it).

Every objective evaluation is clamped to the box, counted, and charged to
the run's ledger; gradient calls piggyback on the evaluation at the same
point and are not charged separately. Routines stop when their step
resolution drops below the configured tolerance, when progress stalls, or
at the evaluation cap.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .oracle import EffortLedger
from .testbed import BoxDomain, DomainError, TestFunction


@dataclass
class LocalResult:
    """Outcome of a local descent."""

    point: np.ndarray
    value: float
    evaluations: int
    converged: bool


@dataclass(frozen=True)
class LocalOptimizerConfig:
    routine: str = "qmodel"
    tolerance: float = 1e-6
    max_evals: int = 5000

    def __post_init__(self):
        if self.routine not in ROUTINES:
            raise ValueError(f"unknown routine {self.routine!r}, pick from {sorted(ROUTINES)}")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_evals < 3:
            raise ValueError("max_evals must allow at least a few evaluations")

    @classmethod
    def for_grid(cls, grid, routine: str = "qmodel") -> "LocalOptimizerConfig":
        """Defaults tied to the grid: stop at one cell of resolution, and cap
        the budget at 40 * ceil(log2 P)**n evaluations (at most 5000)."""
        budget = 40 * math.ceil(math.log2(grid.points_per_axis)) ** grid.n
        return cls(
            routine=routine,
            tolerance=float(grid.eps.min()),
            max_evals=min(budget, 5000),
        )


class _BudgetExhausted(Exception):
    pass


class _CountingObjective:
    """Clamps query points to the box, charges evaluations, tracks the best.

    A known (point, value) pair may be seeded so that querying that exact
    point returns the caller-supplied value without a fresh charge.
    """

    def __init__(
        self,
        fn: TestFunction,
        domain: BoxDomain,
        ledger: EffortLedger,
        max_evals: int,
        known: Optional[tuple] = None,
    ):
        self.fn = fn
        self.domain = domain
        self.ledger = ledger
        self.max_evals = max_evals
        self.count = 0
        self.best_point = None
        self.best_value = math.inf
        self._known = known  # (point array, value)

    def __call__(self, x) -> float:
        xq = self.domain.clamp(np.asarray(x, dtype=float))
        if self._known is not None and np.array_equal(xq, self._known[0]):
            value = self._known[1]
        else:
            if self.count >= self.max_evals:
                raise _BudgetExhausted
            self.count += 1
            self.ledger.add_evaluations()
            value = self.fn.eval(xq)
        if value < self.best_value:
            self.best_point = xq.copy()
            self.best_value = value
        return value


def minimize_local(
    fn: TestFunction,
    domain: BoxDomain,
    start,
    cfg: LocalOptimizerConfig,
    ledger: EffortLedger,
    start_value: Optional[float] = None,
) -> LocalResult:
    """Descend from ``start`` with the configured routine.

    The returned point is the best point evaluated, so its value never
    exceeds the value at the start. Callers that already paid for the
    value at ``start`` can pass it as ``start_value`` so it is not charged
    a second time.
    """
    start = np.atleast_1d(np.asarray(start, dtype=float))
    if not domain.contains(start):
        raise DomainError(f"start point {start.tolist()} outside the box")
    start = domain.clamp(start)
    known = (start.copy(), float(start_value)) if start_value is not None else None
    obj = _CountingObjective(fn, domain, ledger, cfg.max_evals, known)
    try:
        converged = ROUTINES[cfg.routine](obj, fn, domain, start, cfg)
    except _BudgetExhausted:
        converged = False
    return LocalResult(obj.best_point, obj.best_value, obj.count, converged)


# ---------------------------------------------------------------------------
# Nelder-Mead simplex: reflection 1, expansion 2, contraction 0.5, shrink 0.5.

def _nelder_mead(obj, fn, domain, start, cfg) -> bool:
    n = start.size
    simplex = [start]
    for k in range(n):
        edge = 0.05 * domain.width[k]
        v = start.copy()
        # build the initial simplex inward when the start hugs the boundary
        v[k] = v[k] + edge if v[k] + edge <= domain.upper[k] else v[k] - edge
        simplex.append(v)
    simplex = np.array(simplex)
    fvals = np.array([obj(v) for v in simplex])

    while True:
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        if (simplex.max(axis=0) - simplex.min(axis=0)).max() < cfg.tolerance:
            return True
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        reflected = domain.clamp(centroid + (centroid - worst))
        fr = obj(reflected)
        if fr < fvals[0]:
            expanded = domain.clamp(centroid + 2.0 * (centroid - worst))
            fe = obj(expanded)
            if fe < fr:
                simplex[-1], fvals[-1] = expanded, fe
            else:
                simplex[-1], fvals[-1] = reflected, fr
        elif fr < fvals[-2]:
            simplex[-1], fvals[-1] = reflected, fr
        else:
            if fr < fvals[-1]:
                contracted = domain.clamp(centroid + 0.5 * (reflected - centroid))
            else:
                contracted = domain.clamp(centroid + 0.5 * (worst - centroid))
            fc = obj(contracted)
            if fc < min(fr, fvals[-1]):
                simplex[-1], fvals[-1] = contracted, fc
            else:
                for j in range(1, n + 1):
                    simplex[j] = simplex[0] + 0.5 * (simplex[j] - simplex[0])
                    fvals[j] = obj(simplex[j])


# ---------------------------------------------------------------------------
# Low-storage BFGS, history 5, Armijo backtracking, box projection.

def _two_loop(g, history):
    q = -g
    alphas = []
    for s, y, rho in reversed(history):
        a = rho * (s @ q)
        alphas.append(a)
        q = q - a * y
    if history:
        s, y, _ = history[-1]
        q = q * (s @ y) / (y @ y)
    for (s, y, rho), a in zip(history, reversed(alphas)):
        b = rho * (y @ q)
        q = q + (a - b) * s
    return q


def _lbfgs(obj, fn, domain, start, cfg) -> bool:
    x = start.copy()
    f = obj(x)
    g = fn.gradient(x)
    history: deque = deque(maxlen=5)

    while True:
        if np.abs(g).max() < 1e-12:
            return True
        direction = _two_loop(g, history)
        if direction @ g > -1e-14 * max(1.0, abs(f)):
            history.clear()
            direction = -g
        alpha = 1.0 if history else 1.0 / max(1.0, float(np.abs(g).max()))
        accepted = False
        for _ in range(30):
            candidate = domain.clamp(x + alpha * direction)
            step = candidate - x
            if np.abs(step).max() == 0.0:
                break
            fc = obj(candidate)
            if fc <= f + 1e-4 * float(g @ step):
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            # pinned to the boundary or the model cannot reduce further
            return False
        if np.abs(step).max() < cfg.tolerance:
            return True
        gc = fn.gradient(candidate)
        y = gc - g
        sy = float(step @ y)
        if sy > 1e-12:
            history.append((step, y, 1.0 / sy))
        x, f, g = candidate, fc, gc


# ---------------------------------------------------------------------------
# Diagonal quadratic-model trust region on a 2n+1 point stencil, with radius
# halving on failure. Stencil points persist while they still bracket the
# center along their axis, so Newton refinement inside a bracket costs one
# evaluation per iteration instead of a full resample.

def _aligned(pt: np.ndarray, center: np.ndarray, k: int) -> bool:
    """True when pt differs from center only along axis k."""
    diff = pt != center
    return bool(diff[k]) and diff.sum() == 1


def _qmodel(obj, fn, domain, start, cfg) -> bool:
    n = start.size
    seen: dict = {}

    def ev(pt: np.ndarray) -> float:
        key = pt.tobytes()
        if key not in seen:
            seen[key] = obj(pt)
        return seen[key]

    x = start.copy()
    f = ev(x)
    # a small opening radius keeps the first bracket inside one basin of the
    # multimodal testbed functions; starting at domain scale wastes most of
    # the budget walking the radius back down
    radius = max(0.0125 * float(domain.width.min()), 2.0 * cfg.tolerance)
    radius_max = 0.25 * float(domain.width.min())
    brackets: list = [None] * n  # (minus_pt, f_minus, plus_pt, f_plus) per axis

    while radius >= cfg.tolerance:
        gdiag = np.zeros(n)
        hdiag = np.zeros(n)
        sampled = []
        for k in range(n):
            entry = brackets[k]
            keep = entry is not None
            if keep:
                mp, fm, pp, fp = entry
                keep = (
                    mp[k] < x[k] < pp[k]
                    and pp[k] - mp[k] <= 2.05 * radius
                    and _aligned(mp, x, k)
                    and _aligned(pp, x, k)
                )
            if not keep:
                pp, mp = x.copy(), x.copy()
                pp[k] = min(x[k] + radius, domain.upper[k])
                mp[k] = max(x[k] - radius, domain.lower[k])
                fp = ev(pp) if pp[k] > x[k] else f
                fm = ev(mp) if mp[k] < x[k] else f
                brackets[k] = (mp, fm, pp, fp)
                if pp[k] > x[k]:
                    sampled.append((pp, fp))
                if mp[k] < x[k]:
                    sampled.append((mp, fm))
            else:
                mp, fm, pp, fp = entry
            dp, dm = pp[k] - x[k], x[k] - mp[k]
            if dp > 0 and dm > 0:
                denom = dp * dm * (dp + dm)
                gdiag[k] = (dm * dm * (fp - f) - dp * dp * (fm - f)) / denom
                hdiag[k] = 2.0 * (dm * (fp - f) + dp * (fm - f)) / denom
            elif dp > 0:
                gdiag[k] = (fp - f) / dp
            elif dm > 0:
                gdiag[k] = (f - fm) / dm

        step = np.zeros(n)
        for k in range(n):
            if hdiag[k] > 1e-14:
                step[k] = -gdiag[k] / hdiag[k]
            elif gdiag[k] != 0.0:
                step[k] = -math.copysign(radius, gdiag[k])
        step = np.clip(step, -radius, radius)
        if not sampled and np.abs(step).max() < cfg.tolerance:
            # fresh model says the minimum is within one tolerance of here
            return True
        candidate = domain.clamp(x + step)
        if np.abs(candidate - x).max() > 0.0:
            sampled.append((candidate, ev(candidate)))

        best_pt, best_f = min(sampled, key=lambda pf: pf[1], default=(x, f))
        if best_f < f:
            moved = best_pt - x
            previous, f_previous = x, f
            x, f = best_pt.copy(), best_f
            axes = np.nonzero(moved)[0]
            if axes.size == 1:
                # the old center joins the bracket as the nearest point on
                # the side it now lies
                k = int(axes[0])
                entry = brackets[k]
                if entry is not None:
                    mp, fm, pp, fp = entry
                    if moved[k] > 0:
                        brackets[k] = (previous, f_previous, pp, fp)
                    else:
                        brackets[k] = (mp, fm, previous, f_previous)
            if np.abs(moved).max() >= radius * 0.999:
                radius = min(2.0 * radius, radius_max)
            elif (
                np.abs(moved).max() < cfg.tolerance
                and np.abs(step).max() < cfg.tolerance
            ):
                return True
        else:
            if np.abs(step).max() < cfg.tolerance:
                return True
            radius *= 0.5
    return True


ROUTINES = {
    "nmead": _nelder_mead,
    "lbfgs": _lbfgs,
    "qmodel": _qmodel,
}
