"""Optimization of chained-arcsin estimating functions.

The quantity of interest is

    M(x) = (1/2) * inf  sum_{j=0}^{n-1} arcsin( pi * (k_{j+1} - k_j) / g(k_j) )

over all n >= 1 and all increasing partitions 0 = k_0 < ... < k_n = x whose
steps obey (k_{j+1} - k_j) / g(k_j) <= 1/pi.  Two denominators are supported:

* GENERIC:       g(k) = 1 - 2k           on [0, 1/2),
* OFF_DIAGONAL:  g(k) = 2 - sqrt(1+4k^2) on [0, sqrt(3)/2).

M is nondecreasing, M(0) = 0, and M(x) grows past pi/2 as x approaches the
right end of the domain; the crossing point M(x) = pi/2 is the threshold below
which the bounded rotation of spectral subspaces is guaranteed.

The minimizer is cyclic coordinate descent (golden-section on each coordinate's
exact feasible interval) swept over step counts n from the minimal feasible
value upward, seeded with gap-proportional partitions.  A dynamic-programming
shortest path over a discretized domain serves as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .errors import ConvergenceError

HALF_PI = math.pi / 2.0

# Right-end guard band: evaluation is refused within 1e-6 of the domain end,
# where the denominator underflows and step counts diverge.
DOMAIN_GUARD = 1e-6
# Step-count sweep: n from n_min to n_min + N_EXTRA, stopping early after
# EARLY_STOP_COUNT consecutive step counts fail to improve by EARLY_STOP_TOL.
N_EXTRA = 25
EARLY_STOP_TOL = 1e-10
EARLY_STOP_COUNT = 3
# Coordinate descent termination: full-cycle improvement below CYCLE_TOL.
CYCLE_TOL = 1e-12
MAX_CYCLES = 5000
# Relative slack accepted on the 1/pi step constraint.
STEP_SLACK = 1e-10
# Default oracle grid for cross-checks.
DEFAULT_ORACLE_GRID = 2000
# Step cap whose capped threshold reproduces the previously published
# partial-optimization constant for the off-diagonal kind (0.692834); the cap
# was calibrated empirically and is unique: caps 4 and 6 land several 1e-3 away.
COMPARABLE_STEP_CAP = 5


class DenominatorKind(Enum):
    GENERIC = "generic"
    OFF_DIAGONAL = "off_diagonal"


_KIND_FLAG = {
    DenominatorKind.GENERIC: _kernels.KIND_GENERIC,
    DenominatorKind.OFF_DIAGONAL: _kernels.KIND_OFF_DIAGONAL,
}
_KAPPA_MAX = {
    DenominatorKind.GENERIC: 0.5,
    DenominatorKind.OFF_DIAGONAL: math.sqrt(3.0) / 2.0,
}


def kappa_max(kind: DenominatorKind) -> float:
    """Right end of the open domain of the denominator g."""
    return _KAPPA_MAX[kind]


def gap_fraction(kind: DenominatorKind, kappa: float) -> float:
    """The denominator g(kappa); positive on [0, kappa_max)."""
    return _kernels._gap_fraction(_KIND_FLAG[kind], float(kappa))


def _check_domain(kind: DenominatorKind, x: float) -> float:
    x = float(x)
    hi = _KAPPA_MAX[kind] - DOMAIN_GUARD
    if not 0.0 <= x <= hi:
        raise ValueError(
            f"x = {x!r} outside [0, {hi!r}] for {kind.value} denominator"
        )
    return x


def min_feasible_steps(kind: DenominatorKind, x: float) -> int:
    """Minimal step count that can reach x (greedy maximal steps from 0)."""
    x = _check_domain(kind, x)
    n = _kernels._min_steps(_KIND_FLAG[kind], x)
    if n < 0:
        raise ValueError(f"x = {x!r} is not reachable")
    return int(n)


@dataclass(frozen=True)
class PartitionPoints:
    """An admissible partition 0 = k_0 < k_1 < ... < k_n = x.

    Exact endpoints and strict monotonicity are enforced on construction; the
    kind-dependent step constraint is checked by :meth:`validate`.
    """

    x: float
    points: tuple[float, ...]

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "x", float(self.x))
        if not pts:
            raise ValueError("partition needs at least one point")
        if pts[0] != 0.0:
            raise ValueError("partition must start exactly at 0")
        if pts[-1] != self.x:
            raise ValueError("partition must end exactly at x")
        if self.x == 0.0:
            if len(pts) != 1:
                raise ValueError("the x = 0 partition is the single point 0")
            return
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("partition points must be strictly increasing")

    @property
    def n(self) -> int:
        return len(self.points) - 1

    def validate(self, kind: DenominatorKind) -> None:
        """Check every step against the 1/pi constraint (small slack allowed)."""
        flag = _KIND_FLAG[kind]
        limit = 1.0 / math.pi * (1.0 + STEP_SLACK)
        for a, b in zip(self.points, self.points[1:]):
            g = _kernels._gap_fraction(flag, a)
            if g <= 0.0:
                raise ValueError(f"partition point {a!r} outside the domain of g")
            if (b - a) / g > limit:
                raise ValueError(
                    f"step {a!r} -> {b!r} violates the 1/pi constraint"
                )


@dataclass(frozen=True)
class OptimizationResult:
    """Outcome of a partition optimization.

    ``value`` is the raw minimized half-sum (not capped); values above pi/2
    carry no subspace information and are exposed capped via ``capped_value``.
    When an oracle value is attached, value <= dp_value + 1e-8 must hold.
    """

    value: float
    partition: PartitionPoints
    n: int
    dp_value: float | None = None
    converged: bool = True

    def __post_init__(self):
        if self.value < 0.0:
            raise ValueError("objective value cannot be negative")
        if self.dp_value is not None and self.value > self.dp_value + 1e-8:
            raise ValueError(
                f"optimized value {self.value!r} exceeds oracle value "
                f"{self.dp_value!r} + 1e-8"
            )

    @property
    def capped(self) -> bool:
        return self.value > HALF_PI

    @property
    def capped_value(self) -> float:
        return min(self.value, HALF_PI)


def objective(partition: PartitionPoints, kind: DenominatorKind) -> float:
    """The half-sum of arcsin terms for an admissible partition."""
    partition.validate(kind)
    if partition.x == 0.0:
        return 0.0
    pts = np.asarray(partition.points, dtype=np.float64)
    return float(_kernels._objective_value(_KIND_FLAG[kind], pts))


def _dedup(points: np.ndarray, x: float) -> tuple[float, ...]:
    # Collapse numerically coincident points (the sweep may park surplus
    # partition points on top of each other); endpoints are preserved.
    kept = [0.0]
    for p in points[1:-1]:
        if p - kept[-1] > 1e-13 and x - p > 1e-13:
            kept.append(float(p))
    kept.append(float(x))
    return tuple(kept)


def optimize_fixed_n(
    x: float,
    kind: DenominatorKind,
    n: int,
    *,
    cycle_tol: float = CYCLE_TOL,
    max_cycles: int = MAX_CYCLES,
) -> OptimizationResult:
    """Best partition with exactly n steps (surplus points may coincide).

    Seeds a gap-proportional partition (plus an equal-spacing one when
    admissible) and runs cyclic coordinate descent on the interior points.
    """
    x = _check_domain(kind, x)
    if x == 0.0:
        return OptimizationResult(
            value=0.0, partition=PartitionPoints(x=0.0, points=(0.0,)), n=0
        )
    flag = _KIND_FLAG[kind]
    n = int(n)
    n_min = min_feasible_steps(kind, x)
    if n < n_min:
        raise ValueError(f"n = {n} cannot reach x = {x!r}; minimum is {n_min}")

    seeds = []
    seed = np.empty(n + 1, dtype=np.float64)
    _kernels._seed_partition(flag, x, n, seed)
    seeds.append(seed)
    if n > 1:
        flat = np.linspace(0.0, x, n + 1)
        steps = np.diff(flat)
        gvals = np.array([_kernels._gap_fraction(flag, p) for p in flat[:-1]])
        if np.all(steps / gvals <= (1.0 / math.pi) * (1.0 + 1e-12)):
            seeds.append(flat)

    best_value = math.inf
    best_pts: np.ndarray | None = None
    converged = False
    for pts in seeds:
        work = pts.copy()
        value, ok = _kernels._coordinate_descent(flag, work, cycle_tol, max_cycles)
        if value < best_value:
            best_value = float(value)
            best_pts = work
            converged = bool(ok)
    assert best_pts is not None
    if not converged:
        raise ConvergenceError(
            f"coordinate descent did not converge within {max_cycles} cycles "
            f"(x = {x!r}, kind = {kind.value}, n = {n})"
        )
    partition = PartitionPoints(x=x, points=_dedup(best_pts, x))
    partition.validate(kind)
    value = objective(partition, kind)
    return OptimizationResult(value=value, partition=partition, n=partition.n)


def estimating_function(
    x: float,
    kind: DenominatorKind,
    *,
    n_extra: int = N_EXTRA,
    max_steps: int | None = None,
    cross_check: bool = False,
    oracle_grid: int = DEFAULT_ORACLE_GRID,
) -> OptimizationResult:
    """M(x): minimize over step counts n_min .. n_min + n_extra.

    The sweep stops early once EARLY_STOP_COUNT consecutive step counts fail
    to improve the best value by EARLY_STOP_TOL.  ``max_steps`` imposes an
    absolute cap on the step count (the restriction stays nondecreasing in x,
    unlike pinning n to the minimal feasible count); it is the comparison mode
    used for reproducing previously published threshold constants.  With
    ``cross_check=True`` the dynamic-programming oracle value is attached to
    the result, which asserts value <= dp_value + 1e-8.
    """
    x = _check_domain(kind, x)
    if n_extra < 0:
        raise ValueError("n_extra must be nonnegative")
    if x == 0.0:
        return OptimizationResult(
            value=0.0, partition=PartitionPoints(x=0.0, points=(0.0,)), n=0
        )
    n_min = min_feasible_steps(kind, x)
    n_hi = n_min + n_extra
    if max_steps is not None:
        if max_steps < 1:
            raise ValueError("max_steps must be positive")
        if n_min > max_steps:
            raise ValueError(
                f"x = {x!r} needs at least {n_min} steps, above the cap {max_steps}"
            )
        n_hi = min(n_hi, max_steps)
    best: OptimizationResult | None = None
    stall = 0
    last_error: ConvergenceError | None = None
    for n in range(n_min, n_hi + 1):
        try:
            result = optimize_fixed_n(x, kind, n)
        except ConvergenceError as exc:
            # A stalled surplus-point configuration; any converged n still
            # yields a valid value, so keep sweeping.
            last_error = exc
            stall += 1
            if stall >= EARLY_STOP_COUNT and best is not None:
                break
            continue
        if best is None or result.value < best.value - EARLY_STOP_TOL:
            best = result
            stall = 0
        else:
            if result.value < best.value:
                best = result
            stall += 1
            if stall >= EARLY_STOP_COUNT:
                break
    if best is None:
        raise last_error or ConvergenceError(
            f"no step count converged for x = {x!r}, kind = {kind.value}"
        )
    if cross_check:
        dp = dp_oracle(x, kind, oracle_grid)
        best = OptimizationResult(
            value=best.value,
            partition=best.partition,
            n=best.n,
            dp_value=dp,
            converged=best.converged,
        )
    return best


def dp_oracle(x: float, kind: DenominatorKind, grid_size: int) -> float:
    """Shortest admissible chained-arcsin path over a uniform grid on [0, x].

    The grid has ``grid_size`` intervals (grid_size + 1 nodes, endpoints
    included), so doubling ``grid_size`` yields a nested refinement and the
    oracle value is nonincreasing under doubling.  The true infimum never
    exceeds this value.  Raises ValueError when no admissible path exists at
    this resolution (grid too coarse for the given x).
    """
    x = _check_domain(kind, x)
    if grid_size < 100:
        raise ValueError("grid_size must be at least 100")
    if x == 0.0:
        return 0.0
    flag = _KIND_FLAG[kind]
    nodes = x * (np.arange(grid_size + 1) / grid_size)
    if _kernels.NUMBA_ENABLED:
        value = float(_kernels._dp_shortest_path(flag, nodes))
    else:
        value = _dp_vectorized(flag, nodes)
    if not math.isfinite(value):
        raise ValueError(
            f"no admissible path on a {grid_size}-interval grid for x = {x!r}; "
            "increase grid_size"
        )
    return value


def _dp_vectorized(flag: int, nodes: np.ndarray) -> float:
    # numpy fallback of _kernels._dp_shortest_path (same recurrence).
    if flag == _kernels.KIND_GENERIC:
        g = 1.0 - 2.0 * nodes
    else:
        g = 2.0 - np.sqrt(1.0 + 4.0 * nodes * nodes)
    m = nodes.shape[0]
    val = np.full(m, np.inf)
    val[0] = 0.0
    inv_pi = 1.0 / math.pi
    for i in range(m - 1):
        vi = val[i]
        if not np.isfinite(vi):
            continue
        limit = nodes[i] + g[i] * inv_pi * (1.0 + 1e-12)
        j_hi = int(np.searchsorted(nodes, limit, side="right"))
        if j_hi <= i + 1:
            continue
        ratio = np.minimum((math.pi / g[i]) * (nodes[i + 1 : j_hi] - nodes[i]), 1.0)
        cand = vi + np.arcsin(ratio)
        np.minimum(val[i + 1 : j_hi], cand, out=val[i + 1 : j_hi])
    return 0.5 * float(val[-1])


def generic_threshold_closed_form() -> float:
    """Closed form ½ − ½(1 − √3/π)³ of the generic critical strength.

    A three-step partition with equal arcsin terms of π/3 realizes it; the
    numerically solved GENERIC threshold must land on this value.
    """
    return 0.5 - 0.5 * (1.0 - math.sqrt(3.0) / math.pi) ** 3


def max_reach(kind: DenominatorKind, n: int) -> float:
    """Largest x reachable with at most n admissible steps from 0."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    flag = _KIND_FLAG[kind]
    k = 0.0
    for _ in range(n):
        k = _kernels._reach(flag, k)
    return min(k, _KAPPA_MAX[kind])


def solve_threshold(
    kind: DenominatorKind,
    target: float,
    *,
    x_tol: float = 1e-6,
    n_extra: int = N_EXTRA,
    max_steps: int | None = None,
    monotonicity_grid: int = 24,
) -> float:
    """Smallest x with M(x) >= target, located by bisection to ``x_tol``.

    M is nondecreasing, which is asserted on a coarse grid before bisecting.
    ``target`` must lie in (0, pi/2]; the interesting case is target = pi/2,
    where M stops carrying subspace information.  ``max_steps`` solves the
    step-capped variant instead (see :func:`estimating_function`).
    """
    if not 0.0 < target <= HALF_PI:
        raise ValueError(f"target must be in (0, pi/2], got {target!r}")
    hi = _KAPPA_MAX[kind] - DOMAIN_GUARD
    if max_steps is not None:
        hi = min(hi, max_reach(kind, max_steps) - DOMAIN_GUARD)

    def value_at(t: float) -> float:
        return estimating_function(
            t, kind, n_extra=n_extra, max_steps=max_steps
        ).value

    # Bracket the crossing by upward probing; this keeps all evaluations away
    # from the far right end of the domain, where step counts diverge.
    lo_x = 0.0
    probe = hi / 8.0
    while True:
        if value_at(probe) >= target:
            hi_x = probe
            break
        lo_x = probe
        if probe >= hi:
            raise ValueError(
                f"M({hi!r}) never reaches target {target!r} on its domain"
            )
        probe = min(probe * 1.25, hi)

    xs = np.linspace(0.0, hi_x, monotonicity_grid)
    values = [value_at(float(t)) for t in xs]
    for a, b in zip(values, values[1:]):
        if b < a - 1e-9:
            raise ValueError(
                "estimating function is not nondecreasing on the check grid"
            )

    while hi_x - lo_x > x_tol:
        mid = 0.5 * (lo_x + hi_x)
        if value_at(mid) >= target:
            hi_x = mid
        else:
            lo_x = mid
    return 0.5 * (lo_x + hi_x)
