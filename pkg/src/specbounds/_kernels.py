"""Inner numerical loops for the partition optimizer.

Kept in numba-compatible form (plain floats, preallocated arrays, math.*) so
the whole module can be jitted when numba is installed and still run, slower
but identically, without it.

Conventions shared with :mod:`specbounds.optimizer`:

* kind flag: 0 = generic denominator g(k) = 1 - 2k on [0, 1/2),
             1 = off-diagonal denominator g(k) = 2 - sqrt(1 + 4 k^2) on [0, sqrt(3)/2).
* a partition is an increasing array [0 = k_0 < k_1 < ... < k_n = x] with every
  step obeying (k_{j+1} - k_j) / g(k_j) <= 1/pi,
* the objective is  (1/2) * sum_j arcsin(pi * (k_{j+1} - k_j) / g(k_j)).
"""

from __future__ import annotations

import math

import numpy as np

KIND_GENERIC = 0
KIND_OFF_DIAGONAL = 1

_INV_PI = 1.0 / math.pi
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _gap_fraction(kind: int, k: float) -> float:
    if kind == KIND_GENERIC:
        return 1.0 - 2.0 * k
    return 2.0 - math.sqrt(1.0 + 4.0 * k * k)


def _reach(kind: int, k: float) -> float:
    # Largest admissible right endpoint of a step starting at k.
    return k + _gap_fraction(kind, k) * _INV_PI


def _min_steps(kind: int, x: float) -> int:
    # Greedy maximal steps; k -> reach(k) is strictly increasing, so this is
    # the minimal feasible step count.  Returns -1 if x is out of range.
    if x <= 0.0:
        return 0
    k = 0.0
    n = 0
    while k < x:
        k = _reach(kind, k)
        n += 1
        if n > 10000:
            return -1
    return n


def _fill_scaled(kind: int, c: float, n: int, out: np.ndarray) -> float:
    # Steps proportional to the local gap fraction, scaled by c in (0, 1].
    k = 0.0
    out[0] = 0.0
    for j in range(1, n + 1):
        k = k + c * _gap_fraction(kind, k) * _INV_PI
        out[j] = k
    return k


def _seed_partition(kind: int, x: float, n: int, out: np.ndarray) -> None:
    # Bisect the scale c so the n-step gap-proportional walk lands on x, then
    # snap the endpoint exactly; keeping the upper bracket end preserves
    # feasibility of the final (shrunken) step.
    lo = 0.0
    hi = 1.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if _fill_scaled(kind, mid, n, out) >= x:
            hi = mid
        else:
            lo = mid
    _fill_scaled(kind, hi, n, out)
    out[n] = x


def _objective_value(kind: int, pts: np.ndarray) -> float:
    total = 0.0
    for j in range(pts.shape[0] - 1):
        g = _gap_fraction(kind, pts[j])
        ratio = math.pi * (pts[j + 1] - pts[j]) / g
        if ratio < 0.0:
            ratio = 0.0
        elif ratio > 1.0:
            ratio = 1.0
        total += math.asin(ratio)
    return 0.5 * total


def _local_objective(kind: int, km1: float, k: float, kp1: float) -> float:
    g0 = _gap_fraction(kind, km1)
    r0 = math.pi * (k - km1) / g0
    if r0 < 0.0:
        r0 = 0.0
    elif r0 > 1.0:
        r0 = 1.0
    g1 = _gap_fraction(kind, k)
    r1 = math.pi * (kp1 - k) / g1
    if r1 < 0.0:
        r1 = 0.0
    elif r1 > 1.0:
        r1 = 1.0
    return math.asin(r0) + math.asin(r1)


def _inverse_reach(kind: int, target: float, lo: float, hi: float) -> float:
    # Smallest k in [lo, hi] with reach(k) >= target (reach is increasing);
    # returns the feasible upper end of the final bracket.
    if _reach(kind, lo) >= target:
        return lo
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if _reach(kind, mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def _golden_minimize(kind: int, km1: float, kp1: float, lo: float, hi: float) -> float:
    if hi - lo <= 1e-15:
        return 0.5 * (lo + hi)
    a = lo
    b = hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = _local_objective(kind, km1, c, kp1)
    fd = _local_objective(kind, km1, d, kp1)
    while b - a > 1e-12:
        if fc <= fd:
            b = d
            d = c
            fd = fc
            c = b - _GOLDEN * (b - a)
            fc = _local_objective(kind, km1, c, kp1)
        else:
            a = c
            c = d
            fc = fd
            d = a + _GOLDEN * (b - a)
            fd = _local_objective(kind, km1, d, kp1)
    mid = 0.5 * (a + b)
    # The bracket may have collapsed onto a boundary minimum; compare explicitly.
    fm = _local_objective(kind, km1, mid, kp1)
    fl = _local_objective(kind, km1, lo, kp1)
    fh = _local_objective(kind, km1, hi, kp1)
    best = mid
    fb = fm
    if fl < fb:
        best = lo
        fb = fl
    if fh < fb:
        best = hi
    return best


def _coordinate_descent(
    kind: int, pts: np.ndarray, cycle_tol: float, max_cycles: int
) -> tuple[float, bool]:
    """Cyclic coordinate descent over the interior points, in place.

    Each 1-d subproblem is solved by golden-section search on the exact
    feasible interval of that coordinate.  Terminates when a full cycle
    improves the objective by less than ``cycle_tol``.
    """
    n = pts.shape[0] - 1
    value = _objective_value(kind, pts)
    if n <= 1:
        return value, True
    for _cycle in range(max_cycles):
        for j in range(1, n):
            km1 = pts[j - 1]
            kp1 = pts[j + 1]
            hi = _reach(kind, km1)
            if kp1 < hi:
                hi = kp1
            lo = _inverse_reach(kind, kp1, km1, kp1)
            if lo > hi:
                continue
            cand = _golden_minimize(kind, km1, kp1, lo, hi)
            # Accept only non-increasing moves so each cycle is monotone.
            if _local_objective(kind, km1, cand, kp1) <= _local_objective(
                kind, km1, pts[j], kp1
            ):
                pts[j] = cand
        new_value = _objective_value(kind, pts)
        improvement = value - new_value
        value = new_value
        if improvement < cycle_tol:
            return value, True
    return value, False


def _dp_shortest_path(kind: int, nodes: np.ndarray) -> float:
    """Exact shortest chained-arcsin path over the given grid nodes.

    nodes[0] = 0 and nodes[-1] = x; an edge i -> j (i < j) is admissible when
    the step fits the 1/pi constraint measured at nodes[i].  Returns the
    minimal half-sum, or +inf when no admissible path exists.
    """
    m = nodes.shape[0]
    val = np.full(m, np.inf)
    val[0] = 0.0
    for i in range(m - 1):
        vi = val[i]
        if not np.isfinite(vi):
            continue
        g = _gap_fraction(kind, nodes[i])
        limit = nodes[i] + g * _INV_PI * (1.0 + 1e-12)
        for j in range(i + 1, m):
            if nodes[j] > limit:
                break
            ratio = math.pi * (nodes[j] - nodes[i]) / g
            if ratio > 1.0:
                ratio = 1.0
            cand = vi + math.asin(ratio)
            if cand < val[j]:
                val[j] = cand
    return 0.5 * val[m - 1]


_KERNELS = [
    "_gap_fraction",
    "_reach",
    "_min_steps",
    "_fill_scaled",
    "_seed_partition",
    "_objective_value",
    "_local_objective",
    "_inverse_reach",
    "_golden_minimize",
    "_coordinate_descent",
    "_dp_shortest_path",
]

NUMBA_ENABLED = False
try:  # pragma: no cover - exercised implicitly by import
    import numba

    _ns = globals()
    for _name in _KERNELS:
        _ns[_name] = numba.njit(cache=True)(_ns[_name])
    NUMBA_ENABLED = True
except ImportError:  # pragma: no cover
    pass
