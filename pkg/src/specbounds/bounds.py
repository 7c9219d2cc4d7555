"""Closed-form estimating functions for spectral subspace rotation.

Every evaluator here maps a normalized perturbation strength x (operator norm
of the perturbation divided by the relevant gap length) to an upper bound on
the maximal angle between the unperturbed and perturbed spectral subspaces, in
radians.  The classical Davis-Kahan bounds and the two previously published
off-diagonal bounds (``m_kmm``, ``m_ms``) are closed-form or quadrature-defined;
the two partition-optimized bounds are re-exported from :mod:`.optimizer`
through the same registry interface.

Domains are validity domains of the underlying theorems, not merely domains of
definition of the formulas.  Evaluation outside a domain raises ``ValueError``
-- silent extrapolation would defeat the point of a rigorous bound.  Right
endpoints get a small guard band so that arcsin arguments and denominators
stay clear of roundoff-induced singularities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator, Union

from .errors import ConvergenceError
from .optimizer import (
    COMPARABLE_STEP_CAP,
    DOMAIN_GUARD,
    DenominatorKind,
    estimating_function,
    kappa_max,
)

__all__ = [
    "BoundKind",
    "BoundFunction",
    "ShiftBound",
    "dk_sin2theta",
    "generic_sin2theta",
    "dk_tan2theta",
    "apriori_tantheta",
    "m_kmm",
    "m_ms",
    "optimized_generic",
    "optimized_off_diagonal",
    "epsilon_shift",
    "epsilon_shift_closed_form",
    "adaptive_simpson",
    "kmm_saturation_point",
    "ms_saturation_point",
    "bound_function",
    "all_bound_functions",
]

HALF_PI = math.pi / 2.0
SQRT2 = math.sqrt(2.0)
SQRT3_HALF = math.sqrt(3.0) / 2.0

# Guard band subtracted from half-open right endpoints before admitting x.
EDGE_GUARD = 1e-9
# The m_ms integrand has a pole at sqrt(3)/2; stay further away from it.
MS_EDGE_GUARD = 1e-6

SIMPSON_TOL = 1e-12
SIMPSON_MAX_DEPTH = 60
# Children normally get half the parent's error budget (keeps the sum of leaf
# errors under the requested tolerance), but the budget never drops below this
# floor.  Without it, integrands with a pole just past the interval end drive
# the budget, the mesh, and the recursion depth down together and the node
# count explodes; with it, the worst admissible m_ms input costs a few
# thousand nodes and the total error stays below ~4e-12.
SIMPSON_TOL_FLOOR = 1e-15


class BoundKind(Enum):
    """Identifies one estimating function; values double as CLI names."""

    DK_SIN2 = "dk_sin2"
    GENERIC_SIN2 = "gen_sin2"
    DK_TAN2 = "dk_tan2"
    APRIORI_TAN = "tan"
    KMM = "kmm"
    MS = "ms"
    GEN_OPT = "gen_opt"
    OFF_OPT = "off_opt"


def _admit(x: float, x_max: float, label: str, *, closed: bool = False,
           guard: float = EDGE_GUARD) -> None:
    """Reject x outside [0, x_max) (or [0, x_max] when closed)."""
    if not math.isfinite(x):
        raise ValueError(f"{label}: strength must be finite, got {x!r}")
    if x < 0.0:
        raise ValueError(f"{label}: strength must be nonnegative, got {x!r}")
    if closed:
        if x > x_max:
            raise ValueError(
                f"{label}: strength {x!r} exceeds the validity endpoint {x_max!r}"
            )
    elif x > x_max - guard:
        raise ValueError(
            f"{label}: strength {x!r} is at or beyond the open endpoint "
            f"{x_max!r} (guard band {guard:g})"
        )


def dk_sin2theta(x: float) -> float:
    """Davis-Kahan sin2θ bound ½·arcsin(2x), valid for x in [0, ½)."""
    _admit(x, 0.5, "dk_sin2theta")
    return 0.5 * math.asin(2.0 * x)


def generic_sin2theta(x: float) -> float:
    """Generic sin2θ bound ½·arcsin(πx), valid for x in [0, 1/π].

    The right endpoint is attained (value π/4), so the domain is closed there,
    unlike every other bound in this module.
    """
    _admit(x, 1.0 / math.pi, "generic_sin2theta", closed=True)
    return 0.5 * math.asin(min(1.0, math.pi * x))


def dk_tan2theta(x: float) -> float:
    """Davis-Kahan tan2θ bound ½·arctan(2x); valid for every x ≥ 0."""
    if not math.isfinite(x) or x < 0.0:
        raise ValueError(f"dk_tan2theta: strength must be finite and >= 0, got {x!r}")
    return 0.5 * math.atan(2.0 * x)


def apriori_tantheta(x: float) -> float:
    """Optimal a-priori bound arctan(x) for gapped sign-definite splittings.

    Valid for x in [0, √2).
    """
    _admit(x, SQRT2, "apriori_tantheta")
    return math.atan(x)


def m_kmm(x: float) -> float:
    """arcsin-type off-diagonal bound arcsin(min{1, πx/(3 − √(1+4x²))}).

    Valid for x in [0, √3/2).  Saturates at exactly π/2 once the inner
    argument reaches 1 (see :func:`kmm_saturation_point`).
    """
    _admit(x, SQRT3_HALF, "m_kmm")
    ratio = math.pi * x / (3.0 - math.sqrt(1.0 + 4.0 * x * x))
    return math.asin(min(1.0, ratio))


def kmm_saturation_point() -> float:
    """Strength past which :func:`m_kmm` equals π/2.

    Positive root of πx = 3 − √(1+4x²), i.e. of (4−π²)x² + 6πx − 8 = 0.
    """
    return (3.0 * math.pi - math.sqrt(math.pi * math.pi + 32.0)) / (
        math.pi * math.pi - 4.0
    )


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    tol: float = SIMPSON_TOL,
    max_depth: int = SIMPSON_MAX_DEPTH,
) -> float:
    """Integrate f on [a, b] by adaptive Simpson bisection.

    Absolute-tolerance control with the usual 1/15 Richardson error estimate.
    Raises :class:`ConvergenceError` if the requested tolerance is not met
    within ``max_depth`` levels of bisection.
    """
    if not (math.isfinite(a) and math.isfinite(b)) or b < a:
        raise ValueError(f"bad integration interval [{a!r}, {b!r}]")
    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    mid = 0.5 * (a + b)
    fm = f(mid)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_branch(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _simpson_branch(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    err = left + right - whole
    if abs(err) <= 15.0 * tol:
        return left + right + err / 15.0
    if depth <= 0:
        raise ConvergenceError(
            f"adaptive Simpson did not reach tolerance {tol:g} on "
            f"[{a:.6g}, {b:.6g}]"
        )
    half = max(0.5 * tol, SIMPSON_TOL_FLOOR)
    return _simpson_branch(
        f, a, m, fa, flm, fm, left, half, depth - 1
    ) + _simpson_branch(f, m, b, fm, frm, fb, right, half, depth - 1)


def _ms_integrand(t: float) -> float:
    return 1.0 / (2.0 - math.sqrt(1.0 + 4.0 * t * t))


def m_ms(x: float) -> float:
    """Quadrature-defined bound (π/2)·min{1, ∫₀ˣ dτ/(2 − √(1+4τ²))}.

    Valid for x in [0, √3/2); the integrand has a pole at √3/2, so strengths
    within ``MS_EDGE_GUARD`` of it are rejected rather than integrated.  The
    min clamp makes the value exactly π/2 once the integral reaches 1, which
    happens at :func:`ms_saturation_point` ≈ 0.675989, well inside the domain.
    """
    _admit(x, SQRT3_HALF, "m_ms", guard=MS_EDGE_GUARD)
    if x == 0.0:
        return 0.0
    integral = adaptive_simpson(_ms_integrand, 0.0, x)
    return HALF_PI * min(1.0, integral)


def ms_saturation_point(*, x_tol: float = 1e-9) -> float:
    """Strength at which :func:`m_ms` first reaches π/2.

    Bisection of the (strictly increasing) integral against 1.
    """
    lo = 0.0
    hi = SQRT3_HALF - MS_EDGE_GUARD
    if adaptive_simpson(_ms_integrand, 0.0, hi) <= 1.0:
        raise ConvergenceError("m_ms never saturates inside its domain")
    while hi - lo > x_tol:
        mid = 0.5 * (lo + hi)
        if adaptive_simpson(_ms_integrand, 0.0, mid) < 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def optimized_generic(x: float) -> float:
    """Partition-optimized generic bound (capped at π/2), x in [0, ½)."""
    return estimating_function(x, DenominatorKind.GENERIC).capped_value


def optimized_off_diagonal(x: float) -> float:
    """Partition-optimized off-diagonal bound (capped at π/2), x in [0, √3/2)."""
    return estimating_function(x, DenominatorKind.OFF_DIAGONAL).capped_value


def optimized_off_diagonal_comparable(x: float) -> float:
    """Step-capped off-diagonal bound matching the published partial optimum."""
    return estimating_function(
        x, DenominatorKind.OFF_DIAGONAL, max_steps=COMPARABLE_STEP_CAP
    ).capped_value


@dataclass(frozen=True)
class ShiftBound:
    """Enclosure radius ε for the perturbed spectrum's excursion into the gap.

    ``epsilon`` is ‖V‖·tan(½·arctan(2‖V‖/d)) where d is the unperturbed gap
    length.  It satisfies ε < d/2 whenever ‖V‖ < (√3/2)·d, and ε = 0 exactly
    when the perturbation vanishes.
    """

    norm_v: float
    d: float
    epsilon: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.d) and self.d > 0.0):
            raise ValueError(f"gap length must be positive, got {self.d!r}")
        if not (math.isfinite(self.norm_v) and self.norm_v >= 0.0):
            raise ValueError(f"perturbation norm must be >= 0, got {self.norm_v!r}")
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0.0):
            raise ValueError(f"shift radius must be >= 0, got {self.epsilon!r}")
        if self.norm_v == 0.0 and self.epsilon != 0.0:
            raise ValueError("shift radius must vanish with the perturbation")

    @property
    def stays_inside_half_gap(self) -> bool:
        return self.epsilon < 0.5 * self.d


def epsilon_shift(norm_v: float, d: float) -> ShiftBound:
    """Spectral-shift radius ε = ‖V‖·tan(½·arctan(2‖V‖/d)).

    Defined for every ‖V‖ ≥ 0 and d > 0.  Equal (as an identity, verified in
    the test suite to 1e-12·d) to :func:`epsilon_shift_closed_form`.
    """
    if not (math.isfinite(d) and d > 0.0):
        raise ValueError(f"gap length must be positive, got {d!r}")
    if not (math.isfinite(norm_v) and norm_v >= 0.0):
        raise ValueError(f"perturbation norm must be >= 0, got {norm_v!r}")
    eps = norm_v * math.tan(0.5 * math.atan2(2.0 * norm_v, d))
    return ShiftBound(norm_v=norm_v, d=d, epsilon=eps)


def epsilon_shift_closed_form(norm_v: float, d: float) -> float:
    """Half-angle resolution of the shift radius: (√(d² + 4‖V‖²) − d)/2."""
    return 0.5 * (math.hypot(d, 2.0 * norm_v) - d)


@dataclass(frozen=True)
class BoundFunction:
    """One estimating function together with its validity domain.

    ``x_max`` is the right end of the domain (``math.inf`` for the tan2θ
    bound); ``closed_right`` marks the single bound whose endpoint is
    attained.  ``admits`` applies the same guard-band rule the evaluator
    itself enforces, so callers can pre-filter grids without try/except.
    """

    kind: BoundKind
    evaluator: Callable[[float], float]
    x_max: float
    label: str
    closed_right: bool = False
    guard: float = EDGE_GUARD

    @property
    def name(self) -> str:
        return self.kind.value

    def admits(self, x: float) -> bool:
        if not math.isfinite(x) or x < 0.0:
            return False
        if self.closed_right:
            return x <= self.x_max
        return x < self.x_max - self.guard

    def __call__(self, x: float) -> float:
        return self.evaluator(x)


_REGISTRY = {
    BoundKind.DK_SIN2: BoundFunction(
        BoundKind.DK_SIN2, dk_sin2theta, 0.5, "Davis-Kahan sin2θ"
    ),
    BoundKind.GENERIC_SIN2: BoundFunction(
        BoundKind.GENERIC_SIN2,
        generic_sin2theta,
        1.0 / math.pi,
        "generic sin2θ",
        closed_right=True,
    ),
    BoundKind.DK_TAN2: BoundFunction(
        BoundKind.DK_TAN2, dk_tan2theta, math.inf, "Davis-Kahan tan2θ"
    ),
    BoundKind.APRIORI_TAN: BoundFunction(
        BoundKind.APRIORI_TAN, apriori_tantheta, SQRT2, "a-priori tanθ"
    ),
    BoundKind.KMM: BoundFunction(
        BoundKind.KMM, m_kmm, SQRT3_HALF, "KMM arcsin bound"
    ),
    BoundKind.MS: BoundFunction(
        BoundKind.MS, m_ms, SQRT3_HALF, "MS integral bound", guard=MS_EDGE_GUARD
    ),
    BoundKind.GEN_OPT: BoundFunction(
        BoundKind.GEN_OPT,
        optimized_generic,
        kappa_max(DenominatorKind.GENERIC),
        "optimized generic bound",
        guard=DOMAIN_GUARD,
    ),
    BoundKind.OFF_OPT: BoundFunction(
        BoundKind.OFF_OPT,
        optimized_off_diagonal,
        kappa_max(DenominatorKind.OFF_DIAGONAL),
        "optimized off-diagonal bound",
        guard=DOMAIN_GUARD,
    ),
}

_BY_NAME = {bf.name: bf for bf in _REGISTRY.values()}


def bound_function(which: Union[BoundKind, str]) -> BoundFunction:
    """Look up a registered bound by kind or by CLI name."""
    if isinstance(which, BoundKind):
        return _REGISTRY[which]
    try:
        return _BY_NAME[which]
    except KeyError:
        known = ", ".join(sorted(_BY_NAME))
        raise ValueError(f"unknown bound function {which!r}; known: {known}") from None


def all_bound_functions() -> Iterator[BoundFunction]:
    return iter(_REGISTRY.values())
