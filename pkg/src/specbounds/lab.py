"""Randomized verification bench for the subspace variation bounds.

Builds finite Hermitian models realizing the spectral dispositions the bounds
address — an isolated ground state, an eigenvalue cluster inside a finite gap,
interlaced levels, and fully subordinated sets — draws generic or off-diagonal
perturbations of prescribed relative strength, and compares exactly computed
rotation angles of the spectral subspaces against every bound that applies.

Everything is reproducible from 64-bit seeds.  The generator is numpy's PCG64;
scenario shapes, level positions, the random basis hiding the eigenvectors,
and the perturbation direction are all drawn from SeedSequence substreams
(spawn keys (0,) for the basis and (1,) for the perturbation), so a failing
trial can be re-run in isolation from the seed recorded with it.

Finite matrices cannot carry essential spectrum; scenarios stand in for it
with a dense cluster of 5-10 levels spaced d/100 at the top of the complement
set.  The bounds only see the separation d, so this stand-in is faithful.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .bounds import (
    apriori_tantheta,
    dk_sin2theta,
    dk_tan2theta,
    epsilon_shift,
    generic_sin2theta,
    m_kmm,
    m_ms,
)
from .core import (
    HermitianMatrix,
    SpectralPartition,
    OrthogonalProjection,
    eigen_decompose,
    maximal_angle,
    operator_norm,
    select_perturbed_indices,
    spectral_projection,
)
from .errors import ConfigurationError
from .optimizer import DenominatorKind, estimating_function

__all__ = [
    "Layout",
    "PerturbationKind",
    "ScenarioSpec",
    "TrialRecord",
    "VerificationReport",
    "random_scenario",
    "build_unperturbed",
    "build_perturbation",
    "run_trial",
    "verify_bounds",
    "run_regime_suite",
    "ground_state_identity_check",
    "strength_limit",
]

SQRT2 = math.sqrt(2.0)
SQRT3_HALF = math.sqrt(3.0) / 2.0

SCHEMA_VERSION = 1

# Roundoff allowance when comparing a bound against the exact angle.
MARGIN_TOL = 1e-9
# Relative tolerance for spectrum-location checks (enclosures, trapping, gap
# emptiness); eigensolver error on dim <= 40 stays orders of magnitude below.
LOCATION_RTOL = 1e-12
# Essential-spectrum stand-in: cluster size range and spacing in units of d.
CLUSTER_MIN = 5
CLUSTER_MAX = 10
CLUSTER_SPACING = 0.01
# Optimizer sweep depth for per-trial bound evaluation.  Any finite sweep is a
# valid upper bound for the angle (the theorem value is the infimum over
# partitions), so trials trade a slightly looser bound for speed; the full
# sweep's agreement with the dynamic-programming oracle is tested separately.
TRIAL_N_EXTRA = 6


class Layout(Enum):
    """Mutual disposition of the two unperturbed spectral sets."""

    GROUND_STATE = "ground-state"
    FINITE_GAP = "finite-gap"
    INTERLACED = "interlaced"
    SUBORDINATED = "subordinated"


class PerturbationKind(Enum):
    GENERIC = "generic"
    OFF_DIAGONAL = "off-diagonal"


def strength_limit(layout: Layout, kind: PerturbationKind) -> float:
    """Largest relative strength ||V||/d with at least one applicable bound.

    Generic perturbations cap at 1/2 regardless of layout.  Off-diagonal ones
    cap at √2 for a finite gap, √3/2 for the interlaced disposition, and are
    unrestricted (inf) when sigma is subordinated to its complement.
    """
    if kind is PerturbationKind.GENERIC:
        return 0.5
    if layout is Layout.FINITE_GAP:
        return SQRT2
    if layout is Layout.INTERLACED:
        return SQRT3_HALF
    return math.inf


@dataclass(frozen=True)
class ScenarioSpec:
    """One reproducible verification scenario.

    ``strength`` is the target perturbation norm as a multiple of the level
    separation d; ``seed`` drives both the random basis and the perturbation.
    Layout constraints are enforced at construction:

    * GROUND_STATE: a single sigma level strictly below every complement level;
    * SUBORDINATED: all of sigma strictly below all of the complement;
    * FINITE_GAP: complement levels strictly on both sides of sigma's hull and
      none inside it;
    * INTERLACED: sigma occupies exactly the even-indexed merged levels
      E0, E2, ..., E2k (k >= 1), everything else is complement.
    """

    layout: Layout
    sigma_levels: tuple[float, ...]
    complement_levels: tuple[float, ...]
    perturbation: PerturbationKind
    strength: float
    seed: int

    def __post_init__(self) -> None:
        sig = tuple(float(v) for v in self.sigma_levels)
        comp = tuple(float(v) for v in self.complement_levels)
        object.__setattr__(self, "sigma_levels", sig)
        object.__setattr__(self, "complement_levels", comp)
        object.__setattr__(self, "strength", float(self.strength))
        if not sig or not comp:
            raise ConfigurationError("both spectral sets need at least one level")
        levels = sig + comp
        if not all(math.isfinite(v) for v in levels):
            raise ConfigurationError("levels must be finite")
        if len(set(levels)) != len(levels):
            raise ConfigurationError("levels must be pairwise distinct")
        if not (math.isfinite(self.strength) and self.strength >= 0.0):
            raise ConfigurationError(
                f"strength must be a nonnegative multiple of d, got {self.strength!r}"
            )
        self._check_layout(sorted(sig), sorted(comp))

    def _check_layout(self, sig: list, comp: list) -> None:
        if self.layout in (Layout.GROUND_STATE, Layout.SUBORDINATED):
            if self.layout is Layout.GROUND_STATE and len(sig) != 1:
                raise ConfigurationError(
                    "ground-state layout carries exactly one sigma level"
                )
            if sig[-1] >= comp[0]:
                raise ConfigurationError(
                    "sigma must lie strictly below the complement set"
                )
        elif self.layout is Layout.FINITE_GAP:
            below = sum(1 for c in comp if c < sig[0])
            above = sum(1 for c in comp if c > sig[-1])
            if below == 0 or above == 0 or below + above != len(comp):
                raise ConfigurationError(
                    "finite-gap layout needs complement levels strictly on both "
                    "sides of sigma and none inside its hull"
                )
        elif self.layout is Layout.INTERLACED:
            if len(sig) < 2:
                raise ConfigurationError(
                    "interlaced layout needs at least two sigma levels"
                )
            merged = sorted(sig + comp)
            positions = [merged.index(v) for v in sig]
            if positions != list(range(0, 2 * len(sig) - 1, 2)):
                raise ConfigurationError(
                    "interlaced layout puts sigma on the even-indexed levels "
                    "E0, E2, ..., E2k"
                )

    @property
    def dim(self) -> int:
        return len(self.sigma_levels) + len(self.complement_levels)

    @property
    def d(self) -> float:
        """Separation dist(sigma, complement) computed from the exact levels."""
        sv = np.asarray(self.sigma_levels)
        cv = np.asarray(self.complement_levels)
        return float(np.min(np.abs(sv[:, np.newaxis] - cv[np.newaxis, :])))

    @property
    def gap_length(self) -> Optional[float]:
        """Finite-gap width D = min(complement above) - max(complement below)."""
        if self.layout is not Layout.FINITE_GAP:
            return None
        lo = max(c for c in self.complement_levels if c < min(self.sigma_levels))
        hi = min(c for c in self.complement_levels if c > max(self.sigma_levels))
        return hi - lo


def _complement_ladder(rng: np.random.Generator, first: float, count: int,
                       d: float) -> list:
    """Ascending complement levels anchored at ``first`` (pinning the distance
    to sigma), with a dense cluster standing in for essential spectrum on top
    whenever there is room for one."""
    cluster = 0
    if count >= CLUSTER_MIN + 1:
        cluster = int(rng.integers(CLUSTER_MIN, min(CLUSTER_MAX, count - 1) + 1))
    levels = [first]
    for _ in range(count - cluster - 1):
        levels.append(levels[-1] + float(rng.uniform(0.3, 2.2)) * d)
    if cluster:
        base = levels[-1] + float(rng.uniform(1.0, 3.0)) * d
        levels.extend(base + i * (CLUSTER_SPACING * d) for i in range(cluster))
    return levels


def _ascending(rng: np.random.Generator, start: float, count: int, d: float) -> list:
    levels = [start]
    for _ in range(count - 1):
        levels.append(levels[-1] + float(rng.uniform(0.3, 2.2)) * d)
    return levels


def _sample_strength(layout: Layout, kind: PerturbationKind,
                     rng: np.random.Generator) -> float:
    if kind is PerturbationKind.OFF_DIAGONAL and layout is Layout.SUBORDINATED:
        # Subordinated off-diagonal bounds hold for any strength; stress the
        # gap-emptiness claim over two decades around d.
        return float(10.0 ** rng.uniform(-1.0, 1.0))
    limit = strength_limit(layout, kind)
    if not math.isfinite(limit):
        limit = SQRT3_HALF
    # Log-uniform over [0.01, 0.98] of the regime's validity threshold.
    return float(limit * 10.0 ** rng.uniform(-2.0, math.log10(0.98)))


def random_scenario(
    layout: Layout,
    kind: PerturbationKind,
    rng: np.random.Generator,
    *,
    strength: Optional[float] = None,
    dim: Optional[int] = None,
) -> ScenarioSpec:
    """Draw a random scenario of the given regime.

    With ``strength=None`` the relative strength is sampled for the regime
    (log-uniform below its validity threshold); a float pins it.  ``dim``
    defaults to a random total dimension in 2..40 (3..40 for layouts that
    need levels on both sides of sigma).
    """
    min_dim = 2 if layout in (Layout.GROUND_STATE, Layout.SUBORDINATED) else 3
    if dim is None:
        dim = int(rng.integers(min_dim, 41))
    if dim < min_dim:
        raise ConfigurationError(f"{layout.value} layout needs dim >= {min_dim}")
    d = float(10.0 ** rng.uniform(-1.0, 1.0))
    base = float(rng.normal(0.0, 5.0))

    if layout is Layout.GROUND_STATE:
        sigma = [base]
        comp = _complement_ladder(rng, base + d, dim - 1, d)
    elif layout is Layout.SUBORDINATED:
        k = int(rng.integers(1, min(dim - 1, 5) + 1))
        sigma = _ascending(rng, base, k, d)
        comp = _complement_ladder(rng, sigma[-1] + d, dim - k, d)
    elif layout is Layout.FINITE_GAP:
        k = int(rng.integers(1, dim - 1))
        n_below = int(rng.integers(1, dim - k))
        n_above = dim - k - n_below
        sigma = _ascending(rng, base, k, d)
        wide = float(rng.uniform(1.0, 3.0)) * d
        gap_lo, gap_hi = (d, wide) if rng.integers(0, 2) else (wide, d)
        below = [sigma[0] - gap_lo]
        for _ in range(n_below - 1):
            below.append(below[-1] - float(rng.uniform(0.3, 2.2)) * d)
        comp = sorted(below) + _complement_ladder(rng, sigma[-1] + gap_hi,
                                                  n_above, d)
    elif layout is Layout.INTERLACED:
        k = int(rng.integers(1, (dim - 1) // 2 + 1))
        gaps = rng.uniform(1.0, 3.0, 2 * k) * d
        gaps[int(rng.integers(0, 2 * k))] = d
        core = base + np.concatenate(([0.0], np.cumsum(gaps)))
        sigma = [float(v) for v in core[0::2]]
        comp = [float(v) for v in core[1::2]]
        tail = dim - (2 * k + 1)
        if tail:
            comp += _complement_ladder(
                rng, float(core[-1]) + float(rng.uniform(1.0, 3.0)) * d, tail, d
            )
    else:  # pragma: no cover - enum is exhaustive
        raise ConfigurationError(f"unknown layout {layout!r}")

    if strength is None:
        strength = _sample_strength(layout, kind, rng)
    return ScenarioSpec(
        layout=layout,
        sigma_levels=tuple(sigma),
        complement_levels=tuple(comp),
        perturbation=kind,
        strength=float(strength),
        seed=int(rng.integers(0, 2**63)),
    )


def _substream(seed: int, key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                        spawn_key=(key,)))


def _random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (g + g.conj().T) / 2.0


def build_unperturbed(spec: ScenarioSpec) -> tuple:
    """Assemble A = U diag(levels) U* with a seed-drawn random eigenbasis.

    Returns ``(A, partition)`` where the partition indexes the sigma levels
    within the ascending merged spectrum and carries the exact separation d.
    """
    rng = _substream(spec.seed, 0)
    levels = np.sort(np.asarray(spec.sigma_levels + spec.complement_levels))
    basis = eigen_decompose(
        HermitianMatrix(_random_hermitian(rng, levels.size))
    ).eigenvectors
    a = HermitianMatrix((basis * levels) @ basis.conj().T)
    sigma_idx = np.searchsorted(levels, np.sort(np.asarray(spec.sigma_levels)))
    partition = SpectralPartition.from_eigenvalues(levels, sigma_idx)
    return a, partition


def build_perturbation(spec: ScenarioSpec, p: OrthogonalProjection) -> HermitianMatrix:
    """Random perturbation with operator norm spec.strength * d.

    GENERIC draws a dense Hermitian matrix; OFF_DIAGONAL compresses one to
    P W P^perp + P^perp W P, which anticommutes with P - P^perp by
    construction (the residual is checked against 1e-12 * ||V||).
    """
    dim = p.dim
    if dim != spec.dim:
        raise ConfigurationError(
            f"projection dimension {dim} does not match scenario dimension {spec.dim}"
        )
    rng = _substream(spec.seed, 1)
    target = spec.strength * spec.d
    if target == 0.0:
        return HermitianMatrix(np.zeros((dim, dim), dtype=np.complex128))
    w = _random_hermitian(rng, dim)
    if spec.perturbation is PerturbationKind.OFF_DIAGONAL:
        pm = p.matrix
        pc = p.complement().matrix
        w = pm @ w @ pc + pc @ w @ pm
        w = (w + w.conj().T) / 2.0
    base = operator_norm(HermitianMatrix(w))
    if base == 0.0:
        raise ConfigurationError(
            "degenerate draw: the compressed perturbation vanished"
        )
    v = HermitianMatrix(w * (target / base))
    if spec.perturbation is PerturbationKind.OFF_DIAGONAL:
        diff = p.matrix - p.complement().matrix
        anti = v.entries @ diff + diff @ v.entries
        resid = float(np.linalg.norm(anti, 2))
        if resid > 1e-12 * target:
            raise ConfigurationError(
                f"anticommutation residual {resid:.3e} exceeds 1e-12 * ||V||"
            )
    return v


@dataclass(frozen=True)
class TrialRecord:
    """Everything measured in one trial, JSON- and CSV-friendly."""

    index: int
    seed: int
    layout: str
    kind: str
    dim: int
    d: float
    gap_length: Optional[float]
    norm_v: float
    x: float
    theta: float
    bounds: dict
    margins: dict
    min_margin: float
    checks: dict

    @property
    def ok(self) -> bool:
        return self.min_margin >= -MARGIN_TOL and all(self.checks.values())


def _applicable_bounds(layout: Layout, kind: PerturbationKind, x: float) -> dict:
    """Evaluate every bound whose hypotheses the regime satisfies at x.

    The sin2-theta bound with denominator-2 argument requires one spectral
    set to lie in a (finite or infinite) gap of the other; that holds for
    every layout here except the interlaced one, which only gets the
    disposition-free generic bounds.
    """
    out = {}
    if kind is PerturbationKind.GENERIC:
        if layout is not Layout.INTERLACED and x < 0.5:
            out["dk_sin2"] = dk_sin2theta(x)
        if x <= 1.0 / math.pi:
            out["gen_sin2"] = generic_sin2theta(x)
        if x < 0.5 - 1e-6:
            out["gen_opt"] = estimating_function(
                x, DenominatorKind.GENERIC, n_extra=TRIAL_N_EXTRA
            ).capped_value
        return out
    # Off-diagonal: the arcsin-type bounds hold for any disposition; the
    # tan-type ones need their dispositions.
    if x < SQRT3_HALF:
        out["kmm"] = m_kmm(x)
        out["ms"] = m_ms(x)
    if x < SQRT3_HALF - 1e-6:
        out["off_opt"] = estimating_function(
            x, DenominatorKind.OFF_DIAGONAL, n_extra=TRIAL_N_EXTRA
        ).capped_value
    if layout in (Layout.GROUND_STATE, Layout.SUBORDINATED):
        out["dk_tan2"] = dk_tan2theta(x)
    if layout is Layout.FINITE_GAP and x < SQRT2:
        out["tan"] = apriori_tantheta(x)
    return out


def _attribute_sigma(ed_h, partition: SpectralPartition, kind: PerturbationKind,
                     norm_v: float, eps: float, tol: float) -> tuple:
    """Indices of H's eigenvalues attributed to the perturbed sigma set.

    Primary attribution is positional: the perturbed set keeps the sorted
    positions sigma held in spec(A), justified by continuity of the spectrum
    along t -> A + tV while the separating intervals stay open.  Whenever the
    regime's enclosure radius (||V|| generic, epsilon off-diagonal) is below
    d/2, the radius-based selection is computed as a cross-check and any
    disagreement raises ConfigurationError.  ``tol`` pads the radius: the
    enclosures are sharp (a 2x2 model attains the shift exactly), so roundoff
    can land an eigenvalue an ulp past the unpadded boundary.
    """
    positional = partition.sigma_indices
    radius = norm_v if kind is PerturbationKind.GENERIC else eps
    if radius < 0.5 * partition.d - tol:
        by_radius = select_perturbed_indices(ed_h, partition.sigma_values,
                                             radius + tol)
        if tuple(sorted(by_radius)) != tuple(sorted(positional)):
            raise ConfigurationError(
                "enclosure-radius attribution disagrees with the positional one "
                f"(radius {radius:.3e}, positional {positional}, "
                f"radius-based {by_radius})"
            )
    return positional


def run_trial(spec: ScenarioSpec, index: int = 0) -> TrialRecord:
    """Build the scenario, perturb it, and measure everything checkable."""
    a, partition = build_unperturbed(spec)
    ed_a = eigen_decompose(a)
    p = spectral_projection(ed_a, partition.sigma_indices)
    v = build_perturbation(spec, p)
    h = a + v
    ed_h = eigen_decompose(h)

    d = partition.d
    norm_v = operator_norm(v)
    x = norm_v / d
    eps = epsilon_shift(norm_v, d).epsilon if norm_v else 0.0
    scale = max(
        float(np.max(np.abs(ed_a.eigenvalues))),
        float(np.max(np.abs(ed_h.eigenvalues))),
        norm_v,
    )
    tol = LOCATION_RTOL * max(scale, 1.0)

    omega_idx = _attribute_sigma(ed_h, partition, spec.perturbation, norm_v, eps,
                                 tol)
    q = spectral_projection(ed_h, omega_idx)
    theta = maximal_angle(p, q)

    bounds = _applicable_bounds(spec.layout, spec.perturbation, x)
    margins = {name: val - theta for name, val in bounds.items()}
    min_margin = min(margins.values()) if margins else math.inf
    mu = ed_h.eigenvalues
    omega = mu[list(omega_idx)]
    comp_idx = [i for i in range(spec.dim) if i not in set(omega_idx)]
    capital_omega = mu[comp_idx]
    sig_vals = np.asarray(partition.sigma_values)
    comp_vals = np.asarray(partition.complement_values)

    checks = {}
    if spec.perturbation is PerturbationKind.GENERIC:
        # Weyl enclosure: every perturbed eigenvalue within ||V|| of spec(A).
        lam = ed_a.eigenvalues
        drift = np.max(np.min(np.abs(mu[:, np.newaxis] - lam[np.newaxis, :]),
                              axis=1))
        checks["enclosure"] = bool(drift <= norm_v + tol)
    else:
        if norm_v < SQRT3_HALF * d:
            in_sigma = np.max(np.min(np.abs(omega[:, np.newaxis]
                                            - sig_vals[np.newaxis, :]), axis=1))
            in_comp = np.max(np.min(np.abs(capital_omega[:, np.newaxis]
                                           - comp_vals[np.newaxis, :]), axis=1))
            apart = np.min(np.abs(omega[:, np.newaxis]
                                  - capital_omega[np.newaxis, :]))
            checks["enclosure"] = bool(in_sigma <= eps + tol
                                       and in_comp <= eps + tol)
            checks["separation"] = bool(apart >= d - 2.0 * eps - tol)
        if spec.layout in (Layout.GROUND_STATE, Layout.SUBORDINATED):
            lo, hi = min(partition.sigma_values), max(partition.sigma_values)
            top = min(partition.complement_values)
            inside = np.any((mu > hi + tol) & (mu < top - tol))
            checks["gap_empty"] = not bool(inside)
            checks["confinement"] = bool(
                np.all(omega >= lo - eps - tol) and np.all(omega <= hi + tol)
            )
            if spec.layout is Layout.GROUND_STATE:
                e0 = partition.sigma_values[0]
                e0p = float(mu[0])
                checks["trapping"] = bool(e0 - eps - tol <= e0p <= e0 + tol)
        elif spec.layout is Layout.FINITE_GAP and norm_v < SQRT2 * d:
            lo, hi = min(partition.sigma_values), max(partition.sigma_values)
            below = max(c for c in partition.complement_values if c < lo)
            above = min(c for c in partition.complement_values if c > hi)
            clear_lo = not bool(np.any((mu > below + tol) & (mu < lo - eps - tol)))
            clear_hi = not bool(np.any((mu > hi + eps + tol) & (mu < above - tol)))
            checks["gap_empty"] = clear_lo and clear_hi
            checks["confinement"] = bool(
                np.all(omega >= lo - eps - tol) and np.all(omega <= hi + eps + tol)
            )

    return TrialRecord(
        index=index,
        seed=spec.seed,
        layout=spec.layout.value,
        kind=spec.perturbation.value,
        dim=spec.dim,
        d=d,
        gap_length=spec.gap_length,
        norm_v=norm_v,
        x=x,
        theta=theta,
        bounds=bounds,
        margins=margins,
        min_margin=min_margin,
        checks=checks,
    )


@dataclass(frozen=True)
class VerificationReport:
    """Aggregated outcome of a batch of trials."""

    layout: str
    kind: str
    strength: Optional[float]
    trials: int
    seed: int
    records: tuple

    @property
    def failure_count(self) -> int:
        return sum(1 for r in self.records if not r.ok)

    @property
    def min_margin(self) -> float:
        return min((r.min_margin for r in self.records), default=math.inf)

    @property
    def passed(self) -> bool:
        return self.failure_count == 0

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "suite": {
                "layout": self.layout,
                "kind": self.kind,
                "strength": self.strength,
                "trials": self.trials,
                "seed": self.seed,
            },
            "aggregates": {
                "failure_count": self.failure_count,
                "min_margin": _json_float(self.min_margin),
                "passed": self.passed,
            },
            "records": [
                {
                    "index": r.index,
                    "seed": r.seed,
                    "layout": r.layout,
                    "kind": r.kind,
                    "dim": r.dim,
                    "d": r.d,
                    "gap_length": r.gap_length,
                    "norm_v": r.norm_v,
                    "x": r.x,
                    "theta": r.theta,
                    "bounds": r.bounds,
                    "margins": r.margins,
                    "min_margin": _json_float(r.min_margin),
                    "checks": r.checks,
                    "ok": r.ok,
                }
                for r in self.records
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    def to_csv(self) -> str:
        """One row per trial; bound columns empty where inapplicable."""
        names = sorted({n for r in self.records for n in r.bounds})
        head = ["index", "layout", "kind", "dim", "seed", "d", "gap_length",
                "norm_v", "x", "theta", "min_margin", "checks_ok"]
        head += [f"bound_{n}" for n in names]
        lines = [",".join(head)]
        for r in self.records:
            row = [
                str(r.index), r.layout, r.kind, str(r.dim), str(r.seed),
                _csv_float(r.d),
                _csv_float(r.gap_length) if r.gap_length is not None else "",
                _csv_float(r.norm_v), _csv_float(r.x), _csv_float(r.theta),
                _csv_float(r.min_margin) if math.isfinite(r.min_margin) else "",
                "1" if all(r.checks.values()) else "0",
            ]
            row += [_csv_float(r.bounds[n]) if n in r.bounds else "" for n in names]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def _csv_float(v: float) -> str:
    return "%.17g" % v


def _json_float(v: float):
    return v if math.isfinite(v) else None


def verify_bounds(spec: ScenarioSpec, trials: int) -> VerificationReport:
    """Run ``trials`` independent draws of one fixed scenario.

    The levels, layout, and strength stay fixed; the hidden eigenbasis and the
    perturbation direction are redrawn each trial from substreams of
    ``spec.seed``, so the report is a deterministic function of (spec, trials).
    """
    if trials < 1:
        raise ConfigurationError("need at least one trial")
    records = []
    for i in range(trials):
        sub = int(_substream(spec.seed, i).integers(0, 2**63))
        records.append(run_trial(replace(spec, seed=sub), index=i))
    return VerificationReport(
        layout=spec.layout.value,
        kind=spec.perturbation.value,
        strength=spec.strength,
        trials=trials,
        seed=spec.seed,
        records=tuple(records),
    )


def run_regime_suite(
    layout: Layout,
    kind: PerturbationKind,
    trials: int,
    seed: int,
    *,
    strength: Optional[float] = None,
    stress_strength: Optional[float] = None,
    stress_every: int = 4,
) -> VerificationReport:
    """Random-scenario suite: fresh dims, levels, and strengths every trial.

    ``strength=None`` samples per-trial strengths below the regime threshold;
    a float pins the multiple for all trials.  ``stress_strength`` (used by
    the subordinated gap-emptiness stress) replaces every ``stress_every``-th
    trial's strength with the given value.
    """
    if trials < 1:
        raise ConfigurationError("need at least one trial")
    records = []
    for i in range(trials):
        rng = _substream(seed, i)
        s = strength
        if stress_strength is not None and i % stress_every == 0:
            s = stress_strength
        scenario = random_scenario(layout, kind, rng, strength=s)
        records.append(run_trial(scenario, index=i))
    return VerificationReport(
        layout=layout.value,
        kind=kind.value,
        strength=strength,
        trials=trials,
        seed=seed,
        records=tuple(records),
    )


def ground_state_identity_check(trials: int, dim: int, seed: int = 0) -> float:
    """Max deviation of arcsin||P - Q|| from arccos|<psi0|psi0'>|.

    Both sides are computed independently from the eigendecompositions of
    random ground-state instances (random dimension 2..dim per trial, generic
    perturbations below d/2), so agreement is a genuine cross-check of the
    projection, norm, and angle plumbing.
    """
    if dim < 2:
        raise ConfigurationError("need dim >= 2")
    if trials < 1:
        raise ConfigurationError("need at least one trial")
    worst = 0.0
    for i in range(trials):
        rng = _substream(seed, i)
        scenario = random_scenario(
            Layout.GROUND_STATE,
            PerturbationKind.GENERIC,
            rng,
            strength=float(rng.uniform(0.05, 0.45)),
            dim=int(rng.integers(2, dim + 1)),
        )
        a, partition = build_unperturbed(scenario)
        ed_a = eigen_decompose(a)
        p = spectral_projection(ed_a, partition.sigma_indices)
        v = build_perturbation(scenario, p)
        ed_h = eigen_decompose(a + v)
        q = spectral_projection(ed_h, (0,))
        lhs = maximal_angle(p, q)
        overlap = abs(complex(np.vdot(ed_a.eigenvectors[:, 0],
                                      ed_h.eigenvectors[:, 0])))
        rhs = math.acos(min(1.0, overlap))
        worst = max(worst, abs(lhs - rhs))
    return worst
