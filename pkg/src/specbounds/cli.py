"""Command-line front end.

Four subcommands:

* ``constants`` — the critical strengths and saturation points, as JSON;
* ``curves``    — sampled bound functions on a grid, as CSV (scaled by 2/pi
  so a saturated bound reads exactly 1, or raw radians on request);
* ``verify``    — randomized verification suites over a chosen regime;
* ``bound``     — evaluate every applicable bound for a user-supplied
  Hermitian matrix pair and compare against the exactly computed angle.

Exit codes are a stable contract: 0 success, 1 a verification or bound
failure (a violated bound, an unattributable spectrum, no applicable bound),
2 a usage error (bad flags, unreadable files, sigma not isolated).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import lab
from .bounds import (
    HALF_PI,
    BoundKind,
    all_bound_functions,
    bound_function,
    epsilon_shift,
    kmm_saturation_point,
    ms_saturation_point,
)
from .core import (
    HermitianMatrix,
    SpectralPartition,
    eigen_decompose,
    maximal_angle,
    operator_norm,
    spectral_projection,
)
from .errors import ConfigurationError, ConvergenceError
from .lab import Layout, PerturbationKind, strength_limit
from .matrixfile import read_matrix_file
from .optimizer import (
    COMPARABLE_STEP_CAP,
    DenominatorKind,
    generic_threshold_closed_form,
    solve_threshold,
)

__all__ = ["main", "CurveGrid"]

SCHEMA_VERSION = 1
SQRT3_HALF = math.sqrt(3.0) / 2.0

# Off-diagonality detection threshold for user-supplied matrices: the
# anticommutator residual relative to ||V||.  Looser than the construction
# gate in the lab because user files went through decimal serialization.
DETECT_RTOL = 1e-10

_DEFAULT_FUNCTIONS = (BoundKind.OFF_OPT, BoundKind.MS, BoundKind.KMM)


@dataclass(frozen=True)
class CurveGrid:
    """Sampling grid for the curve command.

    ``functions`` are bound-function kinds; the grid must satisfy
    0 <= x_min < x_max <= sqrt(3)/2 - 1e-6 and carry at least two points.
    """

    x_min: float
    x_max: float
    points: int
    functions: tuple[BoundKind, ...] = _DEFAULT_FUNCTIONS

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ConfigurationError("grid endpoints must be finite")
        if not 0.0 <= self.x_min < self.x_max <= SQRT3_HALF - 1e-6:
            raise ConfigurationError(
                "grid must satisfy 0 <= x_min < x_max <= sqrt(3)/2 - 1e-6, got "
                f"[{self.x_min!r}, {self.x_max!r}]"
            )
        if self.points < 2:
            raise ConfigurationError(f"need at least 2 points, got {self.points}")
        if not self.functions:
            raise ConfigurationError("need at least one function column")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.points)


def curve_csv(grid: CurveGrid, *, raw_radians: bool = False) -> str:
    """CSV table of the requested bound functions on the grid.

    Values are divided by pi/2 (so saturation prints exactly ``1``) unless
    ``raw_radians``; points outside a function's domain produce empty cells.
    All floats use 17 significant digits, rows end with LF.
    """
    funcs = [bound_function(k) for k in grid.functions]
    lines = ["x," + ",".join(f.name for f in funcs)]
    for x in grid.xs:
        x = float(x)
        cells = ["%.17g" % x]
        for f in funcs:
            if not f.admits(x):
                cells.append("")
                continue
            v = f(x)
            cells.append("%.17g" % (v if raw_radians else v / HALF_PI))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _constant(fn, **meta) -> dict:
    try:
        return {"value": fn(), **meta}
    except (ConvergenceError, ConfigurationError) as exc:
        return {"error": str(exc), **meta}


def constants_report() -> dict:
    """All critical constants with the method that produced each one."""
    return {
        "schema_version": SCHEMA_VERSION,
        "constants": {
            "c_s": _constant(
                generic_threshold_closed_form,
                method="closed form 1/2 - (1 - sqrt(3)/pi)^3 / 2",
            ),
            "generic_threshold": _constant(
                lambda: solve_threshold(DenominatorKind.GENERIC, HALF_PI),
                method="bisection on the optimized generic bound reaching pi/2",
                x_tol=1e-6,
            ),
            "off_threshold": _constant(
                lambda: solve_threshold(DenominatorKind.OFF_DIAGONAL, HALF_PI),
                method=(
                    "bisection on the fully optimized off-diagonal bound "
                    "reaching pi/2"
                ),
                x_tol=1e-6,
            ),
            "off_threshold_capped": _constant(
                lambda: solve_threshold(
                    DenominatorKind.OFF_DIAGONAL,
                    HALF_PI,
                    max_steps=COMPARABLE_STEP_CAP,
                ),
                method=(
                    "bisection on the off-diagonal bound with the partition "
                    "capped at 5 steps"
                ),
                x_tol=1e-6,
                max_steps=COMPARABLE_STEP_CAP,
            ),
            "ms_threshold": _constant(
                ms_saturation_point,
                method="bisection on the quadrature bound's saturation integral",
                x_tol=1e-9,
            ),
            "kmm_saturation": _constant(
                kmm_saturation_point,
                method="closed-form root of the arcsin-argument quadratic",
            ),
        },
    }


def _detect_disposition(sigma_vals: np.ndarray, comp_vals: np.ndarray) -> str:
    """Mutual level order of the two spectral sets.

    ``subordinated``: one set lies entirely below the other (either
    orientation).  ``finite-gap``: one set sits inside a finite gap of the
    other — sigma between complement levels with none inside its hull, or
    the complement confined to a single open gap between consecutive sigma
    levels (the maximal angle is invariant under swapping the subspaces with
    their complements, so the gap theorems apply in both orientations).
    Everything else is the general ``interlaced`` disposition.
    """
    lo, hi = float(np.min(sigma_vals)), float(np.max(sigma_vals))
    below = int(np.sum(comp_vals < lo))
    above = int(np.sum(comp_vals > hi))
    inside = comp_vals.size - below - above
    if inside == 0:
        if below == 0 or above == 0:
            return "subordinated"
        return "finite-gap"
    if below == 0 and above == 0:
        sig = np.sort(sigma_vals)
        gap_of = np.searchsorted(sig, comp_vals)
        if np.all(gap_of == gap_of[0]):
            return "finite-gap"
    return "interlaced"


_DISPOSITION_TO_LAYOUT = {
    "subordinated": Layout.SUBORDINATED,
    "finite-gap": Layout.FINITE_GAP,
    "interlaced": Layout.INTERLACED,
}


def _match_sigma(eigenvalues: np.ndarray, requested: Sequence[float]) -> tuple:
    """Map each requested level to the index of the nearest eigenvalue."""
    indices = []
    for v in requested:
        if not math.isfinite(v):
            raise ConfigurationError(f"sigma level {v!r} is not finite")
        indices.append(int(np.argmin(np.abs(eigenvalues - v))))
    if len(set(indices)) != len(indices):
        raise ConfigurationError(
            "sigma levels resolve to duplicate eigenvalue indices; "
            "list each target level once"
        )
    return tuple(sorted(indices))


def bound_report(a: HermitianMatrix, v: HermitianMatrix,
                 sigma: Sequence[float]) -> dict:
    """Regime detection plus every applicable bound for the pair (A, V).

    Raises ConfigurationError for input problems (usage errors); returns a
    report whose ``passed`` field is False when no bound applies, the
    spectrum cannot be attributed, or a bound is violated.
    """
    if a.dim != v.dim:
        raise ConfigurationError(
            f"dimension mismatch: A is {a.dim}x{a.dim}, V is {v.dim}x{v.dim}"
        )
    ed_a = eigen_decompose(a)
    sigma_idx = _match_sigma(ed_a.eigenvalues, sigma)
    if len(sigma_idx) == a.dim:
        raise ConfigurationError("sigma must leave at least one complement level")
    try:
        partition = SpectralPartition.from_eigenvalues(ed_a.eigenvalues, sigma_idx)
    except ValueError as exc:
        raise ConfigurationError(f"sigma is not isolated: {exc}") from exc

    norm_v = operator_norm(v)
    d = partition.d
    x = norm_v / d
    sig_vals = np.asarray(partition.sigma_values)
    comp_vals = np.asarray(partition.complement_values)
    disposition = _detect_disposition(sig_vals, comp_vals)

    p = spectral_projection(ed_a, sigma_idx)
    diff = p.matrix - p.complement().matrix
    resid = float(np.linalg.norm(v.entries @ diff + diff @ v.entries, 2))
    off_diagonal = resid <= DETECT_RTOL * norm_v
    kind = (PerturbationKind.OFF_DIAGONAL if off_diagonal
            else PerturbationKind.GENERIC)
    eps = epsilon_shift(norm_v, d).epsilon if norm_v else 0.0

    ed_h = eigen_decompose(a + v)
    scale = max(
        float(np.max(np.abs(ed_a.eigenvalues))),
        float(np.max(np.abs(ed_h.eigenvalues))),
        norm_v,
        1.0,
    )
    attribution_error = None
    theta = None
    margins = {}
    bounds = lab._applicable_bounds(_DISPOSITION_TO_LAYOUT[disposition], kind, x)
    try:
        omega_idx = lab._attribute_sigma(
            ed_h, partition, kind, norm_v, eps, lab.LOCATION_RTOL * scale
        )
        q = spectral_projection(ed_h, omega_idx)
        theta = maximal_angle(p, q)
        margins = {name: val - theta for name, val in bounds.items()}
    except ConfigurationError as exc:
        attribution_error = str(exc)

    tightest = min(bounds, key=bounds.get) if bounds else None
    violated = any(m < -lab.MARGIN_TOL for m in margins.values())
    passed = bool(bounds) and attribution_error is None and not violated
    report = {
        "schema_version": SCHEMA_VERSION,
        "dim": a.dim,
        "regime": {
            "kind": kind.value,
            "disposition": disposition,
            "anticommutator_residual": resid,
        },
        "d": d,
        "norm_v": norm_v,
        "x": x,
        "epsilon": eps if off_diagonal else None,
        "sigma_indices": list(sigma_idx),
        "sigma_values": [float(s) for s in partition.sigma_values],
        "theta": theta,
        "bounds": bounds,
        "margins": margins,
        "tightest": (
            {"name": tightest, "value": bounds[tightest]} if tightest else None
        ),
        "passed": passed,
    }
    if attribution_error:
        report["attribution_error"] = attribution_error
    if not bounds:
        report["note"] = (
            "no bound applies at this relative strength for the detected regime"
        )
    return report


def _write_or_print(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_constants(args: argparse.Namespace) -> int:
    report = constants_report()
    _write_or_print(json.dumps(report, indent=2) + "\n", args.out)
    errored = [k for k, v in report["constants"].items() if "error" in v]
    if errored:
        print(f"failed to compute: {', '.join(errored)}", file=sys.stderr)
        return 1
    return 0


def _cmd_curves(args: argparse.Namespace) -> int:
    try:
        kinds = tuple(BoundKind(name.strip())
                      for name in args.functions.split(",") if name.strip())
        grid = CurveGrid(x_min=args.grid_min, x_max=args.grid_max,
                         points=args.points, functions=kinds)
    except (ValueError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _write_or_print(curve_csv(grid, raw_radians=args.raw_radians), args.out)
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    layout = Layout(args.layout)
    kind = PerturbationKind(args.kind)
    if args.trials < 1:
        print("error: --trials must be at least 1", file=sys.stderr)
        return 2
    if args.strength is not None:
        limit = strength_limit(layout, kind)
        if args.strength < 0 or not math.isfinite(args.strength):
            print("error: --strength must be a finite nonnegative multiple of d",
                  file=sys.stderr)
            return 2
        if args.strength >= limit:
            print(
                f"error: strength {args.strength} is outside the validity range "
                f"of every {layout.value} x {kind.value} bound (limit {limit})",
                file=sys.stderr,
            )
            return 2
    report = lab.run_regime_suite(
        layout, kind, args.trials, args.seed, strength=args.strength
    )
    if args.out:
        _write_or_print(report.to_json() + "\n", args.out)
    status = "PASS" if report.passed else "FAIL"
    mm = report.min_margin
    print(
        f"{status} {layout.value} x {kind.value}: {report.trials} trials, "
        f"{report.failure_count} failures, min margin "
        f"{'%.6e' % mm if math.isfinite(mm) else 'n/a'}"
    )
    return 0 if report.passed else 1


def _cmd_bound(args: argparse.Namespace) -> int:
    try:
        sigma = [float(s) for s in args.sigma.split(",") if s.strip()]
        if not sigma:
            raise ConfigurationError("--sigma needs at least one level")
        a = read_matrix_file(args.matrix_a)
        v = read_matrix_file(args.matrix_v)
        report = bound_report(a, v, sigma)
    except (OSError, ValueError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _write_or_print(json.dumps(report, indent=2) + "\n", args.out)
    return 0 if report["passed"] else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specbounds",
        description=(
            "A priori bounds on the rotation of spectral subspaces of "
            "Hermitian matrices under additive perturbation: constants, "
            "curve data, randomized verification, and per-instance evaluation."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants",
                       help="critical strengths and saturation points as JSON")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(fn=_cmd_constants)

    p = sub.add_parser("curves", help="sample bound functions onto a CSV grid")
    p.add_argument("--grid-min", type=float, default=0.0)
    p.add_argument("--grid-max", type=float, default=0.69)
    p.add_argument("--points", type=int, default=200)
    p.add_argument(
        "--functions",
        default=",".join(k.value for k in _DEFAULT_FUNCTIONS),
        help="comma-separated kinds: "
        + ",".join(k.value for k in BoundKind),
    )
    p.add_argument("--raw-radians", action="store_true",
                   help="emit radians instead of the 2/pi-scaled values")
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(fn=_cmd_curves)

    p = sub.add_parser("verify",
                       help="run a randomized verification suite for one regime")
    p.add_argument("--layout", required=True,
                   choices=[l.value for l in Layout])
    p.add_argument("--kind", required=True,
                   choices=[k.value for k in PerturbationKind])
    p.add_argument("--strength", type=float, default=None,
                   help="pin ||V||/d (default: sample below the regime limit)")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the full JSON report here")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("bound",
                       help="evaluate applicable bounds for a matrix pair")
    p.add_argument("matrix_a", help="path of the unperturbed Hermitian matrix")
    p.add_argument("matrix_v", help="path of the perturbation matrix")
    p.add_argument("--sigma", required=True,
                   help="comma-separated levels picking the sigma cluster "
                        "(matched to the nearest eigenvalues of A)")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(fn=_cmd_bound)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
