"""Finite-dimensional Hermitian spectral toolbox.

Everything downstream rests on four exact facts about a Hermitian matrix M:

* its eigendecomposition M = U diag(lambda) U* with U unitary,
* the operator norm  ||M|| = max(|lambda_min|, |lambda_max|),
* spectral projections P = sum_k u_k u_k*  onto invariant subspaces,
* the maximal angle between two subspaces,  theta = arcsin(||P - Q||),
  which for orthogonal projections always satisfies ||P - Q|| <= 1.

Matrices are dense complex128 arrays; dimensions stay small (<= 64), so exact
dense eigensolves are the right tool.  The default eigensolver is LAPACK
(`numpy.linalg.eigh`); a self-contained cyclic Jacobi solver is provided as an
independent cross-check backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError

# Relative tolerance for accepting an "approximately Hermitian" input matrix.
HERMITIAN_RTOL = 1e-12
# Residual / unitarity tolerances for a valid eigendecomposition.
RESIDUAL_RTOL = 1e-10
UNITARITY_TOL = 1e-10
# Projection invariants.
IDEMPOTENCY_TOL = 1e-10
TRACE_TOL = 1e-8
# Eigenvalues closer than CLUSTER_RTOL * ||M|| form one cluster and must not be
# split across a spectral partition.
CLUSTER_RTOL = 1e-10

# Cyclic Jacobi: stop once the off-diagonal Frobenius mass has dropped below
# JACOBI_OFF_RTOL * ||M||_F; give up after JACOBI_MAX_SWEEPS full sweeps.
JACOBI_OFF_RTOL = 1e-13
JACOBI_MAX_SWEEPS = 100
JACOBI_MAX_DIM = 64


def _as_complex_matrix(entries) -> np.ndarray:
    arr = np.asarray(entries, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise ValueError("matrix dimension must be at least 1")
    return arr


class HermitianMatrix:
    """A square complex matrix validated and stored as exactly Hermitian.

    The constructor accepts any matrix whose deviation from Hermitian symmetry
    is at most ``HERMITIAN_RTOL`` relative to its largest entry, then stores
    the exact symmetrization (M + M*) / 2.  The stored array is read-only.
    """

    __slots__ = ("entries",)

    def __init__(self, entries) -> None:
        arr = _as_complex_matrix(entries)
        scale = float(np.max(np.abs(arr))) if arr.size else 0.0
        dev = float(np.max(np.abs(arr - arr.conj().T)))
        if dev > HERMITIAN_RTOL * max(scale, 1e-300) and dev > 0.0:
            raise ValueError(
                f"matrix is not Hermitian: max |M - M*| = {dev:.3e} "
                f"exceeds {HERMITIAN_RTOL:.0e} * max|entry| = {HERMITIAN_RTOL * scale:.3e}"
            )
        sym = (arr + arr.conj().T) / 2.0
        sym.flags.writeable = False
        object.__setattr__(self, "entries", sym)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("HermitianMatrix is immutable")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __add__(self, other: "HermitianMatrix") -> "HermitianMatrix":
        if not isinstance(other, HermitianMatrix):
            return NotImplemented
        if other.dim != self.dim:
            raise ValueError("dimension mismatch in matrix sum")
        return HermitianMatrix(self.entries + other.entries)

    def __repr__(self) -> str:
        return f"HermitianMatrix(dim={self.dim})"


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in ascending order and matching unitary eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


def _validate_decomposition(m: np.ndarray, vals: np.ndarray, vecs: np.ndarray) -> None:
    dim = m.shape[0]
    if np.any(np.diff(vals) < 0):
        raise ConvergenceError("eigenvalues are not in ascending order")
    norm_m = float(np.max(np.abs(vals))) if dim else 0.0
    residual = np.max(np.abs(m @ vecs - vecs * vals[np.newaxis, :]))
    if residual > RESIDUAL_RTOL * max(norm_m, 1e-300):
        raise ConvergenceError(
            f"eigendecomposition residual {residual:.3e} exceeds "
            f"{RESIDUAL_RTOL:.0e} * ||M|| = {RESIDUAL_RTOL * norm_m:.3e}"
        )
    unit_dev = np.max(np.abs(vecs.conj().T @ vecs - np.eye(dim)))
    if unit_dev > UNITARITY_TOL:
        raise ConvergenceError(
            f"eigenvector matrix is not unitary within {UNITARITY_TOL:.0e} "
            f"(deviation {unit_dev:.3e})"
        )


def _jacobi_eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization for a complex Hermitian matrix.

    Each (p, q) rotation absorbs the phase of the pivot entry and applies a
    real plane rotation chosen to zero it.  The sweep order is row-cyclic.
    """
    dim = m.shape[0]
    if dim > JACOBI_MAX_DIM:
        raise ValueError(f"jacobi backend is limited to dim <= {JACOBI_MAX_DIM}")
    a = np.array(m, dtype=np.complex128)
    vecs = np.eye(dim, dtype=np.complex128)
    fro = math.sqrt(float(np.sum(np.abs(a) ** 2)))
    if dim == 1:
        return a.real.reshape(1).copy(), vecs

    def off_mass() -> float:
        # Summed from the off-diagonal entries themselves: subtracting the
        # diagonal mass from the total cancels catastrophically once the
        # remainder falls below the rounding floor of ||M||_F^2, reporting
        # convergence a sweep early with ~1e-8 entries still present.
        off = np.abs(a) ** 2
        off[np.diag_indices(dim)] = 0.0
        return math.sqrt(float(np.sum(off)))

    for _sweep in range(JACOBI_MAX_SWEEPS):
        if off_mass() <= JACOBI_OFF_RTOL * max(fro, 1e-300):
            break
        for p in range(dim - 1):
            for q in range(p + 1, dim):
                gamma = a[p, q]
                mag = abs(gamma)
                if mag == 0.0:
                    continue
                phase = gamma / mag
                alpha = a[p, p].real
                beta = a[q, q].real
                theta = 0.5 * math.atan2(2.0 * mag, alpha - beta)
                # Fold into (-pi/4, pi/4]: the wide solution also annihilates
                # the pivot but swaps the diagonal pair, and near-degenerate
                # pairs then swap on every sweep instead of converging.
                if theta > 0.25 * math.pi:
                    theta -= 0.5 * math.pi
                c = math.cos(theta)
                s = math.sin(theta)
                # Column update A <- A J with J = [[c, -s e^{i phi}], [s e^{-i phi}, c]]
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p + s * np.conj(phase) * col_q
                a[:, q] = -s * phase * col_p + c * col_q
                # Row update A <- J* A
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p + s * phase * row_q
                a[q, :] = -s * np.conj(phase) * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = vecs[:, p].copy()
                vq = vecs[:, q].copy()
                vecs[:, p] = c * vp + s * np.conj(phase) * vq
                vecs[:, q] = -s * phase * vp + c * vq
    else:
        raise ConvergenceError(
            f"jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps"
        )

    vals = np.diag(a).real.copy()
    order = np.argsort(vals, kind="stable")
    return vals[order], vecs[:, order]


def eigen_decompose(m: HermitianMatrix, method: str = "lapack") -> EigenDecomposition:
    """Full eigendecomposition with ascending eigenvalues.

    ``method`` is "lapack" (default) or "jacobi" (independent cyclic Jacobi
    backend, dim <= 64).  The result is validated: per-pair residual within
    1e-10 * ||M|| and eigenvector unitarity within 1e-10.
    """
    arr = m.entries
    if method == "lapack":
        try:
            vals, vecs = np.linalg.eigh(arr)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"LAPACK eigensolver failed: {exc}") from exc
    elif method == "jacobi":
        vals, vecs = _jacobi_eigh(arr)
    else:
        raise ValueError(f"unknown eigensolver method {method!r}")
    vals = np.asarray(vals, dtype=np.float64)
    vecs = np.asarray(vecs, dtype=np.complex128)
    _validate_decomposition(arr, vals, vecs)
    vals.flags.writeable = False
    vecs.flags.writeable = False
    return EigenDecomposition(eigenvalues=vals, eigenvectors=vecs)


def operator_norm(m: HermitianMatrix) -> float:
    """||M|| = max(|lambda_min|, |lambda_max|), exact for Hermitian M."""
    try:
        vals = np.linalg.eigvalsh(m.entries)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"LAPACK eigensolver failed: {exc}") from exc
    return float(np.max(np.abs(vals))) if vals.size else 0.0


@dataclass(frozen=True)
class OrthogonalProjection:
    """An orthogonal projection stored as an exactly Hermitian matrix.

    Validated on construction: P is idempotent within ``IDEMPOTENCY_TOL``
    (entrywise) and trace(P) matches the declared rank within ``TRACE_TOL``.
    """

    matrix: np.ndarray
    rank: int

    def __post_init__(self):
        arr = _as_complex_matrix(self.matrix)
        sym = (arr + arr.conj().T) / 2.0
        sym.flags.writeable = False
        object.__setattr__(self, "matrix", sym)
        if not 0 <= self.rank <= sym.shape[0]:
            raise ValueError(f"rank {self.rank} out of range for dim {sym.shape[0]}")
        idem = float(np.max(np.abs(sym @ sym - sym)))
        if idem > IDEMPOTENCY_TOL:
            raise ValueError(f"matrix is not idempotent: max |P^2 - P| = {idem:.3e}")
        tr = float(np.trace(sym).real)
        if abs(tr - self.rank) > TRACE_TOL:
            raise ValueError(f"trace {tr!r} does not match rank {self.rank}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def complement(self) -> "OrthogonalProjection":
        eye = np.eye(self.dim, dtype=np.complex128)
        return OrthogonalProjection(matrix=eye - self.matrix, rank=self.dim - self.rank)


def spectral_projection(ed: EigenDecomposition, indices) -> OrthogonalProjection:
    """Projection onto the span of the selected eigenvectors (0-based indices)."""
    idx = sorted(int(i) for i in indices)
    if not idx:
        raise ValueError("spectral_projection requires a nonempty index set")
    if len(set(idx)) != len(idx):
        raise ValueError("duplicate indices in spectral_projection")
    if idx[0] < 0 or idx[-1] >= ed.dim:
        raise ValueError(f"index out of range 0..{ed.dim - 1}: {idx}")
    cols = ed.eigenvectors[:, idx]
    p = cols @ cols.conj().T
    return OrthogonalProjection(matrix=p, rank=len(idx))


def maximal_angle(p: OrthogonalProjection, q: OrthogonalProjection) -> float:
    """arcsin(||P - Q||), the maximal angle between the two subspaces, in [0, pi/2].

    For orthogonal projections ||P - Q|| <= 1 holds exactly; roundoff above 1
    is clamped before arcsin.  The difference is formed in a canonical operand
    order so that maximal_angle(p, q) == maximal_angle(q, p) bitwise.
    """
    if p.dim != q.dim:
        raise ValueError(f"dimension mismatch: {p.dim} vs {q.dim}")
    a, b = p.matrix, q.matrix
    if a.tobytes() > b.tobytes():
        a, b = b, a
    diff = a - b
    vals = np.linalg.eigvalsh(diff)
    norm = float(np.max(np.abs(vals))) if vals.size else 0.0
    return math.asin(min(max(norm, 0.0), 1.0))


def select_perturbed_indices(ed: EigenDecomposition, sigma_values, radius: float) -> tuple[int, ...]:
    """Indices (0-based) of eigenvalues within ``radius`` of the value set ``sigma_values``."""
    values = np.asarray(sigma_values, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("sigma_values must be a nonempty 1-d collection")
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    dist = np.min(np.abs(ed.eigenvalues[:, np.newaxis] - values[np.newaxis, :]), axis=1)
    return tuple(int(k) for k in np.nonzero(dist <= radius)[0])


@dataclass(frozen=True)
class SpectralPartition:
    """A two-set split of a Hermitian spectrum, sigma vs. its complement.

    ``d`` is the distance between the two spectral sets.  Construction rejects
    empty sides, d == 0, and any split of a degenerate cluster (eigenvalues
    within ``CLUSTER_RTOL`` * scale of each other must land on the same side).
    """

    sigma_indices: tuple[int, ...]
    complement_indices: tuple[int, ...]
    sigma_values: tuple[float, ...]
    complement_values: tuple[float, ...]
    d: float
    dim: int = field(default=0)

    @classmethod
    def from_eigenvalues(cls, eigenvalues, sigma_indices, scale: float | None = None) -> "SpectralPartition":
        vals = np.asarray(eigenvalues, dtype=np.float64)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("need at least two eigenvalues to partition")
        dim = vals.size
        sigma = sorted(int(i) for i in sigma_indices)
        if len(set(sigma)) != len(sigma):
            raise ValueError("duplicate sigma indices")
        if not sigma or len(sigma) == dim:
            raise ValueError("both sides of a spectral partition must be nonempty")
        if sigma[0] < 0 or sigma[-1] >= dim:
            raise ValueError(f"sigma index out of range 0..{dim - 1}")
        comp = sorted(set(range(dim)) - set(sigma))
        if scale is None:
            scale = float(np.max(np.abs(vals)))
        sv = vals[sigma]
        cv = vals[comp]
        d = float(np.min(np.abs(sv[:, np.newaxis] - cv[np.newaxis, :])))
        if d <= 0.0:
            raise ValueError("sigma and its complement share an eigenvalue (d = 0)")
        if d <= CLUSTER_RTOL * max(scale, 1e-300):
            raise ValueError(
                f"partition splits a degenerate cluster: d = {d:.3e} <= "
                f"{CLUSTER_RTOL:.0e} * scale"
            )
        return cls(
            sigma_indices=tuple(sigma),
            complement_indices=tuple(comp),
            sigma_values=tuple(float(v) for v in sv),
            complement_values=tuple(float(v) for v in cv),
            d=d,
            dim=dim,
        )
