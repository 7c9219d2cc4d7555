"""Plain-text matrix exchange format.

Layout::

    dim
    i j re im          (one line per entry, 1-based indices, dim*dim lines)

Entries are written row-major with 17 significant digits, which round-trips
complex128 exactly.  Readers accept the lines in any order but require every
entry exactly once, and validate Hermitian symmetry on load.
"""

from __future__ import annotations

import numpy as np

from .core import HermitianMatrix


def write_matrix_file(path, m: HermitianMatrix) -> None:
    arr = m.entries
    dim = m.dim
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"{dim}\n")
        for i in range(dim):
            for j in range(dim):
                z = arr[i, j]
                fh.write(f"{i + 1} {j + 1} {z.real:.17g} {z.imag:.17g}\n")


def read_matrix_file(path) -> HermitianMatrix:
    with open(path, "r", encoding="ascii") as fh:
        raw = [line.strip() for line in fh]
    lines = [line for line in raw if line]
    if not lines:
        raise ValueError(f"{path}: empty matrix file")
    try:
        dim = int(lines[0])
    except ValueError as exc:
        raise ValueError(f"{path}: first line must be the dimension") from exc
    if dim < 1:
        raise ValueError(f"{path}: dimension must be positive, got {dim}")
    body = lines[1:]
    if len(body) != dim * dim:
        raise ValueError(f"{path}: expected {dim * dim} entry lines, found {len(body)}")
    arr = np.zeros((dim, dim), dtype=np.complex128)
    seen = np.zeros((dim, dim), dtype=bool)
    for lineno, line in enumerate(body, start=2):
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"{path}:{lineno}: expected 'i j re im', got {line!r}")
        i, j = int(parts[0]) - 1, int(parts[1]) - 1
        if not (0 <= i < dim and 0 <= j < dim):
            raise ValueError(f"{path}:{lineno}: index out of range for dim {dim}")
        if seen[i, j]:
            raise ValueError(f"{path}:{lineno}: duplicate entry ({i + 1}, {j + 1})")
        seen[i, j] = True
        arr[i, j] = complex(float(parts[2]), float(parts[3]))
    if not seen.all():
        missing = np.argwhere(~seen)[0]
        raise ValueError(
            f"{path}: missing entry ({missing[0] + 1}, {missing[1] + 1})"
        )
    return HermitianMatrix(arr)
