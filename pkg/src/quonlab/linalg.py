"""Small dense linear algebra that works for both float and object (exact) arrays."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .scalars import FLOAT_TOLERANCE


class IllPosedError(ValueError):
    """A linear system has no solution or no unique solution."""


_float_tolerance = FLOAT_TOLERANCE


def set_float_tolerance(tol: float) -> None:
    """Relative residual accepted by float-backend comparisons (default 1e-10)."""
    global _float_tolerance
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    _float_tolerance = float(tol)


def float_tolerance() -> float:
    return _float_tolerance


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``a @ b``; object arrays go through a sparse accumulation (operator matrices are sparse)."""
    if a.dtype != object and b.dtype != object:
        return a @ b
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    out = np.empty((a.shape[0], b.shape[1]), dtype=object)
    out.fill(Fraction(0))
    b_rows = {}
    for k, j in zip(*np.nonzero(b != 0)):
        b_rows.setdefault(k, []).append((j, b[k, j]))
    for i, k in zip(*np.nonzero(a != 0)):
        row = b_rows.get(k)
        if not row:
            continue
        aik = a[i, k]
        for j, bkj in row:
            out[i, j] = out[i, j] + aik * bkj
    return out


def to_float(a: np.ndarray) -> np.ndarray:
    if a.dtype == object:
        return np.vectorize(float, otypes=[np.float64])(a) if a.size else np.zeros(a.shape)
    return np.asarray(a, dtype=np.float64)


def residual(lhs: np.ndarray, rhs: np.ndarray) -> tuple[float, bool]:
    """Compare two matrices; returns (residual, passed).

    Object arrays are compared exactly (passed iff every entry agrees; the
    residual is the largest absolute difference).  Float arrays use the
    relative max-norm residual ``max|L-R| / max(1, max|L|, max|R|)`` against
    the configured float tolerance (1e-10 unless changed).
    """
    if lhs.shape != rhs.shape:
        raise ValueError(f"shape mismatch {lhs.shape} vs {rhs.shape}")
    if lhs.size == 0:
        return 0.0, True
    if lhs.dtype == object or rhs.dtype == object:
        diff = lhs - rhs
        nz = [x for x in diff.reshape(-1) if x != 0]
        if not nz:
            return 0.0, True
        return max(abs(float(x)) for x in nz), False
    value = float(np.max(np.abs(lhs - rhs)))
    scale = max(1.0, float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))))
    rel = value / scale
    return rel, rel <= _float_tolerance


def _row_reduce(rows: list[list[Fraction]], n_cols: int):
    """Fraction Gauss-Jordan elimination in place; returns pivot columns."""
    pivots = []
    r = 0
    for c in range(n_cols):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return pivots


def rank_exact(matrix) -> int:
    """Rank by exact elimination over the rationals."""
    rows = [[Fraction(x) for x in row] for row in np.asarray(matrix, dtype=object).tolist()]
    if not rows:
        return 0
    return len(_row_reduce(rows, len(rows[0])))


def leading_pivots_exact(matrix) -> list[Fraction]:
    """Pivots of Gaussian elimination without row exchanges (LDL^T diagonal).

    A symmetric matrix is positive definite iff every returned pivot is > 0
    and none is missing (Sylvester's criterion).
    """
    a = [[Fraction(x) for x in row] for row in np.asarray(matrix, dtype=object).tolist()]
    n = len(a)
    pivots = []
    for k in range(n):
        p = a[k][k]
        pivots.append(p)
        if p == 0:
            break
        for i in range(k + 1, n):
            if a[i][k] != 0:
                f = a[i][k] / p
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    return pivots


def solve_exact(a, b) -> list[Fraction]:
    """Unique solution of the (possibly overdetermined) system a x = b, exactly.

    Raises :class:`IllPosedError` when the system is inconsistent or the
    solution is not unique.
    """
    a = np.asarray(a, dtype=object)
    n_cols = a.shape[1]
    # drop all-zero equations before the elimination, they carry no information
    # unless the right-hand side is nonzero (checked here)
    rows = []
    for row, rhs in zip(a.tolist(), list(b)):
        if all(x == 0 for x in row):
            if rhs != 0:
                raise IllPosedError("inconsistent system")
            continue
        rows.append([Fraction(x) for x in row] + [Fraction(rhs)])
    basis: list[list[Fraction]] = []
    for row in rows:
        # reduce against the current echelon basis; keep only independent rows
        row = list(row)
        for brow in basis:
            c = next(i for i, x in enumerate(brow) if x != 0)
            if row[c] != 0:
                f = row[c] / brow[c]
                row = [x - f * y for x, y in zip(row, brow)]
        lead = next((i for i, x in enumerate(row) if x != 0), None)
        if lead is None:
            continue
        if lead == n_cols:
            raise IllPosedError("inconsistent system")
        basis.append(row)
    pivots = _row_reduce(basis, n_cols)
    if len(pivots) < n_cols:
        raise IllPosedError(f"rank {len(pivots)} < {n_cols} unknowns")
    return [basis[i][n_cols] for i in range(n_cols)]


def solve_float(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    x, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if rank < a.shape[1]:
        raise IllPosedError(f"rank {rank} < {a.shape[1]} unknowns")
    scale = max(1.0, float(np.max(np.abs(b))) if b.size else 1.0)
    # consistency of the overdetermined system, not an identity check
    if b.size and float(np.max(np.abs(a @ x - b))) > 1e-8 * scale:
        raise IllPosedError("inconsistent system")
    return x
