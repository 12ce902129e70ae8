"""Q-free updates of the p x p triangular factor R1.

R1 is any upper-triangular matrix with R1^T R1 = X^T X (nonnegative diagonal
by qrkit convention); the routines here transform it under row/column
changes of X without ever touching Q.  Row position is irrelevant for R1
(a row permutation of X leaves X^T X unchanged), so the row routines accept
the rows themselves rather than a position.

Also hosts the Sherman-Morrison style maintenance of B = (X^T X)^{-1}.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .backend import kernels
from .exceptions import (
    DimensionMismatch,
    DowndateBreakdown,
    DuplicatePosition,
    NearDependentColumn,
    PositionOutOfRange,
    SingularUpdate,
)

__all__ = [
    "r_add_rows",
    "r_delete_rows",
    "r_add_cols",
    "r_add_cols_gram",
    "r_delete_cols",
    "r_delete_cols_nonadjacent",
    "thin_step",
    "gram_inverse_add_col",
    "gram_inverse_delete_col",
]


def _as_factor(R1: np.ndarray) -> np.ndarray:
    R1 = np.ascontiguousarray(R1, dtype=float)
    if R1.ndim != 2 or R1.shape[0] != R1.shape[1]:
        raise DimensionMismatch("R1 must be square")
    return R1


def _fix_row_signs(R: np.ndarray) -> np.ndarray:
    # Row sign flips leave R^T R unchanged and cost zero flops.
    for j in range(R.shape[0]):
        if R[j, j] < 0.0:
            R[j, j:] = -R[j, j:]
    return R


def _as_rows(U: np.ndarray, p: int) -> np.ndarray:
    U = np.atleast_2d(np.ascontiguousarray(U, dtype=float))
    if U.shape[1] != p:
        raise DimensionMismatch(f"rows must have {p} columns")
    return U


def r_add_rows(R1: np.ndarray, U: np.ndarray, k: Optional[int] = None) -> np.ndarray:
    """Factor of X with the rows of U appended: result^T result = R1^T R1 + U^T U.

    ``k`` is accepted for symmetry with the full-QR API and ignored: the thin
    factor cannot see where rows sit.
    """
    R = _as_factor(R1).copy()
    U = _as_rows(U, R.shape[0])
    if U.shape[0] == 1:
        kernels.thin_add_row(R, U[0].copy())
    else:
        kernels.thin_add_rows(R, U)
    return _fix_row_signs(R)


def r_delete_rows(
    R1: np.ndarray,
    U: np.ndarray,
    k: Optional[int] = None,
    breakdown_rtol: float = 1e-10,
) -> np.ndarray:
    """Factor of X with the rows U removed (U must actually be in the data).

    Implements the iterative reversal of the row absorption; raises
    :class:`DowndateBreakdown` when a squared pivot drops below
    ``-breakdown_rtol * ||R1||_F**2``, which signals that the rows being
    removed are not consistent with the factor.
    """
    R = _as_factor(R1).copy()
    U = _as_rows(U, R.shape[0])
    floor = -breakdown_rtol * float(np.sum(R1 * R1))
    if U.shape[0] == 1:
        worst = kernels.thin_del_row(R, U[0].copy())
    else:
        worst = kernels.thin_del_rows(R, U)
    if worst < floor:
        raise DowndateBreakdown(
            f"pivot^2 dropped to {worst:.3e} (floor {floor:.3e}); removed rows "
            "are inconsistent with the factor"
        )
    return _fix_row_signs(R)


def r_add_cols_gram(
    R1: np.ndarray,
    cross: np.ndarray,
    vv: np.ndarray,
    breakdown_rtol: float = 1e-8,
) -> np.ndarray:
    """Append columns from precomputed cross-products.

    ``cross = X^T V`` (p x m) and ``vv = V^T V`` (m x m).  This is the entry
    point the selection sampler uses: past the cross-product the cost is the
    same as :func:`r_add_cols`.
    """
    R = _as_factor(R1)
    cross = np.ascontiguousarray(np.atleast_2d(cross), dtype=float)
    vv = np.ascontiguousarray(np.atleast_2d(vv), dtype=float)
    if cross.ndim != 2 or cross.shape[0] != R.shape[0]:
        raise DimensionMismatch("cross-product must be p x m")
    m = cross.shape[1]
    if vv.shape != (m, m):
        raise DimensionMismatch("V^T V must be m x m")
    out, worst = kernels.thin_add_cols(R, cross, vv)
    if worst < -breakdown_rtol * float(np.trace(vv)):
        raise NearDependentColumn(
            f"squared pivot {worst:.3e}: new columns nearly in span of X"
        )
    return _fix_row_signs(out)


def r_add_cols(
    R1: np.ndarray,
    X: np.ndarray,
    V: np.ndarray,
    breakdown_rtol: float = 1e-8,
) -> np.ndarray:
    """Factor of [X V]; new columns append only at the right end."""
    X = np.asarray(X, dtype=float)
    V = np.asarray(V, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    if X.shape[0] != V.shape[0]:
        raise DimensionMismatch("X and V must have the same number of rows")
    if X.shape[1] != np.asarray(R1).shape[0]:
        raise DimensionMismatch("R1 must be the factor of X")
    return r_add_cols_gram(R1, X.T @ V, V.T @ V, breakdown_rtol)


def r_delete_cols(R1: np.ndarray, k: int, m: int = 1) -> np.ndarray:
    """Factor of X minus columns k..k+m-1 (1-based); free when k = p - m + 1."""
    R = _as_factor(R1)
    p = R.shape[0]
    if m < 1 or not (1 <= k <= p - m + 1):
        raise PositionOutOfRange(f"column block {k}..{k + m - 1} not in 1..{p}")
    out = kernels.thin_del_cols(R.copy(), k - 1, m)
    return _fix_row_signs(out)


def thin_step(R1: np.ndarray, i: int, a: int) -> np.ndarray:
    """Zero ``a`` subdiagonal entries of column i (1-based) of a p x l panel."""
    R = np.ascontiguousarray(R1, dtype=float).copy()
    rows, cols = R.shape
    if not (1 <= i <= cols) or not (1 <= a <= rows - i):
        raise PositionOutOfRange(f"column {i} with fill {a} out of range")
    kernels.thin_step(R, i - 1, a)
    return R


def r_delete_cols_nonadjacent(R1: np.ndarray, ks: Sequence[int]) -> np.ndarray:
    """Factor of X minus the (sorted, 1-based) columns in ``ks``.

    Mirrors the full-QR routine: adjacent runs dispatch to the contiguous
    deletion, trailing deleted columns are trimmed for free, and each
    surviving column is re-triangularized by one Givens/Householder step;
    the last column's diagonal is repaired from the norm of its fill.
    """
    R = _as_factor(R1)
    p = R.shape[0]
    ks = [int(x) for x in ks]
    if len(ks) == 0 or len(ks) >= p:
        raise PositionOutOfRange("must delete between 1 and p-1 columns")
    if any(ks[i] >= ks[i + 1] for i in range(len(ks) - 1)):
        raise DuplicatePosition("positions must be strictly increasing")
    if ks[0] < 1 or ks[-1] > p:
        raise PositionOutOfRange(f"positions must lie in 1..{p}")
    m = len(ks)
    if m == 1:
        return r_delete_cols(R, ks[0], 1)
    if ks[-1] - ks[0] == m - 1:
        return r_delete_cols(R, ks[0], m)

    kept = [c for c in range(1, p + 1) if c not in set(ks)]
    l = kept[-1]
    q = m - (p - l)
    ks = ks[:q]
    Rt = np.ascontiguousarray(R[:l, :l])
    if q == 1:
        return r_delete_cols(Rt, ks[0], 1)
    if ks[-1] - ks[0] == q - 1:
        return r_delete_cols(Rt, ks[0], q)

    k1 = ks[0]
    W = np.ascontiguousarray(Rt[:, [c - 1 for c in kept]])
    kbar = kept[k1 - 1 : l - q]
    a = kbar[0] - k1
    for i in range(1, l - q - k1 + 1):
        kernels.thin_step(W, i + k1 - 2, a)
        a = a + (kbar[i] - kbar[i - 1]) - 1
    j = l - q - 1
    col = W[j : l, j]
    W[j, j] = np.sqrt(float(col @ col))
    out = W[: l - q, : l - q].copy()
    return _fix_row_signs(out)


def gram_inverse_add_col(
    B: np.ndarray, X: np.ndarray, k: int, x: np.ndarray
) -> np.ndarray:
    """Update B = (X^T X)^{-1} for a column ``x`` inserted at position k.

    Bordering / Sherman-Morrison scheme; raises :class:`SingularUpdate`
    when the new column is numerically in the span of X.
    """
    B = np.asarray(B, dtype=float)
    X = np.asarray(X, dtype=float)
    x = np.asarray(x, dtype=float)
    p = B.shape[0]
    if B.shape != (p, p) or X.shape[1] != p or X.shape[0] != x.shape[0]:
        raise DimensionMismatch("B, X and x have incompatible shapes")
    if not (1 <= k <= p + 1):
        raise PositionOutOfRange(f"column position {k} not in 1..{p + 1}")
    u1 = X.T @ x
    u2 = B @ u1
    xx = float(x @ x)
    denom = xx - float(u1 @ u2)
    if denom <= 1e-12 * xx:
        raise SingularUpdate(f"denominator {denom:.3e} vs ||x||^2 {xx:.3e}")
    d = 1.0 / denom
    u3 = d * u2
    out = np.empty((p + 1, p + 1))
    out[:p, :p] = B + d * np.outer(u2, u2)
    out[:p, p] = -u3
    out[p, :p] = -u3
    out[p, p] = d
    idx = list(range(k - 1)) + [p] + list(range(k - 1, p))
    return np.ascontiguousarray(out[np.ix_(idx, idx)])


def gram_inverse_delete_col(B: np.ndarray, k: int) -> np.ndarray:
    """Inverse Gram of X minus column k (1-based), via the bordered block."""
    B = np.asarray(B, dtype=float)
    p = B.shape[0]
    if B.shape != (p, p):
        raise DimensionMismatch("B must be square")
    if not (1 <= k <= p):
        raise PositionOutOfRange(f"column position {k} not in 1..{p}")
    idx = [i for i in range(p) if i != k - 1] + [k - 1]
    Bp = B[np.ix_(idx, idx)]
    d = Bp[p - 1, p - 1]
    u3 = Bp[: p - 1, p - 1]
    return np.ascontiguousarray(Bp[: p - 1, : p - 1] - np.outer(u3, u3 / d))
