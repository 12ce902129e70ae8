"""Full QR updating and downdating (both Q and R maintained).

Covers the eight contiguous row/column insertion and deletion cases plus
non-adjacent column deletion.  Single-line changes use Givens rotations,
block changes use Householder reflectors with the sparse normal vector, so
the arithmetic performed here matches the instrumented mirrors in
:mod:`qrkit.counted` to rounding order.

All ``k`` positions are 1-based; ``k = N + 1`` (resp. ``p + 1``) appends.
Results are sign-normalized so diag(R) >= 0, which is a zero-flop
transformation applied consistently everywhere in qrkit.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .exceptions import (
    DimensionMismatch,
    DuplicatePosition,
    PositionOutOfRange,
    WouldUnderdetermine,
)
from .linalg import QrFactors, givens, householder


def _check_factors(f: QrFactors) -> tuple[int, int]:
    N, p = f.R.shape
    if f.Q.shape != (N, N):
        raise DimensionMismatch("Q must be square and conformable with R")
    return N, p


def _fix_signs(Q: np.ndarray, R: np.ndarray) -> QrFactors:
    """Flip (row of R, column of Q) pairs so diag(R) >= 0. Zero flops."""
    for j in range(min(R.shape)):
        if R[j, j] < 0.0:
            R[j, j:] = -R[j, j:]
            Q[:, j] = -Q[:, j]
    return QrFactors(Q, R)


def qr_add_rows(f: QrFactors, k: int, U: np.ndarray) -> QrFactors:
    """Factors of X with the rows of U inserted starting at position k.

    A single row is absorbed by p Givens rotations; a block of m >= 2 rows
    by p Householder reflectors acting on the (old R, new rows) stack.
    """
    N, p = _check_factors(f)
    U = np.atleast_2d(np.asarray(U, dtype=float))
    m = U.shape[0]
    if U.shape[1] != p:
        raise DimensionMismatch(f"new rows must have {p} columns")
    if not (1 <= k <= N + 1):
        raise PositionOutOfRange(f"row position {k} not in 1..{N + 1}")

    # Q extends by m unit rows/columns at position k; permutation is a move.
    Qp = np.zeros((N + m, N + m))
    Qp[: k - 1, :N] = f.Q[: k - 1]
    Qp[k - 1 : k - 1 + m, N:] = np.eye(m)
    Qp[k - 1 + m :, :N] = f.Q[k - 1 :]
    R = f.R.copy()

    if m == 1:
        x = U[0].copy()
        for i in range(p):
            c, s = givens(R[i, i], x[i])
            R[i, i] = c * R[i, i] - s * x[i]
            if i < p - 1:
                t = R[i, i + 1 :].copy()
                R[i, i + 1 :] = c * t - s * x[i + 1 :]
                x[i + 1 :] = s * t + c * x[i + 1 :]
            qi = Qp[:, i].copy()
            Qp[:, i] = c * qi - s * Qp[:, N]
            Qp[:, N] = s * qi + c * Qp[:, N]
    else:
        W = U.copy()
        for i in range(p):
            tau, v, mu = householder(R[i, i], W[:, i])
            v2 = v[1:]
            R[i, i] = mu
            if i < p - 1:
                v1 = tau * v2
                r = tau * R[i, i + 1 :] + v1 @ W[:, i + 1 :]
                R[i, i + 1 :] -= r
                W[:, i + 1 :] -= np.outer(v2, r)
            # Q picks up every reflector, including the last column's.
            q = tau * (Qp[:, i] + Qp[:, N:] @ v2)
            Qp[:, i] -= q
            Qp[:, N:] -= np.outer(q, v2)

    Rp = np.vstack([R, np.zeros((m, p))])
    return _fix_signs(Qp, Rp)


def qr_delete_rows(f: QrFactors, k: int, m: int = 1) -> QrFactors:
    """Factors of X with rows k..k+m-1 removed (Givens sweeps on Q rows)."""
    N, p = _check_factors(f)
    if m < 1 or not (1 <= k <= N - m + 1):
        raise PositionOutOfRange(f"row block {k}..{k + m - 1} not in 1..{N}")
    if N - m < p:
        raise WouldUnderdetermine(f"deleting {m} rows leaves fewer than {p}")

    R = f.R.copy()
    Q = f.Q.copy()
    if m == 1:
        q = Q[k - 1].copy()
        if k != 1:
            Q[1:k] = f.Q[: k - 1]
        for i in range(N - 1, 0, -1):
            c, s = givens(q[i - 1], q[i])
            q[i - 1] = c * q[i - 1] - s * q[i]
            if i <= p:
                r0 = R[i - 1, i - 1 :].copy()
                r1 = R[i, i - 1 :]
                R[i - 1, i - 1 :] = c * r0 - s * r1
                R[i, i - 1 :] = s * r0 + c * r1
            q0 = Q[1:, i - 1].copy()
            Q[1:, i - 1] = c * q0 - s * Q[1:, i]
            Q[1:, i] = s * q0 + c * Q[1:, i]
        return _fix_signs(Q[1:, 1:].copy(), R[1:].copy())

    W = Q[k - 1 : k - 1 + m].copy()
    if k != 1:
        Q[m : k - 1 + m] = f.Q[: k - 1]
    for j in range(1, m + 1):
        for i in range(N - 1, j - 1, -1):
            c, s = givens(W[j - 1, i - 1], W[j - 1, i])
            W[j - 1, i - 1] = c * W[j - 1, i - 1] - s * W[j - 1, i]
            if j < m:
                w0 = W[j:, i - 1].copy()
                W[j:, i - 1] = c * w0 - s * W[j:, i]
                W[j:, i] = s * w0 + c * W[j:, i]
            if i <= p + j - 1:
                r0 = R[i - 1, i - j :].copy()
                r1 = R[i, i - j :]
                R[i - 1, i - j :] = c * r0 - s * r1
                R[i, i - j :] = s * r0 + c * r1
            q0 = Q[m:, i - 1].copy()
            Q[m:, i - 1] = c * q0 - s * Q[m:, i]
            Q[m:, i] = s * q0 + c * Q[m:, i]
    return _fix_signs(Q[m:, m:].copy(), R[m:].copy())


def qr_add_cols(f: QrFactors, k: int, V: np.ndarray) -> QrFactors:
    """Factors of [X[:, :k-1], V, X[:, k-1:]] via Z = Q^T V and Givens sweeps."""
    N, p = _check_factors(f)
    V = np.asarray(V, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    m = V.shape[1]
    if V.shape[0] != N:
        raise DimensionMismatch(f"new columns must have {N} rows")
    if p + m > N:
        raise DimensionMismatch(f"p + m = {p + m} exceeds N = {N}")
    if not (1 <= k <= p + 1):
        raise PositionOutOfRange(f"column position {k} not in 1..{p + 1}")

    Z = f.Q.T @ V
    R = f.R.copy()
    Q = f.Q.copy()
    for j in range(1, m + 1):
        for i in range(N, k + j - 1, -1):
            c, s = givens(Z[i - 2, j - 1], Z[i - 1, j - 1])
            Z[i - 2, j - 1] = c * Z[i - 2, j - 1] - s * Z[i - 1, j - 1]
            Z[i - 1, j - 1] = 0.0
            if j < m:
                z0 = Z[i - 2, j:].copy()
                Z[i - 2, j:] = c * z0 - s * Z[i - 1, j:]
                Z[i - 1, j:] = s * z0 + c * Z[i - 1, j:]
            if i <= p + j:
                lo = i - j - 1
                r0 = R[i - 2, lo:].copy()
                r1 = R[i - 1, lo:]
                R[i - 2, lo:] = c * r0 - s * r1
                R[i - 1, lo:] = s * r0 + c * r1
            q0 = Q[:, i - 2].copy()
            Q[:, i - 2] = c * q0 - s * Q[:, i - 1]
            Q[:, i - 1] = s * q0 + c * Q[:, i - 1]
    Rp = np.hstack([R[:, : k - 1], Z, R[:, k - 1 :]])
    return _fix_signs(Q, Rp)


def qr_delete_cols(f: QrFactors, k: int, m: int = 1) -> QrFactors:
    """Factors of X minus columns k..k+m-1; free when k = p - m + 1."""
    N, p = _check_factors(f)
    if m < 1 or not (1 <= k <= p - m + 1):
        raise PositionOutOfRange(f"column block {k}..{k + m - 1} not in 1..{p}")
    if k == p - m + 1:
        return QrFactors(f.Q.copy(), f.R[:, : k - 1].copy())

    R = np.hstack([f.R[:, : k - 1], f.R[:, k - 1 + m :]])
    Q = f.Q.copy()
    w = p - m
    if m == 1:
        for j in range(k - 1, w):
            c, s = givens(R[j, j], R[j + 1, j])
            R[j, j] = c * R[j, j] - s * R[j + 1, j]
            R[j + 1, j] = 0.0
            if j < w - 1:
                r0 = R[j, j + 1 :].copy()
                R[j, j + 1 :] = c * r0 - s * R[j + 1, j + 1 :]
                R[j + 1, j + 1 :] = s * r0 + c * R[j + 1, j + 1 :]
            q0 = Q[:, j].copy()
            Q[:, j] = c * q0 - s * Q[:, j + 1]
            Q[:, j + 1] = s * q0 + c * Q[:, j + 1]
    else:
        for j in range(k - 1, w):
            tau, v, mu = householder(R[j, j], R[j + 1 : j + 1 + m, j])
            R[j, j] = mu
            R[j + 1 : j + 1 + m, j] = 0.0
            v1 = tau * v
            if j < w - 1:
                R[j : j + 1 + m, j + 1 :] -= np.outer(v1, v @ R[j : j + 1 + m, j + 1 :])
            Q[:, j : j + 1 + m] -= np.outer(Q[:, j : j + 1 + m] @ v1, v)
    return _fix_signs(Q, R)


def qrstep(Q: np.ndarray, R: np.ndarray, i: int, a: int) -> None:
    """Zero ``a`` subdiagonal entries of column i (1-based) in place.

    Dispatches to one Givens rotation (a = 1) or one Householder reflector
    (a > 1), applying the same transform to Q.
    """
    N, l = R.shape
    if not (1 <= i <= l) or not (1 <= a <= N - i):
        raise PositionOutOfRange(f"qrstep column {i}, fill {a} out of range")
    j = i - 1
    if a > 1:
        tau, v, _mu = householder(R[j, j], R[j + 1 : j + 1 + a, j])
        vs = tau * v
        R[j, j] = _mu
        R[j + 1 : j + 1 + a, j] = 0.0
        if i < l:
            R[j : j + 1 + a, j + 1 :] -= np.outer(vs, v @ R[j : j + 1 + a, j + 1 :])
        Q[:, j : j + 1 + a] -= np.outer(Q[:, j : j + 1 + a] @ vs, v)
    else:
        c, s = givens(R[j, j], R[j + 1, j])
        R[j, j] = c * R[j, j] - s * R[j + 1, j]
        R[j + 1, j] = 0.0
        r0 = R[j, j + 1 :].copy()
        R[j, j + 1 :] = c * r0 - s * R[j + 1, j + 1 :]
        R[j + 1, j + 1 :] = s * r0 + c * R[j + 1, j + 1 :]
        q0 = Q[:, j].copy()
        Q[:, j] = c * q0 - s * Q[:, j + 1]
        Q[:, j + 1] = s * q0 + c * Q[:, j + 1]


def _validate_positions(ks: Sequence[int], p: int) -> list[int]:
    ks = [int(k) for k in ks]
    if len(ks) == 0 or len(ks) >= p:
        raise PositionOutOfRange("must delete between 1 and p-1 columns")
    if any(ks[i] >= ks[i + 1] for i in range(len(ks) - 1)):
        raise DuplicatePosition("positions must be strictly increasing")
    if ks[0] < 1 or ks[-1] > p:
        raise PositionOutOfRange(f"positions must lie in 1..{p}")
    return ks


def qr_delete_cols_nonadjacent(f: QrFactors, ks: Sequence[int]) -> QrFactors:
    """Factors of X minus the (sorted, 1-based) columns listed in ``ks``.

    Adjacent runs fall back to the contiguous deletions; otherwise the
    trailing deleted columns are trimmed for free and each remaining column
    is re-triangularized by one qrstep, with the fill count a[i] tracking
    how many deleted positions precede it.
    """
    N, p = _check_factors(f)
    ks = _validate_positions(ks, p)
    m = len(ks)
    if m == 1:
        return qr_delete_cols(f, ks[0], 1)
    if ks[-1] - ks[0] == m - 1:
        return qr_delete_cols(f, ks[0], m)

    kept = [c for c in range(1, p + 1) if c not in set(ks)]
    l = kept[-1]
    q = m - (p - l)
    ks = ks[:q]
    Rt = f.R[:, :l].copy()
    ft = QrFactors(f.Q, Rt)
    if q == 1:
        return qr_delete_cols(ft, ks[0], 1)
    if ks[-1] - ks[0] == q - 1:
        return qr_delete_cols(ft, ks[0], q)

    k1 = ks[0]
    R = Rt[:, [c - 1 for c in kept]]
    Q = f.Q.copy()
    kbar = kept[k1 - 1 : l - q]
    a = kbar[0] - k1
    steps = l - q - k1 + 1
    for i in range(1, steps + 1):
        qrstep(Q, R, i + k1 - 1, a)
        if i < steps:
            a = a + (kbar[i] - kbar[i - 1]) - 1
    return _fix_signs(Q, R)
