"""Dense orthogonal primitives and from-scratch QR.

The routines here are the correctness anchor for the whole package: every
update/downdate elsewhere is tested against a fresh Householder factorization
built by :func:`qr_factorize`.

Position arguments throughout qrkit are 1-based, matching the conventions of
the update routines' documentation; array contents are ordinary 0-based numpy.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .exceptions import DimensionMismatch, RankDeficient, SingularTriangular


class GivensRotation(NamedTuple):
    """Plane rotation G = [[c, s], [-s, c]] with c**2 + s**2 = 1."""

    c: float
    s: float


class HouseholderReflector(NamedTuple):
    """Reflector I - tau * v v^T mapping (a, x) onto (mu, 0, ..., 0).

    ``v`` has leading entry 1 except in the degenerate branches (tau = 0
    identity, tau = 2 first-coordinate flip) where it is not meant to be read.
    ``mu`` is always the nonnegative produced diagonal value.
    """

    tau: float
    v: np.ndarray
    mu: float


class QrFactors(NamedTuple):
    """Full factorization X = Q R with Q (N, N) orthogonal, R (N, p)."""

    Q: np.ndarray
    R: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return self.R.shape


def givens(a: float, b: float) -> GivensRotation:
    """Rotation (c, s) with G^T (a, b)^T = (r, 0)^T and |r| = hypot(a, b).

    Branches (including the sign flips for b > 0 / a < 0) follow the
    stable construction that avoids overflow in a**2 + b**2; an all-zero
    input returns the identity (1, 0).
    """
    if b == 0.0:
        return GivensRotation(1.0, 0.0)
    if abs(b) > abs(a):
        r = -a / b
        s = 1.0 / math.sqrt(1.0 + r * r)
        c = s * r
        if b > 0.0:
            c, s = -c, -s
    else:
        r = -b / a
        c = 1.0 / math.sqrt(1.0 + r * r)
        s = c * r
        if a < 0.0:
            c, s = -c, -s
    return GivensRotation(c, s)


def householder(a: float, x: np.ndarray) -> HouseholderReflector:
    """Reflector annihilating ``x`` below the pivot ``a``.

    Returns (tau, v, mu) with mu = sqrt(a**2 + ||x||**2) >= 0.  Applying
    I - tau v v^T to the stacked vector (a, x) yields (mu, 0, ..., 0); the
    leading entry of v is chosen by the cancellation-safe branch.
    """
    x = np.asarray(x, dtype=float)
    s = float(x @ x)
    if s == 0.0:
        if a >= 0.0:
            return HouseholderReflector(0.0, np.concatenate(([1.0], x)), a)
        return HouseholderReflector(2.0, np.concatenate(([1.0], x)), -a)
    mu = math.sqrt(s + a * a)
    if a <= 0.0:
        v1 = a - mu
    else:
        v1 = -s / (a + mu)
    b = v1 * v1
    tau = 2.0 * b / (s + b)
    v = np.concatenate(([1.0], x / v1))
    return HouseholderReflector(tau, v, mu)


def apply_reflector_left(tau: float, v: np.ndarray, block: np.ndarray) -> None:
    """In place block <- (I - tau v v^T) block."""
    if tau != 0.0:
        block -= np.outer(tau * v, v @ block)


def apply_reflector_right(tau: float, v: np.ndarray, block: np.ndarray) -> None:
    """In place block <- block (I - tau v v^T)."""
    if tau != 0.0:
        block -= np.outer(block @ (tau * v), v)


def qr_factorize(X: np.ndarray, rank_rtol: float = 1e-12) -> QrFactors:
    """Householder QR of a full-column-rank X with N >= p.

    The produced R has nonnegative diagonal, so for the thin factor R[:p, :p]
    coincides with the Cholesky factor of X^T X.  Raises
    :class:`RankDeficient` when a pivot falls below rank_rtol * ||X||_F.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch("expected a 2-d array")
    N, p = X.shape
    if N < p:
        raise DimensionMismatch(f"need N >= p, got {N} x {p}")
    tol = rank_rtol * np.linalg.norm(X)
    R = X.copy()
    Q = np.eye(N)
    for i in range(p):
        tau, v, mu = householder(R[i, i], R[i + 1 :, i])
        if mu < tol:
            raise RankDeficient(f"pivot {i + 1} below tolerance {tol:.3e}")
        R[i, i] = mu
        R[i + 1 :, i] = 0.0
        if i < p - 1:
            apply_reflector_left(tau, v, R[i:, i + 1 :])
        apply_reflector_right(tau, v, Q[:, i:])
    return QrFactors(Q, R)


def thin_r(X: np.ndarray, rank_rtol: float = 1e-12) -> np.ndarray:
    """The p x p upper-triangular factor alone (nonnegative diagonal)."""
    X = np.asarray(X, dtype=float)
    N, p = X.shape
    if N < p:
        raise DimensionMismatch(f"need N >= p, got {N} x {p}")
    tol = rank_rtol * np.linalg.norm(X)
    R = X.copy()
    for i in range(p):
        tau, v, mu = householder(R[i, i], R[i + 1 :, i])
        if mu < tol:
            raise RankDeficient(f"pivot {i + 1} below tolerance {tol:.3e}")
        R[i, i] = mu
        R[i + 1 :, i] = 0.0
        if i < p - 1:
            apply_reflector_left(tau, v, R[i:, i + 1 :])
    return R[:p, :p]


def forward_substitution(L: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve L x = b for lower-triangular L (exactly p^2 flops)."""
    L = np.asarray(L, dtype=float)
    b = np.asarray(b, dtype=float)
    n = L.shape[0]
    if L.shape != (n, n) or b.shape[0] != n:
        raise DimensionMismatch("triangular solve shape mismatch")
    x = np.zeros_like(b)
    for i in range(n):
        d = L[i, i]
        if abs(d) <= 1e-300:
            raise SingularTriangular(f"zero diagonal at row {i + 1}")
        x[i] = (b[i] - L[i, :i] @ x[:i]) / d
    return x


def backward_substitution(U: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve U x = b for upper-triangular U (exactly p^2 flops)."""
    U = np.asarray(U, dtype=float)
    b = np.asarray(b, dtype=float)
    n = U.shape[0]
    if U.shape != (n, n) or b.shape[0] != n:
        raise DimensionMismatch("triangular solve shape mismatch")
    x = np.zeros_like(b)
    for i in range(n - 1, -1, -1):
        d = U[i, i]
        if abs(d) <= 1e-300:
            raise SingularTriangular(f"zero diagonal at row {i + 1}")
        x[i] = (b[i] - U[i, i + 1 :] @ x[i + 1 :]) / d
    return x


def align_column_signs(
    R: np.ndarray, Q: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Flip column signs of R (rows of R / columns of Q) so diag(R) >= 0.

    Sign changes are free in the flop model; this pins the column-sign
    ambiguity of the factorization so factors can be compared directly.
    """
    R = np.array(R, dtype=float, copy=True)
    Q = None if Q is None else np.array(Q, dtype=float, copy=True)
    p = min(R.shape)
    for j in range(p):
        if R[j, j] < 0.0:
            R[j, j:] = -R[j, j:]
            if Q is not None:
                Q[:, j] = -Q[:, j]
    return R, Q


def move_rows_indices(n: int, m: int, k: int, l: int) -> np.ndarray:
    """Index array realizing the permutation that moves m consecutive rows.

    Rows k..k+m-1 (1-based) of an n-row matrix are moved so they start at
    position l; everything else keeps its relative order.  Applying the
    returned index array (``A[idx]``) costs zero flops.
    """
    if not (1 <= k <= n - m + 1 and 1 <= l <= n - m + 1):
        raise DimensionMismatch("block move out of range")
    block = list(range(k - 1, k - 1 + m))
    rest = [i for i in range(n) if i not in range(k - 1, k - 1 + m)]
    out = rest[: l - 1] + block + rest[l - 1 :]
    return np.array(out, dtype=np.intp)
