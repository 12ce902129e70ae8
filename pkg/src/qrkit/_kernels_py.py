"""Pure-numpy fallback kernels for the thin R updates.

Same call surface as the compiled extension in ``_kernels.pyx``; the backend
module picks whichever is importable.  All kernels take C-contiguous float64
arrays, use 0-based indices, and mutate their first argument in place unless
stated otherwise.  Downdating kernels return the most negative squared pivot
seen (before the absolute value) so callers can detect breakdown; kernels
never raise.
"""

from __future__ import annotations

import math

import numpy as np

IS_COMPILED = False


def solve_rt(R: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve R^T z = b for upper-triangular R (forward substitution)."""
    n = R.shape[0]
    z = np.zeros(n)
    for i in range(n):
        z[i] = (b[i] - R[:i, i] @ z[:i]) / R[i, i]
    return z


def solve_r(R: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve R x = b for upper-triangular R (backward substitution)."""
    n = R.shape[0]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - R[i, i + 1 :] @ x[i + 1 :]) / R[i, i]
    return x


def thin_add_row(R: np.ndarray, u: np.ndarray) -> None:
    """Absorb one appended row ``u`` into R via p Givens rotations."""
    p = R.shape[0]
    u = u.copy()
    for i in range(p):
        a, b = R[i, i], u[i]
        if b == 0.0:
            continue
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
        R[i, i] = c * a - s * b
        if i < p - 1:
            t = R[i, i + 1 :].copy()
            R[i, i + 1 :] = c * t - s * u[i + 1 :]
            u[i + 1 :] = s * t + c * u[i + 1 :]


def thin_del_row(R: np.ndarray, u: np.ndarray) -> float:
    """Remove one row ``u`` from R by reversing the add-row rotations."""
    p = R.shape[0]
    u = u.copy()
    worst = np.inf
    for i in range(p):
        r = R[i, i]
        d2 = r * r - u[i] * u[i]
        worst = min(worst, d2)
        R[i, i] = math.sqrt(abs(d2))
        if i < p - 1 and u[i] != 0.0:
            c = R[i, i] / r
            s = -u[i] / r
            if c == 0.0:
                continue
            R[i, i + 1 :] = (R[i, i + 1 :] + s * u[i + 1 :]) / c
            u[i + 1 :] = s * R[i, i + 1 :] + c * u[i + 1 :]
    return worst


def thin_add_rows(R: np.ndarray, U: np.ndarray) -> None:
    """Absorb a block of m >= 2 appended rows via p Householder reflectors."""
    p = R.shape[0]
    W = U.copy()
    for i in range(p - 1):
        tau, v2, mu = _householder(R[i, i], W[:, i])
        R[i, i] = mu
        if tau != 0.0:
            ell = tau * R[i, i + 1 :] + (tau * v2) @ W[:, i + 1 :]
            R[i, i + 1 :] -= ell
            W[:, i + 1 :] -= np.outer(v2, ell)
    R[p - 1, p - 1] = math.sqrt(R[p - 1, p - 1] ** 2 + float(W[:, p - 1] @ W[:, p - 1]))


def thin_del_rows(R: np.ndarray, U: np.ndarray) -> float:
    """Remove a block of m >= 2 rows by reversing the Householder absorption."""
    p = R.shape[0]
    W = U.copy()
    worst = np.inf
    for i in range(p):
        s = float(W[:, i] @ W[:, i])
        r = R[i, i]
        d2 = r * r - s
        worst = min(worst, d2)
        R[i, i] = math.sqrt(abs(d2))
        if i < p - 1 and s != 0.0:
            v1 = R[i, i] - r
            if v1 == 0.0:
                continue
            b = v1 * v1
            tau = 2.0 * b / (b + s)
            v2 = W[:, i] / v1
            w = tau * (v2 @ W[:, i + 1 :])
            R[i, i + 1 :] = (R[i, i + 1 :] + w) / (1.0 - tau)
            W[:, i + 1 :] -= np.outer(v2, tau * R[i, i + 1 :] + w)
    return worst


def thin_add_cols(R: np.ndarray, cross: np.ndarray, vv: np.ndarray) -> tuple[np.ndarray, float]:
    """Extend R for m columns appended on the right.

    ``cross`` is X^T U (p x m) and ``vv`` is U^T U (m x m).  Returns the
    (p + m) x (p + m) factor and the most negative squared pivot.
    """
    p = R.shape[0]
    m = cross.shape[1]
    R12 = np.empty((p, m))
    for j in range(m):
        R12[:, j] = solve_rt(R, cross[:, j])
    R22 = np.zeros((m, m))
    worst = np.inf
    for i in range(m):
        d2 = vv[i, i] - float(R12[:, i] @ R12[:, i]) - float(R22[:i, i] @ R22[:i, i])
        worst = min(worst, d2)
        R22[i, i] = math.sqrt(abs(d2))
        if i < m - 1:
            num = vv[i, i + 1 :] - R12[:, i] @ R12[:, i + 1 :] - R22[:i, i] @ R22[:i, i + 1 :]
            R22[i, i + 1 :] = num / R22[i, i]
    out = np.zeros((p + m, p + m))
    out[:p, :p] = R
    out[:p, p:] = R12
    out[p:, p:] = R22
    return out, worst


def thin_step(R: np.ndarray, i: int, a: int) -> None:
    """Zero ``a`` subdiagonal entries of 0-based column i of the p x l panel."""
    l = R.shape[1]
    if a > 1:
        tau, v2, mu = _householder(R[i, i], R[i + 1 : i + 1 + a, i])
        R[i, i] = mu
        R[i + 1 : i + 1 + a, i] = 0.0
        if i < l - 1 and tau != 0.0:
            v = np.concatenate(([1.0], v2))
            block = R[i : i + 1 + a, i + 1 :]
            block -= np.outer(tau * v, v @ block)
    else:
        a0, b0 = R[i, i], R[i + 1, i]
        if b0 == 0.0 and a0 >= 0.0:
            return
        c, s = _givens(a0, b0)
        R[i, i] = c * a0 - s * b0
        R[i + 1, i] = 0.0
        if i < l - 1:
            r0 = R[i, i + 1 :].copy()
            R[i, i + 1 :] = c * r0 - s * R[i + 1, i + 1 :]
            R[i + 1, i + 1 :] = s * r0 + c * R[i + 1, i + 1 :]


def thin_del_cols(R: np.ndarray, k: int, m: int) -> np.ndarray:
    """Triangular factor with 0-based columns k..k+m-1 removed."""
    p = R.shape[0]
    w = p - m
    if k == w:
        return R[:w, :w].copy()
    T = np.hstack([R[:, :k], R[:, k + m :]])
    if m == 1:
        for i in range(k, w):
            thin_step(T, i, 1)
        return T[:w, :w].copy()
    for i in range(k, w - 1):
        tau, v2, mu = _householder(T[i, i], T[i + 1 : i + 1 + m, i])
        T[i, i] = mu
        T[i + 1 : i + 1 + m, i] = 0.0
        if tau != 0.0:
            v = np.concatenate(([1.0], v2))
            block = T[i : i + 1 + m, i + 1 : w]
            block -= np.outer(tau * v, v @ block)
    col = T[w - 1 : w - 1 + m + 1, w - 1]
    T[w - 1, w - 1] = math.sqrt(float(col @ col))
    return T[:w, :w].copy()


def _givens(a: float, b: float) -> tuple[float, float]:
    if b == 0.0:
        return 1.0, 0.0
    if abs(b) > abs(a):
        r = -a / b
        s = 1.0 / math.sqrt(1.0 + r * r)
        c = s * r
        if b > 0.0:
            return -c, -s
        return c, s
    r = -b / a
    c = 1.0 / math.sqrt(1.0 + r * r)
    s = c * r
    if a < 0.0:
        return -c, -s
    return c, s


def _householder(a: float, x: np.ndarray) -> tuple[float, np.ndarray, float]:
    s = float(x @ x)
    if s == 0.0:
        if a >= 0.0:
            return 0.0, np.zeros_like(x), a
        return 2.0, np.zeros_like(x), -a
    mu = math.sqrt(s + a * a)
    v1 = a - mu if a <= 0.0 else -s / (a + mu)
    b = v1 * v1
    tau = 2.0 * b / (s + b)
    return tau, x / v1, mu
