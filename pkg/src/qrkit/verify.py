"""Self-verification suite behind ``qrkit verify``.

Every check compares an update path against an independent oracle
(from-scratch Householder QR, Cholesky of the Gram matrix, dense inversion,
closed-form flop counts) and reports its worst error against a fixed
tolerance.  ``inject_fault`` perturbs one update result on purpose so the
harness can demonstrate that a broken build fails loudly.
"""

from __future__ import annotations

import math
from typing import Callable, Dict, List

import numpy as np

from . import qr_update as qru
from . import r_update as ru
from .backend import get_kernels, kernels
from .counted import FlopCounter, counted_forward_substitution
from .flops import CostQuery, Op, measured_cost, predict_cost
from .linalg import (
    align_column_signs,
    forward_substitution,
    givens,
    householder,
    qr_factorize,
    thin_r,
)

CHECKS: Dict[str, Callable] = {}


def _check(name: str):
    def deco(fn):
        CHECKS[name] = fn
        return fn

    return deco


def _res(name: str, err: float, tol: float) -> dict:
    return {
        "check": name,
        "max_error": float(err),
        "tolerance": float(tol),
        "status": "pass" if err <= tol else "FAIL",
    }


def _rand_factors(rng, N, p):
    X = rng.standard_normal((N, p))
    return X, qr_factorize(X)


@_check("givens_rotation")
def check_givens(rng, sizes, inject):
    err = 0.0
    for _ in range(200 * sizes):
        a, b = rng.standard_normal(2) * 10.0 ** int(rng.integers(-3, 4))
        c, s = givens(a, b)
        err = max(err, abs(c * c + s * s - 1.0))
        rot = abs(s * a + c * b)
        err = max(err, rot / max(math.hypot(a, b), 1e-300) * 1e-1)
    return _res("givens_rotation", err, 1e-14)


@_check("householder_reflector")
def check_householder(rng, sizes, inject):
    err = 0.0
    for _ in range(100 * sizes):
        m = int(rng.integers(1, 9))
        a = float(rng.standard_normal())
        x = rng.standard_normal(m)
        tau, v, mu = householder(a, x)
        stacked = np.concatenate(([a], x))
        out = stacked - tau * v * (v @ stacked)
        err = max(err, abs(abs(out[0]) - mu) / max(mu, 1e-300))
        if m:
            err = max(err, np.abs(out[1:]).max() / max(mu, 1e-300))
    return _res("householder_reflector", err, 1e-12)


@_check("qr_factorize_residual")
def check_qr(rng, sizes, inject):
    err = 0.0
    for _ in range(20 * sizes):
        N = int(rng.integers(2, 65))
        p = int(rng.integers(1, min(N, 16) + 1))
        X, f = _rand_factors(rng, N, p)
        err = max(err, np.linalg.norm(f.Q @ f.R - X) / np.linalg.norm(X))
        err = max(err, np.linalg.norm(f.Q.T @ f.Q - np.eye(N)) / N)
    return _res("qr_factorize_residual", err, 1e-12)


@_check("triangular_solves")
def check_solves(rng, sizes, inject):
    err = 0.0
    for _ in range(20 * sizes):
        p = int(rng.integers(1, 17))
        R = np.triu(rng.standard_normal((p, p))) + 3 * np.eye(p)
        b = rng.standard_normal(p)
        x = forward_substitution(R.T, b)
        err = max(err, np.linalg.norm(R.T @ x - b) / max(np.linalg.norm(b), 1e-300))
        x2 = kernels.solve_r(np.ascontiguousarray(R), b)
        err = max(err, np.linalg.norm(R @ x2 - b) / max(np.linalg.norm(b), 1e-300))
    return _res("triangular_solves", err, 1e-10)


def _qr_cases(rng, sizes):
    for _ in range(25 * sizes):
        N = int(rng.integers(8, 65))
        p = int(rng.integers(2, min(N - 5, 16) + 1))
        m = int(rng.integers(1, 6))
        yield N, p, m


@_check("qr_update_oracle")
def check_qr_updates(rng, sizes, inject):
    err = 0.0
    first = True
    for N, p, m in _qr_cases(rng, sizes):
        X, f = _rand_factors(rng, N, p)
        which = rng.integers(4)
        if which == 0:
            k = int(rng.integers(1, N + 2))
            U = rng.standard_normal((m, p))
            g = qru.qr_add_rows(f, k, U)
            Xn = np.vstack([X[: k - 1], U, X[k - 1 :]])
        elif which == 1:
            m2 = min(m, N - p)
            if m2 < 1:
                continue
            k = int(rng.integers(1, N - m2 + 2))
            g = qru.qr_delete_rows(f, k, m2)
            Xn = np.vstack([X[: k - 1], X[k - 1 + m2 :]])
        elif which == 2:
            m2 = min(m, N - p)
            if m2 < 1:
                continue
            k = int(rng.integers(1, p + 2))
            V = rng.standard_normal((N, m2))
            g = qru.qr_add_cols(f, k, V)
            Xn = np.hstack([X[:, : k - 1], V, X[:, k - 1 :]])
        else:
            m2 = min(m, p - 1)
            if m2 < 1:
                continue
            k = int(rng.integers(1, p - m2 + 2))
            g = qru.qr_delete_cols(f, k, m2)
            Xn = np.hstack([X[:, : k - 1], X[:, k - 1 + m2 :]])
        if inject and first:
            g = qru.QrFactors(g.Q, g.R + 1e-6)
            first = False
        Ro, _ = align_column_signs(qr_factorize(Xn).R)
        err = max(err, np.linalg.norm(g.R - Ro) / max(np.linalg.norm(Ro), 1e-300))
        err = max(err, np.linalg.norm(g.Q.T @ g.Q - np.eye(g.Q.shape[0])) / g.Q.shape[0])
        err = max(err, np.linalg.norm(g.Q @ g.R - Xn) / max(np.linalg.norm(Xn), 1e-300))
    return _res("qr_update_oracle", err, 1e-9)


@_check("qr_nonadjacent_oracle")
def check_qr_nonadj(rng, sizes, inject):
    err = 0.0
    for _ in range(15 * sizes):
        N = int(rng.integers(10, 65))
        p = int(rng.integers(4, min(N - 2, 16) + 1))
        nk = int(rng.integers(1, p - 1))
        ks = sorted(rng.choice(np.arange(1, p + 1), size=nk, replace=False).tolist())
        X, f = _rand_factors(rng, N, p)
        g = qru.qr_delete_cols_nonadjacent(f, ks)
        keep = [j for j in range(p) if (j + 1) not in ks]
        Xn = X[:, keep]
        Ro, _ = align_column_signs(qr_factorize(Xn).R)
        err = max(err, np.linalg.norm(g.R - Ro) / max(np.linalg.norm(Ro), 1e-300))
        err = max(err, np.linalg.norm(g.Q @ g.R - Xn) / max(np.linalg.norm(Xn), 1e-300))
    return _res("qr_nonadjacent_oracle", err, 1e-9)


@_check("qr_roundtrips")
def check_qr_roundtrips(rng, sizes, inject):
    err = 0.0
    for N, p, m in _qr_cases(rng, sizes):
        X, f = _rand_factors(rng, N, p)
        k = int(rng.integers(1, N + 2))
        U = rng.standard_normal((m, p))
        g = qru.qr_delete_rows(qru.qr_add_rows(f, k, U), k, m)
        err = max(err, np.linalg.norm(g.R - f.R) / np.linalg.norm(f.R))
        m2 = min(m, p - 1)
        k = int(rng.integers(1, p - m2 + 2))
        V = X[:, k - 1 : k - 1 + m2].copy()
        h = qru.qr_add_cols(qru.qr_delete_cols(f, k, m2), k, V)
        err = max(err, np.linalg.norm(h.R - f.R) / np.linalg.norm(f.R))
    return _res("qr_roundtrips", err, 1e-8)


@_check("r_update_gram_oracle")
def check_r_updates(rng, sizes, inject):
    err = 0.0
    first = True

    def chol(M):
        return np.linalg.cholesky(M).T

    for _ in range(50 * sizes):
        N = int(rng.integers(12, 65))
        p = int(rng.integers(2, min(N - 6, 16) + 1))
        m = int(rng.integers(1, 5))
        X = rng.standard_normal((N, p))
        R = thin_r(X)
        which = rng.integers(4)
        if which == 0:
            U = rng.standard_normal((m, p))
            R2 = ru.r_add_rows(R, U)
            G = X.T @ X + U.T @ U
        elif which == 1:
            i0 = int(rng.integers(0, N - m + 1))
            U = X[i0 : i0 + m]
            R2 = ru.r_delete_rows(R, U)
            Xn = np.vstack([X[:i0], X[i0 + m :]])
            if Xn.shape[0] <= p:
                continue
            G = Xn.T @ Xn
        elif which == 2:
            V = rng.standard_normal((N, m))
            if p + m >= N:
                continue
            R2 = ru.r_add_cols(R, X, V)
            Z = np.hstack([X, V])
            G = Z.T @ Z
        else:
            m2 = min(m, p - 1)
            k = int(rng.integers(1, p - m2 + 2))
            R2 = ru.r_delete_cols(R, k, m2)
            Xn = np.hstack([X[:, : k - 1], X[:, k - 1 + m2 :]])
            G = Xn.T @ Xn
        if inject and first:
            R2 = R2 + 1e-6
            first = False
        err = max(err, np.linalg.norm(R2 - chol(G)) / np.linalg.norm(G) ** 0.5)
    return _res("r_update_gram_oracle", err, 1e-9)


@_check("thin_full_consistency")
def check_thin_full(rng, sizes, inject):
    err = 0.0
    for _ in range(25 * sizes):
        N = int(rng.integers(10, 65))
        p = int(rng.integers(2, min(N - 6, 16) + 1))
        m = int(rng.integers(1, 5))
        X = rng.standard_normal((N, p))
        f = qr_factorize(X)
        R = thin_r(X)
        U = rng.standard_normal((m, p))
        a = qru.qr_add_rows(f, N + 1, U).R[: p, :]
        b = ru.r_add_rows(R, U)
        err = max(err, np.linalg.norm(a - b) / np.linalg.norm(b))
        m2 = min(m, p - 1)
        k = int(rng.integers(1, p - m2 + 2))
        a = qru.qr_delete_cols(f, k, m2).R[: p - m2, :]
        b = ru.r_delete_cols(R, k, m2)
        err = max(err, np.linalg.norm(a - b) / np.linalg.norm(b))
    return _res("thin_full_consistency", err, 1e-9)


@_check("r_downdate_inverse")
def check_r_inverse(rng, sizes, inject):
    err = 0.0
    for _ in range(50 * sizes):
        p = int(rng.integers(2, 17))
        m = int(rng.integers(1, 5))
        X = rng.standard_normal((p + m + 5, p))
        R = thin_r(X)
        U = rng.standard_normal((m, p))
        R3 = ru.r_delete_rows(ru.r_add_rows(R, U), U)
        err = max(err, np.linalg.norm(R3 - R) / np.linalg.norm(R))
    return _res("r_downdate_inverse", err, 1e-8)


@_check("gram_inverse_oracle")
def check_gram_inverse(rng, sizes, inject):
    err = 0.0
    for _ in range(50 * sizes):
        N = int(rng.integers(10, 40))
        p = int(rng.integers(1, 8))
        X = rng.standard_normal((N, p))
        x = rng.standard_normal(N)
        k = int(rng.integers(1, p + 2))
        B = np.linalg.inv(X.T @ X)
        B2 = ru.gram_inverse_add_col(B, X, k, x)
        Xn = np.hstack([X[:, : k - 1], x[:, None], X[:, k - 1 :]])
        err = max(err, np.linalg.norm(B2 - np.linalg.inv(Xn.T @ Xn)) / np.linalg.norm(B2))
        B3 = ru.gram_inverse_delete_col(B2, k)
        err = max(err, np.linalg.norm(B3 - B) / np.linalg.norm(B))
    return _res("gram_inverse_oracle", err, 1e-9)


@_check("flop_exactness")
def check_flops(rng, sizes, inject):
    worst = 0
    for N in (16, 32):
        for p in (4, 8):
            for m in (1, 2, 4):
                for op in Op:
                    if "NONADJ" in op.name:
                        continue
                    blk = "BLOCK" in op.name
                    if blk != (m > 1):
                        continue
                    if "COLS_BLOCK" in op.name and m >= p:
                        continue
                    if op in (Op.R_ADD_COL, Op.R_ADD_COLS_BLOCK):
                        k_values = [p + 1]
                    elif op in (Op.QR_ADD_COL, Op.QR_ADD_COLS_BLOCK):
                        k_values = [1, p + 1]
                    elif op in (Op.QR_DEL_COL, Op.R_DEL_COL):
                        k_values = [1, p]
                    elif op in (Op.QR_DEL_COLS_BLOCK, Op.R_DEL_COLS_BLOCK):
                        k_values = [1, p - m + 1]
                    else:
                        k_values = [1]
                    for k in k_values:
                        qq = CostQuery(op, N=N, p=p, m=m, k=k)
                        pred = predict_cost(qq)
                        meas = measured_cost(qq, seed=int(rng.integers(1 << 30)))
                        worst = max(worst, abs(pred - meas))
    _, fc = counted_forward_substitution(np.eye(7), np.ones(7))
    worst = max(worst, abs(fc.total - 49))
    if inject:
        worst = max(worst, 1)
    return _res("flop_exactness", worst, 0)


@_check("backend_equivalence")
def check_backend(rng, sizes, inject):
    ck = get_kernels()
    pk = get_kernels(force_python=True)
    if ck is pk:
        return _res("backend_equivalence", 0.0, 1e-13)
    err = 0.0
    for _ in range(30 * sizes):
        p = int(rng.integers(2, 17))
        m = int(rng.integers(1, 5))
        X = rng.standard_normal((p + m + 6, p))
        R = np.ascontiguousarray(thin_r(X))
        u = rng.standard_normal(p)
        a, b = R.copy(), R.copy()
        ck.thin_add_row(a, u.copy())
        pk.thin_add_row(b, u.copy())
        err = max(err, np.abs(a - b).max())
        U = rng.standard_normal((m + 1, p))
        a, b = R.copy(), R.copy()
        ck.thin_add_rows(a, U)
        pk.thin_add_rows(b, U)
        err = max(err, np.abs(a - b).max())
        k = int(rng.integers(0, p - 1))
        err = max(
            err,
            np.abs(ck.thin_del_cols(R.copy(), k, 1) - pk.thin_del_cols(R.copy(), k, 1)).max(),
        )
    return _res("backend_equivalence", err, 1e-12)


@_check("chain_incremental_audit")
def check_chain(rng, sizes, inject):
    from .bayes import RegressionData, build_state, default_hyperparams, run_chain
    from .bayes.data import generate_design, generate_response

    X = generate_design(80, 8, seed=int(rng.integers(1 << 30)))
    y, _ = generate_response(X, 3, 1.0, seed=int(rng.integers(1 << 30)))
    hp = default_hyperparams(80, 8, float(np.var(y)))
    summ = run_chain(X, y, hp, draws=3000, seed=int(rng.integers(1 << 30)), audit_every=250)
    return _res("chain_incremental_audit", summ.audit_max_err, 1e-8)


def run_checks(seed: int = 0, sizes: int = 1, inject_fault: bool = False) -> List[dict]:
    """Run every registered check; one result row each, reproducibly."""
    import zlib

    rows = []
    for name, fn in CHECKS.items():
        rng = np.random.default_rng([seed, zlib.crc32(name.encode())])
        rows.append(fn(rng, sizes, inject_fault))
    return rows
