"""Reversible-jump sampler over inclusion vectors, and exact enumeration.

Moves are birth / death / swap with probabilities 0.4 / 0.4 / 0.2 and
uniform selection within each; the Metropolis-Hastings ratio corrects for
the candidate-count asymmetry.  A birth appends one covariate's column to
the ridge-augmented factor (forward solve + norm), a death deletes one
factor column (Givens sweep), so a move costs O(p_gamma^2 + n p_gamma)
independent of p.  Every ``audit_every`` draws the cached factor and
log-marginal are recomputed from scratch and the chain state refreshed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..backend import kernels
from ..exceptions import TooManyCovariates
from .model import (
    Hyperparams,
    ModelState,
    RegressionData,
    build_state,
    coefficient_mean,
    log_marginal_from_factor,
    log_prior_gamma,
)

P_BIRTH, P_DEATH, P_SWAP = 0.4, 0.4, 0.2


def _state_after_birth(data: RegressionData, hp: Hyperparams, state: ModelState, j: int) -> ModelState:
    cols = state.cols + [j]
    cross = data.X[:, state.cols].T @ data.X[:, j]
    vv = np.array([[data.col_sq[j] + 1.0 / hp.upsilon0]])
    R, _ = kernels.thin_add_cols(state.R, cross[:, None], vv)
    z = kernels.solve_rt(R, data.Xty[cols])
    log_lik, s2, log_det = log_marginal_from_factor(R, z, data.yty, data.n, hp)
    gamma = state.gamma.copy()
    gamma[j] = True
    lp = log_prior_gamma(len(cols), data.p, hp=hp, use_binom_coef=hp.use_binom_coef)
    return ModelState(gamma, cols, R, z, s2, log_det, log_lik, lp)


def _state_after_death(data: RegressionData, hp: Hyperparams, state: ModelState, pos: int) -> ModelState:
    cols = state.cols[:pos] + state.cols[pos + 1 :]
    R = kernels.thin_del_cols(state.R.copy(), pos, 1)
    z = kernels.solve_rt(R, data.Xty[cols])
    log_lik, s2, log_det = log_marginal_from_factor(R, z, data.yty, data.n, hp)
    gamma = state.gamma.copy()
    gamma[state.cols[pos]] = False
    lp = log_prior_gamma(len(cols), data.p, hp=hp, use_binom_coef=hp.use_binom_coef)
    return ModelState(gamma, cols, R, z, s2, log_det, log_lik, lp)


def rj_step(
    state: ModelState,
    data: RegressionData,
    hp: Hyperparams,
    rng: np.random.Generator,
) -> tuple[ModelState, bool]:
    """One reversible-jump transition; returns (state, accepted)."""
    n_in = state.p_gamma - 1  # selectable included (intercept pinned)
    n_out = data.p - state.p_gamma
    u = rng.random()
    if u < P_BIRTH:
        if n_out == 0:
            return state, False
        excluded = np.flatnonzero(~state.gamma)
        j = int(excluded[rng.integers(n_out)])
        cand = _state_after_birth(data, hp, state, j)
        log_ratio = cand.log_post - state.log_post + math.log(n_out) - math.log(n_in + 1)
    elif u < P_BIRTH + P_DEATH:
        if n_in == 0:
            return state, False
        pos = 1 + int(rng.integers(n_in))
        cand = _state_after_death(data, hp, state, pos)
        log_ratio = cand.log_post - state.log_post + math.log(n_in) - math.log(n_out + 1)
    else:
        if n_in == 0 or n_out == 0:
            return state, False
        pos = 1 + int(rng.integers(n_in))
        excluded = np.flatnonzero(~state.gamma)
        j = int(excluded[rng.integers(n_out)])
        half = _state_after_death(data, hp, state, pos)
        cand = _state_after_birth(data, hp, half, j)
        log_ratio = cand.log_post - state.log_post
    if log_ratio >= 0.0 or rng.random() < math.exp(log_ratio):
        return cand, True
    return state, False


@dataclass
class ChainSummary:
    """Posterior summaries of one reversible-jump run."""

    mip: np.ndarray
    mpm_mask: np.ndarray
    map_mask: np.ndarray
    pmp_top: List[dict]
    beta_bma: np.ndarray
    beta_mpm: np.ndarray
    draws: int
    burnin: int
    acceptance_rate: float
    audit_max_err: float
    visited: Dict[bytes, int] = field(repr=False, default_factory=dict)


def run_chain(
    X: np.ndarray,
    y: np.ndarray,
    hp: Hyperparams,
    draws: int,
    burnin: Optional[int] = None,
    seed: int = 0,
    init: Optional[Sequence[int]] = None,
    audit_every: int = 1000,
    audit_tol: float = 1e-8,
    top_models: int = 10,
) -> ChainSummary:
    """Run the sampler and summarize the visited models.

    Deterministic for a fixed seed (counter-based Philox stream).  The
    intercept column of X must come first; ``burnin`` defaults to 20% of
    ``draws``.  Raises if an audit recompute disagrees with the cached
    log-marginal beyond ``audit_tol``.
    """
    data = RegressionData(X, y)
    if burnin is None:
        burnin = draws // 5
    if not 0 <= burnin < draws:
        raise ValueError("need 0 <= burnin < draws")
    rng = np.random.Generator(np.random.Philox(seed))
    state = build_state(data, hp, list(init) if init else [0])

    mip_sum = np.zeros(data.p)
    beta_sum = np.zeros(data.p)
    visited: Dict[bytes, int] = {}
    logpost: Dict[bytes, float] = {}
    best_key: Optional[bytes] = None
    accepted = 0
    audit_max = 0.0
    kept = 0

    for t in range(draws):
        state, acc = rj_step(state, data, hp, rng)
        accepted += acc
        if (t + 1) % audit_every == 0:
            fresh = build_state(data, hp, state.cols, use_qr=True)
            err = abs(fresh.log_post - state.log_post) / max(1.0, abs(fresh.log_post))
            audit_max = max(audit_max, err)
            if err > audit_tol:
                raise ArithmeticError(
                    f"audit at draw {t + 1}: incremental log-posterior off by {err:.3e}"
                )
            state = fresh
        if t >= burnin:
            kept += 1
            mip_sum += state.gamma
            beta_sum += coefficient_mean(state, data.p)
            key = state.key()
            visited[key] = visited.get(key, 0) + 1
            if key not in logpost:
                logpost[key] = state.log_post
                if best_key is None or state.log_post > logpost[best_key]:
                    best_key = key

    mip = mip_sum / kept
    mpm_mask = mip >= 0.5
    mpm_mask[0] = True
    map_mask = np.unpackbits(np.frombuffer(best_key, dtype=np.uint8))[: data.p].astype(bool)
    top = sorted(visited.items(), key=lambda kv: (-kv[1], kv[0]))[:top_models]
    pmp_top = [
        {
            "mask": np.unpackbits(np.frombuffer(k, dtype=np.uint8))[: data.p].astype(bool),
            "freq": c / kept,
            "log_post": logpost[k],
        }
        for k, c in top
    ]
    mpm_state = build_state(data, hp, list(np.flatnonzero(mpm_mask)))
    return ChainSummary(
        mip=mip,
        mpm_mask=mpm_mask,
        map_mask=map_mask,
        pmp_top=pmp_top,
        beta_bma=beta_sum / kept,
        beta_mpm=coefficient_mean(mpm_state, data.p),
        draws=draws,
        burnin=burnin,
        acceptance_rate=accepted / draws,
        audit_max_err=audit_max,
        visited=visited,
    )


def enumerate_posterior(X: np.ndarray, y: np.ndarray, hp: Hyperparams, max_p: int = 20) -> List[dict]:
    """Exact posterior over all 2^(p-1) models (intercept always in).

    Independent of the incremental machinery: every model is factored from
    scratch from its ridge Gram matrix.  Rows are sorted by posterior mass.
    """
    data = RegressionData(X, y)
    p = data.p
    if p > max_p:
        raise TooManyCovariates(f"enumeration over {p} covariates (2^{p - 1} models)")
    G = data.X.T @ data.X
    ridge = 1.0 / hp.upsilon0
    rows = []
    free = list(range(1, p))
    for code in range(1 << (p - 1)):
        cols = [0] + [free[i] for i in range(p - 1) if code >> i & 1]
        idx = np.array(cols)
        Gs = G[np.ix_(idx, idx)] + ridge * np.eye(len(cols))
        R = np.linalg.cholesky(Gs).T
        z = kernels.solve_rt(np.ascontiguousarray(R), data.Xty[idx])
        log_lik, _, _ = log_marginal_from_factor(R, z, data.yty, data.n, hp)
        lp = log_prior_gamma(len(cols), p, hp=hp, use_binom_coef=hp.use_binom_coef)
        mask = np.zeros(p, dtype=bool)
        mask[idx] = True
        rows.append({"mask": mask, "log_lik": log_lik, "log_prior": lp, "log_post": log_lik + lp})
    posts = np.array([r["log_post"] for r in rows])
    posts -= posts.max()
    w = np.exp(posts)
    w /= w.sum()
    for r, pi in zip(rows, w):
        r["pmp"] = float(pi)
    rows.sort(key=lambda r: -r["pmp"])
    return rows
