"""Gaussian linear model with a Dirac spike-and-slab prior.

The model for outcome y (length n) and design X (n x p, intercept first):

    y = X beta + eps,   eps ~ N(0, sigma^2 I),
    beta_j | gamma_j = 1, sigma^2 ~ N(0, sigma^2 upsilon0),
    beta_j | gamma_j = 0 identically 0,
    gamma_j ~ Bern(theta)  (j >= 2; the intercept is always included),
    theta ~ Beta(xi, phi),   sigma^2 ~ IG(nu, lambda).

Integrating beta and sigma^2 out leaves a closed-form marginal likelihood
per inclusion vector gamma, driven entirely by the triangular factor of the
ridge-augmented Gram matrix (X_g^T X_g + I/upsilon0) -- which is what the
thin updates maintain in O(p_gamma^2) per move.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.special import betaln, gammaln
from scipy.stats import binom

from ..backend import kernels
from ..exceptions import InfeasibleThetaPrior, NumericalBreakdown
from ..linalg import thin_r

logger = logging.getLogger("qrkit.bayes")


@dataclass(frozen=True)
class Hyperparams:
    """Prior hyper-parameters for the spike-and-slab regression.

    ``fix_theta`` switches the model prior from the integrated
    beta-binomial form to the plug-in Bernoulli(theta = mean) form; the
    printed binomial coefficient can be dropped with ``use_binom_coef``.
    """

    nu: float
    lam: float
    upsilon0: float
    theta_xi: float
    theta_phi: float
    fix_theta: bool = False
    use_binom_coef: bool = True

    @property
    def mu_theta(self) -> float:
        return self.theta_xi / (self.theta_xi + self.theta_phi)

    def with_upsilon0(self, upsilon0: float) -> "Hyperparams":
        return replace(self, upsilon0=upsilon0)


def _solve_mu_theta(p: int, K: float, target: float = 0.1) -> float:
    """Bisection for mu with P(Bin(p, mu) > K) = target (tail increasing in mu)."""
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if binom.sf(K, p, mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    return 0.5 * (lo + hi)


def default_hyperparams(n: int, p: int, var_y: float) -> Hyperparams:
    """Weakly-informative defaults scaled to the problem size.

    nu = 0.5; lambda steps with p (0.5 / 10 / 15 at p = 1e3 and 1e4);
    upsilon0 = var_y * max(p^2.1 / (100 n), log n).  The Beta(xi, phi)
    hyperprior on theta is pinned by requiring the prior model size to
    exceed K = max(40, log n) with probability 0.1 (prior sd 0.1), then
    moment-matching.  For p <= K that tail event is impossible for every
    theta; the prior mean then falls back to the target value 0.1 itself,
    keeping the prior sparse.
    """
    if n < 2 or p < 1 or var_y <= 0:
        raise ValueError("need n >= 2, p >= 1, var_y > 0")
    if p < 10**3:
        lam = 0.5
    elif p < 10**4:
        lam = 10.0
    else:
        lam = 15.0
    upsilon0 = var_y * max(p**2.1 / (100.0 * n), math.log(n))

    K = max(40.0, math.log(n))
    if p > K:
        mu = _solve_mu_theta(p, K)
    else:
        mu = 0.1
        logger.info("p = %d <= K = %.1f: prior size constraint vacuous, mu_theta = 0.1", p, K)

    sigma = 0.1
    while True:
        scale = mu * (1.0 - mu) / (sigma * sigma) - 1.0
        xi = mu * scale
        phi = (1.0 - mu) * scale
        if xi > 0 and phi > 0:
            break
        if sigma < 1e-8:
            raise InfeasibleThetaPrior(f"cannot match mean {mu} with any positive variance")
        sigma *= 0.5
        logger.info("theta prior variance infeasible at mean %.4g; shrinking sd to %.4g", mu, sigma)
    return Hyperparams(nu=0.5, lam=lam, upsilon0=upsilon0, theta_xi=xi, theta_phi=phi)


def log_prior_gamma(
    p_gamma: int,
    p: int,
    theta: Optional[float] = None,
    hp: Optional[Hyperparams] = None,
    use_binom_coef: bool = True,
) -> float:
    """Log prior of an inclusion vector with p_gamma of p components active.

    With ``theta`` fixed this is the printed binomial-coefficient form
    C(p, p_gamma) theta^p_gamma (1-theta)^(p-p_gamma); with ``hp`` given and
    theta integrated out it becomes the beta-binomial analogue.
    """
    coef = 0.0
    if use_binom_coef:
        coef = gammaln(p + 1) - gammaln(p_gamma + 1) - gammaln(p - p_gamma + 1)
    if hp is not None and not hp.fix_theta:
        return coef + betaln(hp.theta_xi + p_gamma, hp.theta_phi + p - p_gamma) - betaln(
            hp.theta_xi, hp.theta_phi
        )
    th = theta if theta is not None else (hp.mu_theta if hp is not None else None)
    if th is None:
        raise ValueError("need theta or hp")
    return coef + p_gamma * math.log(th) + (p - p_gamma) * math.log1p(-th)


class RegressionData:
    """Design and response with the cross products the sampler reuses."""

    def __init__(self, X: np.ndarray, y: np.ndarray):
        X = np.ascontiguousarray(X, dtype=float)
        y = np.ascontiguousarray(y, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise ValueError("X and y disagree on n")
        self.X = X
        self.y = y
        self.n, self.p = X.shape
        self.Xty = X.T @ y
        self.yty = float(y @ y)
        self.col_sq = np.einsum("ij,ij->j", X, X)


@dataclass
class ModelState:
    """Inclusion vector with the factor and scalars the sampler caches.

    ``cols`` lists covariate indices in factor-column (insertion) order;
    ``R`` is the triangular factor of X_g^T X_g + I/upsilon0 over that
    ordering; ``z`` solves R^T z = X_g^T y so that S^2 = y^T y - z^T z.
    """

    gamma: np.ndarray
    cols: list
    R: np.ndarray
    z: np.ndarray
    s2: float
    log_det: float
    log_lik: float
    log_prior: float

    @property
    def log_post(self) -> float:
        return self.log_lik + self.log_prior

    @property
    def p_gamma(self) -> int:
        return len(self.cols)

    def key(self) -> bytes:
        return np.packbits(self.gamma).tobytes()


def log_marginal_from_factor(
    R: np.ndarray, z: np.ndarray, yty: float, n: int, hp: Hyperparams
) -> tuple[float, float, float]:
    """(log_lik, s2, log_det) of the model whose augmented factor is R."""
    p_gamma = R.shape[0]
    diag = np.diag(R)
    log_det = 2.0 * float(np.sum(np.log(diag)))
    s2 = yty - float(z @ z)
    scale = hp.lam + 0.5 * s2
    if scale <= 0.0:
        raise NumericalBreakdown(f"lambda + S^2/2 = {scale:.3e} <= 0")
    log_lik = (
        -0.5 * log_det
        - 0.5 * p_gamma * math.log(hp.upsilon0)
        - (hp.nu + 0.5 * n) * math.log(scale)
    )
    return log_lik, s2, log_det


def log_marginal(state: ModelState, n: int, hp: Hyperparams) -> float:
    """Log marginal likelihood of the state's model (up to the global constant)."""
    scale = hp.lam + 0.5 * state.s2
    if scale <= 0.0:
        raise NumericalBreakdown(f"lambda + S^2/2 = {scale:.3e} <= 0")
    return (
        -0.5 * state.log_det
        - 0.5 * state.p_gamma * math.log(hp.upsilon0)
        - (hp.nu + 0.5 * n) * math.log(scale)
    )


def build_state(
    data: RegressionData, hp: Hyperparams, active: Sequence[int], use_qr: bool = False
) -> ModelState:
    """From-scratch state for the covariates in ``active`` (must include 0).

    ``use_qr`` routes through the package's own Householder factorization of
    the augmented design (the audit path); the default takes the Cholesky
    factor of the ridge Gram, which is the same matrix up to roundoff.
    """
    cols = list(active)
    if not cols or cols[0] != 0:
        raise ValueError("the intercept (index 0) must come first")
    Xg = data.X[:, cols]
    ridge = 1.0 / hp.upsilon0
    if use_qr:
        aug = np.vstack([Xg, math.sqrt(ridge) * np.eye(len(cols))])
        R = thin_r(aug)
    else:
        G = Xg.T @ Xg + ridge * np.eye(len(cols))
        R = np.linalg.cholesky(G).T
    R = np.ascontiguousarray(R)
    z = kernels.solve_rt(R, data.Xty[cols])
    log_lik, s2, log_det = log_marginal_from_factor(R, z, data.yty, data.n, hp)
    gamma = np.zeros(data.p, dtype=bool)
    gamma[cols] = True
    lp = log_prior_gamma(len(cols), data.p, hp=hp, use_binom_coef=hp.use_binom_coef)
    return ModelState(gamma, cols, R, z, s2, log_det, log_lik, lp)


def coefficient_mean(state: ModelState, p: int) -> np.ndarray:
    """Posterior mean of beta given the state's model, as a full p-vector."""
    beta_g = kernels.solve_r(state.R, state.z)
    out = np.zeros(p)
    out[state.cols] = beta_g
    return out
