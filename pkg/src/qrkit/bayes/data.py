"""Synthetic designs and responses for the simulation studies."""

from __future__ import annotations

import math

import numpy as np

STRUCTURES = ("independent", "equicorrelated", "decaying")


def generate_design(
    n: int, p: int, structure: str = "independent", rho: float = 0.5, seed: int = 0
) -> np.ndarray:
    """n x p design with a leading all-ones column and Gaussian covariates.

    equicorrelated: cov(x_i, x_j) = rho for i != j, sampled through the
    single-factor representation sqrt(rho) g + sqrt(1-rho) z.
    decaying: cov(x_i, x_j) = rho^|i-j|, sampled by the AR(1) recursion.
    Both agree exactly with the Cholesky route.
    """
    if structure not in STRUCTURES:
        raise ValueError(f"structure must be one of {STRUCTURES}")
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must lie in [0, 1)")
    rng = np.random.Generator(np.random.Philox(seed))
    Z = rng.standard_normal((n, p - 1))
    if structure == "equicorrelated" and p > 2:
        g = rng.standard_normal((n, 1))
        Z = math.sqrt(rho) * g + math.sqrt(1.0 - rho) * Z
    elif structure == "decaying" and p > 2:
        X1 = np.empty_like(Z)
        X1[:, 0] = Z[:, 0]
        c = math.sqrt(1.0 - rho * rho)
        for j in range(1, p - 1):
            X1[:, j] = rho * X1[:, j - 1] + c * Z[:, j]
        Z = X1
    X = np.empty((n, p))
    X[:, 0] = 1.0
    X[:, 1:] = Z
    return X


def generate_response(
    X: np.ndarray, p0: int, sigma2: float = 1.0, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Response with p0 leading nonzero coefficients (intercept included).

    beta_j = 5 (-1)^{u_j} (log(n)/sqrt(n) + |z_j|) with u_j ~ Bern(0.4) and
    z_j standard normal, so every signal exceeds 5 log(n)/sqrt(n) in
    magnitude; the remaining p - p0 coefficients are zero.
    """
    n, p = X.shape
    if not 0 <= p0 < p:
        raise ValueError("need 0 <= p0 < p")
    rng = np.random.Generator(np.random.Philox(seed))
    beta = np.zeros(p)
    if p0 > 0:
        u = rng.binomial(1, 0.4, size=p0)
        z = rng.standard_normal(p0)
        beta[:p0] = 5.0 * (-1.0) ** u * (math.log(n) / math.sqrt(n) + np.abs(z))
    y = X @ beta
    if sigma2 > 0:
        y = y + math.sqrt(sigma2) * rng.standard_normal(n)
    return y, beta
