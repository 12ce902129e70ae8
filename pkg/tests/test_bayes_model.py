import math

import numpy as np
import pytest
from scipy.special import logsumexp
from scipy.stats import binom

from qrkit.bayes import (
    Hyperparams,
    RegressionData,
    build_state,
    default_hyperparams,
    log_marginal,
    log_prior_gamma,
)
from qrkit.exceptions import NumericalBreakdown

HP = Hyperparams(nu=0.5, lam=0.5, upsilon0=2.0, theta_xi=1.0, theta_phi=1.0)


def dense_log_lik(X, y, cols, hp):
    Xg = X[:, cols]
    n = len(y)
    Sig_inv = Xg.T @ Xg + np.eye(len(cols)) / hp.upsilon0
    S2 = y @ y - y @ Xg @ np.linalg.inv(Sig_inv) @ Xg.T @ y
    return (
        -0.5 * np.linalg.slogdet(Sig_inv)[1]
        - 0.5 * len(cols) * np.log(hp.upsilon0)
        - (hp.nu + n / 2) * np.log(hp.lam + S2 / 2)
    )


class TestLogMarginal:
    def test_dense_formula_oracle(self):
        rng = np.random.default_rng(0)
        n = 8
        X = np.hstack([np.ones((n, 1)), rng.standard_normal((n, 2))])
        y = rng.standard_normal(n)
        data = RegressionData(X, y)
        for cols in ([0], [0, 1], [0, 2], [0, 1, 2]):
            st = build_state(data, HP, list(cols))
            assert st.log_lik == pytest.approx(dense_log_lik(X, y, cols, HP), abs=1e-10)

    def test_intercept_only_centered_response(self):
        rng = np.random.default_rng(1)
        n = 40
        X = np.hstack([np.ones((n, 1)), rng.standard_normal((n, 3))])
        X[:, 1:] -= X[:, 1:].mean(axis=0)
        y = rng.standard_normal(n)
        data = RegressionData(X, y)
        st = build_state(data, HP, [0])
        # S^2 reduces to y^T y minus the (ridge-shrunk) intercept projection
        denom = n + 1.0 / HP.upsilon0
        expected = y @ y - (y.sum()) ** 2 / denom
        assert st.s2 == pytest.approx(expected, rel=1e-12)
        assert st.log_lik == pytest.approx(dense_log_lik(X, y, [0], HP), abs=1e-10)

    def test_state_factor_is_ridge_gram_root(self):
        rng = np.random.default_rng(3)
        n = 25
        X = np.hstack([np.ones((n, 1)), rng.standard_normal((n, 4))])
        y = rng.standard_normal(n)
        data = RegressionData(X, y)
        for use_qr in (False, True):
            st = build_state(data, HP, [0, 2, 4], use_qr=use_qr)
            Xg = X[:, [0, 2, 4]]
            G = Xg.T @ Xg + np.eye(3) / HP.upsilon0
            assert np.linalg.norm(st.R.T @ st.R - G) <= 1e-8 * np.linalg.norm(G)
            assert st.s2 >= -1e-8 * data.yty

    def test_duplicate_column_stays_finite(self):
        rng = np.random.default_rng(2)
        n = 20
        base = rng.standard_normal((n, 1))
        X = np.hstack([np.ones((n, 1)), base, base])  # exact duplicate
        y = rng.standard_normal(n)
        st = build_state(RegressionData(X, y), HP, [0, 1, 2])
        assert np.isfinite(st.log_lik)

    def test_breakdown_raises(self):
        st = build_state(
            RegressionData(np.ones((4, 1)), np.zeros(4)), HP, [0]
        )
        st.s2 = -10.0
        with pytest.raises(NumericalBreakdown):
            log_marginal(st, 4, HP)


class TestPriorGamma:
    def test_empty_model(self):
        assert log_prior_gamma(0, 7, theta=0.5) == pytest.approx(7 * math.log(0.5))

    def test_hand_value(self):
        got = log_prior_gamma(2, 4, theta=0.25)
        assert got == pytest.approx(math.log(6 * 0.25**2 * 0.75**2))

    def test_normalization(self):
        # without the multiplicity coefficient the prior is product-Bernoulli
        # and sums to one over all 2^p vectors; with it, over model sizes
        p = 9
        theta = 0.3
        per_vector = [
            log_prior_gamma(bin(c).count("1"), p, theta=theta, use_binom_coef=False)
            for c in range(1 << p)
        ]
        assert logsumexp(per_vector) == pytest.approx(0.0, abs=1e-12)
        per_size = [log_prior_gamma(g, p, theta=theta) for g in range(p + 1)]
        assert logsumexp(per_size) == pytest.approx(0.0, abs=1e-12)

    def test_beta_binomial_variant(self):
        hp = Hyperparams(nu=0.5, lam=0.5, upsilon0=1.0, theta_xi=2.0, theta_phi=3.0)
        per_size = [log_prior_gamma(g, 6, hp=hp) for g in range(7)]
        assert logsumexp(per_size) == pytest.approx(0.0, abs=1e-12)
        fixed = Hyperparams(
            nu=0.5, lam=0.5, upsilon0=1.0, theta_xi=2.0, theta_phi=3.0, fix_theta=True
        )
        got = log_prior_gamma(2, 6, hp=fixed)
        assert got == pytest.approx(log_prior_gamma(2, 6, theta=0.4))


class TestDefaultHyperparams:
    def test_p500_values(self):
        hp = default_hyperparams(100, 500, 1.0)
        assert hp.nu == 0.5
        assert hp.lam == 0.5
        assert hp.upsilon0 == pytest.approx(max(500**2.1 / (100 * 100), math.log(100)), rel=1e-15)

    def test_lambda_steps(self):
        assert default_hyperparams(100, 5000, 1.0).lam == 10.0
        assert default_hyperparams(100, 20000, 1.0).lam == 15.0

    def test_binomial_tail_bisection(self):
        hp = default_hyperparams(100, 500, 1.0)
        K = max(40.0, math.log(100))
        assert binom.sf(K, 500, hp.mu_theta) == pytest.approx(0.1, abs=1e-6)

    def test_variance_shrinks_until_feasible(self):
        # very large p drives mu_theta near 0, where sd = 0.1 is infeasible
        hp = default_hyperparams(50, 30000, 1.0)
        mu = hp.mu_theta
        var = (
            hp.theta_xi * hp.theta_phi
            / ((hp.theta_xi + hp.theta_phi) ** 2 * (hp.theta_xi + hp.theta_phi + 1.0))
        )
        assert hp.theta_xi > 0 and hp.theta_phi > 0
        assert var < mu * (1 - mu)

    def test_var_y_scales_upsilon(self):
        a = default_hyperparams(200, 50, 1.0)
        b = default_hyperparams(200, 50, 4.0)
        assert b.upsilon0 == pytest.approx(4.0 * a.upsilon0)
