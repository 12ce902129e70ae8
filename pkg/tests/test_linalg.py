import math

import numpy as np
import pytest

from qrkit.exceptions import DimensionMismatch, RankDeficient, SingularTriangular
from qrkit.linalg import (
    backward_substitution,
    forward_substitution,
    givens,
    householder,
    move_rows_indices,
    qr_factorize,
    thin_r,
)


class TestGivens:
    def test_zero_b(self):
        assert givens(1.0, 0.0) == (1.0, 0.0)
        assert givens(-3.0, 0.0) == (1.0, 0.0)
        assert givens(0.0, 0.0) == (1.0, 0.0)

    def test_known_values(self):
        c, s = givens(0.0, 2.0)
        assert c == pytest.approx(0.0, abs=1e-15)
        assert s == pytest.approx(-1.0)
        c, s = givens(3.0, 4.0)
        assert c == pytest.approx(0.6)
        assert s == pytest.approx(-0.8)

    def test_rotation_properties(self):
        rng = np.random.default_rng(0)
        for _ in range(500):
            a, b = rng.standard_normal(2) * 10.0 ** int(rng.integers(-4, 5))
            c, s = givens(a, b)
            assert abs(c * c + s * s - 1.0) <= 1e-14
            r = math.hypot(a, b)
            assert abs(c * a - s * b) == pytest.approx(r, rel=1e-13)
            assert abs(s * a + c * b) <= 1e-13 * max(r, 1e-300)


class TestHouseholder:
    def test_degenerate_branches(self):
        tau, v, mu = householder(2.0, np.zeros(2))
        assert (tau, mu) == (0.0, 2.0)
        tau, v, mu = householder(-2.0, np.zeros(2))
        assert (tau, mu) == (2.0, 2.0)

    def test_worked_example(self):
        tau, v, mu = householder(3.0, np.array([4.0]))
        assert tau == pytest.approx(0.4)
        assert v == pytest.approx([1.0, -2.0])
        assert mu == pytest.approx(5.0)
        x = np.array([3.0, 4.0])
        out = x - tau * v * (v @ x)
        assert out == pytest.approx([5.0, 0.0], abs=1e-14)

    def test_annihilation_property(self):
        rng = np.random.default_rng(1)
        for _ in range(300):
            m = int(rng.integers(1, 10))
            a = float(rng.standard_normal() * 10.0 ** int(rng.integers(-3, 4)))
            x = rng.standard_normal(m)
            tau, v, mu = householder(a, x)
            assert mu >= 0.0
            stacked = np.concatenate(([a], x))
            out = stacked - tau * v * (v @ stacked)
            assert abs(abs(out[0]) - mu) <= 1e-12 * max(mu, 1e-300)
            assert np.abs(out[1:]).max(initial=0.0) <= 1e-12 * max(mu, 1e-300)


class TestQrFactorize:
    def test_identity(self):
        f = qr_factorize(np.eye(3))
        assert np.allclose(f.Q, np.eye(3))
        assert np.allclose(f.R, np.eye(3))

    def test_single_column_norm(self):
        f = qr_factorize(np.array([[3.0], [4.0]]))
        assert f.R[0, 0] == pytest.approx(5.0)

    def test_fixed_seed_residual(self):
        X = np.random.default_rng(6).standard_normal((6, 3))
        f = qr_factorize(X)
        assert np.linalg.norm(f.Q @ f.R - X) / np.linalg.norm(X) <= 1e-12

    def test_reconstruction_sweep(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            N = int(rng.integers(1, 65))
            p = int(rng.integers(1, min(N, 16) + 1))
            X = rng.standard_normal((N, p))
            f = qr_factorize(X)
            assert np.linalg.norm(f.Q @ f.R - X) <= 1e-10 * np.linalg.norm(X)
            assert np.linalg.norm(f.Q.T @ f.Q - np.eye(N)) <= 1e-12 * max(N, 10)
            assert np.all(np.diag(f.R)[: p] >= 0)
            assert np.allclose(np.tril(f.R, -1), 0.0)

    def test_rank_deficient_raises(self):
        X = np.ones((5, 2))
        with pytest.raises(RankDeficient):
            qr_factorize(X)

    def test_shape_errors(self):
        with pytest.raises(DimensionMismatch):
            qr_factorize(np.ones((2, 3)))

    def test_thin_matches_full(self):
        X = np.random.default_rng(3).standard_normal((12, 5))
        f = qr_factorize(X)
        assert np.allclose(thin_r(X), f.R[:5])


class TestTriangularSolves:
    def test_identity(self):
        b = np.arange(4.0)
        assert np.array_equal(forward_substitution(np.eye(4), b), b)
        assert np.array_equal(backward_substitution(np.eye(4), b), b)

    def test_hand_solved(self):
        U = np.array([[2.0, 1.0], [0.0, 4.0]])
        x = backward_substitution(U, np.array([5.0, 8.0]))
        assert x == pytest.approx([1.5, 2.0])

    def test_residual(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            p = int(rng.integers(1, 20))
            L = np.tril(rng.standard_normal((p, p))) + 4 * np.eye(p)
            b = rng.standard_normal(p)
            x = forward_substitution(L, b)
            assert np.linalg.norm(L @ x - b) <= 1e-10 * max(np.linalg.norm(b), 1e-300)

    def test_singular_raises(self):
        U = np.array([[1.0, 1.0], [0.0, 0.0]])
        with pytest.raises(SingularTriangular):
            backward_substitution(U, np.ones(2))


def test_move_rows_indices():
    idx = move_rows_indices(5, 2, 2, 1)
    A = np.arange(5)
    assert list(A[idx]) == [1, 2, 0, 3, 4]
    idx = move_rows_indices(5, 2, 1, 4)
    assert list(A[idx]) == [2, 3, 4, 0, 1]
    with pytest.raises(DimensionMismatch):
        move_rows_indices(5, 3, 4, 1)
