import numpy as np
import pytest

from qrkit.exceptions import (
    DowndateBreakdown,
    NearDependentColumn,
    PositionOutOfRange,
    SingularUpdate,
)
from qrkit.linalg import thin_r
from qrkit.qr_update import qr_add_rows, qr_delete_cols, qr_delete_cols_nonadjacent
from qrkit.linalg import qr_factorize
from qrkit.r_update import (
    gram_inverse_add_col,
    gram_inverse_delete_col,
    r_add_cols,
    r_add_cols_gram,
    r_add_rows,
    r_delete_cols,
    r_delete_cols_nonadjacent,
    r_delete_rows,
    thin_step,
)


def chol(G):
    return np.linalg.cholesky(G).T


class TestAddDeleteRows:
    def test_zero_rows_are_noops(self):
        R = thin_r(np.random.default_rng(0).standard_normal((9, 4)))
        assert np.allclose(r_add_rows(R, np.zeros((1, 4))), R)
        assert np.allclose(r_delete_rows(R, np.zeros((2, 4))), R)

    def test_identity_example(self):
        R2 = r_add_rows(np.eye(2), np.array([[1.0, 0.0]]))
        assert np.allclose(R2, np.diag([np.sqrt(2.0), 1.0]))
        back = r_delete_rows(np.diag([np.sqrt(2.0), 1.0]), np.array([[1.0, 0.0]]))
        assert np.allclose(back, np.eye(2), atol=1e-12)

    @pytest.mark.parametrize("p,m", [(6, 3), (6, 1), (12, 4)])
    def test_gram_update(self, p, m):
        rng = np.random.default_rng(p + m)
        X = rng.standard_normal((30, p))
        U = rng.standard_normal((m, p))
        R2 = r_add_rows(thin_r(X), U)
        G = X.T @ X + U.T @ U
        assert np.linalg.norm(R2.T @ R2 - G) <= 1e-10 * np.linalg.norm(G)

    def test_roundtrip_inverse(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            p = int(rng.integers(2, 14))
            m = int(rng.integers(1, 4))
            R = thin_r(rng.standard_normal((p + 8, p)))
            U = rng.standard_normal((m, p))
            R3 = r_delete_rows(r_add_rows(R, U), U)
            assert np.linalg.norm(R3 - R) <= 1e-8 * np.linalg.norm(R)

    def test_downdate_breakdown(self):
        R = thin_r(np.random.default_rng(2).standard_normal((8, 3)))
        with pytest.raises(DowndateBreakdown):
            r_delete_rows(R, 100.0 * np.ones((1, 3)))


class TestAddCols:
    def test_worked_example(self):
        X = np.array([[1.0], [1.0]])
        R2 = r_add_cols(thin_r(X), X, np.array([1.0, 0.0]))
        assert R2[0, 1] == pytest.approx(1 / np.sqrt(2))
        assert R2[1, 1] == pytest.approx(1 / np.sqrt(2))

    def test_orthogonal_block(self):
        rng = np.random.default_rng(3)
        q, _ = np.linalg.qr(rng.standard_normal((20, 6)))
        X, V = q[:, :3] @ np.diag([2.0, 3.0, 4.0]), q[:, 3:]
        R2 = r_add_cols(thin_r(X), X, V)
        assert np.abs(R2[:3, 3:]).max() <= 1e-12
        assert np.linalg.norm(R2[3:, 3:] - chol(V.T @ V)) <= 1e-10

    def test_gram_oracle(self):
        rng = np.random.default_rng(4)
        X = rng.standard_normal((30, 5))
        V = rng.standard_normal((30, 3))
        R2 = r_add_cols(thin_r(X), X, V)
        Z = np.hstack([X, V])
        assert np.linalg.norm(R2.T @ R2 - Z.T @ Z) <= 1e-9 * np.linalg.norm(Z.T @ Z)

    def test_cross_product_entry_point(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((25, 4))
        V = rng.standard_normal((25, 2))
        a = r_add_cols(thin_r(X), X, V)
        b = r_add_cols_gram(thin_r(X), X.T @ V, V.T @ V)
        assert np.allclose(a, b)

    def test_exact_duplicate_gives_tiny_pivot(self):
        rng = np.random.default_rng(6)
        X = rng.standard_normal((20, 4))
        R2 = r_add_cols(thin_r(X), X, X[:, 1].copy())
        assert abs(R2[4, 4]) <= 1e-6 * np.linalg.norm(X)

    def test_inconsistent_cross_products_raise(self):
        # ||R12||^2 exceeding ||v||^2 beyond roundoff means the inputs could
        # not have come from real data; the guard must fire
        with pytest.raises(NearDependentColumn):
            r_add_cols_gram(np.eye(2), np.array([[2.0], [0.0]]), np.array([[1.0]]))


class TestDeleteCols:
    def test_trailing_block_free(self):
        R = thin_r(np.random.default_rng(7).standard_normal((12, 6)))
        out = r_delete_cols(R, 5, 2)
        assert np.array_equal(out, R[:4, :4])

    def test_single_column_left(self):
        X = np.random.default_rng(8).standard_normal((10, 4))
        out = r_delete_cols_nonadjacent(thin_r(X), [1, 2, 3])
        assert out.shape == (1, 1)
        assert out[0, 0] == pytest.approx(np.linalg.norm(X[:, 3]))

    @pytest.mark.parametrize("p,m,k", [(8, 2, 3), (8, 1, 4), (8, 3, 1), (5, 1, 5)])
    def test_gram_oracle(self, p, m, k):
        X = np.random.default_rng(10 * p + k).standard_normal((20, p))
        out = r_delete_cols(thin_r(X), k, m)
        Xn = np.hstack([X[:, : k - 1], X[:, k - 1 + m :]])
        G = Xn.T @ Xn
        assert np.linalg.norm(out - chol(G)) <= 1e-9 * np.linalg.norm(G) ** 0.5

    def test_position_errors(self):
        R = thin_r(np.random.default_rng(9).standard_normal((8, 4)))
        with pytest.raises(PositionOutOfRange):
            r_delete_cols(R, 4, 2)


class TestNonAdjacent:
    def test_adjacent_dispatch(self):
        R = thin_r(np.random.default_rng(10).standard_normal((14, 7)))
        assert np.allclose(r_delete_cols_nonadjacent(R, [3, 4, 5]), r_delete_cols(R, 3, 3))

    def test_trailing_free(self):
        R = thin_r(np.random.default_rng(11).standard_normal((14, 7)))
        assert np.array_equal(r_delete_cols_nonadjacent(R, [7]), R[:6, :6])

    @pytest.mark.parametrize("ks", [[1, 4, 7], [2, 5, 6], [1, 2, 5, 8], [2, 9], [3, 5, 7, 9]])
    def test_gram_oracle(self, ks):
        X = np.random.default_rng(sum(ks) * 3).standard_normal((18, 9))
        out = r_delete_cols_nonadjacent(thin_r(X), ks)
        keep = [j for j in range(9) if (j + 1) not in ks]
        G = X[:, keep].T @ X[:, keep]
        assert np.linalg.norm(out - chol(G)) <= 1e-9 * np.linalg.norm(G) ** 0.5


class TestThinStep:
    def test_single_fill(self):
        R = np.array([[3.0, 1.0], [4.0, 2.0]])
        out = thin_step(R, 1, 1)
        assert out[0, 0] == pytest.approx(5.0)
        assert out[1, 0] == 0.0

    def test_zero_fill_noop(self):
        R = np.triu(np.random.default_rng(12).standard_normal((5, 5))) + 3 * np.eye(5)
        out = thin_step(np.vstack([R, np.zeros((2, 5))]), 2, 2)
        assert np.allclose(out[:5], R)


class TestCrossModuleConsistency:
    def test_r_updates_match_qr_blocks(self):
        rng = np.random.default_rng(13)
        for _ in range(40):
            N = int(rng.integers(12, 40))
            p = int(rng.integers(3, min(N - 6, 12) + 1))
            m = int(rng.integers(1, 4))
            X = rng.standard_normal((N, p))
            f = qr_factorize(X)
            R = thin_r(X)
            U = rng.standard_normal((m, p))
            full = qr_add_rows(f, N + 1, U).R[:p]
            assert np.linalg.norm(full - r_add_rows(R, U)) <= 1e-9 * np.linalg.norm(full)
            m2 = min(m, p - 1)
            k = int(rng.integers(1, p - m2 + 2))
            full = qr_delete_cols(f, k, m2).R[: p - m2]
            thin = r_delete_cols(R, k, m2)
            assert np.linalg.norm(full - thin) <= 1e-9 * max(np.linalg.norm(thin), 1e-300)

    def test_nonadjacent_matches_qr(self):
        X = np.random.default_rng(14).standard_normal((16, 8))
        f = qr_factorize(X)
        ks = [2, 5, 6]
        full = qr_delete_cols_nonadjacent(f, ks).R[:5]
        thin = r_delete_cols_nonadjacent(thin_r(X), ks)
        assert np.linalg.norm(full - thin) <= 1e-9 * np.linalg.norm(thin)


class TestGramInverse:
    def test_worked_example(self):
        B = np.array([[0.5]])
        B2 = gram_inverse_add_col(B, np.array([[1.0], [1.0]]), 2, np.array([1.0, 0.0]))
        assert np.allclose(B2, [[1.0, -1.0], [-1.0, 2.0]])

    def test_orthonormal_block_diag(self):
        q, _ = np.linalg.qr(np.random.default_rng(15).standard_normal((10, 4)))
        X, x = q[:, :3], q[:, 3]
        B = np.linalg.inv(X.T @ X)
        B2 = gram_inverse_add_col(B, X, 4, x)
        assert np.allclose(B2, np.eye(4), atol=1e-10)
        assert np.allclose(gram_inverse_delete_col(np.eye(4), 2), np.eye(3))

    def test_dense_oracle_sweep(self):
        rng = np.random.default_rng(16)
        for _ in range(100):
            N = int(rng.integers(8, 30))
            p = int(rng.integers(1, 7))
            k = int(rng.integers(1, p + 2))
            X = rng.standard_normal((N, p))
            x = rng.standard_normal(N)
            B = np.linalg.inv(X.T @ X)
            B2 = gram_inverse_add_col(B, X, k, x)
            Xn = np.hstack([X[:, : k - 1], x[:, None], X[:, k - 1 :]])
            dense = np.linalg.inv(Xn.T @ Xn)
            assert np.linalg.norm(B2 - dense) <= 1e-9 * np.linalg.norm(dense)
            assert np.linalg.norm(B2 - B2.T) <= 1e-12 * np.linalg.norm(B2)
            B3 = gram_inverse_delete_col(B2, k)
            assert np.linalg.norm(B3 - B) <= 1e-9 * np.linalg.norm(B)

    def test_agrees_with_factor_route(self):
        rng = np.random.default_rng(17)
        X = rng.standard_normal((20, 5))
        x = rng.standard_normal(20)
        B = np.linalg.inv(X.T @ X)
        B2 = gram_inverse_add_col(B, X, 6, x)
        R = thin_r(np.hstack([X, x[:, None]]))
        Rinv = np.linalg.inv(R)
        assert np.linalg.norm(B2 - Rinv @ Rinv.T) <= 1e-9 * np.linalg.norm(B2)

    def test_singular_update_raises(self):
        X = np.random.default_rng(18).standard_normal((12, 3))
        B = np.linalg.inv(X.T @ X)
        with pytest.raises(SingularUpdate):
            gram_inverse_add_col(B, X, 1, X[:, 0].copy())
