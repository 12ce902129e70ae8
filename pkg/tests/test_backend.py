import os
import subprocess
import sys

import numpy as np
import pytest

from qrkit.backend import BACKEND, get_kernels
from qrkit.linalg import thin_r

ck = get_kernels()
pk = get_kernels(force_python=True)

needs_compiled = pytest.mark.skipif(
    not getattr(ck, "IS_COMPILED", False), reason="compiled kernels unavailable"
)


def test_fallback_flagged():
    assert pk.IS_COMPILED is False
    assert BACKEND in ("compiled", "python")


@needs_compiled
def test_env_forces_python_backend():
    code = "import qrkit.backend as b; print(b.BACKEND)"
    env = dict(os.environ, QRKIT_FORCE_PY="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"


@needs_compiled
class TestKernelEquivalence:
    def test_full_sweep(self):
        rng = np.random.default_rng(0)
        for _ in range(60):
            p = int(rng.integers(2, 18))
            m = int(rng.integers(1, 5))
            X = rng.standard_normal((p + m + 6, p))
            R = np.ascontiguousarray(thin_r(X))
            scale = np.abs(R).max()

            b = rng.standard_normal(p)
            assert np.allclose(ck.solve_rt(R, b), pk.solve_rt(R, b), atol=1e-12)
            assert np.allclose(ck.solve_r(R, b), pk.solve_r(R, b), atol=1e-12)

            u = rng.standard_normal(p)
            a1, a2 = R.copy(), R.copy()
            ck.thin_add_row(a1, u.copy())
            pk.thin_add_row(a2, u.copy())
            assert np.abs(a1 - a2).max() <= 1e-13 * scale

            d1, d2 = a1.copy(), a2.copy()
            w1 = ck.thin_del_row(d1, u.copy())
            w2 = pk.thin_del_row(d2, u.copy())
            assert np.abs(d1 - d2).max() <= 1e-12 * scale
            assert w1 == pytest.approx(w2, rel=1e-10, abs=1e-12)

            U = rng.standard_normal((m + 1, p))
            a1, a2 = R.copy(), R.copy()
            ck.thin_add_rows(a1, U)
            pk.thin_add_rows(a2, U)
            assert np.abs(a1 - a2).max() <= 1e-13 * scale

            d1, d2 = a1.copy(), a2.copy()
            ck.thin_del_rows(d1, U)
            pk.thin_del_rows(d2, U)
            assert np.abs(d1 - d2).max() <= 1e-11 * scale

            V = rng.standard_normal((X.shape[0], m))
            cross = np.ascontiguousarray(X.T @ V)
            vv = np.ascontiguousarray(V.T @ V)
            o1, _ = ck.thin_add_cols(R, cross, vv)
            o2, _ = pk.thin_add_cols(R, cross, vv)
            assert np.abs(o1 - o2).max() <= 1e-12 * scale

            if p > m:
                k = int(rng.integers(0, p - m + 1))
                o1 = ck.thin_del_cols(R.copy(), k, m)
                o2 = pk.thin_del_cols(R.copy(), k, m)
                assert np.abs(o1 - o2).max() <= 1e-12 * scale

    def test_thin_step_equivalence(self):
        rng = np.random.default_rng(1)
        for _ in range(40):
            rows = int(rng.integers(4, 12))
            cols = int(rng.integers(2, rows))
            R = rng.standard_normal((rows, cols))
            i = int(rng.integers(0, cols - 1))
            a = int(rng.integers(1, rows - i))
            a1 = np.ascontiguousarray(R.copy())
            a2 = np.ascontiguousarray(R.copy())
            ck.thin_step(a1, i, a)
            pk.thin_step(a2, i, a)
            assert np.abs(a1 - a2).max() <= 1e-12 * max(np.abs(R).max(), 1.0)
