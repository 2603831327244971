import numpy as np
import pytest

from aasg import kernels
from aasg.sparsela import SparseMatrix, cholesky_factor

needs_both = pytest.mark.skipif(len(kernels.available()) < 2, reason="compiled extension not built")


def _run_all(seed):
    rng = np.random.default_rng(seed)
    G = SparseMatrix.from_dense(rng.standard_normal((7, 7)) * (rng.random((7, 7)) < 0.4))
    Md = rng.standard_normal((9, 9)) * (rng.random((9, 9)) < 0.4)
    A = SparseMatrix.from_dense(Md)
    V = rng.standard_normal((7, 9))
    S = np.triu(np.tril(Md + Md.T, 2), -2) + 20 * np.eye(9)
    out = {}
    for name in ("cython", "python"):
        k = kernels.load(name)
        Y = np.zeros((7, 9))
        k.kron_term_apply(G.indptr, G.indices, G.data, A.indptr, A.indices, A.data, V, Y)
        with kernels.use(name):
            fac = cholesky_factor(SparseMatrix.from_dense(S))
            B = V.copy()
            fac.solve_rows(B)
        out[name] = (k.csr_matvec(A.indptr, A.indices, A.data, V[0]), Y, fac.L(), B)
    return out


@needs_both
@pytest.mark.parametrize("seed", range(5))
def test_backends_agree(seed):
    out = _run_all(seed)
    for a, b in zip(out["cython"], out["python"]):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-13)


def test_backend_switch():
    before = kernels.active
    with kernels.use("python") as k:
        assert kernels.active is k is kernels.load("python")
    assert kernels.active is before


def test_factor_follows_backend_switch():
    S = SparseMatrix.from_dense(np.diag([4.0, 9.0, 16.0]))
    fac = cholesky_factor(S)
    for name in kernels.available():
        with kernels.use(name):
            np.testing.assert_allclose(fac.solve(np.array([4.0, 9.0, 16.0])), 1.0)


def test_env_forces_fallback():
    import os
    import subprocess
    import sys

    env = dict(os.environ, AASG_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from aasg import kernels; print(kernels.active.NAME)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
