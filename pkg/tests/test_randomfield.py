import math

import numpy as np
import pytest

from aasg.errors import DomainError, InputError
from aasg.fem import Grid2d
from aasg.randomfield import field_eval, kl_1d, kl_2d, positivity_report
from oracles import nystrom_1d, nystrom_2d


@pytest.mark.parametrize("c", [0.25, 1.0])
def test_eigenvalues_match_nystrom(c):
    ev = nystrom_1d(c)[:10]
    lam = np.array([m.lam for m in kl_1d(c, 10)])
    np.testing.assert_allclose(lam, ev, rtol=1e-4)


def test_first_eigenvalue_c1():
    assert kl_1d(1.0, 1)[0].lam == pytest.approx(0.7388, abs=1e-3)


@pytest.mark.parametrize("c", [0.1, 0.25, 1.0, 4.0])
def test_spectrum_shape(c):
    modes = kl_1d(c, 60)
    lam = np.array([m.lam for m in modes])
    assert np.all(np.diff(lam) < 0)
    partial = np.cumsum(lam)
    assert np.all(np.diff(partial) > 0) and partial[-1] < 1.0
    # each frequency sits in its own interval ((k-1)pi, k pi)
    for k, m in enumerate(modes, start=1):
        assert (k - 1) * math.pi < m.omega < k * math.pi


@pytest.mark.parametrize("c", [0.25, 1.0])
def test_eigenfunctions_orthonormal(c):
    x, w = np.polynomial.legendre.leggauss(200)
    x, w = 0.5 * (x + 1), 0.5 * w
    modes = kl_1d(c, 8)
    F = np.array([m(x) for m in modes])
    np.testing.assert_allclose((F * w) @ F.T, np.eye(8), atol=1e-12)


def test_eigen_equation_residual():
    # integral of the kernel against phi reproduces lam * phi
    c = 0.5
    x, w = np.polynomial.legendre.leggauss(400)
    x, w = 0.5 * (x + 1), 0.5 * w
    for m in kl_1d(c, 4):
        for x0 in (0.0, 0.3, 0.77, 1.0):
            # split at the kink so Gauss stays spectrally accurate
            left = x0 * np.sum(w * np.exp(-np.abs(x0 - x0 * x) / c) * m(x0 * x))
            right = (1 - x0) * np.sum(w * np.exp(-np.abs(x0 - (x0 + (1 - x0) * x)) / c) * m(x0 + (1 - x0) * x))
            assert left + right == pytest.approx(m.lam * m(x0), abs=1e-12)


def test_bad_parameters():
    with pytest.raises(DomainError):
        kl_1d(0.0, 3)
    with pytest.raises(DomainError):
        kl_1d(1.0, 0)
    with pytest.raises(DomainError):
        kl_2d(0.25, 0.25, 0, np.zeros(1), np.zeros(1))


def test_2d_against_tensor_nystrom():
    f = kl_2d(0.25, 0.25, 10, np.zeros(1), np.zeros(1))
    np.testing.assert_allclose(f.eigenvalues, nystrom_2d(0.25, 0.25)[:10], rtol=1e-3)
    assert np.all(np.diff(f.eigenvalues) <= 0)


def test_case_one_pairs():
    f = kl_2d(0.25, 0.25, 10, np.zeros(1), np.zeros(1))
    assert f.pairs == [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1), (1, 4), (4, 1), (2, 3), (3, 2)]


def test_single_mode_symmetric_positive():
    g = Grid2d(16)
    x1, x2 = g.node_coords
    f = kl_2d(0.5, 0.3, 1, x1, x2)
    a1 = f.modes[0].reshape(17, 17)
    assert np.all(a1 > 0)
    np.testing.assert_allclose(a1, a1.T, atol=1e-15)
    np.testing.assert_allclose(a1, a1[::-1, ::-1], atol=1e-14)


def test_zero_sigma():
    g = Grid2d(8)
    f = kl_2d(0.25, 0.0, 4, *g.node_coords)
    assert not np.any(f.modes)
    assert positivity_report(f) == 1.0


def test_field_eval():
    g = Grid2d(8)
    f = kl_2d(0.25, 0.25, 5, *g.node_coords)
    rng = np.random.default_rng(3)
    assert field_eval(f, np.zeros(5), 7) == f.a0[7]
    e = np.eye(5)[2]
    assert field_eval(f, e, 11) == pytest.approx(f.a0[11] + f.modes[2, 11], abs=1e-15)
    xi = rng.uniform(-1, 1, 5)
    for node in (0, 40, 80):
        ref = f.a0[node] + sum(f.modes[k, node] * xi[k] for k in reversed(range(5)))
        assert field_eval(f, xi, node) == pytest.approx(ref, abs=1e-14)
    np.testing.assert_allclose(f.values(xi)[[0, 40, 80]], [field_eval(f, xi, n) for n in (0, 40, 80)], atol=1e-15)
    with pytest.raises(InputError):
        field_eval(f, np.zeros(4), 0)


def test_positivity():
    g = Grid2d(32)
    f = kl_2d(0.25, 0.25, 10, *g.node_coords)
    val = positivity_report(f)
    assert val > 0
    assert val == pytest.approx(np.min(f.a0 - np.abs(f.modes).sum(axis=0)))
