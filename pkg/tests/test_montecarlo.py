import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aasg.adaptive import AasgConfig, build_problem, compare_errors
from aasg.errors import InputError
from aasg.fem import l2_norm
from aasg.galerkin import solve_sgm, surrogate_eval
from aasg.montecarlo import McAccumulator, run_mc, sample_point, sample_solve
from aasg.multiindex import full_catalog
from oracles import two_pass


@pytest.fixture(scope="module")
def problem():
    return build_problem(AasgConfig(N=2, p=1, tol=1.0, n=8))


def test_welford_matches_two_pass():
    X = np.random.default_rng(0).standard_normal((1000, 7)) * 3 + 10
    acc = McAccumulator(7)
    for x in X:
        acc.update(x)
    m, v = two_pass(X)
    np.testing.assert_allclose(acc.mean, m, rtol=1e-12)
    np.testing.assert_allclose(acc.variance, v, rtol=1e-12)
    pm, pv = two_pass(X[np.random.default_rng(1).permutation(1000)])
    np.testing.assert_allclose(acc.mean, pm, rtol=1e-10)
    np.testing.assert_allclose(acc.variance, pv, rtol=1e-10)


@settings(max_examples=30)
@given(st.integers(2, 200), st.integers(0, 200), st.integers(0, 2**31))
def test_chan_merge(n, split, seed):
    X = np.random.default_rng(seed).standard_normal((n, 3))
    split = min(split, n)
    a, b = McAccumulator(3), McAccumulator(3)
    for x in X[:split]:
        a.update(x)
    for x in X[split:]:
        b.update(x)
    a.merge(b)
    m, v = two_pass(X)
    assert a.count == n
    np.testing.assert_allclose(a.mean, m, atol=1e-12)
    np.testing.assert_allclose(a.variance, v, rtol=1e-10, atol=1e-13)


def test_sample_points():
    a = sample_point(7, 12, 5)
    assert np.array_equal(a, sample_point(7, 12, 5))
    assert not np.array_equal(a, sample_point(7, 13, 5))
    assert np.all(np.abs(a) <= 1)


def test_sample_solve_basics(problem):
    u0, _ = sample_solve(problem, np.zeros(2), tol=1e-12)
    ref = problem.mean_factor.solve(problem.f)
    np.testing.assert_allclose(u0, ref, rtol=1e-10)
    xi = np.array([0.7, -0.4])
    u, rep = sample_solve(problem, xi, tol=1e-10)
    A = problem.family.combine([1.0, *xi])
    assert np.linalg.norm(A @ u - problem.f) <= 1e-10 * np.linalg.norm(problem.f)
    with pytest.raises(InputError):
        sample_solve(problem, np.array([1.5, 0.0]))
    with pytest.raises(InputError):
        sample_solve(problem, np.zeros(3))


def test_sample_matches_spectral_surrogate(problem):
    coeffs, _ = solve_sgm(full_catalog(2, 6), problem, tol=1e-12)
    for xi in np.random.default_rng(2).uniform(-1, 1, (10, 2)):
        u, _ = sample_solve(problem, xi, tol=1e-12)
        assert l2_norm(problem.grid, surrogate_eval(coeffs, xi) - u) < 1e-4


def test_zero_sigma():
    pr = build_problem(AasgConfig(N=3, p=1, tol=1.0, n=8, sigma=0.0))
    res = run_mc(pr, 20, seed=5)
    assert not np.any(res.variance)
    np.testing.assert_allclose(res.mean, pr.mean_factor.solve(pr.f), rtol=1e-10)


def test_determinism_and_threads(problem):
    a = run_mc(problem, 150, seed=9)
    b = run_mc(problem, 150, seed=9)
    c = run_mc(problem, 150, seed=9, threads=4)
    for r in (b, c):
        assert np.array_equal(a.mean, r.mean) and np.array_equal(a.variance, r.variance)
    d = run_mc(problem, 150, seed=10)
    assert not np.array_equal(a.mean, d.mean)
    assert set(a.report()) == {"M", "seed", "seconds", "solve_seconds", "mean_iterations"}


def test_too_few_samples(problem):
    with pytest.raises(InputError):
        run_mc(problem, 1)


def test_consistent_with_sgm():
    pr = build_problem(AasgConfig(N=4, p=1, tol=1.0, n=8))
    ref, _ = solve_sgm(full_catalog(4, 5), pr)
    res = run_mc(pr, 2000, seed=3)
    se = np.sqrt(res.variance / res.samples)
    inside = np.abs(res.mean - ref.mean) <= 4 * se
    assert inside.mean() >= 0.99
    e, v = compare_errors((res.mean, res.variance), (ref.mean, ref.variance), pr.grid)
    assert 0 < e < 0.01 and 0 < v < 0.2
