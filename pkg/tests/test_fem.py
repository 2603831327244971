import numpy as np
import pytest

from aasg.errors import InputError
from aasg.fem import (
    Grid2d,
    assemble_family,
    assemble_load,
    assemble_stiffness,
    l2_norm,
    read_field_csv,
    write_field_csv,
)
from aasg.sparsela import cg, cholesky_factor
from oracles import poisson_center


def test_single_node():
    A = assemble_stiffness(Grid2d(2), np.ones(9))
    np.testing.assert_allclose(A.toarray(), [[8 / 3]])


def test_interior_rows_annihilate_constants():
    g = Grid2d(6)
    A = assemble_stiffness(g, np.ones(g.n_nodes))
    y = (A @ np.ones(g.n_phy)).reshape(5, 5)
    np.testing.assert_allclose(y[1:-1, 1:-1], 0.0, atol=1e-14)
    assert np.all(y[0] > 0)


def test_linear_in_coefficient():
    g = Grid2d(5)
    rng = np.random.default_rng(0)
    a = rng.uniform(1, 2, g.n_nodes)
    b = rng.uniform(1, 2, g.n_nodes)
    A1 = assemble_stiffness(g, np.ones(g.n_nodes))
    A2 = assemble_stiffness(g, 2 * np.ones(g.n_nodes))
    np.testing.assert_allclose(A2.toarray(), 2 * A1.toarray(), atol=1e-15)
    fam = assemble_family(g, [a, b])
    np.testing.assert_allclose(fam.combine([0.5, -0.25]).toarray(), (0.5 * fam.matrix(0).toarray() - 0.25 * fam.matrix(1).toarray()), atol=1e-14)
    np.testing.assert_allclose(fam.matrix(0).toarray(), assemble_stiffness(g, a).toarray(), atol=1e-14)


def test_stiffness_symmetric_positive():
    g = Grid2d(7)
    a = np.random.default_rng(1).uniform(0.5, 3, g.n_nodes)
    A = assemble_stiffness(g, a).toarray()
    np.testing.assert_allclose(A, A.T, atol=1e-15)
    assert np.linalg.eigvalsh(A).min() > 0


def test_element_average_rule():
    # one interior node, coefficient 1 except at one corner of the domain:
    # only the element touching that corner changes, by its 1/4 share
    g = Grid2d(2)
    a = np.ones(9)
    a[0] = 5.0
    A = assemble_stiffness(g, a).toarray()
    np.testing.assert_allclose(A, [[8 / 3 + (4 / 6) * (4 / 4)]])


def test_load():
    g = Grid2d(8)
    np.testing.assert_allclose(assemble_load(g, 0.0), 0.0)
    np.testing.assert_allclose(assemble_load(g, 1.0), g.h**2, rtol=1e-14)
    f = assemble_load(g, lambda x, y: np.exp(-50 * ((x - 0.5) ** 2 + (y - 0.5) ** 2)))
    assert np.all(f > 0)
    assert np.argmax(f) == g.interior_index(4, 4)


def test_l2_norm():
    g = Grid2d(4)
    assert l2_norm(g, np.zeros(9)) == 0.0
    assert l2_norm(g, np.ones(9)) == pytest.approx(0.75, rel=1e-15)
    v = np.arange(9.0)
    assert l2_norm(g, -3 * v) == pytest.approx(3 * l2_norm(g, v))


def test_poisson_center():
    g = Grid2d(64)
    A = assemble_stiffness(g, np.ones(g.n_nodes))
    u = cholesky_factor(A).solve(assemble_load(g, 1.0))
    center = u[g.interior_index(32, 32)]
    assert abs(center - poisson_center()) < 1e-3
    u2, rep = cg(A, None, assemble_load(g, 1.0), tol=1e-12)
    assert rep.converged
    np.testing.assert_allclose(u2, u, atol=1e-10)


def test_grid_numbering():
    g = Grid2d(4)
    x1, x2 = g.interior_coords
    assert (x1[0], x2[0]) == (0.25, 0.25)
    assert (x1[1], x2[1]) == (0.5, 0.25)  # x1 runs fastest
    assert g.interior_index(3, 1) == 2
    with pytest.raises(InputError):
        g.interior_index(0, 1)
    with pytest.raises(InputError):
        Grid2d(1)


def test_csv_round_trip(tmp_path):
    g = Grid2d(6)
    v = np.random.default_rng(2).standard_normal(g.n_phy) * 1e-7
    p = tmp_path / "f.csv"
    write_field_csv(p, g, v)
    assert p.read_text().splitlines()[0] == "x1,x2,value"
    x1, x2, back = read_field_csv(p)
    assert np.array_equal(back, v)
    assert np.array_equal(x1, g.interior_coords[0])
    with pytest.raises(InputError):
        write_field_csv(p, g, v[:-1])
