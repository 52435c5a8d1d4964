import numpy as np
import pytest

from opspace import martingale as mg
from opspace import nc_lambda as nc
from opspace.linalg import random_matrix


def dense_product(f, g):
    """Oracle in M_d1 (x) M_d2 (x) M_n with the matrix index last."""
    n, d1, d2 = f.n, f.opdim, g.opdim
    F = sum(np.kron(np.kron(f.blocks[a, b], np.eye(d2)), unit(n, a, b)) for a in range(n) for b in range(n))
    G = sum(np.kron(np.kron(np.eye(d1), g.blocks[a, b]), unit(n, a, b)) for a in range(n) for b in range(n))
    return F @ G


def unit(n, a, b):
    e = np.zeros((n, n))
    e[a, b] = 1
    return e


def test_star_involution():
    i = nc.nc_identity(2, 3)
    assert np.allclose(nc.nc_star(i).blocks, i.blocks)
    f = nc.random_nc(np.random.default_rng(0), 2, 3)
    assert np.allclose(nc.nc_star(nc.nc_star(f)).blocks, f.blocks)


def test_product_with_unit_and_scalars():
    rng = np.random.default_rng(1)
    f = nc.random_nc(rng, 2, 3)
    one = nc.nc_identity(1, 3)
    assert np.allclose(nc.nc_product(f, one).blocks, f.blocks)
    a, b = random_matrix(rng, 2), random_matrix(rng, 3)
    g = nc.nc_from_terms([(a, 2.0)])
    h = nc.nc_from_terms([(b, -1j)])
    assert np.allclose(nc.nc_product(g, h).blocks[0, 0], -2j * np.kron(a, b))


def test_product_matches_dense_and_associates():
    rng = np.random.default_rng(2)
    f, g, h = nc.random_nc(rng, 2, 3), nc.random_nc(rng, 1, 3), nc.random_nc(rng, 2, 3)
    fg = nc.nc_product(f, g)
    assert np.allclose(fg.dense(), dense_product(f, g))
    left = nc.nc_product(fg, h).blocks
    right = nc.nc_product(f, nc.nc_product(g, h)).blocks
    assert np.allclose(left, right, atol=1e-13)


def test_hat_tau():
    b = random_matrix(np.random.default_rng(3), 2)
    assert np.allclose(nc.hat_tau(nc.nc_from_terms([(b, np.eye(3))])), b)
    assert np.allclose(nc.hat_tau(nc.nc_from_terms([(b, unit(3, 0, 1))])), 0)


def test_trace_cyclicity():
    rng = np.random.default_rng(4)
    fs = [nc.random_nc(rng, 2, 3) for _ in range(2)]
    gs = [nc.random_nc(rng, 2, 3) for _ in range(2)]
    a = np.linalg.norm(sum(nc.hat_tau(nc.nc_product(f, g)) for f, g in zip(fs, gs)), 2)
    b = np.linalg.norm(sum(nc.hat_tau(nc.nc_product(g, f)) for f, g in zip(fs, gs)), 2)
    assert a == pytest.approx(b, rel=1e-12)


def test_chain_operator_matches_products():
    rng = np.random.default_rng(5)
    fs = [nc.random_nc(rng, d, 3) for d in (2, 1, 2)]
    prod = nc.nc_product(nc.nc_product(fs[0], fs[1]), fs[2])
    op = nc.chain_operator(fs)
    assert np.allclose(op.to_dense(), nc.hat_tau(prod))
    v = rng.standard_normal(4) + 0j
    assert np.allclose(op.rmatvec(v), nc.hat_tau(prod).conj().T @ v)


def test_norm_simple_cases():
    rng = np.random.default_rng(6)
    b = random_matrix(rng, 2)
    for p in (2, 4, 6):
        assert nc.nc_lambda_norm(nc.nc_from_terms([(b, np.eye(3))]), p) == pytest.approx(np.linalg.norm(b, 2))
    f = nc.random_nc(rng, 2, 3)
    assert nc.nc_lambda_norm(nc.nc_star(f), 2) == pytest.approx(nc.nc_lambda_norm(f, 2), rel=1e-12)


@pytest.mark.parametrize("p", [2, 4, 6])
def test_row_and_column_are_oh(p):
    rng = np.random.default_rng(7)
    for n in (1, 2, 3, 4):
        bs = [random_matrix(rng, 2) for _ in range(n)]
        oh = np.linalg.norm(sum(np.kron(b, b.conj()) for b in bs), 2) ** 0.5
        # unnormalized trace
        assert abs(nc.nc_lambda_norm(nc.nc_row(bs, weight=1.0), p) - oh) <= 1e-9
        assert abs(nc.nc_lambda_norm(nc.nc_column(bs, weight=1.0), p) - oh) <= 1e-9
        # normalized trace compensated by n^{1/p}
        scaled = [b * n ** (1.0 / p) for b in bs]
        assert abs(nc.nc_lambda_norm(nc.nc_row(scaled), p) - oh) <= 1e-9


@pytest.mark.parametrize("p", [2, 4, 6])
def test_diagonal_scalars(p):
    beta = np.array([0.3, -1.2, 2j, 0.5])
    want = np.mean(np.abs(beta) ** p) ** (1.0 / p)
    assert abs(nc.nc_lambda_norm(nc.nc_diagonal(list(beta)), p) - want) <= 1e-10


def test_holder_equality_zero_and_fuzz():
    rng = np.random.default_rng(8)
    f = nc.random_nc(rng, 2, 2)
    rep = nc.nc_holder_check([nc.nc_star(f), f, nc.nc_star(f), f])
    assert rep.ratio == pytest.approx(1.0, rel=1e-10)
    z = f.scaled(0)
    assert nc.nc_holder_check([z, f, f, f]).ratio == 0.0
    for _ in range(50):
        n = int(rng.integers(1, 4))
        fs = [nc.random_nc(rng, int(rng.integers(1, 3)), n) for _ in range(4)]
        assert nc.nc_holder_check(fs).holds


def test_nc_cauchy_schwarz():
    rng = np.random.default_rng(9)
    for _ in range(30):
        fs = [nc.random_nc(rng, 2, 2) for _ in range(2)]
        gs = [nc.random_nc(rng, 2, 2) for _ in range(2)]
        assert nc.nc_cauchy_schwarz_check(fs, gs).holds


def test_conditional_expectation():
    rng = np.random.default_rng(10)
    f = nc.random_nc(rng, 2, 3)
    assert np.allclose(nc.nc_conditional_expectation(f, nc.full_algebra(3)).blocks, f.blocks)
    off = nc.nc_from_terms([(random_matrix(rng, 2), unit(3, 0, 1))])
    assert np.allclose(nc.nc_conditional_expectation(off, nc.diagonal_algebra(3)).blocks, 0)
    alg = nc.BlockSubalgebra(((0, 1), (2,)))
    for p in (2, 4):
        for _ in range(20):
            f = nc.random_nc(rng, 2, 3)
            ef = nc.nc_conditional_expectation(f, alg)
            assert nc.nc_lambda_norm(ef, p) <= nc.nc_lambda_norm(f, p) + 1e-9


def test_burkholder_single_level():
    f = nc.random_nc(np.random.default_rng(11), 2, 2)
    rep = nc.nc_burkholder4(f, [nc.full_algebra(2)])
    assert rep.norm4 == pytest.approx(rep.square_max, rel=1e-10)


def test_burkholder_commutative_embedding():
    rng = np.random.default_rng(12)
    ds, f = mg.random_martingale_field(rng, 2, 2)
    comm = mg.burkholder_experiment(f, ds.filtration, 4)
    rep = nc.nc_burkholder4(nc.diagonal_embedding(f), nc.dyadic_interval_chain(4, "scalar"))
    assert rep.norm4 == pytest.approx(comm.x, rel=1e-10)
    assert rep.square_max == pytest.approx(comm.y, rel=1e-10)


def test_burkholder_fuzz_finite():
    rng = np.random.default_rng(13)
    for n in (2, 4):
        f = nc.random_nc(rng, 2, n)
        d = nc.nc_burkholder4(f, nc.dyadic_interval_chain(n)).as_dict()
        assert np.isfinite(d["ratio_square"]) and np.isfinite(d["ratio_bracket"])


def test_cb_limit():
    res = nc.cb_oh_limit(nc.nc_identity(1, 3), 3)
    assert res.values == (1.0, 1.0, 1.0)
    beta = np.array([0.5, -2.0, 1.0j])
    res = nc.cb_oh_limit(nc.nc_diagonal(list(beta)), 4)
    for p, v in zip(res.ps, res.values):
        assert v == pytest.approx(np.mean(np.abs(beta) ** p) ** (1.0 / p), rel=1e-10)
    assert all(g >= -1e-10 for g in res.gaps)
    assert res.values[-1] <= 2.0 + 1e-10


def test_gelfand_doubling():
    f = nc.random_nc(np.random.default_rng(14), 2, 2)
    g = nc.nc_product(nc.nc_star(f), f)
    direct = np.linalg.norm(nc.hat_tau(nc.nc_product(g, g)), 2) ** 0.25
    assert direct == pytest.approx(nc.nc_lambda_norm(f, 4), rel=1e-10)
