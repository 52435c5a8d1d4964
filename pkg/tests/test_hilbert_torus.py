import numpy as np
import pytest

from opspace import hilbert_torus as ht
from opspace.linalg import random_matrix


def test_hilbert_on_monomials():
    b = random_matrix(np.random.default_rng(0), 2)
    tf = ht.hilbert_transform(ht.monomial(1, b))
    assert np.allclose(tf.coeff(1), -1j * b)
    assert ht.hilbert_transform(ht.monomial(0, b)).coeffs == {}


def test_hilbert_squared_is_minus_identity():
    rng = np.random.default_rng(1)
    f = ht.random_trig(rng, 4, 2, support=[n for n in range(-4, 5) if n])
    ttf = ht.hilbert_transform(ht.hilbert_transform(f))
    assert ht.sup_coeff_norm(ttf + f) == 0.0


def test_evaluate_matches_definition():
    rng = np.random.default_rng(2)
    f = ht.random_trig(rng, 2, 2)
    t = 0.7
    want = sum(np.exp(1j * n * t) * c for n, c in f.coeffs.items())
    assert np.allclose(f.evaluate(t)[0], want)
    assert np.allclose(ht.trig_conj(f).evaluate(t)[0], np.conj(want))


def test_cotlar_cases():
    i2 = np.eye(2)
    assert ht.cotlar_residual(ht.monomial(1, i2), ht.monomial(1, i2)) == 0.0
    rng = np.random.default_rng(3)
    g = ht.random_trig(rng, 3, 2)
    assert ht.cotlar_residual(ht.monomial(0, random_matrix(rng, 2)), g) <= 1e-12
    for _ in range(20):
        f, g = ht.random_trig(rng, 4, 2), ht.random_trig(rng, 4, 2)
        rep = ht.cotlar_residuals(f, g)
        assert rep.worst <= 1e-10 * rep.scale


def test_torus_norm_simple_cases():
    b = random_matrix(np.random.default_rng(4), 2)
    for p in (2, 4, 6):
        assert ht.torus_lambda_norm(ht.monomial(0, b), p) == pytest.approx(np.linalg.norm(b, 2), rel=1e-12)
        assert ht.torus_lambda_norm(ht.monomial(1, 1.0), p) == pytest.approx(1.0, rel=1e-12)


def test_quadrature_doubling():
    rng = np.random.default_rng(5)
    for _ in range(10):
        f = ht.random_trig(rng, int(rng.integers(1, 4)), 2)
        for p in (2, 4):
            a = ht.torus_lambda_norm(f, p)
            nq = p * f.degree + 1
            b = ht.torus_lambda_norm(f, p, extra_nodes=nq)
            assert abs(a - b) <= 1e-12 * max(1.0, a)


def test_parseval():
    rng = np.random.default_rng(6)
    f = ht.random_trig(rng, 3, 2)
    assert ht.parseval_value(f) == pytest.approx(ht.torus_lambda_norm(f, 2) ** 2, rel=1e-12)


def test_analytic_ratio_one():
    rng = np.random.default_rng(7)
    f = ht.random_trig(rng, 3, 2, support=[1, 2, 3])
    r = ht.hilbert_cb_experiment(f, 4)
    assert r.ratio == pytest.approx(1.0, rel=1e-12)


def test_cosine_goes_to_sine():
    b = random_matrix(np.random.default_rng(8), 2)
    f = ht.TrigPolynomial(2, {1: b / 2, -1: b / 2})
    tf = ht.hilbert_transform(f)
    assert np.allclose(tf.coeff(1), b / 2j)
    assert np.allclose(tf.coeff(-1), -b / 2j)
    # E cos^4 = 3/8
    r = ht.hilbert_cb_experiment(f, 4)
    assert r.norm_f == pytest.approx((3 / 8) ** 0.25 * np.linalg.norm(b, 2), rel=1e-12)
    assert r.ratio == pytest.approx(1.0, rel=1e-12)


def test_littlewood_paley_single_block():
    rng = np.random.default_rng(9)
    f = ht.random_trig(rng, 7, 2, support=[4, 5, 7])
    rep = ht.littlewood_paley_check(f, 4)
    assert rep.ratio == pytest.approx(1.0, rel=1e-10)


def test_littlewood_paley_lacunary_scalar():
    K = 4
    f = ht.TrigPolynomial(1, {2**k: 1.0 for k in range(K)})
    rep = ht.littlewood_paley_check(f, 4)
    # a Sidon set: E|sum e_k|^4 counts the solutions of a + b = c + d
    assert rep.lhs == pytest.approx((2 * K * K - K) ** 0.25, rel=1e-12)
    assert rep.rhs == pytest.approx(np.sqrt(K), rel=1e-12)


def test_littlewood_paley_two_blocks_finite():
    rng = np.random.default_rng(10)
    f = ht.random_trig(rng, 3, 2, support=[1, 2, 3])
    rep = ht.littlewood_paley_check(f, 4)
    assert np.isfinite(rep.ratio) and rep.ratio > 0
    with pytest.raises(ValueError):
        ht.dyadic_blocks(ht.random_trig(rng, 1, 1))
