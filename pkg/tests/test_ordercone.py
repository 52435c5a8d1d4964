import numpy as np
import pytest

from opspace import ordercone as oc
from opspace.lambda_comm import FiniteMeasureSpace, conditional_expectation, random_field
from opspace.linalg import HermiticityError, random_matrix


def e(i, j, d=2):
    m = np.zeros((d, d), dtype=complex)
    m[i, j] = 1
    return m


def test_realign_rank_one_gram():
    a = random_matrix(np.random.default_rng(0), 2)
    r = oc.realign(oc.gram_element([a]))
    v = a.ravel()
    assert np.allclose(r, np.outer(v, v.conj()))
    assert np.linalg.matrix_rank(r) == 1


def test_realign_diagonal_pair():
    x = oc.paired([(e(0, 0), e(0, 0)), (e(1, 1), e(1, 1))])
    r = oc.realign(x)
    assert np.allclose(r, np.diag(np.diag(r)))
    assert sorted(np.real(np.diag(r)).tolist()) == [0.0, 0.0, 1.0, 1.0]
    assert oc.is_positive(x)


def test_off_diagonal_pattern_not_positive():
    x = oc.paired([(e(0, 0), e(1, 1))])
    r = oc.realign(x)
    h = 0.5 * (r + r.conj().T)
    assert np.linalg.eigvalsh(h)[0] == pytest.approx(-0.5)
    with pytest.raises(HermiticityError):
        oc.is_positive(x)


def test_sum_of_grams_positive():
    rng = np.random.default_rng(1)
    assert oc.is_positive(oc.gram_element([random_matrix(rng, 2) for _ in range(3)]))


def test_parallelogram_order():
    rng = np.random.default_rng(2)
    for _ in range(20):
        x, y = random_matrix(rng, 2), random_matrix(rng, 2)
        big = oc.gram_element([x, y], weights=[2.0, 2.0])
        small = oc.gram_element([x + y])
        assert oc.precedes(small, big)


def test_negative_gram_not_positive():
    a = random_matrix(np.random.default_rng(3), 2)
    assert not oc.is_positive(oc.gram_element([a]).scaled(-1.0))


def test_precedes_reflexive():
    x = oc.gram_element([random_matrix(np.random.default_rng(4), 2)])
    assert oc.precedes(x, x)


def test_conditional_expectation_order_pointwise():
    rng = np.random.default_rng(5)
    sp = FiniteMeasureSpace(rng.uniform(0.2, 1.0, 4))
    blocks = [(0, 2), (1, 3)]
    for _ in range(10):
        f = random_field(rng, sp, 2)
        ef = conditional_expectation(f, blocks)
        for b in blocks:
            w = sp.weights[list(b)]
            avg = oc.gram_element([f.values[i] for i in b], weights=w / w.sum())
            assert oc.precedes(oc.gram_element([ef.values[b[0]]]), avg)


def test_sum_bound_by_n_times_squares():
    rng = np.random.default_rng(6)
    for n in (2, 3, 4):
        xs = [random_matrix(rng, 2) for _ in range(n)]
        assert oc.precedes(oc.gram_element([sum(xs)]), oc.gram_element(xs, weights=[n] * n))


def test_products_and_powers_positive():
    rng = np.random.default_rng(7)
    a, b = random_matrix(rng, 2), random_matrix(rng, 2)
    assert oc.is_positive(oc.tensor_positive_product(oc.gram_element([a]), oc.gram_element([b])))
    x = oc.gram_element([random_matrix(rng, 2) for _ in range(2)])
    assert oc.is_positive(oc.tensor_power(x, 2))


def test_monotone_products_random():
    rng = np.random.default_rng(8)
    for _ in range(10):
        x = oc.gram_element([random_matrix(rng, 2)])
        y = x + oc.gram_element([random_matrix(rng, 2)])
        x2 = oc.gram_element([random_matrix(rng, 2)])
        y2 = x2 + oc.gram_element([random_matrix(rng, 2)])
        assert oc.precedes(oc.tensor_positive_product(x, x2), oc.tensor_positive_product(y, y2))


def test_cone_norm_monotone():
    rng = np.random.default_rng(9)
    for _ in range(50):
        x = oc.gram_element([random_matrix(rng, 2) for _ in range(2)])
        y = x + oc.gram_element([random_matrix(rng, 2)])
        assert oc.cone_norm(x) <= oc.cone_norm(y) + 1e-8


def test_pairing_validation():
    with pytest.raises(ValueError):
        oc.paired([(np.eye(2), np.eye(3))])
    with pytest.raises(ValueError):
        oc.paired([(np.eye(2), np.eye(2))], pairing=(0, 0))
