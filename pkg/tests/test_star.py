import random

import pytest
from gmpy2 import mpq

from hidastar.fock import FockSeries, mi, wick_exponential, wick_product
from hidastar.sampling import cotangent_label_set, loop_label_set, random_direction, random_series
from hidastar.star import (
    BRACKET_NORMALIZED,
    PAPER,
    Convention,
    CotangentStar,
    DeformationSeries,
    LoopStar,
    d_star,
    exchange_check,
    exchange_exponent,
    gauge_equivalence_check,
    p_l,
    star,
    star_a,
    t1,
    t_prime,
)
from hidastar.symplectic import CotangentModel, DiagonalOperator, LoopModel, poisson_bracket

loop = LoopModel()
A3 = DiagonalOperator({1: 3})
x, y = FockSeries.basis((1, 0)), FockSeries.basis((1, 1))
p, q = FockSeries.basis((1, 1)), FockSeries.basis((1, 2))
one = FockSeries.constant(1)
zero = FockSeries.zero()


def test_convention_validation():
    with pytest.raises(ValueError):
        Convention(0)
    with pytest.raises(ValueError):
        Convention(1, 2)
    assert Convention.from_dict(PAPER.as_dict()) == PAPER
    assert PAPER.as_dict()["prefactor"] == "-1/2"


def test_p_l_examples():
    assert p_l(x, y, 0, loop) == wick_product(x, y)
    assert p_l(x, y, 1, loop, PAPER) == -one
    xx, yy = FockSeries.monomial(mi((1, 0), (1, 0))), FockSeries.monomial(mi((1, 1), (1, 1)))
    assert p_l(xx, yy, 2, loop, PAPER) == FockSeries.constant(2)
    S = star(xx, yy, 3, loop, PAPER)
    assert S[0] == FockSeries.monomial(mi((1, 0), (1, 0), (1, 1), (1, 1)))
    assert S[1] == FockSeries.monomial(mi((1, 0), (1, 1)), -4)
    assert S[2] == FockSeries.constant(2)
    assert S[3].is_zero()


def test_star_examples():
    G = x + y.scale(3)
    assert list(star(one, G, 3, loop)) == [G, zero, zero, zero]
    assert list(star(x, y, 2, loop, PAPER)) == [wick_product(x, y), -one, zero]


def test_star_terminates_on_polynomials():
    rng = random.Random(2)
    labels = loop_label_set(2)
    F = random_series(rng, labels, 4, 6, min_degree=4)
    G = random_series(rng, labels, 4, 6, min_degree=4)
    S = star(F, G, 6, loop)
    assert all(S[l].is_zero() for l in range(5, 7))


def test_p1_antisymmetry_per_convention():
    rng = random.Random(4)
    labels = loop_label_set(2)
    F, G = random_series(rng, labels, 3, 6), random_series(rng, labels, 3, 6)
    br = poisson_bracket(F, G, loop)
    for conv in (PAPER, BRACKET_NORMALIZED):
        anti = p_l(F, G, 1, loop, conv) - p_l(G, F, 1, loop, conv)
        assert anti == br.scale(2 * conv.prefactor)
    assert (p_l(F, G, 1, loop, BRACKET_NORMALIZED) - p_l(G, F, 1, loop, BRACKET_NORMALIZED)) == br.scale(2)


def test_star_a_examples():
    S = star_a(p, q, 1, DiagonalOperator.zero())
    assert S[1] == poisson_bracket(p, q, CotangentModel())
    assert star_a(p, q, 2, A3)[1] == FockSeries.constant(4)
    assert list(star_a(one, q, 2, A3)) == [q, zero, zero]
    with pytest.raises(Exception):
        star_a(x, y, 1, loop)


def test_t1_and_t_prime_examples():
    pq = wick_product(p, q)
    assert t1(pq, A3) == FockSeries.constant(-3)
    assert t1(FockSeries.monomial(mi((1, 1), (2, 1))), A3).is_zero()
    assert t1(one, A3).is_zero()
    assert list(t_prime(p, A3, 2)) == [p, zero, zero]
    assert list(t_prime(pq, A3, 2)) == [pq, FockSeries.constant(-3), zero]
    assert list(t_prime(pq, DiagonalOperator.zero(), 2)) == [pq, zero, zero]


def test_d_star_embedding_and_zero():
    X, Y = DeformationSeries.embed(x, 2), DeformationSeries.embed(y, 2)
    prod = LoopStar(loop, PAPER)
    assert d_star(X, Y, prod) == star(x, y, 2, loop, PAPER)
    Z = DeformationSeries.embed(zero, 2)
    assert d_star(Z, Y, prod).is_zero()
    with pytest.raises(ValueError):
        d_star(X, DeformationSeries.embed(y, 3), prod)


def test_associativity_for_other_prefactors():
    rng = random.Random(9)
    labels = loop_label_set(2)
    for conv in (Convention(3), Convention(mpq(-2, 5), -1)):
        prod = LoopStar(loop, conv)
        X, Y, Z = (DeformationSeries.embed(random_series(rng, labels, 3, 5), 3) for _ in range(3))
        assert d_star(d_star(X, Y, prod), Z, prod) == d_star(X, d_star(Y, Z, prod), prod)


def test_star_a_associativity():
    rng = random.Random(11)
    labels = cotangent_label_set(2)
    A = DiagonalOperator({1: 1, -1: mpq(1, 2), 2: -2, -2: mpq(3, 2)})
    prod = CotangentStar(A, BRACKET_NORMALIZED)
    X, Y, Z = (DeformationSeries.embed(random_series(rng, labels, 3, 6), 3) for _ in range(3))
    assert d_star(d_star(X, Y, prod), Z, prod) == d_star(X, d_star(Y, Z, prod), prod)


def test_gauge_examples():
    rep = gauge_equivalence_check(p, q, DiagonalOperator.zero(), 2, BRACKET_NORMALIZED)
    assert rep["passed"] and rep["identity"] == "gauge"
    assert gauge_equivalence_check(one, q, A3, 2, BRACKET_NORMALIZED)["passed"]
    rep = gauge_equivalence_check(p, q, A3, 2)  # calibrated
    assert rep["passed"]
    assert rep["convention"] == BRACKET_NORMALIZED.as_dict()


def test_gauge_fails_under_wrong_t1_sign():
    pq = wick_product(p, q)
    rep = gauge_equivalence_check(pq, pq, A3, 2, Convention(1, 1, 1))
    assert not rep["passed"]


def test_exchange_trivial_and_first_pairing():
    z1, z2 = FockSeries.zero(), FockSeries.zero()
    rep = exchange_check(z1, z2, z1, z2, DiagonalOperator.zero(), 3, 2, BRACKET_NORMALIZED)
    assert rep["passed"]
    # g1 = gamma_a on side 1, g2' = gamma_a on side 2: exponent 1 + lambda_a
    s = exchange_exponent(p, zero, zero, q, A3, BRACKET_NORMALIZED, "paper")
    assert s == 4
    assert exchange_check(p, zero, zero, q, A3, 4, 3, BRACKET_NORMALIZED)["passed"]


def test_exchange_calibrated_form_single_mode():
    rng = random.Random(1)
    g1, g2, gp1, gp2 = (random_direction(rng, [1], s, allow_zero=False) for s in (1, 2, 1, 2))
    rep = exchange_check(g1, g2, gp1, gp2, A3, 4, 3, BRACKET_NORMALIZED, form="calibrated")
    assert rep["passed"]
    assert rep["exact_degree"] >= 4


def test_exchange_literal_form_differs_by_reverse_pairing():
    # the quoted exponent is symmetric; the product is not.  The gap is 2 <g2, g1'>.
    rng = random.Random(1)
    g1, g2, gp1, gp2 = (random_direction(rng, [1], s, allow_zero=False) for s in (1, 2, 1, 2))
    lit = exchange_exponent(g1, g2, gp1, gp2, A3, BRACKET_NORMALIZED, "paper")
    cal = exchange_exponent(g1, g2, gp1, gp2, A3, BRACKET_NORMALIZED, "calibrated")
    reverse = g2[mi((1, 2))] * gp1[mi((1, 1))]
    assert lit - cal == 2 * reverse


def test_exchange_rejects_wrong_sides():
    with pytest.raises(ValueError):
        exchange_check(q, zero, zero, q, A3, 2, 1, BRACKET_NORMALIZED)


def test_truncated_inputs_report_exact_degree():
    phi = wick_exponential(p + q, 8)
    S = star_a(phi, phi, 2, A3, BRACKET_NORMALIZED)
    assert S.exact_degree == 4
