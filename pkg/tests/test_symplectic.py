import random

import pytest
from gmpy2 import mpq

from hidastar.fock import FockSeries, mi
from hidastar.sampling import cotangent_label_set, random_series
from hidastar.symplectic import (
    CotangentModel,
    DiagonalOperator,
    LoopModel,
    ModelError,
    c1a,
    e_a_form,
    h_pairing,
    omega_inverse_entry,
    poisson_bracket,
)

loop = LoopModel()
A3 = DiagonalOperator({1: 3})
p = FockSeries.basis((1, 1))  # side 1
q = FockSeries.basis((1, 2))  # side 2
one = FockSeries.constant(1)


def test_omega_inverse_entries():
    assert omega_inverse_entry((1, 0), (1, 1), loop) == 2
    assert omega_inverse_entry((1, 1), (1, 0), loop) == -2
    assert omega_inverse_entry((1, 0), (2, 1), loop) == 0
    assert omega_inverse_entry((3, 2), (3, 3), LoopModel(4, mpq(1, 2))) == mpq(11, 2)
    with pytest.raises(ModelError):
        omega_inverse_entry((1, 1), (1, 2), CotangentModel())


def test_loop_bracket_examples():
    x, y = FockSeries.basis((1, 0)), FockSeries.basis((1, 1))
    assert poisson_bracket(x, y, loop) == FockSeries.constant(2)
    assert poisson_bracket(x, one, loop).is_zero()
    assert poisson_bracket(FockSeries.monomial(mi((1, 0), (1, 0))), y, loop) == x.scale(4)


def test_sigma_flip_negates_bracket():
    x, y = FockSeries.basis((2, 0)), FockSeries.basis((2, 1))
    assert poisson_bracket(x, y, loop.with_sigma(-1)) == -poisson_bracket(x, y, loop)


def test_model_validation():
    with pytest.raises(ModelError):
        LoopModel(3)
    with pytest.raises(ModelError):
        LoopModel(2, 0)
    with pytest.raises(ModelError):
        DiagonalOperator({2: 5}, growth=(1, 1))  # |5| > 1 * 2
    with pytest.raises(ModelError):
        DiagonalOperator(formula=(2, 2), growth=(1, 1))
    assert DiagonalOperator(formula=(mpq(1, 2), 2))(4) == 8


def test_cotangent_bracket_and_e_a():
    model = CotangentModel(A3)
    assert poisson_bracket(p, q, model) == one
    assert poisson_bracket(q, p, model) == -one
    assert e_a_form(p, q, A3) == FockSeries.constant(3)
    assert e_a_form(one, q, A3).is_zero()
    assert c1a(p, q, A3) == FockSeries.constant(4)
    assert c1a(p, q, DiagonalOperator.zero()) == poisson_bracket(p, q, CotangentModel())
    assert c1a(one, q, A3).is_zero()


def test_e_a_rejects_loop_labels():
    with pytest.raises(ModelError):
        e_a_form(FockSeries.basis((1, 0)), q, A3)


def test_e_a_is_symmetric():
    rng = random.Random(5)
    labels = cotangent_label_set(2)
    A = DiagonalOperator({1: 1, -1: mpq(1, 2), 2: -2, -2: 1})
    for _ in range(30):
        F, G = random_series(rng, labels, 3, 6), random_series(rng, labels, 3, 6)
        assert e_a_form(F, G, A) == e_a_form(G, F, A)


def test_h_pairing():
    a, b = FockSeries.basis((1, 1)), FockSeries.basis((2, 1))
    assert h_pairing(a, a) == 1
    assert h_pairing(a, b) == 0
    assert h_pairing(a, a, A3) == 4
    with pytest.raises(ValueError):
        h_pairing(one, a)
