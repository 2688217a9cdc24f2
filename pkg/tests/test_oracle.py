import random

import pytest
from gmpy2 import mpq

from hidastar.fock import FockSeries, mi, wick_product
from hidastar.oracle import (
    DenseFockVector,
    OracleBoundsError,
    enumeration,
    loop_labels,
    loop_poisson_matrix,
    oracle_eval,
)
from hidastar.sampling import loop_label_set, random_series
from hidastar.scalar import Mode
from hidastar.symplectic import LoopModel

labels = loop_labels(2, 2)


def test_enumeration_is_sorted_and_complete():
    indices, pos = enumeration(labels, 2)
    assert list(indices) == sorted(indices)
    assert len(indices) == 1 + 10 + 55
    assert all(pos[I] == p for p, I in enumerate(indices))


def test_round_trip():
    rng = random.Random(0)
    F = random_series(rng, loop_label_set(2), 3, 6)
    v = DenseFockVector.from_sparse(F, labels, 3)
    assert v.to_sparse() == F
    assert DenseFockVector.from_sparse(v.to_sparse(), labels, 3).coeffs == v.coeffs


def test_bounds_are_enforced():
    with pytest.raises(OracleBoundsError):
        DenseFockVector.from_sparse(FockSeries.basis((5, 0)), labels)
    with pytest.raises(OracleBoundsError):
        DenseFockVector.from_sparse(FockSeries.basis((1, 0), 1.0, Mode.FLOAT), labels)


def test_simple_cases():
    x, y = FockSeries.basis((1, 0)), FockSeries.basis((1, 1))
    assert oracle_eval("wick", [x, x], {"labels": labels}).to_sparse() == wick_product(x, x)
    assert oracle_eval("bracket", [x, y], {"labels": labels, "model": LoopModel()}).to_sparse() == \
        FockSeries.constant(2)


def test_poisson_matrix_sign():
    # the engine uses -sigma times the literal inverse of the block form
    M = loop_poisson_matrix(labels, LoopModel())
    i, j = labels.index((1, 0)), labels.index((1, 1))
    assert M[i][j] == 2 and M[j][i] == -2


def test_wick_exp_oracle():
    xi = FockSeries({mi((1, 1)): mpq(1, 2), mi((-1, 2)): mpq(3)})
    from hidastar.oracle import cotangent_labels
    from hidastar.fock import wick_exponential
    dense = oracle_eval("wick_exp", [xi], {"labels": cotangent_labels(1), "D": 4})
    assert dense.to_sparse() == wick_exponential(xi, 4).uncapped()
