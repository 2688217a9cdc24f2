import random

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from hidastar.fock import (
    CanonicalError,
    FockSeries,
    annihilate,
    annihilate_seq,
    canonicalize,
    degree,
    linear_combine,
    mi,
    wick_exponential,
    wick_product,
)
from hidastar.scalar import Mode, ModeError
from hidastar.sampling import loop_label_set, random_series

x = FockSeries.basis((1, 0))
y = FockSeries.basis((2, 1))
one = FockSeries.constant(1)


def mono(*labels, c=1):
    return FockSeries.monomial(mi(*labels), c)


# canonicalize


def test_canonicalize_merges_duplicates():
    F = canonicalize([(((1, 0), 1), 2), (((1, 0), 1), 3)])
    assert F == FockSeries.basis((1, 0), 5)


def test_canonicalize_empty_and_cancellation():
    assert canonicalize([]).is_zero()
    assert canonicalize([((1, 0), 1), ((1, 0), -1)]).is_zero()


def test_canonicalize_idempotent_and_order_free():
    raw = [([(2, 1), (1, 0)], 1), ([(1, 0), (2, 1)], 2), ([(1, 1)], mpq(1, 2))]
    F = canonicalize(raw)
    assert F == canonicalize(F.items())
    assert F[mi((1, 0), (2, 1))] == 3


def test_canonicalize_errors():
    with pytest.raises(ModeError):
        canonicalize([((1, 0), 1.0), ((1, 1), mpq(1))])
    with pytest.raises(CanonicalError):
        canonicalize([((1, 5), 1)], dimension=2)
    with pytest.raises(CanonicalError):
        canonicalize([((0, 1), 1)], model="cotangent")


def test_linear_combine():
    F = x + y
    assert linear_combine(1, F, 1, -F).is_zero()
    assert linear_combine(2, one, 0, F) == FockSeries.constant(2)
    assert linear_combine(1, x, 1, y) == canonicalize([((1, 0), 1), ((2, 1), 1)])
    with pytest.raises(ModeError):
        linear_combine(1, x, 1, FockSeries.basis((1, 0), 1.0, Mode.FLOAT))


# Wick product


def test_wick_examples():
    assert wick_product(x, x) == mono((1, 0), (1, 0))
    G = x - y * mpq(1, 3)
    assert wick_product(one, G) == G
    assert wick_product(x + y, x) == mono((1, 0), (1, 0)) + mono((1, 0), (2, 1))


def test_wick_coefficient_is_sum_over_splittings():
    F = x + one
    # (x + 1)^2 = x^2 + 2x + 1
    assert wick_product(F, F) == mono((1, 0), (1, 0)) + x.scale(2) + one


def test_wick_float_mode():
    a = FockSeries.basis((1, 0), 0.5, Mode.FLOAT)
    b = FockSeries.basis((1, 0), 4.0, Mode.FLOAT)
    assert wick_product(a, b)[mi((1, 0), (1, 0))] == 2.0
    with pytest.raises(ModeError):
        wick_product(a, x)


def test_wick_float_prunes_below_eps():
    a = FockSeries({mi((1, 0)): 1.0, mi((1, 1)): 1.0}, Mode.FLOAT)
    b = FockSeries({mi((1, 1)): 1.0, mi((1, 0)): -1.0 + 1e-13}, Mode.FLOAT)
    # cross terms cancel to ~1e-13, below the default eps
    assert mi((1, 0), (1, 1)) not in wick_product(a, b)


def test_wick_cap_tracks_exactness():
    F = (x + mono((1, 0), (1, 0))).truncate(2)
    G = one + y
    P = wick_product(F, G)
    assert P.cap == 2  # cap_F + mindeg_G
    assert all(degree(I) <= 2 for I in P)


def test_large_float_product_matches_across_thread_counts(monkeypatch):
    rng = random.Random(3)
    labels = loop_label_set(6)
    F = FockSeries({I: complex(c) for I, c in random_series(rng, labels, 4, 700, min_terms=700).items()},
                   Mode.FLOAT)
    G = FockSeries({I: complex(c) for I, c in random_series(rng, labels, 4, 700, min_terms=700).items()},
                   Mode.FLOAT)
    monkeypatch.setenv("HIDA_STAR_THREADS", "1")
    one_thread = wick_product(F, G)
    monkeypatch.setenv("HIDA_STAR_THREADS", "4")
    many = wick_product(F, G)
    assert one_thread.terms == many.terms
    assert list(one_thread.terms) == list(many.terms)


# annihilation


def test_annihilate_examples():
    assert annihilate(mono((1, 0), (1, 0), (1, 0)), (1, 0)) == mono((1, 0), (1, 0), c=3)
    assert annihilate(x, (2, 0)).is_zero()
    assert annihilate(one, (1, 0)).is_zero()


def test_annihilate_seq_examples():
    I = mono((1, 0), (1, 0), (1, 1))
    assert annihilate_seq(I, [(1, 0), (1, 0)]) == FockSeries.basis((1, 1), 2)
    assert annihilate_seq(I, []) == I
    assert annihilate_seq(x, [(1, 0), (1, 0)]).is_zero()


# Wick exponential


def test_wick_exponential_single_direction():
    c = mpq(2, 3)
    E = wick_exponential(FockSeries.basis((1, 0), c), 3)
    expected = one + x.scale(c) + mono((1, 0), (1, 0), c=c ** 2 / 2) + mono((1, 0), (1, 0), (1, 0), c=c ** 3 / 6)
    assert E == expected
    assert E.cap == 3


def test_wick_exponential_zero_and_cross_term():
    assert wick_exponential(FockSeries.zero(), 4) == one
    E = wick_exponential(x + y, 2)
    assert E[mi((1, 0), (2, 1))] == 1
    # same as (xi^2)/2 from the Wick product
    assert E.homogeneous(2) == wick_product(x + y, x + y).scale(mpq(1, 2))


def test_wick_exponential_rejects_non_linear_input():
    with pytest.raises(ValueError):
        wick_exponential(x + one, 2)


# properties

labels = loop_label_set(2)
label_st = st.sampled_from(labels)
coeff_st = st.fractions(min_value=-3, max_value=3, max_denominator=4).filter(bool)
series_st = st.dictionaries(
    st.lists(label_st, max_size=4).map(lambda ls: mi(*ls)), coeff_st.map(lambda q: mpq(q.numerator, q.denominator)),
    max_size=8,
).map(lambda d: FockSeries(d))


@settings(max_examples=60, deadline=None)
@given(series_st, series_st, series_st)
def test_wick_is_commutative_and_associative(F, G, H):
    assert wick_product(F, G) == wick_product(G, F)
    assert wick_product(wick_product(F, G), H) == wick_product(F, wick_product(G, H))


@settings(max_examples=60, deadline=None)
@given(series_st, series_st, label_st, label_st)
def test_annihilation_is_a_commuting_derivation(F, G, a, b):
    lhs = annihilate(wick_product(F, G), a)
    assert lhs == wick_product(annihilate(F, a), G) + wick_product(F, annihilate(G, a))
    assert annihilate(annihilate(F, a), b) == annihilate(annihilate(F, b), a)


@settings(max_examples=60, deadline=None)
@given(series_st, st.lists(label_st, min_size=1, max_size=3))
def test_annihilation_constant_bound(F, seq):
    for I in F:
        out = annihilate_seq(FockSeries.monomial(I), seq)
        assert all(abs(c) <= degree(I) ** len(seq) for _, c in out.items())


def test_bulk_decode_matches_unpack():
    from hidastar.fock import _Packer, _bulk_decode
    rng = random.Random(11)
    labels = [(k, i) for k in range(-40, 41) for i in range(2)]
    packer = _Packer(labels, 12)
    idx = []
    for _ in range(500):
        counts = {}
        for b in rng.choices(labels, k=rng.randint(0, 12)):
            counts[b] = counts.get(b, 0) + 1
        idx.append(tuple(sorted(counts.items())))
    keys = [packer.pack(I) for I in idx]
    assert _bulk_decode(keys, packer.labels, packer.nbytes) == idx
    assert [packer.unpack(k) for k in keys] == idx
