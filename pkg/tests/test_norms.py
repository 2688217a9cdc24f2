import itertools
import math

import pytest
from gmpy2 import mpq

from hidastar.fock import FockSeries, mi
from hidastar.norms import (
    NormParams,
    continuity_probe,
    geometric_report,
    hida_norm,
    hida_weight,
    hida_weight_squared,
    hs_embedding_norm,
    mode_factor,
    nuclearity_sum,
)
from hidastar.scalar import Mode


def test_weights():
    p = NormParams(2, 1)
    assert hida_weight((), p) == 1
    assert hida_weight(mi((1, 0)), p) == pytest.approx(2)
    assert hida_weight(mi((1, 0), (2, 1)), p) == pytest.approx(10)
    assert hida_weight_squared(mi((1, 0), (2, 1)), 2) == 100


def test_weight_is_multiplicative():
    p = NormParams(3, 2, 0.5)
    I, J = mi((1, 0), (2, 1)), mi((1, 0), (-3, 0))
    union = mi((1, 0), (2, 1), (1, 0), (-3, 0))
    assert hida_weight(union, p) == pytest.approx(hida_weight(I, p) * hida_weight(J, p))


def test_norm_examples():
    assert hida_norm(FockSeries.basis((1, 0)), NormParams(2, 3)) == pytest.approx(math.sqrt(6))
    assert hida_norm(FockSeries.zero(), NormParams(2, 3)) == 0
    for r, C in ((0, 1), (4, 0.25), (7, 3)):
        assert hida_norm(FockSeries.constant(1), NormParams(r, C)) == 1


def test_norm_monotone_and_homogeneous():
    F = FockSeries({mi((1, 0)): mpq(1, 2), mi((2, 1), (2, 1)): mpq(-3), (): mpq(1)})
    G = FockSeries({mi((1, 0)): mpq(1), mi((3, 0)): mpq(2)})
    lo, hi = NormParams(1, 1), NormParams(3, 2)
    assert hida_norm(F, lo) <= hida_norm(F, hi)
    assert hida_norm(F.scale(-3), lo) == pytest.approx(3 * hida_norm(F, lo))
    assert hida_norm(F + G, lo) <= hida_norm(F, lo) + hida_norm(G, lo) + 1e-9


def test_params_validation():
    with pytest.raises(ValueError):
        NormParams(-1, 1)
    with pytest.raises(ValueError):
        NormParams(1, 0)


def test_single_mode_geometric():
    rep = geometric_report([0.5], 80)
    assert rep["direct"] == pytest.approx(2)
    assert geometric_report([1 / 3], 80)["direct"] == pytest.approx(1.5)


def test_direct_sum_matches_literal_enumeration():
    xs = [0.3, 0.2, 0.5, 0.1]
    D = 5
    literal = 0.0
    for d in range(D + 1):
        for combo in itertools.combinations_with_replacement(range(len(xs)), d):
            literal += math.prod(xs[j] for j in combo)
    rep = geometric_report(xs, D)
    assert rep["direct"] == pytest.approx(literal, rel=1e-12)
    assert rep["closed_form"] == pytest.approx(literal, rel=1e-12)


def test_nuclearity_reference_case():
    rep = nuclearity_sum(NormParams(4, 0.5), 50, 2, 8)
    assert rep["summable"]
    assert abs(rep["direct"] - rep["closed_form"]) <= 1e-6 * rep["closed_form"]
    assert rep["direct"] <= rep["closed_form_full"]
    assert math.isfinite(rep["total"])


def test_nuclearity_monotone_in_cutoffs():
    p = NormParams(4, 0.5)
    by_degree = [nuclearity_sum(p, 10, 2, D)["direct"] for D in range(1, 12)]
    assert by_degree == sorted(by_degree)
    by_modes = [nuclearity_sum(p, k, 2, 6)["direct"] for k in range(1, 12)]
    assert by_modes == sorted(by_modes)
    full = nuclearity_sum(p, 10, 2, 60)
    assert full["direct"] == pytest.approx(full["closed_form_full"], rel=1e-10)


def test_nuclearity_divergence():
    rep = nuclearity_sum(NormParams(0, 1), 50, 2, 8)
    assert not rep["summable"]
    assert rep["total"] == math.inf
    # r <= 1 has a divergent mode tail even when every retained factor is < 1
    assert not nuclearity_sum(NormParams(1, 0.5), 10, 2, 4)["summable"]


def test_hs_embedding():
    p = NormParams(2, 1)
    assert not hs_embedding_norm(p, p, 5, 2, 4)["summable"]
    rep = hs_embedding_norm(NormParams(2, 1), NormParams(6, 0.25), 50, 2, 8)
    assert rep["summable"] and math.isfinite(rep["total"])
    assert abs(rep["direct"] - rep["closed_form"]) <= 1e-6 * rep["closed_form"]
    # a trivial source makes this the nuclearity sum
    t = NormParams(4, 0.5)
    assert hs_embedding_norm(NormParams(0, 1), t, 20, 2, 6)["direct"] == pytest.approx(
        nuclearity_sum(t, 20, 2, 6)["direct"])
    assert mode_factor(1, NormParams(6, 0.25)) / mode_factor(1, NormParams(2, 1)) == pytest.approx(1 / 16)


def test_probe_constants_and_determinism():
    target, source = NormParams(2, 1), NormParams(6, 4)
    a = continuity_probe("bracket", target, source, count=40, seed=3)
    b = continuity_probe("bracket", target, source, count=40, seed=3, partitions=3)
    assert a == b
    assert a.K_hat == max(a.quantiles.values())
    c = continuity_probe("bracket", target, source, count=40, seed=4)
    assert c != a
    consts = continuity_probe("bracket", target, source, count=20, seed=1, degree_cap=0)
    assert consts.K_hat == 0


def test_probe_other_ops():
    target, source = NormParams(2, 1), NormParams(6, 4)
    assert math.isfinite(continuity_probe("e_a_form", target, source, count=20).K_hat)
    assert math.isfinite(continuity_probe("p_l", target, source, count=20, l=2).K_hat)
    with pytest.raises(ValueError):
        continuity_probe("nope", target, source, count=2)
