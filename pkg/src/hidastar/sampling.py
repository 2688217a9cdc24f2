"""Seeded random inputs for the property suites."""

from __future__ import annotations

import random
from fractions import Fraction

from gmpy2 import mpq

from .fock import FockSeries
from .scalar import GaussianRational, Mode
from .symplectic import DiagonalOperator

__all__ = ["loop_label_set", "cotangent_label_set", "random_series", "random_operator", "random_direction"]


def loop_label_set(kmax: int, n: int = 2) -> list:
    return [(k, i) for k in range(-kmax, kmax + 1) for i in range(n)]


def cotangent_label_set(kmax: int) -> list:
    return [(k, s) for k in range(-kmax, kmax + 1) if k for s in (1, 2)]


def _rational(rng: random.Random, numer: int, denoms) -> mpq:
    while True:
        q = mpq(rng.randint(-numer, numer), rng.choice(denoms))
        if q:
            return q


def random_series(rng: random.Random, labels: list, max_degree: int, max_terms: int, *, min_terms: int = 1,
                  min_degree: int = 0, complex_prob: float = 0.0, numer: int = 5, denoms=(1, 2, 3)) -> FockSeries:
    """EXACT series with ``min_terms..max_terms`` random monomials; coefficients are small rationals."""
    terms: dict = {}
    for _ in range(rng.randint(min_terms, max_terms)):
        d = rng.randint(min_degree, max_degree)
        counts: dict = {}
        for b in rng.choices(labels, k=d):
            counts[b] = counts.get(b, 0) + 1
        I = tuple(sorted(counts.items()))
        c = _rational(rng, numer, denoms)
        if rng.random() < complex_prob:
            c = GaussianRational(c, _rational(rng, numer, denoms))
        terms[I] = terms[I] + c if I in terms else c
    return FockSeries({I: c for I, c in terms.items() if c != 0}, Mode.EXACT)


def random_operator(rng: random.Random, modes, denom: int = 2) -> DiagonalOperator:
    """Diagonal operator with rational ``lambda_n``, ``|lambda_n| <= |n|``, on the given modes."""
    table = {n: Fraction(rng.randint(-abs(n) * denom, abs(n) * denom), denom) for n in modes}
    return DiagonalOperator(table, growth=(1, 1))


def random_direction(rng: random.Random, modes, side: int, *, allow_zero: bool = True) -> FockSeries:
    """Degree-one series ``sum c_k gamma_(k, side)`` over ``modes`` with small rational ``c_k``."""
    terms = {}
    for k in modes:
        c = mpq(rng.randint(-3, 3), rng.choice((1, 2)))
        if c or not allow_zero:
            terms[(((k, side), 1),)] = c if c else mpq(1)
    return FockSeries(terms, Mode.EXACT)
