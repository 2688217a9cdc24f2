"""Pick the sign/prefactor convention for the perturbed product empirically.

Every tuple in :func:`~hidastar.star.candidate_conventions` is run against two
probes, both evaluated with the dense oracle only:

* the gauge identity ``T'(F *^A G) = T'F * T'G`` on every pair of monomials of
  degree <= 2 in one mode, to order 2;
* the exchange probe ``Phi_{g,0} *^A Phi_{0,g'}`` for ``g`` the side-1 and
  ``g'`` the side-2 basis vector of that mode, which must equal
  ``exp[h (1 + lambda)] Phi_{g,g'}`` through degree 2 and order 2.

A tuple passes when both residuals vanish exactly.  One passing tuple gives
status ``"unique"``; none gives ``"none"``; several give ``"underdetermined"``
(this happens for ``A = 0``, where ``T_1`` vanishes and its sign is free).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from gmpy2 import mpq

from .oracle import (
    DenseFockVector,
    cotangent_matrix,
    dense_annihilate,
    dense_wick,
    dense_wick_exp,
    _exp_sum,
)
from .star import Convention, candidate_conventions
from .symplectic import DiagonalOperator

__all__ = ["CalibrationError", "CalibrationResult", "calibrate", "calibrated_convention", "probe_mode"]

PROBE_ORDER = 2
PROBE_DEGREE = 2


class CalibrationError(RuntimeError):
    def __init__(self, result: CalibrationResult):
        super().__init__(f"calibration is {result.status}: {len(result.passing)} passing tuple(s)")
        self.result = result


@dataclass
class CalibrationResult:
    status: str
    mode: int
    lam: object
    passing: list = field(default_factory=list)
    candidates: list = field(default_factory=list)

    @property
    def convention(self) -> Convention:
        if self.status != "unique":
            raise CalibrationError(self)
        return self.passing[0]

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "probe_mode": self.mode,
            "lambda": str(self.lam),
            "passing": [c.as_dict() for c in self.passing],
            "candidates": self.candidates,
        }


def probe_mode(A: DiagonalOperator) -> int:
    """Smallest mode (by ``|k|``, then sign) with nonzero eigenvalue; mode 1 if ``A = 0``."""
    if A.formula is not None:
        return 1
    nonzero = [k for k in A.modes() if A(k) != 0]
    return min(nonzero, key=lambda k: (abs(k), k)) if nonzero else 1


def _monomials(labels: tuple, D: int) -> list:
    out = []
    for d in range(D + 1):
        for i in range(d + 1):
            counts = [(labels[0], i), (labels[1], d - i)]
            out.append(tuple((b, m) for b, m in counts if m))
    return out


def _basis(labels: tuple, D: int, I) -> DenseFockVector:
    v = DenseFockVector(labels, D)
    v.coeffs[v.position[I]] = mpq(1)
    return v


def _t1(u: DenseFockVector, k: int, lam, sign: int) -> DenseFockVector:
    out = dense_annihilate(dense_annihilate(u, (k, 1)), (k, 2))
    return out.scale(sign * lam)


def _t_prime(slots: list, k: int, lam, sign: int) -> list:
    """``exp(h T_1)`` on a list of dense slots (order = len - 1)."""
    L = len(slots) - 1
    out = []
    for m in range(L + 1):
        total = None
        for p in range(m + 1):
            term = slots[p]
            for _ in range(m - p):
                term = _t1(term, k, lam, sign)
            term = term.scale(mpq(1, math.factorial(m - p)))
            total = term if total is None else total.add(term)
        out.append(total)
    return out


def _product(u_slots: list, v_slots: list, matrix: list) -> list:
    L = len(u_slots) - 1
    out = [None] * (L + 1)
    for p in range(L + 1):
        for q in range(L + 1 - p):
            for l in range(L + 1 - p - q):
                term = _exp_sum(u_slots[p], v_slots[q], l, matrix)
                m = p + q + l
                out[m] = term if out[m] is None else out[m].add(term)
    return out


def _max_residual(xs: list, ys: list, D: int | None = None) -> list:
    res = []
    for x, y in zip(xs, ys):
        if D is not None:
            x, y = x.restrict(D), y.restrict(D)
        diff = x.add(y.scale(-1))
        res.append(max((abs(c) for c in diff.coeffs), default=mpq(0)))
    return res


def _gauge_residual(conv: Convention, k: int, lam, A: DiagonalOperator, flip_oracle: bool) -> mpq:
    labels = ((k, 1), (k, 2))
    L = PROBE_ORDER
    pert = cotangent_matrix(labels, A, conv.prefactor, conv.bracket_sign)
    plain_sigma = -conv.bracket_sign if flip_oracle else conv.bracket_sign
    plain = cotangent_matrix(labels, DiagonalOperator.zero(), conv.prefactor, plain_sigma)
    zero = DenseFockVector(labels, 0)
    worst = mpq(0)
    monos = _monomials(labels, PROBE_DEGREE)
    for I in monos:
        u = _basis(labels, PROBE_DEGREE, I)
        for J in monos:
            v = _basis(labels, PROBE_DEGREE, J)
            lhs = _t_prime([_exp_sum(u, v, l, pert) for l in range(L + 1)], k, lam, conv.t1_sign)
            tu = _t_prime([u] + [zero] * L, k, lam, conv.t1_sign)
            tv = _t_prime([v] + [zero] * L, k, lam, conv.t1_sign)
            rhs = _product(tu, tv, plain)
            worst = max([worst] + _max_residual(lhs, rhs))
    return worst


def _exchange_residual(conv: Convention, k: int, lam, A: DiagonalOperator) -> mpq:
    labels = ((k, 1), (k, 2))
    L, D = PROBE_ORDER, PROBE_DEGREE
    top = D + 2 * L
    g = DenseFockVector(labels, 1)
    g.coeffs[g.position[(((k, 1), 1),)]] = mpq(1)
    gp = DenseFockVector(labels, 1)
    gp.coeffs[gp.position[(((k, 2), 1),)]] = mpq(1)
    phi, phi_p = dense_wick_exp(g, top), dense_wick_exp(gp, top)
    matrix = cotangent_matrix(labels, A, conv.prefactor, conv.bracket_sign)
    lhs = [_exp_sum(phi, phi_p, l, matrix) for l in range(L + 1)]
    both = dense_wick_exp(g.add(gp), D)
    s = 1 + lam
    rhs = [both.scale(s ** m * mpq(1, math.factorial(m))) for m in range(L + 1)]
    return max(_max_residual(lhs, rhs, D))


def calibrate(A: DiagonalOperator, *, flip_oracle: bool = False) -> CalibrationResult:
    """Run every candidate convention through both probes.

    ``flip_oracle`` is a negative-test fixture: it flips the Poisson sign of
    the unperturbed product on the oracle side only, which no candidate can
    absorb, so the result must be ``"none"``.
    """
    k = probe_mode(A)
    lam = A(k)
    passing, rows = [], []
    for conv in candidate_conventions():
        g = _gauge_residual(conv, k, lam, A, flip_oracle)
        e = _exchange_residual(conv, k, lam, A)
        ok = g == 0 and e == 0
        rows.append({"convention": conv.as_dict(), "gauge_residual": str(g), "exchange_residual": str(e),
                     "passed": ok})
        if ok:
            passing.append(conv)
    status = "unique" if len(passing) == 1 else ("none" if not passing else "underdetermined")
    return CalibrationResult(status, k, lam, passing, rows)


@lru_cache(maxsize=32)
def calibrated_convention(A: DiagonalOperator) -> Convention:
    """The unique passing tuple for ``A``; raises :class:`CalibrationError` otherwise."""
    return calibrate(A).convention
