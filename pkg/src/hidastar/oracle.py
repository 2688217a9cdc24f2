"""Dense brute-force mirror of the sparse algebra, for tests only.

A :class:`DenseFockVector` stores one coefficient for every multiindex over a
fixed label set up to a degree bound, in lexicographic order of the canonical
multiindex tuples.  Every operation here is a direct transcription of its
formula with no use of sparsity:

* Wick product: for each target ``I``, sum over every sub-multiset ``I1``.
* annihilation: ``out[J] = (m_a(J) + 1) * u[J + a]``.
* the inverse form is obtained by inverting the dense form matrix with exact
  Gauss-Jordan elimination; the engine's sign convention is ``-sigma`` times
  that inverse.
* ``P_l`` and ``C_r^A`` sum over every ``l``-tuple of label pairs.

EXACT mode only.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations_with_replacement, product

from gmpy2 import mpq

from .fock import FockSeries
from .scalar import Mode, exact
from .symplectic import DiagonalOperator, LoopModel

__all__ = [
    "OracleBoundsError",
    "DenseFockVector",
    "loop_labels",
    "cotangent_labels",
    "enumeration",
    "dense_wick",
    "dense_annihilate",
    "dense_annihilate_seq",
    "loop_poisson_matrix",
    "cotangent_matrix",
    "dense_bracket",
    "dense_p_l",
    "dense_c_r_a",
    "dense_t1",
    "dense_wick_exp",
    "oracle_eval",
]

_ZERO = mpq(0)


class OracleBoundsError(ValueError):
    """Input does not fit the oracle's label set or degree bound."""


def loop_labels(kmax: int, n: int) -> tuple:
    return tuple((k, i) for k in range(-kmax, kmax + 1) for i in range(n))


def cotangent_labels(kmax: int) -> tuple:
    return tuple((k, s) for k in range(-kmax, kmax + 1) if k for s in (1, 2))


@lru_cache(maxsize=64)
def enumeration(labels: tuple, D: int):
    """All canonical multiindices over ``labels`` of degree ``<= D``, sorted, with a position map."""
    labels = tuple(sorted(labels))
    out = []
    for d in range(D + 1):
        for combo in combinations_with_replacement(labels, d):
            counts: dict = {}
            for b in combo:
                counts[b] = counts.get(b, 0) + 1
            out.append(tuple(sorted(counts.items())))
    out.sort()
    return tuple(out), {I: p for p, I in enumerate(out)}


class DenseFockVector:
    __slots__ = ("labels", "D", "coeffs")

    def __init__(self, labels, D: int, coeffs=None):
        self.labels = tuple(sorted(labels))
        self.D = max(D, 0)
        size = len(enumeration(self.labels, self.D)[0])
        self.coeffs = list(coeffs) if coeffs is not None else [_ZERO] * size
        if len(self.coeffs) != size:
            raise ValueError("coefficient table does not match the enumeration")

    @property
    def indices(self) -> tuple:
        return enumeration(self.labels, self.D)[0]

    @property
    def position(self) -> dict:
        return enumeration(self.labels, self.D)[1]

    def get(self, I):
        p = self.position.get(I)
        return _ZERO if p is None else self.coeffs[p]

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    @classmethod
    def from_sparse(cls, F: FockSeries, labels, D: int | None = None) -> DenseFockVector:
        if F.mode is not Mode.EXACT:
            raise OracleBoundsError("the oracle is EXACT-only")
        labels = tuple(sorted(labels))
        D = max(F.degree(), 0) if D is None else D
        v = cls(labels, D)
        pos = v.position
        for I, c in F.items():
            p = pos.get(I)
            if p is None:
                raise OracleBoundsError(f"term {I} lies outside labels/degree bound {D}")
            v.coeffs[p] = c
        return v

    def to_sparse(self) -> FockSeries:
        return FockSeries({I: c for I, c in zip(self.indices, self.coeffs) if c != 0}, Mode.EXACT)

    def scale(self, c) -> DenseFockVector:
        c = exact(c)
        return DenseFockVector(self.labels, self.D, [c * x for x in self.coeffs])

    def add(self, other: DenseFockVector) -> DenseFockVector:
        D = max(self.D, other.D)
        a, b = self.restrict(D).coeffs, other.restrict(D).coeffs
        return DenseFockVector(self.labels, D, [x + y for x, y in zip(a, b)])

    def restrict(self, D: int) -> DenseFockVector:
        """Same vector on the table of degree ``D`` (dropping or zero-padding entries)."""
        D = max(D, 0)
        if D == self.D:
            return self
        cu = self.coeffs
        coeffs = [_ZERO if q is None else cu[q] for q in _restriction_table(self.labels, self.D, D)]
        return DenseFockVector(self.labels, D, coeffs)


@lru_cache(maxsize=256)
def _restriction_table(labels: tuple, D_from: int, D_to: int) -> tuple:
    pos = enumeration(labels, D_from)[1]
    return tuple(pos.get(I) for I in enumeration(labels, D_to)[0])


def _submultisets(I):
    labels = [b for b, _ in I]
    for ms in product(*(range(m + 1) for _, m in I)):
        I1 = tuple((b, m) for b, m in zip(labels, ms) if m)
        I2 = tuple((b, m - k) for (b, m), k in zip(I, ms) if m - k)
        yield I1, I2


@lru_cache(maxsize=64)
def _split_table(labels: tuple, Du: int, Dv: int) -> tuple:
    """For each target ``I`` of degree ``<= Du + Dv``: the positions ``(q1, q2)`` of every split ``I = I1 + I2``."""
    pu = enumeration(labels, Du)[1]
    pv = enumeration(labels, Dv)[1]
    table = []
    for I in enumeration(labels, Du + Dv)[0]:
        row = []
        for I1, I2 in _submultisets(I):
            q1, q2 = pu.get(I1), pv.get(I2)
            if q1 is not None and q2 is not None:
                row.append((q1, q2))
        table.append(tuple(row))
    return tuple(table)


def dense_wick(u: DenseFockVector, v: DenseFockVector) -> DenseFockVector:
    cu, cv = u.coeffs, v.coeffs
    coeffs = [sum((cu[q1] * cv[q2] for q1, q2 in row), _ZERO) for row in _split_table(u.labels, u.D, v.D)]
    return DenseFockVector(u.labels, u.D + v.D, coeffs)


def _add_label(J, a):
    counts = dict(J)
    counts[a] = counts.get(a, 0) + 1
    return tuple(sorted(counts.items()))


@lru_cache(maxsize=512)
def _annihilation_table(labels: tuple, D: int, a) -> tuple:
    """``(q, m + 1)`` for each target ``J`` of degree ``<= D - 1``, with ``q`` the position of ``J + a``."""
    pos = enumeration(labels, D)[1]
    return tuple((pos.get(_add_label(J, a)), dict(J).get(a, 0) + 1) for J in enumeration(labels, D - 1)[0])


def dense_annihilate(u: DenseFockVector, a) -> DenseFockVector:
    if u.D == 0:
        return DenseFockVector(u.labels, 0)
    cu = u.coeffs
    coeffs = [_ZERO if q is None else m * cu[q] for q, m in _annihilation_table(u.labels, u.D, a)]
    return DenseFockVector(u.labels, u.D - 1, coeffs)


def dense_annihilate_seq(u: DenseFockVector, seq) -> DenseFockVector:
    for a in seq:
        u = dense_annihilate(u, a)
    return u


def _invert(matrix: list) -> list:
    n = len(matrix)
    aug = [list(row) + [mpq(int(i == j)) for j in range(n)] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def loop_poisson_matrix(labels: tuple, model: LoopModel) -> list:
    """Dense ``Omega^{ab}`` as used by the engine: ``-sigma * inverse(Omega_{ab})``."""
    labels = tuple(sorted(labels))

    def omega(i, j):
        # block form: omega_{2i,2i+1} = -omega_{2i+1,2i} = 1
        if i % 2 == 0 and j == i + 1:
            return 1
        if j % 2 == 0 and i == j + 1:
            return -1
        return 0

    form = [[mpq(omega(a[1], b[1])) / (model.C * a[0] ** 2 + 1) if a[0] == b[0] else _ZERO
             for b in labels] for a in labels]
    inv = _invert(form)
    return [[-model.sigma * x for x in row] for row in inv]


def cotangent_matrix(labels: tuple, A: DiagonalOperator, prefactor=1, sigma: int = 1,
                     flip_symmetric: bool = False) -> list:
    """Dense ``prefactor * (sigma * Pi + S_A)``; ``flip_symmetric`` negates ``S_A`` (test fixture)."""
    labels = tuple(sorted(labels))
    # canonical form on H + H*: per mode [[0, 1], [-1, 0]] in (side 1, side 2)
    form = [[mpq((b[1] - a[1])) if a[0] == b[0] else _ZERO for b in labels] for a in labels]
    inv = _invert(form)
    sym = -1 if flip_symmetric else 1
    out = []
    for a, row in zip(labels, inv):
        new = []
        for b, x in zip(labels, row):
            s_ab = A(a[0]) if a[0] == b[0] and a[1] != b[1] else _ZERO
            new.append(exact(prefactor) * (-sigma * x + sym * s_ab))
        out.append(new)
    return out


def _exp_sum(u: DenseFockVector, v: DenseFockVector, l: int, matrix: list) -> DenseFockVector:
    """``(1/l!) sum over l-tuples of (a_j, b_j) of prod M^{a_j b_j} :(a_{a..} u)(a_{b..} v):``."""
    labels = u.labels
    pairs = [(a, b, matrix[i][j]) for i, a in enumerate(labels) for j, b in enumerate(labels)]
    out = DenseFockVector(labels, max(u.D + v.D - 2 * l, 0))
    acc = out.coeffs

    def walk(depth, left, right, weight):
        if weight == 0 or left.is_zero() or right.is_zero():
            return
        if depth == l:
            term = dense_wick(left, right).restrict(out.D).coeffs
            for p, c in enumerate(term):
                if c:
                    acc[p] += weight * c
            return
        for a, b, w in pairs:
            if w == 0:
                continue
            walk(depth + 1, dense_annihilate(left, a), dense_annihilate(right, b), weight * w)

    walk(0, u, v, mpq(1))
    return out.scale(mpq(1, math.factorial(l)))


def dense_bracket(u: DenseFockVector, v: DenseFockVector, matrix: list) -> DenseFockVector:
    return _exp_sum(u, v, 1, matrix)


def dense_p_l(u, v, l: int, model: LoopModel, prefactor) -> DenseFockVector:
    matrix = [[exact(prefactor) * x for x in row] for row in loop_poisson_matrix(u.labels, model)]
    return _exp_sum(u, v, l, matrix)


def dense_c_r_a(u, v, r: int, A: DiagonalOperator, prefactor=1, sigma: int = 1,
                flip_symmetric: bool = False) -> DenseFockVector:
    """Slot ``r`` of the perturbed product, ``C_r^A(u, v) / r!``."""
    return _exp_sum(u, v, r, cotangent_matrix(u.labels, A, prefactor, sigma, flip_symmetric))


def dense_t1(u: DenseFockVector, A: DiagonalOperator, sign: int = -1) -> DenseFockVector:
    out = DenseFockVector(u.labels, u.D - 2)
    for k in sorted({b[0] for b in u.labels}):
        lam = A(k)
        term = dense_annihilate(dense_annihilate(u, (k, 1)), (k, 2)).restrict(out.D)
        out = out.add(term.scale(sign * lam)).restrict(out.D)
    return out


def dense_wick_exp(xi: DenseFockVector, D: int) -> DenseFockVector:
    one = DenseFockVector(xi.labels, 0, [mpq(1)])
    total = one.restrict(D)
    power = one
    for m in range(1, D + 1):
        power = dense_wick(power, xi.restrict(1)).restrict(m)
        total = total.add(power.scale(mpq(1, math.factorial(m))).restrict(D)).restrict(D)
    return total


def oracle_eval(op_id: str, inputs: list, params: dict) -> DenseFockVector:
    """Dispatch an op by name on sparse inputs embedded in the oracle's bounded label set.

    ``params`` carries ``labels`` plus op-specific entries: ``label`` or
    ``sequence`` for annihilation, ``model`` for loop brackets, ``l``,
    ``prefactor``, ``A``, ``sigma``, ``sign``, ``D``, ``flip_symmetric``.
    """
    labels = tuple(sorted(params["labels"]))
    dense = [DenseFockVector.from_sparse(F, labels) for F in inputs]
    if op_id == "wick":
        return dense_wick(*dense)
    if op_id == "annihilate":
        seq = params.get("sequence") or [params["label"]]
        return dense_annihilate_seq(dense[0], seq)
    if op_id == "bracket":
        model = params.get("model")
        if model is not None:
            matrix = loop_poisson_matrix(labels, model)
        else:
            matrix = cotangent_matrix(labels, DiagonalOperator.zero(), 1, params.get("sigma", 1))
        return dense_bracket(dense[0], dense[1], matrix)
    if op_id == "p_l":
        return dense_p_l(dense[0], dense[1], params["l"], params["model"], params.get("prefactor", mpq(-1, 2)))
    if op_id == "c_r_a":
        return dense_c_r_a(dense[0], dense[1], params["l"], params["A"], params.get("prefactor", 1),
                           params.get("sigma", 1), params.get("flip_symmetric", False))
    if op_id == "t1":
        return dense_t1(dense[0], params["A"], params.get("sign", -1))
    if op_id == "wick_exp":
        return dense_wick_exp(dense[0], params["D"])
    raise ValueError(f"unknown oracle op {op_id!r}")
