"""Sparse Fock series and the Wick algebra.

A basis label is a pair of ints ``(k, i)``: frequency and direction in the loop
model, or mode and side (1 or 2) in the cotangent model.  A multiindex is the
multiplicity-compressed tuple ``(((k, i), m), ...)`` sorted by label, and a
series maps multiindices to coefficients with zeros never stored.

Normalization: ``:F^I F^J: = F^{I+J}`` with coefficient one and the
annihilation operator ``a_b`` sends ``F^I`` to ``m_b(I) F^{I-b}``.  Under this
convention the Wick algebra is the polynomial algebra in one commuting
variable per label and ``a_b`` is the partial derivative in that variable.
"""

from __future__ import annotations

import math
import os
from collections.abc import Iterable, Mapping
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations_with_replacement, compress

import numpy as np
from gmpy2 import mpq

from .scalar import DEFAULT_EPS, GaussianRational, Mode, ModeError, infer_mode, is_zero, to_mode

__all__ = [
    "Basis",
    "MultiIndex",
    "EMPTY",
    "FockSeries",
    "CanonicalError",
    "DegreeCapError",
    "mi",
    "degree",
    "union",
    "multiplicity",
    "remove_one",
    "canonicalize",
    "linear_combine",
    "wick_product",
    "wick_power",
    "annihilate",
    "annihilate_seq",
    "wick_exponential",
    "thread_count",
]

Basis = tuple  # (k, i)
MultiIndex = tuple  # (((k, i), m), ...)

EMPTY: MultiIndex = ()

# pair count above which FLOAT Wick products are split into fixed chunks
_CHUNK_PAIRS = 1 << 18
_CHUNK_ROWS = 64
_BULK_DECODE = 4096  # keys; above this, decode wide keys with numpy in blocks
_BULK_BLOCK = 1 << 14


class CanonicalError(ValueError):
    """Malformed or non-canonical multiindex or label."""


class DegreeCapError(ValueError):
    """A term exceeds the degree cap declared for its series."""


def _check_label(b, dimension=None, model=None) -> tuple:
    if not (isinstance(b, (tuple, list)) and len(b) == 2):
        raise CanonicalError(f"basis label must be a (k, i) pair, got {b!r}")
    k, i = b
    if not (isinstance(k, int) and isinstance(i, int)) or isinstance(k, bool) or isinstance(i, bool):
        raise CanonicalError(f"basis label entries must be ints, got {b!r}")
    if model == "cotangent":
        if i not in (1, 2):
            raise CanonicalError(f"cotangent side must be 1 or 2, got {b!r}")
        if k == 0:
            raise CanonicalError(f"cotangent mode must be nonzero, got {b!r}")
    elif i < 0 or (dimension is not None and i >= dimension):
        raise CanonicalError(f"direction index {i} out of range for dimension {dimension} in {b!r}")
    return (k, i)


def _counts(index_like, dimension=None, model=None) -> dict:
    """Multiplicity table of a loosely written multiindex.

    Accepts canonical ``((label, m), ...)``, flat label lists ``[(1, 0), (1, 0)]``
    and JSON-style triples ``[[k, i, m], ...]``.
    """
    counts: dict = {}
    if isinstance(index_like, (tuple, list)) and len(index_like) == 2:
        head, tail = index_like
        if isinstance(head, int) and isinstance(tail, int):
            index_like = [index_like]  # a bare label
        elif isinstance(head, (tuple, list)) and len(head) == 2 and isinstance(tail, int):
            index_like = [index_like]  # a bare (label, m) entry
    for item in index_like:
        if isinstance(item, (tuple, list)) and len(item) == 3:
            b, m = (item[0], item[1]), item[2]
        elif isinstance(item, (tuple, list)) and len(item) == 2 and isinstance(item[0], (tuple, list)):
            b, m = item
        else:
            b, m = item, 1
        b = _check_label(b, dimension, model)
        if not isinstance(m, int) or isinstance(m, bool) or m < 1:
            raise CanonicalError(f"multiplicity must be a positive int, got {m!r} for {b}")
        counts[b] = counts.get(b, 0) + m
    return counts


def mi(*labels) -> MultiIndex:
    """Canonical multiindex from labels, e.g. ``mi((1, 0), (1, 0), (2, 1))``."""
    return tuple(sorted(_counts(labels).items()))


def degree(I: MultiIndex) -> int:
    return sum(m for _, m in I)


def multiplicity(I: MultiIndex, b) -> int:
    for label, m in I:
        if label == b:
            return m
    return 0


def union(I: MultiIndex, J: MultiIndex) -> MultiIndex:
    """Multiset union (concatenation) of two canonical multiindices."""
    if not I:
        return J
    if not J:
        return I
    merged = dict(I)
    for b, m in J:
        merged[b] = merged.get(b, 0) + m
    return tuple(sorted(merged.items()))


def remove_one(I: MultiIndex, b):
    """Return ``(m, I - b)`` where ``m`` is the multiplicity of ``b``; ``(0, None)`` if absent."""
    for pos, (label, m) in enumerate(I):
        if label == b:
            if m == 1:
                return 1, I[:pos] + I[pos + 1:]
            return m, I[:pos] + ((label, m - 1),) + I[pos + 1:]
        if label > b:
            break
    return 0, None


def thread_count() -> int:
    """Worker cap from ``HIDA_STAR_THREADS`` (default: CPU count)."""
    raw = os.environ.get("HIDA_STAR_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


class FockSeries:
    """Immutable sparse series ``sum b_I F^I``.

    ``cap`` marks a truncated series: coefficients are known exactly through
    degree ``cap`` and nothing above it is stored.  ``None`` means the series is
    an exact polynomial.
    """

    __slots__ = ("_terms", "mode", "cap", "eps")

    def __init__(self, terms: Mapping | None = None, mode: Mode = Mode.EXACT, cap: int | None = None,
                 eps: float = DEFAULT_EPS):
        # terms must already be canonical; use canonicalize() for raw input
        self._terms = dict(terms) if terms else {}
        self.mode = Mode(mode)
        self.cap = cap
        self.eps = eps
        if cap is not None:
            for I in self._terms:
                if degree(I) > cap:
                    raise DegreeCapError(f"term {I} has degree {degree(I)} above cap {cap}")

    @classmethod
    def _raw(cls, terms: dict, mode: Mode, cap=None, eps=DEFAULT_EPS) -> FockSeries:
        out = object.__new__(cls)
        out._terms = terms
        out.mode = mode
        out.cap = cap
        out.eps = eps
        return out

    # constructors

    @classmethod
    def zero(cls, mode: Mode = Mode.EXACT) -> FockSeries:
        return cls._raw({}, Mode(mode))

    @classmethod
    def constant(cls, c=1, mode: Mode = Mode.EXACT) -> FockSeries:
        return cls.monomial(EMPTY, c, mode)

    @classmethod
    def monomial(cls, I, c=1, mode: Mode = Mode.EXACT) -> FockSeries:
        I = tuple(sorted(_counts(I).items()))
        mode = Mode(mode)
        c = to_mode(c, mode)
        if is_zero(c, mode):
            return cls.zero(mode)
        return cls._raw({I: c}, mode)

    @classmethod
    def basis(cls, label, c=1, mode: Mode = Mode.EXACT) -> FockSeries:
        """Degree-one series ``c * F^{(label)}``."""
        return cls.monomial([tuple(label)], c, mode)

    # mapping protocol

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __contains__(self, I) -> bool:
        return I in self._terms

    def __getitem__(self, I):
        return self._terms.get(I, 0)

    def items(self):
        return self._terms.items()

    def sorted_items(self) -> list:
        return sorted(self._terms.items())

    @property
    def terms(self) -> Mapping:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        """Top degree; ``-1`` for the zero series."""
        return max((degree(I) for I in self._terms), default=-1)

    def min_degree(self) -> int:
        return min((degree(I) for I in self._terms), default=0)

    def labels(self) -> set:
        return {b for I in self._terms for b, _ in I}

    def degrees(self) -> set:
        return {degree(I) for I in self._terms}

    def homogeneous(self, d: int) -> FockSeries:
        return FockSeries._raw({I: c for I, c in self._terms.items() if degree(I) == d}, self.mode,
                               eps=self.eps)

    def truncate(self, D: int) -> FockSeries:
        """Drop terms above degree ``D`` and mark the result as capped at ``D``."""
        cap = D if self.cap is None else min(D, self.cap)
        return FockSeries._raw({I: c for I, c in self._terms.items() if degree(I) <= cap}, self.mode,
                               cap, self.eps)

    def uncapped(self) -> FockSeries:
        return FockSeries._raw(self._terms, self.mode, None, self.eps)

    def max_abs(self) -> float:
        return max((abs(complex(c)) for c in self._terms.values()), default=0.0)

    # arithmetic

    def _prune(self, terms: dict, cap) -> FockSeries:
        if self.mode is Mode.EXACT:
            terms = {I: c for I, c in terms.items() if c != 0}
        else:
            eps = self.eps
            terms = {I: c for I, c in terms.items() if abs(c) > eps}
        return FockSeries._raw(terms, self.mode, cap, self.eps)

    def _coerce(self, c):
        return to_mode(c, self.mode)

    def scale(self, c) -> FockSeries:
        c = self._coerce(c)
        if is_zero(c, self.mode, self.eps):
            return FockSeries._raw({}, self.mode, self.cap, self.eps)
        return self._prune({I: c * v for I, v in self._terms.items()}, self.cap)

    def __add__(self, other):
        if not isinstance(other, FockSeries):
            return NotImplemented
        return linear_combine(1, self, 1, other)

    def __sub__(self, other):
        if not isinstance(other, FockSeries):
            return NotImplemented
        return linear_combine(1, self, -1, other)

    def __neg__(self):
        return FockSeries._raw({I: -c for I, c in self._terms.items()}, self.mode, self.cap, self.eps)

    def __mul__(self, other):
        if isinstance(other, FockSeries):
            return wick_product(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, FockSeries):
            return NotImplemented
        return self.mode is other.mode and self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        if not self._terms:
            return "FockSeries(0)"
        body = " + ".join(f"({c})*F{_fmt_index(I)}" for I, c in self.sorted_items()[:8])
        more = "" if len(self._terms) <= 8 else f" + ...[{len(self._terms) - 8} more]"
        return f"FockSeries({body}{more})"

    def allclose(self, other: FockSeries, tol: float = 1e-10) -> bool:
        return (self - other).max_abs() <= tol * max(1.0, self.max_abs(), other.max_abs())


def _fmt_index(I: MultiIndex) -> str:
    if not I:
        return "^∅"
    return "^{" + ",".join(f"{b}^{m}" if m > 1 else f"{b}" for b, m in I) + "}"


def _common_mode(*series: FockSeries) -> Mode:
    modes = {F.mode for F in series}
    if len(modes) != 1:
        raise ModeError(f"mixed scalar modes: {sorted(m.value for m in modes)}")
    return modes.pop()


def canonicalize(raw: Iterable, mode: Mode | None = None, *, dimension: int | None = None,
                 model: str | None = None, eps: float = DEFAULT_EPS) -> FockSeries:
    """Sort, merge and zero-prune ``(multiindex-like, scalar)`` pairs."""
    raw = list(raw.items() if isinstance(raw, Mapping) else raw)
    inferred = {m for _, c in raw if (m := infer_mode(c)) is not None}
    if len(inferred) > 1:
        raise ModeError("mixed EXACT and FLOAT scalars in one series")
    if mode is None:
        mode = inferred.pop() if inferred else Mode.EXACT
    mode = Mode(mode)
    if inferred and inferred != {mode}:
        raise ModeError(f"{inferred.pop().value} scalars in a {mode.value} series")
    acc: dict = {}
    for index_like, c in raw:
        I = tuple(sorted(_counts(index_like, dimension, model).items()))
        c = to_mode(c, mode)
        acc[I] = acc[I] + c if I in acc else c
    return FockSeries._raw({}, mode, None, eps)._prune(acc, None)


def linear_combine(alpha, F: FockSeries, beta, G: FockSeries) -> FockSeries:
    """``alpha F + beta G`` termwise.  The result cap is the smaller of the caps."""
    mode = _common_mode(F, G)
    alpha, beta = to_mode(alpha, mode), to_mode(beta, mode)
    acc = {I: alpha * c for I, c in F._terms.items()}
    for I, c in G._terms.items():
        acc[I] = acc[I] + beta * c if I in acc else beta * c
    caps = [s.cap for s in (F, G) if s.cap is not None]
    cap = min(caps) if caps else None
    if cap is not None:
        acc = {I: c for I, c in acc.items() if degree(I) <= cap}
    return F._prune(acc, cap)


def _product_cap(F: FockSeries, G: FockSeries, shift: int = 0):
    """Degree through which a bilinear degree-lowering-by-``shift`` product is exact."""
    bounds = []
    if F.cap is not None:
        bounds.append(F.cap + (G.min_degree() if G._terms else 0))
    if G.cap is not None:
        bounds.append(G.cap + (F.min_degree() if F._terms else 0))
    return min(bounds) - shift if bounds else None


class _Packer:
    """Kronecker packing of multiindices into ints over a fixed label set.

    With radix ``R`` larger than any multiplicity that can occur, multiset
    union becomes integer addition.  When multiplicities fit in a byte the
    radix is 256 and unpacking is a single ``int.to_bytes`` call.
    """

    __slots__ = ("labels", "pos", "radix", "powers", "nbytes")

    def __init__(self, labels, max_mult: int):
        self.labels = sorted(labels)
        self.pos = {b: p for p, b in enumerate(self.labels)}
        self.radix = 256 if max_mult < 256 else max_mult + 1
        self.powers = [self.radix ** p for p in range(len(self.labels))]
        self.nbytes = len(self.labels) if self.radix == 256 else 0

    def pack(self, I: MultiIndex) -> int:
        pos, powers = self.pos, self.powers
        return sum(m * powers[pos[b]] for b, m in I)

    def unpack(self, key: int) -> MultiIndex:
        labels = self.labels
        if self.nbytes:
            digits = key.to_bytes(self.nbytes, "little")
            return tuple(compress(zip(labels, digits), digits))
        out = []
        R = self.radix
        p = 0
        while key:
            key, m = divmod(key, R)
            if m:
                out.append((labels[p], m))
            p += 1
        return tuple(out)


_DECODE_MEMO: dict = {}
_DECODE_LIMIT = 1 << 21


def _decode_memo(labels: tuple) -> dict:
    memo = _DECODE_MEMO.get(labels)
    if memo is None:
        if sum(len(m) for m in _DECODE_MEMO.values()) > _DECODE_LIMIT or len(_DECODE_MEMO) > 64:
            _DECODE_MEMO.clear()
        memo = _DECODE_MEMO[labels] = {}
    elif len(memo) > _DECODE_LIMIT:
        memo.clear()
    return memo


def _convolve(fk: list, gk: list) -> dict:
    acc: dict = {}
    get = acc.get
    for kf, cf in fk:
        for kg, cg in gk:
            k = kf + kg
            acc[k] = get(k, 0) + cf * cg
    return acc


def _has_gaussian(*lists) -> bool:
    return any(type(c) is GaussianRational for ks in lists for _, c in ks)


def _split(ks: list) -> tuple:
    re, im = [], []
    for k, c in ks:
        if type(c) is GaussianRational:
            re.append((k, c.re))
            im.append((k, c.im))
        else:
            re.append((k, c))
    return re, im


def _convolve_gaussian(fk: list, gk: list) -> dict:
    # real and imaginary parts convolved separately keep the inner loop on mpq
    fr, fi = _split(fk)
    gr, gi = _split(gk)
    re = _convolve(fr, gr)
    for k, c in _convolve(fi, gi).items():
        re[k] = re.get(k, 0) - c
    im = _convolve(fr, gi)
    for k, c in _convolve(fi, gr).items():
        im[k] = im.get(k, 0) + c
    for k, c in im.items():
        if c:
            re[k] = GaussianRational(re.get(k, 0), c)
    return re


def wick_product(F: FockSeries, G: FockSeries) -> FockSeries:
    """Wick product: the coefficient of ``I`` sums ``b_{I1} c_{I2}`` over ``I1 + I2 = I``."""
    mode = _common_mode(F, G)
    cap = _product_cap(F, G)
    if not F._terms or not G._terms:
        return FockSeries._raw({}, mode, cap, F.eps)
    packer = _Packer(F.labels() | G.labels(), F.degree() + G.degree())
    fk = [(packer.pack(I), c) for I, c in F._terms.items()]
    gk = [(packer.pack(I), c) for I, c in G._terms.items()]
    if mode is Mode.FLOAT and len(fk) * len(gk) > _CHUNK_PAIRS:
        acc = _chunked_convolve(fk, gk)
    elif mode is Mode.EXACT and _has_gaussian(fk, gk):
        acc = _convolve_gaussian(fk, gk)
    else:
        acc = _convolve(fk, gk)
    if mode is Mode.EXACT:
        acc = {k: c for k, c in acc.items() if c}
    else:
        eps = F.eps
        acc = {k: c for k, c in acc.items() if abs(c) > eps}
    if packer.nbytes and len(acc) > _BULK_DECODE:
        keys = list(acc)
        terms = dict(zip(_bulk_decode(keys, packer.labels, packer.nbytes), acc.values()))
    elif packer.nbytes:
        # decoding keys dominates large products; decoded keys are memoized per label set
        labels, n = packer.labels, packer.nbytes
        memo = _decode_memo(tuple(labels))
        terms = {}
        for k, c in acc.items():
            I = memo.get(k)
            if I is None:
                digits = k.to_bytes(n, "little")
                I = memo[k] = tuple(compress(zip(labels, digits), digits))
            terms[I] = c
    else:
        unpack = packer.unpack
        terms = {unpack(k): c for k, c in acc.items()}
    if cap is not None:
        terms = {I: c for I, c in terms.items() if degree(I) <= cap}
    return FockSeries._raw(terms, mode, cap, F.eps)


def _bulk_decode(keys: list, labels: list, n: int) -> list:
    """Unpack radix-256 keys block by block; cost scales with nonzero digits, not with ``n``."""
    pairs = [(b, m) for b in labels for m in range(256)]
    out = []
    for s in range(0, len(keys), _BULK_BLOCK):
        block = keys[s:s + _BULK_BLOCK]
        digits = np.frombuffer(b"".join(k.to_bytes(n, "little") for k in block), dtype=np.uint8)
        digits = digits.reshape(len(block), n)
        rows, cols = np.nonzero(digits)
        flat = (cols * 256 + digits[rows, cols]).tolist()
        items = [pairs[x] for x in flat]
        ends = np.cumsum(np.bincount(rows, minlength=len(block))).tolist()
        start = 0
        for end in ends:
            out.append(tuple(items[start:end]))
            start = end
    return out


def _chunked_convolve(fk: list, gk: list) -> dict:
    # Chunk boundaries depend only on the input, and partial sums are merged in
    # chunk order, so FLOAT results do not depend on the worker count.
    chunks = [fk[s:s + _CHUNK_ROWS] for s in range(0, len(fk), _CHUNK_ROWS)]
    workers = min(thread_count(), len(chunks))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(lambda ch: _convolve(ch, gk), chunks))
    else:
        partials = [_convolve(ch, gk) for ch in chunks]
    acc = partials[0]
    for part in partials[1:]:
        for k, c in part.items():
            acc[k] = acc[k] + c if k in acc else c
    return acc


def wick_power(F: FockSeries, m: int) -> FockSeries:
    out = FockSeries.constant(1, F.mode)
    for _ in range(m):
        out = wick_product(out, F)
    return out


def annihilate(F: FockSeries, b) -> FockSeries:
    """``a_b F``: each term loses one copy of ``b`` and gains its multiplicity as a factor."""
    b = tuple(b)
    acc = {}
    for I, c in F._terms.items():
        m, J = remove_one(I, b)
        if m:
            acc[J] = c * m
    cap = None if F.cap is None else F.cap - 1
    return FockSeries._raw(acc, F.mode, cap, F.eps)


def annihilate_seq(F: FockSeries, seq: Iterable) -> FockSeries:
    """Apply ``a_{b_1}``, then ``a_{b_2}``, ... left to right."""
    for b in seq:
        F = annihilate(F, b)
        if not F._terms:
            break
    return F


def wick_exponential(xi: FockSeries, D: int) -> FockSeries:
    """Truncated Wick exponential ``sum_{m <= D} xi^{:m:} / m!`` of a degree-one series.

    The result is capped at ``D``; its coefficient on multiplicities ``(m_a)``
    is ``prod c_a^{m_a} / m_a!``.
    """
    if D < 0:
        raise ValueError("degree cap must be nonnegative")
    if any(degree(I) != 1 for I in xi):
        raise ValueError("wick_exponential needs a pure degree-one series")
    mode = xi.mode
    one = to_mode(1, mode)
    coeffs = sorted((I[0][0], c) for I, c in xi.items())
    terms = {EMPTY: one}
    for d in range(1, D + 1):
        for combo in combinations_with_replacement(range(len(coeffs)), d):
            counts: dict = {}
            for j in combo:
                counts[j] = counts.get(j, 0) + 1
            c = one
            for j, m in counts.items():
                c = c * coeffs[j][1] ** m
                c = c / math.factorial(m) if mode is Mode.FLOAT else c * mpq(1, math.factorial(m))
            terms[tuple((coeffs[j][0], m) for j, m in sorted(counts.items()))] = c
    return FockSeries._raw(terms, mode, None, xi.eps)._prune(terms, D)
