"""Star products as formal power series in h.

Every product here has the form ``F * G = mu(exp(h M)(F (x) G))`` for a
constant bivector ``M`` built from annihilation operators:

* the loop-space Hida star product, ``M = prefactor * Omega``;
* the perturbed cotangent product, ``M = prefactor * (sigma Pi + S_A)`` where
  ``Pi`` is the canonical bracket and ``S_A`` the symmetric ``E_A`` part.

``M^l`` is applied to a sparse table of basis tensor pairs ``(I, J)``; only
pairs in which some label of ``I`` meets its partner in ``J`` survive a step.
Truncated inputs (series with a degree cap) propagate exactness: slot ``l`` is
exact through ``cap_F + mindeg_G - 2l`` and the tensor table is pruned above it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from gmpy2 import mpq

from .fock import (
    FockSeries,
    _product_cap,
    degree,
    remove_one,
    union,
    wick_exponential,
    wick_product,
)
from .scalar import Mode, ModeError, exact, to_mode
from .symplectic import CotangentModel, DiagonalOperator, LoopModel, ModelError, pairing

__all__ = [
    "Convention",
    "PAPER",
    "BRACKET_NORMALIZED",
    "DeformationSeries",
    "LoopStar",
    "CotangentStar",
    "p_l",
    "star",
    "star_a",
    "t1",
    "t_prime",
    "d_star",
    "candidate_conventions",
    "gauge_equivalence_check",
    "exchange_rhs",
    "exchange_check",
]


@dataclass(frozen=True)
class Convention:
    """Constants the source formulas leave ambiguous.

    ``prefactor`` scales ``M`` (so ``P_l`` carries ``prefactor**l / l!``),
    ``bracket_sign`` is the sign of the canonical cotangent bracket and
    ``t1_sign`` the sign in ``T_1 = t1_sign * sum lambda_i a_i^1 a_i^2``.
    """

    prefactor: object = 1
    bracket_sign: int = 1
    t1_sign: int = -1

    def __post_init__(self):
        object.__setattr__(self, "prefactor", exact(self.prefactor))
        if self.prefactor == 0:
            raise ValueError("star prefactor must be nonzero")
        if self.bracket_sign not in (1, -1) or self.t1_sign not in (1, -1):
            raise ValueError("convention signs must be +1 or -1")

    def as_dict(self) -> dict:
        return {"prefactor": str(self.prefactor), "bracket_sign": self.bracket_sign, "t1_sign": self.t1_sign}

    @classmethod
    def from_dict(cls, doc: dict) -> Convention:
        return cls(exact(str(doc["prefactor"])), int(doc["bracket_sign"]), int(doc["t1_sign"]))

    def as_tuple(self) -> tuple:
        return (self.prefactor, self.bracket_sign, self.t1_sign)


PAPER = Convention(mpq(-1, 2), 1, -1)
BRACKET_NORMALIZED = Convention(1, 1, -1)


def candidate_conventions() -> list:
    """The finite set searched by calibration."""
    return [Convention(p, s, t) for p in (mpq(1), mpq(-1), mpq(1, 2), mpq(-1, 2)) for s in (1, -1)
            for t in (1, -1)]


@dataclass(frozen=True)
class DeformationSeries:
    """``sum_{l <= L} h^l slots[l]``, truncated at order ``L = len(slots) - 1``."""

    slots: tuple
    convention: Convention | None = None

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(self.slots))
        if not self.slots:
            raise ValueError("a deformation series needs at least slot 0")
        modes = {s.mode for s in self.slots}
        if len(modes) != 1:
            raise ValueError("all slots must share one scalar mode")

    @classmethod
    def embed(cls, F: FockSeries, L: int, convention: Convention | None = None) -> DeformationSeries:
        zero = FockSeries._raw({}, F.mode, None, F.eps)
        return cls((F,) + (zero,) * L, convention)

    @property
    def order(self) -> int:
        return len(self.slots) - 1

    @property
    def mode(self) -> Mode:
        return self.slots[0].mode

    @property
    def exact_degree(self):
        """Degree through which every slot is exact; ``None`` when no slot is truncated."""
        caps = [s.cap for s in self.slots if s.cap is not None]
        return min(caps) if caps else None

    def __getitem__(self, l: int) -> FockSeries:
        return self.slots[l]

    def __len__(self) -> int:
        return len(self.slots)

    def __iter__(self):
        return iter(self.slots)

    def __sub__(self, other: DeformationSeries) -> DeformationSeries:
        _check_orders(self, other)
        return DeformationSeries(tuple(a - b for a, b in zip(self.slots, other.slots)), self.convention)

    def __add__(self, other: DeformationSeries) -> DeformationSeries:
        _check_orders(self, other)
        return DeformationSeries(tuple(a + b for a, b in zip(self.slots, other.slots)), self.convention)

    def __eq__(self, other):
        if not isinstance(other, DeformationSeries):
            return NotImplemented
        return self.slots == other.slots

    __hash__ = None

    def truncate(self, D: int) -> DeformationSeries:
        return DeformationSeries(tuple(s.truncate(D) for s in self.slots), self.convention)

    def is_zero(self) -> bool:
        return all(s.is_zero() for s in self.slots)


def _check_orders(X: DeformationSeries, Y: DeformationSeries) -> None:
    if X.order != Y.order:
        raise ValueError(f"order mismatch: {X.order} vs {Y.order}")
    if X.mode is not Y.mode:
        raise ValueError(f"mode mismatch: {X.mode.value} vs {Y.mode.value}")


def _same_mode(F: FockSeries, G: FockSeries) -> None:
    if F.mode is not G.mode:
        raise ModeError(f"mixed scalar modes: {F.mode.value} and {G.mode.value}")


class _Bivector:
    """Partner table ``a -> ((b, M^{ab}), ...)`` of a constant bivector, memoized per label."""

    def __init__(self, rule, mode: Mode):
        self._rule = rule
        self._mode = mode
        self._memo: dict = {}

    def __call__(self, a):
        got = self._memo.get(a)
        if got is None:
            got = tuple((b, to_mode(w, self._mode)) for b, w in self._rule(a) if w != 0)
            self._memo[a] = got
        return got


def _exp_bidiff(F: FockSeries, G: FockSeries, L: int, M: _Bivector) -> list:
    """Slots ``mu(M^l (F (x) G)) / l!`` for ``l = 0..L``."""
    mode = F.mode
    slots = [wick_product(F, G)]
    if L == 0 or F.is_zero() or G.is_zero():
        cap0 = _product_cap(F, G)
        return slots + [FockSeries._raw({}, mode, None if cap0 is None else cap0 - 2 * l, F.eps)
                        for l in range(1, L + 1)]
    cap0 = _product_cap(F, G)

    # first step straight from F (x) G through an index of G by label
    by_label: dict = {}
    for J, c in G.items():
        for b, m in J:
            by_label.setdefault(b, []).append((J, m, c))
    tensor: dict = {}
    limit = None if cap0 is None else cap0 - 2
    for I, cf in F.items():
        for a, ma in I:
            partners = M(a)
            if not partners:
                continue
            Ia = remove_one(I, a)[1]
            for b, w in partners:
                for J, mb, cg in by_label.get(b, ()):
                    Jb = remove_one(J, b)[1]
                    if limit is not None and degree(Ia) + degree(Jb) > limit:
                        continue
                    key = (Ia, Jb)
                    val = cf * cg * w * (ma * mb)
                    tensor[key] = tensor[key] + val if key in tensor else val

    for l in range(1, L + 1):
        cap = None if cap0 is None else cap0 - 2 * l
        inv = mpq(1, math.factorial(l)) if mode is Mode.EXACT else 1.0 / math.factorial(l)
        acc: dict = {}
        for (I, J), c in tensor.items():
            K = union(I, J)
            acc[K] = acc[K] + c if K in acc else c
        slots.append(FockSeries._raw({}, mode, cap, F.eps)._prune({K: c * inv for K, c in acc.items()}, cap))
        if l == L:
            break
        nxt: dict = {}
        limit = None if cap is None else cap - 2
        for (I, J), c in tensor.items():
            Jd = dict(J)
            for a, ma in I:
                for b, w in M(a):
                    mb = Jd.get(b)
                    if not mb:
                        continue
                    Ia, Jb = remove_one(I, a)[1], remove_one(J, b)[1]
                    if limit is not None and degree(Ia) + degree(Jb) > limit:
                        continue
                    key = (Ia, Jb)
                    val = c * w * (ma * mb)
                    nxt[key] = nxt[key] + val if key in nxt else val
        tensor = {k: v for k, v in nxt.items() if v != 0}
    return slots


class LoopStar:
    """Hida star product on the loop model under a convention (``P_l`` scaled by ``prefactor**l / l!``)."""

    def __init__(self, model: LoopModel, convention: Convention = PAPER):
        if not isinstance(model, LoopModel):
            raise ModelError("the Hida star product needs a loop model; use star_a for the cotangent model")
        self.model = model
        self.convention = convention

    def bivector(self, mode: Mode) -> _Bivector:
        lam, partner = self.convention.prefactor, self.model.partner

        def rule(a):
            b, w = partner(a)
            return ((b, lam * w),)

        return _Bivector(rule, mode)

    def slots(self, F: FockSeries, G: FockSeries, L: int) -> list:
        _same_mode(F, G)
        for b in F.labels() | G.labels():
            self.model.check_label(b)
        return _exp_bidiff(F, G, L, self.bivector(F.mode))


class CotangentStar:
    """Perturbed product ``*_h^A``: slot ``r`` is ``C_r^A / r!`` with ``C_1^A = {.,.} + E_A``.

    With ``A = 0`` this is the unperturbed product ``*_h`` of the cotangent model.
    """

    def __init__(self, A: DiagonalOperator, convention: Convention = BRACKET_NORMALIZED, *,
                 flip_symmetric: bool = False):
        if isinstance(A, CotangentModel):
            A = A.A
        if not isinstance(A, DiagonalOperator):
            raise ModelError("star_a needs a diagonal operator on the cotangent model")
        self.A = A
        self.convention = convention
        self._sym_sign = -1 if flip_symmetric else 1

    def bivector(self, mode: Mode) -> _Bivector:
        lam, sigma, A, sym = self.convention.prefactor, self.convention.bracket_sign, self.A, self._sym_sign

        def rule(a):
            k, s = a
            ev = sym * A(k)
            if s == 1:
                return (((k, 2), lam * (sigma + ev)),)
            return (((k, 1), lam * (ev - sigma)),)

        return _Bivector(rule, mode)

    def slots(self, F: FockSeries, G: FockSeries, L: int) -> list:
        check = CotangentModel().check_label
        for b in F.labels() | G.labels():
            check(b)
        _same_mode(F, G)
        return _exp_bidiff(F, G, L, self.bivector(F.mode))


def p_l(F: FockSeries, G: FockSeries, l: int, model: LoopModel, convention: Convention = PAPER) -> FockSeries:
    """Order-``l`` cochain of the Hida star product."""
    return LoopStar(model, convention).slots(F, G, l)[l]


def star(F: FockSeries, G: FockSeries, L: int, model: LoopModel,
         convention: Convention = PAPER) -> DeformationSeries:
    return DeformationSeries(LoopStar(model, convention).slots(F, G, L), convention)


def star_a(F: FockSeries, G: FockSeries, L: int, A: DiagonalOperator,
           convention: Convention = BRACKET_NORMALIZED) -> DeformationSeries:
    return DeformationSeries(CotangentStar(A, convention).slots(F, G, L), convention)


def _operator(A) -> DiagonalOperator:
    if isinstance(A, CotangentModel):
        return A.A
    if isinstance(A, DiagonalOperator):
        return A
    raise ModelError("T_1 is defined on the cotangent model only")


def t1(F: FockSeries, A: DiagonalOperator, sign: int = -1) -> FockSeries:
    """``T_1 F = sign * sum_i lambda_i a_i^1 a_i^2 F`` (the source formula has ``sign = -1``)."""
    A = _operator(A)
    check = CotangentModel().check_label
    acc: dict = {}
    for I, c in F.items():
        for b, _ in I:
            check(b)
        for (k, s), m1 in I:
            if s != 1:
                continue
            lam = A(k)
            if lam == 0:
                continue
            m2, J = remove_one(I, (k, 2))
            if not m2:
                continue
            J = remove_one(J, (k, 1))[1]
            val = c * to_mode(sign * lam * (m1 * m2), F.mode)
            acc[J] = acc[J] + val if J in acc else val
    cap = None if F.cap is None else F.cap - 2
    return FockSeries._raw({}, F.mode, cap, F.eps)._prune(acc, cap)


def t_prime(X, A: DiagonalOperator, L: int | None = None, sign: int = -1) -> DeformationSeries:
    """``T' = exp(h T_1)`` applied to a series (embedded at order ``L``) or a deformation series."""
    if isinstance(X, FockSeries):
        if L is None:
            raise ValueError("order L is required for a plain series")
        X = DeformationSeries.embed(X, L)
    L = X.order
    mode = X.mode
    out = []
    for m in range(L + 1):
        total = None
        for p in range(m + 1):
            term = X[p]
            for _ in range(m - p):
                term = t1(term, A, sign)
            q = m - p
            if q:
                term = term.scale(mpq(1, math.factorial(q)) if mode is Mode.EXACT else 1.0 / math.factorial(q))
            total = term if total is None else total + term
        out.append(total)
    return DeformationSeries(out, X.convention)


def d_star(X: DeformationSeries, Y: DeformationSeries, product) -> DeformationSeries:
    """h-bilinear extension: slot ``m`` sums ``P_l(X_p, Y_q)`` over ``p + q + l = m``."""
    _check_orders(X, Y)
    L = X.order
    acc = [None] * (L + 1)
    for p in range(L + 1):
        for q in range(L + 1 - p):
            for l, s in enumerate(product.slots(X[p], Y[q], L - p - q)):
                m = p + q + l
                acc[m] = s if acc[m] is None else acc[m] + s
    return DeformationSeries(acc, getattr(product, "convention", None))


# identity checks


def _residual_report(identity: str, R: DeformationSeries, convention: Convention | None, **extra) -> dict:
    per_slot = [s.max_abs() for s in R]
    if R.mode is Mode.EXACT:
        passed = R.is_zero()
    else:
        passed = all(r <= 1e-10 for r in per_slot)
    report = {
        "identity": identity,
        "max_residual_per_slot": per_slot,
        "convention": None if convention is None else convention.as_dict(),
        "exact": R.mode is Mode.EXACT,
        "exact_degree": R.exact_degree,
        "passed": passed,
    }
    report.update(extra)
    return report


def _float_scaled(R: DeformationSeries, *inputs: FockSeries) -> DeformationSeries:
    if R.mode is Mode.EXACT:
        return R
    scale = max([1.0] + [F.max_abs() for F in inputs])
    return DeformationSeries(tuple(s.scale(1.0 / scale) for s in R), R.convention)


def gauge_equivalence_check(F: FockSeries, G: FockSeries, A: DiagonalOperator, L: int,
                            convention: Convention | None = None) -> dict:
    """Residual of ``T'(F *_h^A G) - (T'F) *_h (T'G)`` slot by slot.

    ``*_h`` is the cotangent product with ``A = 0`` under the same convention.
    Without an explicit convention the calibrated one for ``A`` is used.
    """
    A = _operator(A)
    if convention is None:
        from .calibrate import calibrated_convention
        convention = calibrated_convention(A)
    sign = convention.t1_sign
    lhs = t_prime(star_a(F, G, L, A, convention), A, sign=sign)
    rhs = d_star(t_prime(F, A, L, sign), t_prime(G, A, L, sign), CotangentStar(DiagonalOperator.zero(), convention))
    R = _float_scaled(lhs - rhs, F, G)
    return _residual_report("gauge", R, convention, order=L)


def _side(u: FockSeries, side: int, name: str) -> None:
    for I in u:
        if len(I) != 1 or I[0][1] != 1:
            raise ValueError(f"direction {name} must be a pure degree-one series")
        if I[0][0][1] != side or I[0][0][0] == 0:
            raise ValueError(f"direction {name} must live on side {side} with nonzero modes")


def _to_side(u: FockSeries, side: int) -> FockSeries:
    return FockSeries._raw({(((I[0][0][0], side), 1),): c for I, c in u.items()}, u.mode, None, u.eps)


def exchange_exponent(g1, g2, gp1, gp2, A: DiagonalOperator, convention: Convention, form: str = "paper"):
    """Scalar ``s`` in ``Phi * Phi' = exp(h s) Phi_{sum}``.

    ``form="paper"`` is the formula as quoted,
    ``<g2', (A+I) g1>_0 + <g2, (A+I) g1'>_0``.  ``form="calibrated"`` is the
    exponent the cotangent product actually produces under ``convention``,
    ``prefactor * (<g2', (A + sigma) g1>_0 + <g2, (A - sigma) g1'>_0)``.
    """
    # pair H* coordinates against H coordinates mode by mode
    gp2_h, g2_h = _to_side(gp2, 1), _to_side(g2, 1)
    if form == "paper":
        return pairing(gp2_h, g1, A, 1) + pairing(g2_h, gp1, A, 1)
    if form == "calibrated":
        s = convention.bracket_sign
        total = pairing(gp2_h, g1, A, s) + pairing(g2_h, gp1, A, -s)
        return total * to_mode(convention.prefactor, g1.mode)
    raise ValueError(f"unknown exchange form {form!r}")


def exchange_rhs(g1, g2, gp1, gp2, A: DiagonalOperator, D: int, L: int, convention: Convention,
                 form: str = "paper") -> DeformationSeries:
    s = exchange_exponent(g1, g2, gp1, gp2, A, convention, form)
    phi = wick_exponential(g1 + gp1 + g2 + gp2, D)
    mode = phi.mode
    out, power = [], to_mode(1, mode)
    for m in range(L + 1):
        inv = mpq(1, math.factorial(m)) if mode is Mode.EXACT else 1.0 / math.factorial(m)
        out.append(phi.scale(power * to_mode(inv, mode)))
        power = power * s
    return DeformationSeries(out, convention)


def exchange_check(g1: FockSeries, g2: FockSeries, gp1: FockSeries, gp2: FockSeries, A: DiagonalOperator,
                   D: int, L: int, convention: Convention | None = None, form: str = "paper") -> dict:
    """Compare ``Phi_{g1,g2} *_h^A Phi_{g1',g2'}`` with the exponential exchange formula.

    ``g1, g1'`` are side-1 (``H``) directions and ``g2, g2'`` side-2 (``H*``)
    directions.  Both Wick exponentials are truncated at degree ``D + 2L`` so
    every slot up to ``L`` is exact through degree ``D``; the comparison is made
    through degree ``D``.
    """
    A = _operator(A)
    for u, side, name in ((g1, 1, "g1"), (gp1, 1, "g1'"), (g2, 2, "g2"), (gp2, 2, "g2'")):
        _side(u, side, name)
    if convention is None:
        from .calibrate import calibrated_convention
        convention = calibrated_convention(A)
    top = D + 2 * L
    phi = wick_exponential(g1 + g2, top)
    phi_p = wick_exponential(gp1 + gp2, top)
    lhs = star_a(phi, phi_p, L, A, convention)
    if lhs.exact_degree is None or lhs.exact_degree < D:
        raise AssertionError("truncation bookkeeping lost exactness below the comparison degree")
    rhs = exchange_rhs(g1, g2, gp1, gp2, A, D, L, convention, form)
    R = _float_scaled(lhs.truncate(D) - rhs, phi, phi_p)
    return _residual_report("exchange", R, convention, order=L, degree=D, form=form,
                            exponent=str(exchange_exponent(g1, g2, gp1, gp2, A, convention, form)))
