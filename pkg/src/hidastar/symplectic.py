"""Constant Poisson structures on Fock series.

Two models are provided.  ``LoopModel`` is the loop-space form: in each
frequency block the inverse form pairs direction ``2i`` with ``2i+1`` with entry
``sigma * (C k^2 + 1)``.  ``CotangentModel`` is the canonical structure on
``H + H*`` with labels ``(mode, side)``, side 1 for ``H`` and side 2 for ``H*``,
together with a diagonal operator ``A`` used by the perturbed products.

Brackets iterate only over labels present in the operands, so the unbounded
family of inverse-form entries never has to be enumerated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from gmpy2 import mpq

from .fock import FockSeries, annihilate, wick_product
from .scalar import ModeError, exact, to_mode

__all__ = [
    "ModelError",
    "LoopModel",
    "DiagonalOperator",
    "CotangentModel",
    "omega_inverse_entry",
    "poisson_bracket",
    "e_a_form",
    "c1a",
    "h_pairing",
    "pairing",
]


class ModelError(ValueError):
    """Operation called on the wrong model variant or with invalid model data."""


@dataclass(frozen=True)
class LoopModel:
    n: int = 2
    C: object = 1
    sigma: int = 1

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n <= 0 or self.n % 2:
            raise ModelError(f"loop dimension must be a positive even int, got {self.n!r}")
        object.__setattr__(self, "C", exact(self.C))
        if self.C <= 0:
            raise ModelError(f"C must be positive, got {self.C}")
        if self.sigma not in (1, -1):
            raise ModelError(f"sigma must be +1 or -1, got {self.sigma!r}")

    variant = "loop"

    def check_label(self, b) -> None:
        k, i = b
        if not 0 <= i < self.n:
            raise ModelError(f"direction {i} out of range for n={self.n}")

    def partner(self, b):
        """The unique label paired with ``b`` and the inverse-form entry ``Omega^{b, partner}``."""
        k, i = b
        block = self.sigma * (self.C * k * k + 1)
        if i % 2 == 0:
            return (k, i + 1), block
        return (k, i - 1), -block

    def with_sigma(self, sigma: int) -> LoopModel:
        return LoopModel(self.n, self.C, sigma)


@dataclass(frozen=True)
class DiagonalOperator:
    """``A gamma_n = lambda_n gamma_n`` with a declared bound ``|lambda_n| <= C |n|^alpha``.

    Eigenvalues come from an explicit ``table`` (modes not listed have
    eigenvalue zero) or from ``formula = (c, alpha)`` meaning ``c * n**alpha``.
    Without an explicit ``growth`` certificate the tightest one with the
    formula's exponent (or exponent 1 for tables) is recorded.
    """

    table: dict = field(default_factory=dict)
    formula: tuple | None = None
    growth: tuple | None = None

    def __post_init__(self):
        table = {int(n): exact(v) for n, v in self.table.items()}
        if any(n == 0 for n in table):
            raise ModelError("mode 0 is not a cotangent mode")
        object.__setattr__(self, "table", table)
        if self.growth is None:
            if self.formula is not None:
                auto = (abs(exact(self.formula[0])), self.formula[1])
            else:
                auto = (max((abs(v) / abs(n) for n, v in table.items()), default=mpq(0)), 1)
            object.__setattr__(self, "growth", auto)
        gc, galpha = exact(self.growth[0]), self.growth[1]
        if gc < 0 or not isinstance(galpha, int) or galpha < 0:
            raise ModelError(f"growth certificate must be (C >= 0, integer alpha >= 0), got {self.growth!r}")
        object.__setattr__(self, "growth", (gc, galpha))
        if self.formula is not None:
            c, alpha = exact(self.formula[0]), self.formula[1]
            if not isinstance(alpha, int) or alpha < 0:
                raise ModelError(f"formula exponent must be a nonnegative int, got {alpha!r}")
            object.__setattr__(self, "formula", (c, alpha))
            # |c n^alpha| <= C_g |n|^alpha_g for all n != 0 iff these hold
            if abs(c) > gc or (alpha > galpha and c != 0):
                raise ModelError(f"formula {c}*n^{alpha} violates growth bound {gc}*|n|^{galpha}")
        for n, lam in table.items():
            self._check_growth(n, lam)

    def _check_growth(self, n: int, lam) -> None:
        gc, galpha = self.growth
        if abs(lam) > gc * abs(n) ** galpha:
            raise ModelError(f"|lambda_{n}| = {abs(lam)} exceeds growth bound {gc}*|{n}|^{galpha}")

    @classmethod
    def zero(cls) -> DiagonalOperator:
        return cls({})

    def __call__(self, n: int):
        if self.formula is not None:
            c, alpha = self.formula
            return c * mpq(n) ** alpha
        return self.table.get(n, mpq(0))

    @cached_property
    def is_zero(self) -> bool:
        if self.formula is not None:
            return self.formula[0] == 0
        return all(v == 0 for v in self.table.values())

    def modes(self) -> list:
        """Modes with an explicitly stored eigenvalue (empty for formula operators)."""
        return sorted(self.table)

    def __hash__(self):
        return hash((tuple(sorted(self.table.items())), self.formula, self.growth))


@dataclass(frozen=True)
class CotangentModel:
    A: DiagonalOperator = field(default_factory=DiagonalOperator)
    sigma: int = 1

    variant = "cotangent"

    def __post_init__(self):
        if self.sigma not in (1, -1):
            raise ModelError(f"sigma must be +1 or -1, got {self.sigma!r}")

    def check_label(self, b) -> None:
        k, s = b
        if k == 0 or s not in (1, 2):
            raise ModelError(f"{b!r} is not a cotangent label (mode != 0, side 1 or 2)")

    def partner(self, b):
        k, s = b
        if s == 1:
            return (k, 2), self.sigma
        return (k, 1), -self.sigma


def omega_inverse_entry(a, b, model: LoopModel):
    """Entry ``Omega^{ab}`` of the inverse form: ``+-sigma (C k^2 + 1)`` on a block, else 0."""
    if not isinstance(model, LoopModel):
        raise ModelError("omega_inverse_entry needs a loop model")
    a, b = tuple(a), tuple(b)
    partner, value = model.partner(a)
    return value if partner == b else mpq(0)


def _bilinear_sum(F: FockSeries, G: FockSeries, pairs) -> FockSeries:
    """``sum w :(a_a F)(a_b G):`` over ``(a, b, w)`` triples."""
    if F.mode is not G.mode:
        raise ModeError(f"mixed scalar modes: {F.mode.value} and {G.mode.value}")
    out = None
    for a, b, w in pairs:
        Fa = annihilate(F, a)
        if Fa.is_zero():
            continue
        Gb = annihilate(G, b)
        if Gb.is_zero():
            continue
        term = wick_product(Fa, Gb).scale(to_mode(w, F.mode))
        out = term if out is None else out + term
    if out is None:
        caps = [s.cap - 1 for s in (F, G) if s.cap is not None]
        return FockSeries._raw({}, F.mode, min(caps) if caps else None, F.eps)
    return out


def poisson_bracket(F: FockSeries, G: FockSeries, model) -> FockSeries:
    """``{F, G} = sum Omega^{ab} :(a_a F)(a_b G):`` over labels occurring in ``F`` and ``G``.

    In the cotangent model the entries are ``+sigma`` for (side 1, side 2) and
    ``-sigma`` for (side 2, side 1) on the same mode.
    """
    g_labels = G.labels()
    pairs = []
    for a in sorted(F.labels()):
        model.check_label(a)
        b, w = model.partner(a)
        if b in g_labels:
            pairs.append((a, b, w))
    return _bilinear_sum(F, G, pairs)


def _operator(A) -> DiagonalOperator:
    if isinstance(A, CotangentModel):
        return A.A
    if isinstance(A, DiagonalOperator):
        return A
    raise ModelError(f"expected a cotangent model or diagonal operator, got {type(A).__name__}")


def e_a_form(F: FockSeries, G: FockSeries, A) -> FockSeries:
    """``E_A[F, G] = sum lambda_i (:a_i^1 F a_i^2 G: + :a_i^1 G a_i^2 F:)``."""
    A = _operator(A)
    check = CotangentModel().check_label
    for b in F.labels() | G.labels():
        check(b)
    f_labels, g_labels = F.labels(), G.labels()
    pairs = []
    for k in sorted({b[0] for b in f_labels | g_labels}):
        lam = A(k)
        if lam == 0:
            continue
        if (k, 1) in f_labels and (k, 2) in g_labels:
            pairs.append(((k, 1), (k, 2), lam))
        if (k, 2) in f_labels and (k, 1) in g_labels:
            pairs.append(((k, 2), (k, 1), lam))
    return _bilinear_sum(F, G, pairs)


def c1a(F: FockSeries, G: FockSeries, A) -> FockSeries:
    """First-order cochain ``C_1^A = {.,.} + E_A`` of the perturbed product."""
    model = A if isinstance(A, CotangentModel) else CotangentModel(_operator(A))
    return poisson_bracket(F, G, model) + e_a_form(F, G, model.A)


def pairing(u: FockSeries, v: FockSeries, A: DiagonalOperator | None = None, shift=1):
    """``sum_a u_a (lambda_a + shift) v_a`` over labels; ``A=None`` gives the plain pairing."""
    for s in (u, v):
        if any(len(I) != 1 or I[0][1] != 1 for I in s):
            raise ValueError("pairing needs pure degree-one series")
    mode = u.mode
    total = to_mode(0, mode)
    for I, c in u.items():
        d = v[I]
        if d == 0:
            continue
        weight = 1 if A is None else A(I[0][0][0]) + shift
        total = total + c * to_mode(weight, mode) * d
    return total


def h_pairing(u: FockSeries, v: FockSeries, A_plus_I: DiagonalOperator | None = None):
    """Coordinate pairing ``<u, v>_0``, twisted to ``<u, (A + I) v>_0`` when an operator is given."""
    return pairing(u, v, A_plus_I, 1)
