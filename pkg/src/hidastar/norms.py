"""Hida weights, weighted norms, nuclearity sums and continuity probes.

All arithmetic here is floating point: the weight ``(C1 k^2 + 1)^{r/2}`` is
irrational in general.  :func:`hida_weight_squared` gives the exact square for
integer ``r`` as a cross-check path.

Per-mode factors.  For parameters ``p = (r, C, C1)`` a single label with
frequency ``k`` contributes ``x_p(k) = C * (C1 k^2 + 1)^{-r/2}``, so that
``w_r(I)^{-1} C^{|I|} = prod x_p(k)^{m}`` over the entries of ``I``.  Sums over
all multiindices of such products are complete homogeneous symmetric sums in
the ``x`` values, which is what :func:`geometric_report` evaluates.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from gmpy2 import mpq

from .fock import FockSeries, MultiIndex, thread_count
from .scalar import Mode, exact
from .star import PAPER, Convention, p_l
from .symplectic import CotangentModel, DiagonalOperator, LoopModel, e_a_form, poisson_bracket

__all__ = [
    "NormParams",
    "hida_weight",
    "hida_weight_squared",
    "hida_norm",
    "mode_factor",
    "geometric_report",
    "nuclearity_sum",
    "hs_embedding_norm",
    "ProbeReport",
    "sample_series",
    "continuity_probe",
]


@dataclass(frozen=True)
class NormParams:
    r: float
    C: float
    C1: float = 1.0

    def __post_init__(self):
        if self.r < 0:
            raise ValueError(f"r must be >= 0, got {self.r}")
        if self.C <= 0 or self.C1 <= 0:
            raise ValueError(f"C and C1 must be positive, got C={self.C}, C1={self.C1}")

    def as_dict(self) -> dict:
        return {"r": float(self.r), "C": float(self.C), "C1": float(self.C1)}


def _label_weight(k: int, p: NormParams) -> float:
    return (p.C1 * k * k + 1) ** (p.r / 2)


def hida_weight(I: MultiIndex, p: NormParams) -> float:
    """``w_r(I) = prod (sqrt(C1 k^2 + 1))^r`` over the entries of ``I`` with multiplicity."""
    w = 1.0
    for (k, _), m in I:
        w *= _label_weight(k, p) ** m
    return w


def hida_weight_squared(I: MultiIndex, r: int, C1=1):
    """Exact ``w_r(I)^2 = prod (C1 k^2 + 1)^{r m}`` for integer ``r``."""
    if not isinstance(r, int) or r < 0:
        raise ValueError("exact weights need a nonnegative integer r")
    C1 = exact(C1)
    out = mpq(1)
    for (k, _), m in I:
        out *= (C1 * k * k + 1) ** (r * m)
    return out


def hida_norm(F: FockSeries, p: NormParams) -> float:
    """``||F||_{r,C} = sqrt(sum |b_I|^2 w_r(I) C^{|I|})``."""
    total = math.fsum(
        abs(complex(c)) ** 2 * hida_weight(I, p) * p.C ** sum(m for _, m in I) for I, c in F.sorted_items()
    )
    return math.sqrt(total)


def mode_factor(k: int, p: NormParams) -> float:
    return p.C / _label_weight(k, p)


def _direct_sums(xs: list, Dmax: int) -> list:
    """``h_d(x)`` for ``d <= Dmax`` by adding one label at a time and enumerating its multiplicity."""
    h = [1.0] + [0.0] * Dmax
    for x in xs:
        powers = [x ** m for m in range(Dmax + 1)]
        h = [math.fsum(powers[m] * h[d - m] for m in range(d + 1)) for d in range(Dmax + 1)]
    return h


def _newton_sums(xs: list, Dmax: int) -> list:
    """Degree coefficients of ``prod (1 - x)^{-1}`` from power sums (Newton's identities)."""
    power_sums = [0.0] + [math.fsum(x ** j for x in xs) for j in range(1, Dmax + 1)]
    h = [1.0]
    for d in range(1, Dmax + 1):
        h.append(math.fsum(power_sums[j] * h[d - j] for j in range(1, d + 1)) / d)
    return h


def geometric_report(xs: list, Dmax: int) -> dict:
    """``sum_I prod x^m`` over multiindices of degree ``<= Dmax`` on the given per-label factors.

    ``direct`` adds the terms label by label; ``closed_form`` is the same
    truncation of ``prod (1 - x)^{-1}`` extracted from its power sums;
    ``closed_form_full`` is the untruncated product.
    """
    bad = [i for i, x in enumerate(xs) if x >= 1]
    if bad:
        return {"summable": False, "reason": f"per-mode factor {xs[bad[0]]} >= 1", "direct": None,
                "closed_form": None, "closed_form_full": math.inf}
    direct = _direct_sums(xs, Dmax)
    closed = _newton_sums(xs, Dmax)
    full = math.exp(-math.fsum(math.log1p(-x) for x in xs))
    return {
        "summable": True,
        "direct": math.fsum(direct),
        "closed_form": math.fsum(closed),
        "closed_form_full": full,
        "by_degree": direct,
    }


def _labels(kmax: int, n: int) -> list:
    return [(k, i) for k in range(-kmax, kmax + 1) for i in range(n)]


def _tail(rate: float, scale: float, r_eff: float, C1: float, kmax: int, n: int) -> dict:
    """Integral bound on ``sum_{|k| > kmax} scale * (C1 k^2 + 1)^{-r_eff/2}`` over ``n`` directions.

    ``sum_{k > kmax} (C1 k^2 + 1)^{-r/2} <= int_kmax^inf (C1 t^2)^{-r/2} dt
    = C1^{-r/2} kmax^{1-r} / (r - 1)`` for ``r > 1``; both signs of ``k`` count.
    """
    formula = "2 n s C1^(-r/2) kmax^(1-r) / (r-1)"
    if r_eff <= 1 or kmax < 1:
        return {"mode_sum": math.inf, "max_factor": None, "formula": formula}
    s = 2 * n * scale * C1 ** (-r_eff / 2) * kmax ** (1 - r_eff) / (r_eff - 1)
    return {"mode_sum": s, "max_factor": rate, "formula": formula}


def _with_tail(report: dict, tail: dict) -> dict:
    report["tail"] = tail
    full, S, xmax = report["closed_form_full"], tail["mode_sum"], tail["max_factor"]
    if not report["summable"] or math.isinf(S) or xmax is None or xmax >= 1:
        report["summable"] = False
        report.setdefault("reason", "tail sum diverges")
        report["tail_bound"] = math.inf
        report["total"] = math.inf
        return report
    # prod_{tail} (1 - x)^{-1} <= exp(sum x / (1 - xmax))
    report["tail_bound"] = full * math.expm1(S / (1 - xmax))
    report["total"] = full + report["tail_bound"]
    return report


def nuclearity_sum(p: NormParams, kmax: int, n: int, Dmax: int) -> dict:
    """Truncated ``sum_I w_r(I)^{-1} C^{|I|}`` over ``|k| <= kmax``, ``n`` directions, degree ``<= Dmax``."""
    xs = [mode_factor(k, p) for k, _ in _labels(kmax, n)]
    report = geometric_report(xs, Dmax)
    report["params"] = {**p.as_dict(), "kmax": kmax, "n": n, "Dmax": Dmax}
    tail = _tail(mode_factor(kmax + 1, p), p.C, p.r, p.C1, kmax, n)
    return _with_tail(report, tail)


def hs_embedding_norm(source: NormParams, target: NormParams, kmax: int, n: int, Dmax: int) -> dict:
    """Squared Hilbert-Schmidt sum for the per-label ratio ``x_target(k) / x_source(k)``.

    With ``source = (0, 1)`` this is :func:`nuclearity_sum` of ``target``.  The
    two parameter sets must share ``C1``.
    """
    if source.C1 != target.C1:
        raise ValueError("source and target must share C1")
    xs = [mode_factor(k, target) / mode_factor(k, source) for k, _ in _labels(kmax, n)]
    report = geometric_report(xs, Dmax)
    report["params"] = {"source": source.as_dict(), "target": target.as_dict(), "kmax": kmax, "n": n,
                        "Dmax": Dmax}
    r_eff = target.r - source.r
    rate = mode_factor(kmax + 1, target) / mode_factor(kmax + 1, source)
    tail = _tail(rate, target.C / source.C, r_eff, target.C1, kmax, n)
    return _with_tail(report, tail)


# continuity probes

_QUANTILES = (0.0, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0)


@dataclass
class ProbeReport:
    op: str
    seed: int
    count: int
    skipped: int
    target: dict
    source: dict
    K_hat: float
    quantiles: dict
    mean: float
    sampling: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def sample_series(rng: np.random.Generator, labels: list, degree_cap: int, term_cap: int, source: NormParams,
                  denominator: int = 4) -> FockSeries:
    """Random FLOAT series: numerators uniform in ``[-q, q]`` over ``q``, scaled by ``(w C^{|I|})^{-1/2}``."""
    terms = {}
    for _ in range(int(rng.integers(1, term_cap + 1))):
        d = int(rng.integers(0, degree_cap + 1))
        counts: dict = {}
        for j in rng.integers(0, len(labels), size=d):
            b = labels[int(j)]
            counts[b] = counts.get(b, 0) + 1
        I = tuple(sorted(counts.items()))
        c = int(rng.integers(-denominator, denominator + 1)) / denominator
        envelope = 1.0 / math.sqrt(hida_weight(I, source) * source.C ** d)
        terms[I] = terms.get(I, 0.0) + c * envelope
    return FockSeries(terms, Mode.FLOAT)


def _op(name: str, model, l: int, convention: Convention):
    if name == "bracket":
        return lambda F, G: poisson_bracket(F, G, model)
    if name == "p_l":
        return lambda F, G: p_l(F, G, l, model, convention)
    if name == "e_a_form":
        return lambda F, G: e_a_form(F, G, model.A)
    raise ValueError(f"unknown probe op {name!r}")


def continuity_probe(op: str, target: NormParams, source: NormParams, *, count: int = 500, seed: int = 0,
                     degree_cap: int = 4, term_cap: int = 6, kmax: int = 3, model=None, l: int = 1,
                     convention: Convention = PAPER, partitions: int = 1) -> ProbeReport:
    """Empirical ``max ||op(F, G)||_target / (||F||_source ||G||_source)`` over seeded random pairs.

    Sample ``j`` draws from ``default_rng([seed, j])``, so the result does not
    depend on how the sample is split into ``partitions``.  This estimates a
    continuity constant on a finite family; it certifies nothing.
    """
    if model is None:
        model = CotangentModel(DiagonalOperator(formula=(1, 1))) if op == "e_a_form" else LoopModel()
    if isinstance(model, CotangentModel):
        labels = [(k, s) for k in range(-kmax, kmax + 1) if k for s in (1, 2)]
    else:
        labels = _labels(kmax, model.n)
    fn = _op(op, model, l, convention)

    def run(js: range) -> list:
        out = []
        for j in js:
            rng = np.random.default_rng([seed, j])
            F = sample_series(rng, labels, degree_cap, term_cap, source)
            G = sample_series(rng, labels, degree_cap, term_cap, source)
            den = hida_norm(F, source) * hida_norm(G, source)
            out.append(None if den == 0 else hida_norm(fn(F, G), target) / den)
        return out

    bounds = np.linspace(0, count, max(partitions, 1) + 1).astype(int)
    chunks = [range(a, b) for a, b in zip(bounds[:-1], bounds[1:])]
    with ThreadPoolExecutor(max_workers=max(1, min(len(chunks), thread_count()))) as pool:
        results = [r for chunk in pool.map(run, chunks) for r in chunk]
    ratios = np.array([r for r in results if r is not None], dtype=float)
    skipped = len(results) - len(ratios)
    if len(ratios):
        qs = {str(q): float(v) for q, v in zip(_QUANTILES, np.quantile(ratios, _QUANTILES))}
        K_hat, mean = float(ratios.max()), math.fsum(ratios) / len(ratios)
    else:
        qs, K_hat, mean = {}, 0.0, 0.0
    sampling = {"degree_cap": degree_cap, "term_cap": term_cap, "kmax": kmax, "coefficients": "k/4, k in [-4, 4]",
                "envelope": "(w_source(I) C_source^|I|)^(-1/2)"}
    if op == "p_l":
        sampling["l"] = l
        sampling["convention"] = convention.as_dict()
    return ProbeReport(op, seed, count, skipped, target.as_dict(), source.as_dict(), K_hat, qs, mean, sampling)
