"""JSON documents for series, models, deformation series and conventions.

Rationals are written as ``"p/q"`` strings; readers also accept the Unicode
minus sign.  Series readers insist on canonical index lists (labels strictly
increasing, multiplicities >= 1, no repeated multiindex) and name the
offending term otherwise.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .fock import CanonicalError, FockSeries, _check_label
from .scalar import GaussianRational, Mode, exact, format_part, parse_part, real_imag
from .star import BRACKET_NORMALIZED, PAPER, Convention, DeformationSeries
from .symplectic import CotangentModel, DiagonalOperator, LoopModel, ModelError

__all__ = [
    "InputError",
    "series_to_doc",
    "series_from_doc",
    "model_to_doc",
    "model_from_doc",
    "operator_from_doc",
    "deformation_to_doc",
    "deformation_from_doc",
    "convention_from_spec",
    "load_json",
    "dump_json",
]


class InputError(ValueError):
    """A document failed to parse or validate."""


def _model_name(model) -> str:
    if model is None or isinstance(model, str):
        return model or "loop"
    return model.variant


def series_to_doc(F: FockSeries, model="loop", dimension: int | None = None) -> dict:
    name = _model_name(model)
    if dimension is None:
        dimension = model.n if isinstance(model, LoopModel) else 2
    terms = []
    for I, c in F.sorted_items():
        re, im = real_imag(c)
        terms.append({
            "index": [[k, i, m] for (k, i), m in I],
            "re": format_part(re, F.mode),
            "im": format_part(im, F.mode),
        })
    doc = {"mode": F.mode.value, "model": name, "dimension": dimension, "terms": terms}
    if F.cap is not None:
        doc["cap"] = F.cap
    return doc


def _scalar(re, im, mode: Mode):
    if mode is Mode.EXACT:
        return GaussianRational.make(re, im)
    return complex(re, im)


def series_from_doc(doc: dict) -> FockSeries:
    try:
        mode = Mode(doc.get("mode", "exact"))
    except ValueError:
        raise InputError(f"mode: expected 'exact' or 'float', got {doc.get('mode')!r}") from None
    name = doc.get("model", "loop")
    if name not in ("loop", "cotangent"):
        raise InputError(f"model: expected 'loop' or 'cotangent', got {name!r}")
    dimension = doc.get("dimension", 2)
    if name == "loop" and (not isinstance(dimension, int) or dimension <= 0):
        raise InputError(f"dimension: expected a positive int, got {dimension!r}")
    terms = {}
    for t, term in enumerate(doc.get("terms", [])):
        where = f"terms[{t}]"
        try:
            entries = term["index"]
            if not isinstance(entries, list):
                raise CanonicalError("index must be a list of [k, i, mult] triples")
            I = []
            for e in entries:
                if not (isinstance(e, list) and len(e) == 3 and all(isinstance(x, int) for x in e)):
                    raise CanonicalError(f"entry {e!r} is not a [k, i, mult] triple of ints")
                k, i, m = e
                _check_label((k, i), dimension if name == "loop" else None, name)
                if m < 1:
                    raise CanonicalError(f"multiplicity {m} of ({k},{i}) must be >= 1")
                if I and (k, i) <= I[-1][0]:
                    raise CanonicalError(f"labels not strictly increasing at ({k},{i})")
                I.append(((k, i), m))
            I = tuple(I)
            if I in terms:
                raise CanonicalError(f"multiindex {entries!r} repeated")
            re = parse_part(term.get("re", "0"), mode)
            im = parse_part(term.get("im", "0"), mode)
        except (CanonicalError, KeyError, ValueError, TypeError) as exc:
            raise InputError(f"{where}: {exc}") from None
        c = _scalar(re, im, mode)
        if c == 0:
            raise InputError(f"{where}: zero coefficients must be omitted")
        terms[I] = c
    cap = doc.get("cap")
    try:
        return FockSeries(terms, mode, cap)
    except ValueError as exc:
        raise InputError(f"cap: {exc}") from None


# models


def operator_from_doc(doc: dict) -> DiagonalOperator:
    lam = doc.get("lambda", {})
    growth = doc.get("growth")
    if growth is not None:
        growth = (exact(str(growth["C"])), int(growth["alpha"]))
    if "formula" in lam:
        f = lam["formula"]
        return DiagonalOperator(formula=(exact(str(f["c"])), int(f["alpha"])), growth=growth)
    table = {int(n): exact(str(v)) for n, v in lam.get("table", {}).items()}
    return DiagonalOperator(table, growth=growth)


def model_from_doc(doc: dict):
    try:
        variant = doc["variant"]
        if variant == "loop":
            return LoopModel(int(doc.get("n", 2)), exact(str(doc.get("C", "1"))), int(doc.get("sigma", 1)))
        if variant == "cotangent":
            return CotangentModel(operator_from_doc(doc), int(doc.get("sigma", 1)))
    except (KeyError, ValueError, TypeError, ModelError) as exc:
        raise InputError(f"model: {exc}") from None
    raise InputError(f"variant: expected 'loop' or 'cotangent', got {doc.get('variant')!r}")


def model_to_doc(model) -> dict:
    if isinstance(model, LoopModel):
        return {"variant": "loop", "n": model.n, "C": str(model.C), "sigma": model.sigma}
    A = model.A if isinstance(model, CotangentModel) else model
    if A.formula is not None:
        lam = {"formula": {"c": str(A.formula[0]), "alpha": A.formula[1]}}
    else:
        lam = {"table": {str(n): str(v) for n, v in sorted(A.table.items())}}
    doc = {"variant": "cotangent", "lambda": lam, "growth": {"C": str(A.growth[0]), "alpha": A.growth[1]}}
    if isinstance(model, CotangentModel) and model.sigma != 1:
        doc["sigma"] = model.sigma
    return doc


# deformation series


def deformation_to_doc(X: DeformationSeries, model="loop", dimension: int | None = None) -> dict:
    return {
        "order": X.order,
        "slots": [series_to_doc(s, model, dimension) for s in X],
        "convention": None if X.convention is None else X.convention.as_dict(),
        "exact_degree": X.exact_degree,
    }


def deformation_from_doc(doc: dict) -> DeformationSeries:
    slots = [series_from_doc(s) for s in doc["slots"]]
    if len(slots) != doc.get("order", len(slots) - 1) + 1:
        raise InputError("order: does not match the number of slots")
    conv = doc.get("convention")
    return DeformationSeries(slots, None if conv is None else Convention.from_dict(conv))


def convention_from_spec(spec: str) -> Convention:
    """``paper``, ``bracket-normalized`` or ``file:<path>`` (a convention document)."""
    if spec == "paper":
        return PAPER
    if spec == "bracket-normalized":
        return BRACKET_NORMALIZED
    if spec.startswith("file:"):
        doc = load_json(spec[5:])
        doc = doc.get("report", doc)
        doc = doc.get("convention", doc)
        try:
            return Convention.from_dict(doc)
        except (KeyError, ValueError, TypeError) as exc:
            raise InputError(f"convention: {exc}") from None
    raise InputError(f"convention: expected paper, bracket-normalized or file:<path>, got {spec!r}")


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _finite(doc):
    """Replace non-finite floats by the strings ``"inf"``, ``"-inf"``, ``"nan"`` (strict JSON)."""
    if isinstance(doc, float) and not math.isfinite(doc):
        return "nan" if math.isnan(doc) else ("inf" if doc > 0 else "-inf")
    if isinstance(doc, dict):
        return {k: _finite(v) for k, v in doc.items()}
    if isinstance(doc, (list, tuple)):
        return [_finite(v) for v in doc]
    return doc


def dump_json(doc, path=None) -> str:
    text = json.dumps(_finite(doc), indent=2, ensure_ascii=False, allow_nan=False) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
