import json
import random

import pytest
from gmpy2 import mpq

from hidastar.fock import FockSeries, mi
from hidastar.io import (
    InputError,
    convention_from_spec,
    deformation_from_doc,
    deformation_to_doc,
    dump_json,
    model_from_doc,
    model_to_doc,
    series_from_doc,
    series_to_doc,
)
from hidastar.sampling import loop_label_set, random_series
from hidastar.scalar import GaussianRational, Mode
from hidastar.star import BRACKET_NORMALIZED, PAPER, star
from hidastar.symplectic import CotangentModel, DiagonalOperator, LoopModel


def test_series_round_trip():
    rng = random.Random(5)
    for _ in range(20):
        F = random_series(rng, loop_label_set(3), 4, 8, complex_prob=0.3)
        assert series_from_doc(json.loads(json.dumps(series_to_doc(F)))) == F


def test_float_round_trip():
    F = FockSeries({mi((1, 0)): 0.1 + 2.5j, (): -3.0}, Mode.FLOAT)
    G = series_from_doc(series_to_doc(F))
    assert G.mode is Mode.FLOAT and G == F


def test_unicode_minus():
    doc = {"terms": [{"index": [[1, 0, 1]], "re": "−1/2"}]}
    assert series_from_doc(doc) == FockSeries({mi((1, 0)): mpq(-1, 2)})


@pytest.mark.parametrize("index, needle", [
    ([[2, 0, 1], [1, 0, 1]], "strictly increasing"),
    ([[1, 0, 0]], "multiplicity"),
    ([[1, 5, 1]], "terms[1]"),
    ([[1, 0]], "triple"),
])
def test_non_canonical_rejected(index, needle):
    doc = {"terms": [{"index": [], "re": "1"}, {"index": index, "re": "1"}]}
    with pytest.raises(InputError, match="terms\\[1\\]") as exc:
        series_from_doc(doc)
    assert needle in str(exc.value)


def test_repeated_and_zero_terms_rejected():
    with pytest.raises(InputError, match="repeated"):
        series_from_doc({"terms": [{"index": [[1, 0, 1]], "re": "1"}, {"index": [[1, 0, 1]], "re": "2"}]})
    with pytest.raises(InputError, match="zero"):
        series_from_doc({"terms": [{"index": [[1, 0, 1]], "re": "0"}]})


def test_cotangent_labels_validated():
    with pytest.raises(InputError):
        series_from_doc({"model": "cotangent", "terms": [{"index": [[0, 1, 1]], "re": "1"}]})
    F = series_from_doc({"model": "cotangent", "terms": [{"index": [[-2, 2, 3]], "re": "1", "im": "1"}]})
    assert dict(F.items())[mi((-2, 2), (-2, 2), (-2, 2))] == GaussianRational(1, 1)


def test_models_round_trip():
    for m in (LoopModel(4, mpq(1, 2), -1), CotangentModel(DiagonalOperator({1: 2, -3: "1/3"})),
              CotangentModel(DiagonalOperator(formula=(1, 1)), -1)):
        assert model_from_doc(model_to_doc(m)) == m
    with pytest.raises(InputError):
        model_from_doc({"variant": "torus"})


def test_deformation_and_conventions(tmp_path):
    x, y = FockSeries.basis((1, 0)), FockSeries.basis((1, 1))
    X = star(x, y, 2, LoopModel(), PAPER)
    doc = json.loads(dump_json(deformation_to_doc(X)))
    assert list(deformation_from_doc(doc)) == list(X)
    assert convention_from_spec("paper") == PAPER
    path = tmp_path / "c.json"
    dump_json({"header": {}, "report": {"convention": BRACKET_NORMALIZED.as_dict()}}, path)
    assert convention_from_spec(f"file:{path}") == BRACKET_NORMALIZED
    with pytest.raises(InputError):
        convention_from_spec("moyal")


def test_dump_json_is_strict():
    text = dump_json({"a": float("inf"), "b": [float("nan")]})
    assert json.loads(text) == {"a": "inf", "b": ["nan"]}
