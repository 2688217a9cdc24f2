"""Command-line front end.

    hidastar compute {wick|bracket|star|star-a|tprime|wickexp} [--in F.json ...] [--out OUT]
    hidastar check {axioms|oracle|gauge|exchange|norms|probe} [--seed N] [--trials N] ...
    hidastar calibrate [--model cotangent.json] [--out conventions.json]

Series inputs come from ``--in`` files, or from standard input as a JSON list
of series documents when no ``--in`` is given.  Exit codes: 0 success,
1 internal error, 2 bad input, 3 suite failure (the report is still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone

from . import __version__
from .calibrate import CalibrationError, calibrate
from .checks import (
    DEFAULT_OPERATOR,
    axioms_suite,
    exchange_suite,
    gauge_suite,
    norms_suite,
    oracle_suite,
    probe_suite,
)
from .fock import CanonicalError, FockSeries, wick_exponential, wick_product
from .io import (
    InputError,
    convention_from_spec,
    deformation_to_doc,
    dump_json,
    load_json,
    model_from_doc,
    model_to_doc,
    series_from_doc,
    series_to_doc,
)
from .norms import NormParams
from .scalar import Mode, ModeError
from .star import star, star_a, t_prime
from .symplectic import CotangentModel, LoopModel, ModelError, poisson_bracket

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_SUITE = 0, 1, 2, 3

COMPUTE_OPS = ("wick", "bracket", "star", "star-a", "tprime", "wickexp")
CHECK_SUITES = ("axioms", "oracle", "gauge", "exchange", "norms", "probe")


class UsageError(ValueError):
    """Invalid flag combination; the message names the offending field."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hidastar", description="Hida star products and their checks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--model", help="model JSON document")
    common.add_argument("--lambda", dest="lambda_", metavar="PATH",
                        help="cotangent model or bare lambda document")
    common.add_argument("--order", type=int, default=4, help="order L in h (default 4)")
    common.add_argument("--degree", type=int, help="degree cap D")
    common.add_argument("--convention", help="paper | bracket-normalized | file:<path>")
    common.add_argument("--mode", choices=("exact", "float"), help="scalar mode")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default="json")

    comp = sub.add_parser("compute", parents=[common], help="evaluate one operation")
    comp.add_argument("op", choices=COMPUTE_OPS)
    comp.add_argument("--in", dest="inputs", action="append", default=[], metavar="PATH")

    chk = sub.add_parser("check", parents=[common], help="run a property suite")
    chk.add_argument("suite", choices=CHECK_SUITES)
    chk.add_argument("--trials", type=int)
    chk.add_argument("--r", type=float, default=4.0)
    chk.add_argument("--C", type=float, default=0.5)
    chk.add_argument("--C1", type=float, default=1.0)
    chk.add_argument("--kmax", type=int, default=50)
    chk.add_argument("--n", type=int, default=2, help="dimension for norms (default 2)")
    chk.add_argument("--form", choices=("paper", "calibrated"), default="paper",
                     help="exchange exponent to test (default: as quoted)")
    chk.add_argument("--op", choices=("bracket", "p_l", "e_a_form"), default="bracket", help="probe operation")
    chk.add_argument("--source-r", type=float, default=6.0)
    chk.add_argument("--source-C", type=float, default=4.0)

    cal = sub.add_parser("calibrate", parents=[common], help="fix the sign/prefactor convention")
    cal.add_argument("--flip-oracle", action="store_true", help=argparse.SUPPRESS)
    return parser


# helpers


def _header() -> dict:
    return {"tool": "hidastar", "version": __version__,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds")}


def _emit(doc, args, *, wrap: bool = True) -> None:
    if args.format == "csv":
        text = _to_csv(doc)
    else:
        text = dump_json({"header": _header(), "report": doc} if wrap else doc)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _flatten(doc, prefix="") -> dict:
    out = {}
    if isinstance(doc, dict):
        for k, v in doc.items():
            out.update(_flatten(v, f"{prefix}{k}."))
    elif isinstance(doc, list) and all(not isinstance(v, (dict, list)) for v in doc):
        for i, v in enumerate(doc):
            out[f"{prefix}{i}"] = v
    elif not isinstance(doc, list):
        out[prefix.rstrip(".")] = doc
    return out


def _to_csv(doc) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    for k, v in _flatten(doc).items():
        writer.writerow([k, v])
    return buf.getvalue()


def _load_model(args, default=None):
    path = args.model or args.lambda_
    if path is None:
        return default
    doc = load_json(path)
    if "variant" not in doc:
        doc = {"variant": "cotangent", **(doc if "lambda" in doc else {"lambda": doc})}
    return model_from_doc(doc)


def _inputs(args) -> list:
    if args.inputs:
        docs = [load_json(p) for p in args.inputs]
    else:
        try:
            docs = json.loads(sys.stdin.read())
        except json.JSONDecodeError as exc:
            raise InputError(f"stdin: invalid JSON ({exc.msg})") from None
        if isinstance(docs, dict):
            docs = [docs]
    series = []
    for i, doc in enumerate(docs):
        try:
            F = series_from_doc(doc)
        except InputError as exc:
            src = args.inputs[i] if args.inputs else f"stdin[{i}]"
            raise InputError(f"{src}: {exc}") from None
        if args.mode == "float" and F.mode is Mode.EXACT:
            F = FockSeries({I: complex(c) for I, c in F.items()}, Mode.FLOAT, F.cap)
        elif args.mode == "exact" and F.mode is Mode.FLOAT:
            raise UsageError("mode: cannot convert FLOAT input to exact")
        series.append(F)
    return series


def _need(series: list, k: int, op: str) -> None:
    if len(series) != k:
        raise UsageError(f"in: '{op}' takes {k} input series, got {len(series)}")


def _cotangent(model) -> CotangentModel:
    if model is None:
        return CotangentModel(DEFAULT_OPERATOR)
    if not isinstance(model, CotangentModel):
        raise UsageError("model: this operation needs a cotangent model")
    return model


# commands


def cmd_compute(args) -> int:
    model = _load_model(args)
    series = _inputs(args)
    op = args.op
    if op == "wick":
        _need(series, 2, op)
        out = series_to_doc(wick_product(*series), model or "loop")
    elif op == "bracket":
        _need(series, 2, op)
        model = model or LoopModel()
        out = series_to_doc(poisson_bracket(series[0], series[1], model), model)
    elif op == "star":
        _need(series, 2, op)
        model = model or LoopModel()
        if not isinstance(model, LoopModel):
            raise UsageError("model: 'star' needs a loop model (use star-a for cotangent)")
        conv = convention_from_spec(args.convention or "paper")
        out = deformation_to_doc(star(series[0], series[1], args.order, model, conv), model)
    elif op == "star-a":
        _need(series, 2, op)
        model = _cotangent(model)
        conv = convention_from_spec(args.convention) if args.convention else calibrate(model.A).convention
        out = deformation_to_doc(star_a(series[0], series[1], args.order, model.A, conv), "cotangent")
    elif op == "tprime":
        _need(series, 1, op)
        model = _cotangent(model)
        sign = convention_from_spec(args.convention).t1_sign if args.convention else -1
        out = deformation_to_doc(t_prime(series[0], model.A, args.order, sign), "cotangent")
    else:
        _need(series, 1, op)
        if args.degree is None:
            raise UsageError("degree: 'wickexp' needs --degree")
        out = series_to_doc(wick_exponential(series[0], args.degree), model or "loop")
    _emit(out, args, wrap=False)
    return EXIT_OK


def cmd_check(args) -> int:
    suite = args.suite
    if args.mode == "float" and suite not in ("norms", "probe"):
        raise UsageError("mode: algebraic suites run in exact mode only")
    if suite == "axioms":
        report = axioms_suite(args.seed, args.trials or 100)
    elif suite == "oracle":
        report = oracle_suite(args.seed, args.trials or 200)
    elif suite in ("gauge", "exchange"):
        model = _cotangent(_load_model(args))
        if suite == "gauge":
            report = gauge_suite(args.seed, args.trials or 100, exp_trials=20, L=args.order, A=model.A,
                                 D=args.degree if args.degree is not None else 4)
        else:
            report = exchange_suite(args.seed, args.trials or 20, D=args.degree if args.degree is not None else 4,
                                    L=args.order, A=model.A, form=args.form)
        report["model"] = model_to_doc(model)
    elif suite == "norms":
        try:
            p = NormParams(args.r, args.C, args.C1)
        except ValueError as exc:
            raise UsageError(f"r/C/C1: {exc}") from None
        report = norms_suite(p, args.kmax, args.n, args.degree if args.degree is not None else 8)
    else:
        try:
            target, source = NormParams(args.r, args.C, args.C1), NormParams(args.source_r, args.source_C, args.C1)
        except ValueError as exc:
            raise UsageError(f"r/C/C1: {exc}") from None
        report = probe_suite(args.op, target, source, count=args.trials or 500, seed=args.seed,
                             degree_cap=args.degree if args.degree is not None else 4)
    _emit(report, args)
    return EXIT_OK if report["passed"] else EXIT_SUITE


def cmd_calibrate(args) -> int:
    model = _cotangent(_load_model(args))
    result = calibrate(model.A, flip_oracle=args.flip_oracle)
    report = result.as_dict()
    report["model"] = model_to_doc(model)
    if result.status == "unique":
        report["convention"] = result.convention.as_dict()
        if args.out is None:
            args.out = "conventions.json"
    _emit(report, args)
    return EXIT_OK if result.status == "unique" else EXIT_SUITE


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "order", 0) < 0:
        print("hidastar: error: order: must be >= 0", file=sys.stderr)
        return EXIT_INPUT
    handler = {"compute": cmd_compute, "check": cmd_check, "calibrate": cmd_calibrate}[args.command]
    try:
        return handler(args)
    except (InputError, UsageError, CanonicalError, ModelError, ModeError, CalibrationError) as exc:
        print(f"hidastar: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"hidastar: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
