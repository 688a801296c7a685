"""Command-line front door.

Subcommands: ``validate`` (pack checks), ``diagnose`` (one-shot batch
diagnosis), ``repl`` (interactive TSQL), ``serve`` (HTTP API) and ``trend``
(CSV least-squares fit). Exit codes: 0 ok, 1 domain error, 2 I/O or usage
error. Every error path prints a single machine-parseable line
``error: <code>: <message>`` on stderr.
"""
from __future__ import annotations

import argparse
import csv
import difflib
import json
import os
import sys
from pathlib import Path

from .analytics import AnalyticsError, TimePoint, fit_trend, predict
from .diagnosis import DiagnosisConfig, DiagnosisError, SeverityVector
from .engine import (
    EngineError,
    generate_candidates,
    load_rules,
    rule_count_violations,
    score_and_rank,
)
from .icd import InvalidIcdCode
from .knowledge import PackError, load_pack, validate_pack
from .service import format_distance, serve
from .store import BadInstant, StoreError, TemporalStore, format_instant, parse_instant
from .tsql import DmlResult, TsqlError, TsqlSyntaxError, TsqlTypeError, evaluate, parse


class CliError(Exception):
    def __init__(self, code: str, message: str, exit_code: int = 1):
        super().__init__(message)
        self.code = code
        self.exit_code = exit_code


def _fail(code: str, message: str, exit_code: int = 1) -> CliError:
    return CliError(code, message, exit_code)


# -- validate -------------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        pack = load_pack(args.pack)
    except OSError as exc:
        raise _fail("io", f"cannot read pack: {exc}", 2) from None
    except (PackError, InvalidIcdCode) as exc:
        raise _fail("pack", str(exc)) from None
    entries = list(validate_pack(pack))
    entries.extend(rule_count_violations(load_rules(pack), pack))
    for entry in entries:
        print(entry)
    return 0 if not entries else 1


# -- diagnose -------------------------------------------------------------------


def _parse_severities(pairs: list[str]) -> dict[str, float]:
    severities: dict[str, float] = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep or not name:
            raise _fail("usage", f"expected symptom=severity, got {pair!r}")
        try:
            severities[name] = float(value)
        except ValueError:
            raise _fail("usage", f"severity for {name!r} must be a number, got {value!r}") from None
    if not severities:
        raise _fail("usage", "at least one symptom=severity pair is required")
    return severities


def cmd_diagnose(args: argparse.Namespace) -> int:
    try:
        pack = load_pack(args.pack)
    except OSError as exc:
        raise _fail("io", f"cannot read pack: {exc}", 2) from None
    pack.subpart(args.subpart)  # raises UnknownSubpart
    severities = _parse_severities(args.severities)
    for name in severities:
        if name not in pack.symptoms:
            hint = difflib.get_close_matches(name, pack.symptoms.keys(), n=1)
            suggestion = f"; did you mean {hint[0]!r}?" if hint else ""
            raise _fail("unknown_symptom", f"unknown symptom {name!r}{suggestion}")

    vector = SeverityVector(severities)
    rulebase = load_rules(pack)
    candidates = generate_candidates(vector, rulebase, pack)
    if not candidates:
        raise _fail("no_candidates", "no candidate diseases for the reported symptoms")
    results = score_and_rank(candidates, vector, pack, DiagnosisConfig())

    if args.json:
        print(json.dumps({
            "results": [
                {
                    "rank": r.rank,
                    "disease_id": r.disease_id,
                    "icd": r.icd.text,
                    "name": pack.disease(r.disease_id).name,
                    "distance": format_distance(r.distance),
                }
                for r in results
            ]
        }, indent=2, sort_keys=True))
    else:
        for r in results:
            print(f"{r.rank:<5}{r.icd.text:<10}{format_distance(r.distance)}")
    return 0


# -- repl -----------------------------------------------------------------------


def _print_result_table(result) -> None:
    if isinstance(result, DmlResult):
        print(f"(affected {result.affected})")
        return
    if not result.rows:
        print("(0 rows)")
        return
    cells = [[_cell(v) for v in row] for row in result.rows]
    widths = [
        max(len(col), *(len(row[i]) for row in cells))
        for i, col in enumerate(result.columns)
    ]
    header = "  ".join(col.ljust(w) for col, w in zip(result.columns, widths))
    print(header)
    print("  ".join("-" * w for w in widths))
    for row in cells:
        print("  ".join(value.ljust(w) for value, w in zip(row, widths)))
    print(f"({len(result.rows)} rows)")


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def cmd_repl(args: argparse.Namespace) -> int:
    try:
        store = TemporalStore(args.data_dir)
    except OSError as exc:
        raise _fail("io", f"cannot open store: {exc}", 2) from None
    interactive = sys.stdin.isatty()
    while True:
        if interactive:
            sys.stdout.write("tsql> ")
            sys.stdout.flush()
        line = sys.stdin.readline()
        if not line:
            return 0
        line = line.rstrip("\n")
        if not line.strip():
            continue
        if line.strip() == ".quit":
            return 0
        try:
            _print_result_table(evaluate(parse(line), store))
        except (TsqlSyntaxError, TsqlTypeError) as exc:
            print(line)
            print(" " * (exc.column - 1) + "^")
            code = "syntax_error" if isinstance(exc, TsqlSyntaxError) else "type_error"
            print(f"error: {code}: {exc}")
        except (TsqlError, StoreError) as exc:
            print(f"error: tsql: {exc}")


# -- serve ----------------------------------------------------------------------


def cmd_serve(args: argparse.Namespace) -> int:
    try:
        serve(args.pack, args.data_dir, args.listen)
    except OSError as exc:
        raise _fail("io", str(exc), 2) from None
    return 0


# -- trend ----------------------------------------------------------------------


def _parse_time(text: str) -> int:
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        return parse_instant(text)


def cmd_trend(args: argparse.Namespace) -> int:
    try:
        with open(args.csv, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or set(reader.fieldnames) < {"t", "value"}:
                raise _fail("csv", "input CSV needs a header with columns t,value")
            points = [
                TimePoint(_parse_time(row["t"]), float(row["value"])) for row in reader
            ]
    except OSError as exc:
        raise _fail("io", f"cannot read CSV: {exc}", 2) from None
    except (ValueError, BadInstant) as exc:
        raise _fail("csv", f"bad CSV row: {exc}") from None

    model = fit_trend(points)
    prediction = None
    if args.predict_at is not None:
        prediction = predict(model, _parse_time(args.predict_at))

    if args.fit_out:
        with open(args.fit_out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "observed", "fitted"])
            for p in sorted(points, key=lambda p: p.t):
                writer.writerow([format_instant(p.t), p.value, predict(model, p.t).value])

    if args.json:
        doc = {
            "slope_per_second": model.slope,
            "intercept": model.intercept,
            "t_ref": format_instant(model.t_ref),
            "t_max": format_instant(model.t_max),
            "n": model.n,
        }
        if prediction is not None:
            doc["prediction"] = prediction.value
            doc["extrapolated"] = prediction.extrapolated
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(f"n={model.n}")
        print(f"slope_per_second={model.slope!r}")
        print(f"intercept={model.intercept!r}")
        print(f"span={format_instant(model.t_ref)}..{format_instant(model.t_max)}")
        if prediction is not None:
            kind = "extrapolation" if prediction.extrapolated else "interpolation"
            print(f"prediction={prediction.value!r} ({kind})")
    return 0


# -- entry ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="meddx", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a knowledge pack")
    p.add_argument("--pack", required=True, help="pack file path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("diagnose", help="one-shot diagnosis from symptom=severity pairs")
    p.add_argument("--pack", required=True)
    p.add_argument("--subpart", required=True, help="subpart id, e.g. nose")
    p.add_argument("--json", action="store_true", help="emit the API JSON shape")
    p.add_argument("severities", nargs="+", metavar="symptom=severity")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("repl", help="interactive TSQL loop (.quit to exit)")
    p.add_argument("--data-dir", required=True)
    p.set_defaults(func=cmd_repl)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--pack", default=os.environ.get("MEDDX_PACK"),
                   required="MEDDX_PACK" not in os.environ)
    p.add_argument("--data-dir", default=os.environ.get("MEDDX_DATA_DIR"),
                   required="MEDDX_DATA_DIR" not in os.environ)
    p.add_argument("--listen", default=os.environ.get("MEDDX_LISTEN", "127.0.0.1:8000"))
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("trend", help="least-squares trend over a t,value CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--predict-at", help="instant (ISO or epoch seconds) to evaluate")
    p.add_argument("--fit-out", help="write t,observed,fitted CSV here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_trend)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (PackError, InvalidIcdCode) as exc:
        print(f"error: pack: {exc}", file=sys.stderr)
        return 1
    except (TsqlError, StoreError, EngineError, DiagnosisError, AnalyticsError) as exc:
        print(f"error: domain: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
