"""Command line entry point: ``ckit analyze|compare|witt|covers|galois|knots``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from pydantic import BaseModel, ValidationError

from app.core.config import get_settings
from app.core.errors import InputError, InternalCheckError, UnknownKnotError
from app.schemas.base import KnotSummaryOut, MatrixFileIn
from app.services import engine
from app.services.seifert import KnotRecord, find_knot, load_knots

logger = logging.getLogger(__name__)


def _configure_logging() -> None:
    settings = get_settings()
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _records(path: str | None) -> list[KnotRecord]:
    return load_knots(Path(path) if path else get_settings().knots_file)


def _lookup(records: list[KnotRecord], name: str) -> KnotRecord:
    try:
        return find_knot(records, name)
    except UnknownKnotError as exc:
        known = ", ".join(r.name for r in records)
        raise UnknownKnotError(f"{exc}; known knots: {known}") from exc


def _emit(report: BaseModel | Sequence[BaseModel], args: argparse.Namespace) -> None:
    text = engine.render_json(report) if args.json else engine.render_text(report)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _cmd_analyze(args: argparse.Namespace) -> None:
    records = _records(args.knots)
    chosen = [_lookup(records, n) for n in args.name] if args.name else records
    options = engine.AnalyzeOptions.from_settings(galois=True if args.galois else None)
    reports = engine.analyze_many(chosen, options)
    _emit(reports[0] if len(reports) == 1 else reports, args)


def _cmd_compare(args: argparse.Namespace) -> None:
    records = _records(args.knots)
    _emit(engine.compare(_lookup(records, args.a), _lookup(records, args.b)), args)


def _cmd_witt(args: argparse.Namespace) -> None:
    try:
        raw = json.loads(Path(args.matrix).read_text(encoding="utf-8"))
        matrix = MatrixFileIn.model_validate(raw).matrix
    except (OSError, json.JSONDecodeError, ValidationError) as exc:
        raise InputError(f"cannot read matrix file {args.matrix}: {exc}")
    _emit(engine.witt_report(matrix, args.dp), args)


def _cmd_covers(args: argparse.Namespace) -> None:
    record = _lookup(_records(args.knots), args.name)
    _emit(engine.covers_report(record, args.p), args)


def _cmd_galois(args: argparse.Namespace) -> None:
    record = _lookup(_records(args.knots), args.name)
    _emit(engine.galois_report(record), args)


def _cmd_knots(args: argparse.Namespace) -> None:
    summaries = [
        KnotSummaryOut(name=r.name, size=r.seifert.size, genus3=r.genus3, g4_upper=r.g4_upper, notes=r.notes)
        for r in _records(args.knots)
    ]
    if args.json:
        _emit(summaries, args)
    else:
        text = "\n".join(f"{s.name}\t{s.size}x{s.size}\tg3={s.genus3}\tg4<={s.g4_upper}" for s in summaries)
        if args.out:
            Path(args.out).write_text(text + "\n", encoding="utf-8")
        else:
            print(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ckit", description="Knot concordance invariants from Seifert matrices")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--knots", help="knot file (JSON); defaults to the bundled table")
    common.add_argument("--json", action="store_true", help="emit JSON instead of text")
    common.add_argument("--out", help="write the report to this file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="genus bounds for one or more knots")
    p.add_argument("--name", action="append", help="knot name; -K mirrors, A#B sums (repeatable)")
    p.add_argument("--galois", action="store_true", help="run the cyclotomic Galois obstruction chain")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("compare", parents=[common], help="algebraic concordance of two knots")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("witt", parents=[common], help="Witt class of a symmetric matrix")
    p.add_argument("--matrix", required=True, help='JSON file {"matrix": [[...]]}')
    p.add_argument("--dp", type=int, help="odd prime for the boundary maps")
    p.set_defaults(func=_cmd_witt)

    p = sub.add_parser("covers", parents=[common], help="homology of branched cyclic covers")
    p.add_argument("--name", required=True)
    p.add_argument("--p", type=int, action="append", help="prime (repeatable)")
    p.set_defaults(func=_cmd_covers)

    p = sub.add_parser("galois", parents=[common], help="N_3 norm and quartic Galois obstruction")
    p.add_argument("--name", default="10_82")
    p.set_defaults(func=_cmd_galois)

    p = sub.add_parser("knots", parents=[common], help="list knots in the table")
    p.set_defaults(func=_cmd_knots)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging()
    try:
        args.func(args)
    except InternalCheckError as exc:
        print(f"internal check failed: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
