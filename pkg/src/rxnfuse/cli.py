"""Command-line entry point.

Exit codes: 0 success, 1 schema violation or malformed JSON, 2 internal error.
Warnings go to stderr as JSON lines; they never change the exit code.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .docmodel import SchemaError, dump_json, load_document, load_reactions
from .evaluation import InvalidStructureError, exact_match_prf, soft_match_accuracy
from .molgraph import MoleculeError, canonical_key, enumerate_tautomers, parse_smiles
from .pipeline import PipelineOptions, run_align, run_extract, run_resolve
from .rgroup import AbbreviationDictionary

EXIT_OK = 0
EXIT_SCHEMA = 1
EXIT_INTERNAL = 2

log = logging.getLogger("rxnfuse")

RUNNERS = {"extract": run_extract, "resolve": run_resolve, "align": run_align}


class _JsonLines(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        payload = {"level": record.levelname.lower(), "message": record.getMessage()}
        payload.update(getattr(record, "fields", {}))
        return json.dumps(payload, sort_keys=True, ensure_ascii=False)


def _setup_logging(level: str) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_JsonLines())
    log.handlers[:] = [handler]
    log.setLevel(level.upper())
    log.propagate = False


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: Path
    output: Optional[Path]
    ignore_stereo: bool = False
    tautomer_depth: int = 4
    dict_path: Optional[Path] = None
    jobs: int = 1
    log_level: str = "warning"

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        config = cls(
            args.command,
            Path(args.input),
            Path(args.output) if args.output else None,
            args.ignore_stereo,
            args.tautomer_depth,
            Path(args.dict) if args.dict else None,
            args.jobs,
            args.log_level,
        )
        config.validate()
        return config

    def validate(self) -> None:
        if not self.input.exists():
            raise FileNotFoundError(f"input {self.input} does not exist")
        if self.dict_path is not None and not self.dict_path.is_file():
            raise FileNotFoundError(f"dictionary {self.dict_path} does not exist")
        if self.jobs < 1:
            raise ValueError("--jobs must be at least 1")
        if self.tautomer_depth < 0:
            raise ValueError("--tautomer-depth must be non-negative")
        if self.input.is_dir() and self.output is not None and self.output.exists() and not self.output.is_dir():
            raise ValueError("a directory input needs a directory output")


def _process(command: str, path: Path, ignore_stereo: bool, dict_path: Optional[Path]) -> tuple[int, str, list[dict]]:
    """Run one document; returns (exit code, output text, log records)."""
    try:
        document = load_document(path)
    except SchemaError as exc:
        return EXIT_SCHEMA, "", [{"level": "error", "message": str(exc), "pointer": exc.pointer, "file": str(path)}]
    options = PipelineOptions(ignore_stereo, AbbreviationDictionary.from_file(dict_path))
    result = RUNNERS[command](document, options)
    records = [dict(w.to_json(), level="warning", file=str(path)) for w in result.warnings]
    return EXIT_OK, dump_json(result.to_json()), records


def _emit(records: list[dict]) -> None:
    for rec in records:
        fields = {k: v for k, v in rec.items() if k not in ("level", "message")}
        level = logging.ERROR if rec.get("level") == "error" else logging.WARNING
        log.log(level, rec.get("message", ""), extra={"fields": fields})


def _write(text: str, output: Optional[Path]) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.parent.mkdir(parents=True, exist_ok=True)
        output.write_text(text, encoding="utf-8")


def cmd_document(config: RunConfig) -> int:
    if not config.input.is_dir():
        code, text, records = _process(config.command, config.input, config.ignore_stereo, config.dict_path)
        _emit(records)
        if code == EXIT_OK:
            _write(text, config.output)
        return code

    files = sorted(config.input.glob("*.json"))
    out_dir = config.output
    args = [(config.command, f, config.ignore_stereo, config.dict_path) for f in files]
    if config.jobs > 1 and len(files) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_process, *zip(*args)))
    else:
        results = [_process(*a) for a in args]
    worst = EXIT_OK
    for f, (code, text, records) in zip(files, results):
        _emit(records)
        worst = max(worst, code)
        if code != EXIT_OK:
            continue
        if out_dir is None:
            sys.stdout.write(text)
        else:
            _write(text, out_dir / f.name)
    return worst


def cmd_eval(args: argparse.Namespace) -> int:
    try:
        pred = load_reactions(args.pred)
        gold = load_reactions(args.gold)
    except SchemaError as exc:
        log.error(str(exc), extra={"fields": {"pointer": exc.pointer}})
        return EXIT_SCHEMA
    try:
        if args.mode == "exact":
            report = exact_match_prf(pred, gold, ignore_stereo=args.ignore_stereo).to_json()
        else:
            report = soft_match_accuracy(pred, gold, max_depth=args.tautomer_depth,
                                         ignore_stereo=args.ignore_stereo).to_json()
    except InvalidStructureError as exc:
        log.error(str(exc), extra={"fields": {"code": "invalid-structure"}})
        return EXIT_SCHEMA
    report["mode"] = args.mode
    _write(dump_json(report), Path(args.output) if args.output else None)
    return EXIT_OK


def cmd_canon(args: argparse.Namespace) -> int:
    try:
        graph = parse_smiles(args.smiles)
    except MoleculeError as exc:
        log.error(str(exc), extra={"fields": {"code": "malformed-smiles"}})
        return EXIT_SCHEMA
    print(canonical_key(graph, ignore_stereo=args.ignore_stereo))
    return EXIT_OK


def cmd_tautomers(args: argparse.Namespace) -> int:
    try:
        graph = parse_smiles(args.smiles)
        found = enumerate_tautomers(graph, max_depth=args.tautomer_depth, ignore_stereo=args.ignore_stereo)
    except MoleculeError as exc:
        log.error(str(exc), extra={"fields": {"code": "malformed-smiles"}})
        return EXIT_SCHEMA
    for key in sorted(found.keys):
        print(key)
    if found.budget_exceeded:
        log.warning("tautomer budget exceeded; list is partial", extra={"fields": {"code": "budget-limited"}})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--ignore-stereo", action="store_true", help="drop stereo descriptors before comparing")
    common.add_argument("--tautomer-depth", type=int, default=4, metavar="N")
    common.add_argument("--log-level", default="warning", choices=["debug", "info", "warning", "error"])

    parser = argparse.ArgumentParser(prog="rxnfuse", description="Fuse figure, table and text extractions into reactions.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("extract", "full pipeline over figures, tables and text"),
        ("resolve", "substrate-scope figures only"),
        ("align", "condition tables and text reactions only"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--input", required=True, help="document JSON or a directory of them")
        p.add_argument("--output", help="output file (or directory); stdout if omitted")
        p.add_argument("--dict", help="JSON file with extra R-group abbreviations")
        p.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes for directory input")

    p = sub.add_parser("eval", parents=[common], help="score predictions against gold reactions")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--mode", choices=["exact", "soft"], default="exact")
    p.add_argument("--output")

    p = sub.add_parser("canon", parents=[common], help="print the canonical SMILES")
    p.add_argument("smiles")
    p = sub.add_parser("tautomers", parents=[common], help="list tautomers of a structure")
    p.add_argument("smiles")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.log_level)
    try:
        if args.command in RUNNERS:
            try:
                config = RunConfig.from_args(args)
            except (OSError, ValueError) as exc:
                log.error(str(exc))
                return EXIT_SCHEMA
            return cmd_document(config)
        if args.command == "eval":
            return cmd_eval(args)
        if args.command == "canon":
            return cmd_canon(args)
        return cmd_tautomers(args)
    except Exception as exc:  # anything else is a bug, reported as such
        log.error(f"internal error: {exc!r}", extra={"fields": {"code": "internal"}})
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
