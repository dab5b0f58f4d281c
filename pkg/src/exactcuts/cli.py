"""Command-line entry points.

``exactcuts`` has subcommands ``solve``, ``vipr-check``, ``vipr-complete``,
``report``, ``generate`` and ``batch``.  The two certificate commands are
also installed as stand-alone scripts.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from .branch_and_bound import STATUS_INFEASIBLE, STATUS_LIMIT, STATUS_OPTIMAL, SolverConfig, solve
from .certificate import (
    BOUNDS,
    EXACT_LP,
    CertificateError,
    CertificateParseError,
    CompletionError,
    check_certificate,
    complete_certificate,
    log_and_write,
    parse_certificate,
    write_certificate,
)
from .generate import GeneratorConfig, generate_battery
from .problem import ProblemError, parse_problem, write_problem
from .rational_core import format_rational
from .report import build_report, read_records, read_references, record_from_result, to_csv, to_table, write_references
from .safe_cuts import SeparatorConfig

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_LIMIT = 2

class _Parser(argparse.ArgumentParser):
    """Bad flags exit with 1 like every other error."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _threads() -> int:
    raw = os.environ.get("EXACTCUTS_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _solver_config(args) -> SolverConfig:
    sep = SeparatorConfig(rounds=args.rounds, max_denominator=args.max_denom)
    return SolverConfig(
        cuts=args.cuts == "gmi",
        separator=sep,
        node_limit=args.node_limit,
        time_limit=args.time_limit,
        record_tree=bool(getattr(args, "certificate", None)),
    )


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cuts", choices=("off", "gmi"), default="gmi")
    p.add_argument("--max-denom", type=int, default=SeparatorConfig.max_denominator, help="0 disables denominator limiting")
    p.add_argument("--rounds", type=int, default=SeparatorConfig.rounds)
    p.add_argument("--time-limit", type=float, default=float("inf"))
    p.add_argument("--node-limit", type=int, default=SolverConfig.node_limit)
    p.add_argument("--seed", type=int, default=0, help="recorded for reproducibility; the solver itself is deterministic")


def _exit_for(status: str) -> int:
    return EXIT_LIMIT if status == STATUS_LIMIT else EXIT_OK


# --------------------------------------------------------------------------

def cmd_solve(args) -> int:
    problem = parse_problem(Path(args.file).read_bytes(), name=Path(args.file).stem)
    result = solve(problem, _solver_config(args))
    print(f"status {result.status}")
    if result.objective is not None:
        print(f"objective {format_rational(result.objective)}")
    print(f"dual bound {format_rational(result.dual_bound)}")
    print(f"nodes {result.node_count}")
    print(f"cuts {result.cuts_added}")
    if result.incumbent is not None:
        for v, x in zip(problem.variables, result.incumbent):
            print(f"  {v.name} = {format_rational(x)}")
    if args.certificate:
        if result.status not in (STATUS_OPTIMAL, STATUS_INFEASIBLE):
            print("no certificate for an unfinished run", file=sys.stderr)
        else:
            Path(args.certificate).write_text(write_certificate(log_and_write(problem, result)))
            print(f"certificate {args.certificate}")
    if args.record:
        Path(args.record).write_text(record_from_result(problem.name, result).to_json(args.with_times))
    return _exit_for(result.status)


def cmd_check(args) -> int:
    verdict = check_certificate(Path(args.file).read_bytes())
    if verdict:
        print("accepted")
        return EXIT_OK
    where = "" if verdict.index is None else f" at DER {verdict.index}"
    print(f"rejected{where}: {verdict.reason}", file=sys.stderr)
    return EXIT_ERROR


def cmd_complete(args) -> int:
    try:
        cert = parse_certificate(Path(args.input).read_bytes())
        done = complete_certificate(cert, EXACT_LP if args.exact_lp else BOUNDS)
    except CompletionError as exc:
        print(f"completion failed at DER {', '.join(map(str, exc.indices))}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    Path(args.output).write_text(write_certificate(done))
    return EXIT_OK


def cmd_report(args) -> int:
    report = build_report(read_records(args.records), read_references(args.reference))
    if args.csv:
        Path(args.csv).write_text(to_csv(report, args.with_times))
    sys.stdout.write(to_table(report, args.with_times))
    return EXIT_OK


def cmd_generate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = GeneratorConfig()
    for p in generate_battery(args.seed, args.count, args.mixed_share, config):
        (out / f"{p.name}.prob").write_text(write_problem(p))
    print(f"wrote {args.count} instances to {out}")
    return EXIT_OK


def _batch_one(path: str, config: SolverConfig, cert_dir: Optional[str]):
    problem = parse_problem(Path(path).read_bytes(), name=Path(path).stem)
    result = solve(problem, config)
    if cert_dir and result.status in (STATUS_OPTIMAL, STATUS_INFEASIBLE):
        text = write_certificate(log_and_write(problem, result))
        Path(cert_dir, f"{problem.name}.vipr").write_text(text)
    return record_from_result(problem.name, result)


def cmd_batch(args) -> int:
    paths = sorted(str(p) for p in Path(args.dir).glob("*.prob"))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cert_dir = None
    if args.certificates:
        cert_dir = str(out / "certificates")
        Path(cert_dir).mkdir(exist_ok=True)
    config = _solver_config(args)
    config.record_tree = cert_dir is not None
    jobs = [(p, config, cert_dir) for p in paths]
    workers = _threads()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_batch_one, *zip(*jobs))) if jobs else []
    else:
        records = [_batch_one(*job) for job in jobs]
    for rec in records:
        (out / f"{rec.name}.json").write_text(rec.to_json(args.with_times))
    (out / "reference.csv").write_text(write_references(records))
    limits = sum(r.status == STATUS_LIMIT for r in records)
    print(f"solved {len(records) - limits} of {len(records)}, {limits} hit a limit")
    return EXIT_LIMIT if limits else EXIT_OK


# --------------------------------------------------------------------------

def _check_parser(p: argparse.ArgumentParser) -> None:
    p.add_argument("file")
    p.set_defaults(func=cmd_check)


def _complete_parser(p: argparse.ArgumentParser) -> None:
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--exact-lp", action="store_true", help="complete with an exact LP over earlier lines")
    p.set_defaults(func=cmd_complete)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="exactcuts", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve a problem file")
    p.add_argument("file")
    _add_solver_flags(p)
    p.add_argument("--certificate", metavar="PATH", help="write a pre-certificate")
    p.add_argument("--record", metavar="PATH", help="write a JSON result record")
    p.add_argument("--with-times", action="store_true")
    p.set_defaults(func=cmd_solve)

    _check_parser(sub.add_parser("vipr-check", help="check a certificate"))
    _complete_parser(sub.add_parser("vipr-complete", help="complete weak records"))

    p = sub.add_parser("report", help="gap-closed report from result records")
    p.add_argument("records", help="directory of JSON records")
    p.add_argument("--reference", required=True, help="CSV with name,status,objective")
    p.add_argument("--csv", metavar="PATH")
    p.add_argument("--with-times", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("generate", help="write a random instance battery")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--mixed-share", type=float, default=0.3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("batch", help="solve every .prob file in a directory")
    p.add_argument("dir")
    p.add_argument("--out", required=True)
    _add_solver_flags(p)
    p.add_argument("--certificates", action="store_true", help="write pre-certificates next to the records")
    p.add_argument("--with-times", action="store_true")
    p.set_defaults(func=cmd_batch)
    return parser


def _run(parser: argparse.ArgumentParser, argv: Optional[Sequence[str]]) -> int:
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help exits 0, bad flags exit 1
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (OSError, ProblemError, CertificateParseError, CertificateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main(argv: Optional[Sequence[str]] = None) -> int:
    return _run(build_parser(), argv)


def check_main(argv: Optional[Sequence[str]] = None) -> int:
    p = _Parser(prog="vipr-check", description="Check a certificate.")
    _check_parser(p)
    return _run(p, argv)


def complete_main(argv: Optional[Sequence[str]] = None) -> int:
    p = _Parser(prog="vipr-complete", description="Complete weak records of a pre-certificate.")
    _complete_parser(p)
    return _run(p, argv)


if __name__ == "__main__":
    sys.exit(main())
