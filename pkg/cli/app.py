"""Command-line front end: argument parsing, run recording, exit codes."""
import argparse
import logging
import sqlite3
import sys
from datetime import datetime, timezone
from typing import Optional

from cli.output import NORMALIZATIONS, OUTPUT_FORMATS
from core.errors import (
    DisconnectedGraphError,
    GraphFormatError,
    KemenyToolError,
    NumericalBreakdownError,
    PoleError,
)
from core.graph_io import FORMATS, compute_sha256
from db import database
from db.models import RunConfig, RunRecord, SolverContext, WeightedGraph
from db.repository import RunRepository
from utils.config import DENSE_THRESHOLD, HISTOGRAM_BINS, PAIR_WORKERS
from utils.logger import get_logger, setup_logging

log = get_logger("kemenytool.cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_GRAPH = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; 2 is reserved for invalid graphs here."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


class RunSession:
    """Records one CLI invocation in the run history (no-op when disabled)."""

    def __init__(self, config: RunConfig, enabled: bool = True):
        self.config = config
        self.enabled = enabled
        self.record: Optional[RunRecord] = None
        self.metrics: dict = {}
        self._repo: Optional[RunRepository] = None

    def start(self) -> None:
        if not self.enabled:
            return
        path = self.config.input_path or ""
        try:
            self._repo = RunRepository()
            self.record = self._repo.create(RunRecord(
                id=None,
                subcommand=self.config.subcommand,
                input_path=path,
                input_sha256=compute_sha256(path) if path else "",
                started_at=datetime.now(timezone.utc).isoformat(),
            ))
        except sqlite3.Error as exc:
            log.warning("Run history unavailable: %s", exc)
            self.enabled = False

    def describe(self, g: WeightedGraph, ctx: Optional[SolverContext] = None) -> None:
        if self.record is None:
            return
        self.record.n = g.n
        self.record.m = g.m
        if ctx is not None:
            self.record.bandwidth = ctx.b
            self.record.route = ctx.route + ("+gth" if ctx.gth else "")

    def add_metric(self, key: str, value) -> None:
        self.metrics[key] = value

    def finish(self, status: str, error_message: str = "") -> None:
        if not self.enabled or self.record is None:
            return
        self.record.status = status
        self.record.finished_at = datetime.now(timezone.utc).isoformat()
        self.record.error_message = error_message
        try:
            self._repo.update(self.record)
            self._repo.add_metrics(self.record.id, self.metrics)
        except sqlite3.Error as exc:
            log.warning("Could not record run %s: %s", self.record.id, exc)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a number > 0, got {text}")
    return value


def parse_n_values(text: str) -> list:
    """'START:STOP:STEP' (STOP inclusive), 'START:STOP', 'a,b,c' or a single 'N'."""
    try:
        if ":" in text:
            parts = [int(x) for x in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            start, stop, step = parts
            if step < 1:
                raise ValueError
            return list(range(start, stop + 1, step))
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad node-count range {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--input", dest="input_path", metavar="PATH")
    common.add_argument("--format", dest="input_format", choices=FORMATS)
    common.add_argument("--out", dest="out_path", metavar="PATH")
    common.add_argument("--output-format", choices=OUTPUT_FORMATS, default="csv")
    common.add_argument("--normalize", choices=NORMALIZATIONS, default="none")
    common.add_argument("--bins", type=_positive_int, default=HISTOGRAM_BINS)
    common.add_argument("--histogram", metavar="PATH")
    common.add_argument("--r", dest="r_values", type=_positive_float, nargs="+", default=[])
    common.add_argument("--dense-threshold", type=_positive_int, default=DENSE_THRESHOLD)
    common.add_argument("--jobs", type=_positive_int, default=PAIR_WORKERS)
    common.add_argument("--gth", action="store_true", help="row-sum compensated factorization")
    common.add_argument("--no-history", action="store_true")
    common.add_argument("--history-db", metavar="PATH")
    common.add_argument("--log-file", metavar="PATH", help="also log to a rotating file")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="kemenytool", description="Kemeny-constant edge centralities")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    kemeny = sub.add_parser("kemeny", parents=[common], help="Kemeny's constant")
    kemeny.add_argument("--method", choices=("auto", "banded", "dense", "eigen"), default="auto")

    edges = sub.add_parser("edges", parents=[common], help="mu and related measures for every edge")
    edges.add_argument("--filtered", action="store_true", help="filtered measure on cut-edges")

    pairs = sub.add_parser("pairs", parents=[common], help="mu_bar over node pairs")
    pairs.add_argument("--edges-only", action="store_true")
    pairs.add_argument("--matrix", action="store_true", help="emit the full n x n matrix")

    linkpred = sub.add_parser("linkpred", parents=[common], help="score non-edges")
    linkpred.add_argument("--measure", default="all",
                          choices=("kd", "jaccard", "aa", "ra", "cnc", "all"))
    linkpred.add_argument("--top", type=_positive_int)
    linkpred.add_argument("--alpha-c", type=float)
    linkpred.add_argument("--direction", choices=("likely", "important"), default="likely")
    linkpred.add_argument("--correlation", metavar="PATH")

    sensitivity = sub.add_parser("sensitivity", parents=[common], help="global sensitivity")
    sensitivity.add_argument("--family", type=lambda s: [x for x in s.split(",") if x])
    sensitivity.add_argument("--n", dest="n_values", type=parse_n_values)
    sensitivity.add_argument("--pair-mean", action="store_true",
                             help="also average mu_bar over all pairs (O(n^2) solves)")

    onepath = sub.add_parser("onepath-check", parents=[common],
                             help="compare one-path closed forms with the general solver")
    onepath.add_argument("--n", dest="n_values", type=parse_n_values, default=[50])

    solve = sub.add_parser("solve", parents=[common], help="solve S x = e_p - e_q")
    solve.add_argument("--pair", nargs=2, type=int, required=True, metavar=("P", "Q"))

    history = sub.add_parser("history", parents=[common], help="list recorded runs")
    history.add_argument("--limit", type=_positive_int, default=20)
    history.add_argument("--clear", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    skip = {
        "subcommand", "input_path", "input_format", "out_path", "output_format", "normalize",
        "bins", "histogram", "r_values", "dense_threshold", "jobs", "gth",
        "no_history", "history_db", "log_file", "verbose",
    }
    return RunConfig(
        subcommand=args.subcommand,
        input_path=args.input_path,
        input_format=args.input_format or "",
        out_path=args.out_path,
        output_format=args.output_format,
        normalization=args.normalize,
        histogram_bins=args.bins,
        histogram_path=args.histogram,
        r_values=tuple(args.r_values),
        dense_threshold=args.dense_threshold,
        jobs=args.jobs,
        gth=args.gth,
        options={k: v for k, v in vars(args).items() if k not in skip},
    )


def _commands() -> dict:
    from cli import commands, linkpred_command, sensitivity_command
    return {
        "kemeny": commands.cmd_kemeny,
        "edges": commands.cmd_edges,
        "pairs": commands.cmd_pairs,
        "solve": commands.cmd_solve,
        "history": commands.cmd_history,
        "linkpred": linkpred_command.cmd_linkpred,
        "sensitivity": sensitivity_command.cmd_sensitivity,
        "onepath-check": sensitivity_command.cmd_onepath_check,
    }


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config = config_from_args(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"kemenytool: {exc}", file=sys.stderr)
        return EXIT_USAGE

    setup_logging(logging.DEBUG if args.verbose else logging.WARNING, args.log_file)
    record = not args.no_history and args.subcommand != "history"
    if record or args.subcommand == "history":
        try:
            database.initialize(args.history_db)
        except (sqlite3.Error, OSError) as exc:
            log.warning("Run history disabled: %s", exc)
            record = False

    session = RunSession(config, enabled=record)
    session.start()
    log.info("Run %s started", config.subcommand)
    try:
        code = _commands()[config.subcommand](config, session)
    except (GraphFormatError, DisconnectedGraphError) as exc:
        return _fail(session, exc, EXIT_GRAPH)
    except (NumericalBreakdownError, PoleError) as exc:
        return _fail(session, exc, EXIT_NUMERIC)
    except (KemenyToolError, ValueError, OSError, UsageError) as exc:
        return _fail(session, exc, EXIT_USAGE)
    session.finish("completed" if code == EXIT_OK else "failed")
    log.info("Run %s finished with exit code %d", config.subcommand, code)
    return code


def _fail(session: RunSession, exc: Exception, code: int) -> int:
    print(f"kemenytool: {exc}", file=sys.stderr)
    log.debug("Run failed", exc_info=exc)
    session.finish("error", str(exc))
    return code
