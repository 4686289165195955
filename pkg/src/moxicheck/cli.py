"""``moxi-check``: check every query of a MoXI JSON task file."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from moxicheck.engines.bmc import DEFAULT_BOUND
from moxicheck.engines.kinduction import DEFAULT_MAX_K
from moxicheck.engines.pdr import DEFAULT_MAX_FRAMES
from moxicheck.frontend import FrontendError, ParseError, SymbolError, UnsupportedFeature, parse_task
from moxicheck.portfolio import ENGINES, run_engine, run_portfolio
from moxicheck.smt import Opaque, SolverConfig, literal_text, serialize
from moxicheck.system import ReachabilityTask, Verdict
from moxicheck.terms import SortError

log = logging.getLogger("moxicheck")

RESULT_SCHEMA = "moxicheck-result"
RESULT_VERSION = 1

EXIT_OK = 0
EXIT_UNKNOWN = 2
EXIT_USAGE = 64
EXIT_PARSE = 65
EXIT_UNSUPPORTED = 66
EXIT_SOLVER = 70

_SOLVER_ERRORS = {"SolverSpawnError", "SolverDialectError", "SolverProtocolError"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _positive(text):
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="moxi-check", description="Model check MoXI reachability queries (JSON form).")
    p.add_argument("task", help="MoXI task in JSON form")
    p.add_argument("--engine", choices=[*ENGINES, "portfolio"], default="kind")
    p.add_argument("--portfolio-engines", default="bmc,kind,pdr",
                   help="comma-separated engines raced by --engine portfolio")
    p.add_argument("--solver", default=None, help="solver name (z3, yices, cvc5, mathsat) or executable path")
    p.add_argument("--bound", type=_positive, default=DEFAULT_BOUND, help="BMC bound")
    p.add_argument("--max-k", type=_positive, default=DEFAULT_MAX_K, help="k-induction limit")
    p.add_argument("--max-frames", type=_positive, default=DEFAULT_MAX_FRAMES, help="PDR frame limit")
    p.add_argument("--no-incremental", action="store_true", help="use the fresh-solver k-induction")
    p.add_argument("--simple-path", action="store_true", help="add distinct-state constraints to k-induction")
    p.add_argument("--timeout", type=float, default=None, help="wall-clock limit for the whole run, seconds")
    p.add_argument("--json-output", metavar="FILE", help="write machine-readable results")
    p.add_argument("--dump-smt", metavar="DIR", help="write one SMT-LIB2 transcript per solver session")
    p.add_argument("--emit-invariant", metavar="FILE", help="write PDR invariants as SMT-LIB2 terms")
    p.add_argument("--trace", action="store_true", help="print counterexample traces")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _value_text(value, sort) -> str:
    if isinstance(value, Opaque):
        return str(value)
    return literal_text(value, sort)


def trace_to_json(task: ReachabilityTask, verdict: Verdict) -> list[dict[str, str]] | None:
    if verdict.trace is None:
        return None
    sorts = {v.name: v.sort for v in task.system.variables}
    return [{name: _value_text(val, sorts[name]) for name, val in state.items()}
            for state in verdict.trace.states]


def result_record(task: ReachabilityTask, verdict: Verdict) -> dict:
    rec = {
        "query": task.query_name,
        "system": task.system.name,
        "reachable": task.reach_name,
        "logic": task.logic,
        "status": verdict.status,
        "engine": verdict.engine,
        "solver": verdict.solver,
        "k": verdict.k,
        "frame": verdict.frame,
        "time": round(verdict.time, 6),
        "reason": verdict.reason or None,
        "trace": trace_to_json(task, verdict),
        "invariant": serialize(verdict.invariant, timed_names=False) if verdict.invariant is not None else None,
    }
    return rec


def verdict_line(task: ReachabilityTask, verdict: Verdict) -> str:
    parts = [f"engine={verdict.engine}"]
    if verdict.solver:
        parts.append(f"solver={verdict.solver}")
    if verdict.frame is not None:
        parts.append(f"frames={verdict.frame}")
    elif verdict.k is not None:
        parts.append(f"k={verdict.k}")
    parts.append(f"time={verdict.time:.3f}s")
    if verdict.status == "unknown" and verdict.reason:
        parts.append(f"reason={verdict.reason}")
    return f"[{task.query_name}] verdict: {verdict.status} ({', '.join(parts)})"


def _print_trace(task: ReachabilityTask, verdict: Verdict, out):
    for i, state in enumerate(trace_to_json(task, verdict) or []):
        body = " ".join(f"{k}={v}" for k, v in state.items())
        print(f"  step {i}: {body}", file=out)


def check_task(task: ReachabilityTask, args, cfg: SolverConfig, timeout: float | None = None) -> Verdict:
    options = dict(bound=args.bound, max_k=args.max_k, max_frames=args.max_frames,
                   incremental=not args.no_incremental, simple_path=args.simple_path,
                   timeout=timeout)
    if args.engine == "portfolio":
        engines = [e.strip() for e in args.portfolio_engines.split(",") if e.strip()]
        return run_portfolio(task, engines, cfg, **options)
    return run_engine(task, args.engine, cfg, **options)


def run(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.engine == "portfolio":
            engines = [e.strip() for e in args.portfolio_engines.split(",") if e.strip()]
            bad = [e for e in engines if e not in ENGINES]
            if not engines or bad:
                raise _UsageError(f"invalid portfolio engines: {args.portfolio_engines!r}")
    except _UsageError as e:
        print(f"moxi-check: usage error: {e}", file=err)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return EXIT_OK if not e.code else EXIT_USAGE

    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), stream=err,
                        format="%(levelname)s %(name)s: %(message)s")

    try:
        data = Path(args.task).read_bytes()
    except OSError as e:
        print(f"moxi-check: cannot read {args.task}: {e.strerror}", file=err)
        return EXIT_USAGE
    try:
        tasks = parse_task(data)
    except UnsupportedFeature as e:
        print(f"moxi-check: unsupported feature {e.feature}: {e}", file=err)
        return EXIT_UNSUPPORTED
    except (ParseError, SymbolError, SortError, FrontendError) as e:
        print(f"moxi-check: {type(e).__name__}: {e}", file=err)
        return EXIT_PARSE

    # --timeout bounds the whole run; each query gets what is left
    deadline = time.monotonic() + args.timeout if args.timeout is not None else None
    records = []
    invariants = []
    code = EXIT_OK
    for task in tasks:
        cfg = SolverConfig.resolve(args.solver, task.logic, dump_dir=args.dump_smt)
        try:
            left = None if deadline is None else max(0.0, deadline - time.monotonic())
            verdict = check_task(task, args, cfg, left)
        except Exception as e:  # one query's failure never aborts its siblings
            log.exception("query %s failed", task.query_name)
            verdict = Verdict.unknown(args.engine, f"internal error: {e}", error=type(e).__name__)
        print(verdict_line(task, verdict), file=out)
        if args.trace and verdict.trace is not None:
            _print_trace(task, verdict, out)
        if verdict.status == "unknown":
            if verdict.error in _SOLVER_ERRORS:
                code = EXIT_SOLVER
                print(f"moxi-check: solver failure on {task.query_name}: {verdict.reason}", file=err)
            elif code == EXIT_OK:
                code = EXIT_UNKNOWN
        if verdict.invariant is not None:
            invariants.append((task, verdict.invariant))
        records.append(result_record(task, verdict))

    if args.json_output:
        doc = {"schema": RESULT_SCHEMA, "version": RESULT_VERSION, "input": str(args.task), "results": records}
        Path(args.json_output).write_text(json.dumps(doc, indent=2) + "\n")
    if args.emit_invariant:
        lines = []
        for task, inv in invariants:
            lines.append(f"; {task.query_name}")
            lines.append(serialize(inv, timed_names=False))
        Path(args.emit_invariant).write_text("\n".join(lines) + ("\n" if lines else ""))
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
