"""Direct SMT-based model checking of MoXI reachability tasks."""

from moxicheck.engines import (
    OracleLimitExceeded, bmc_check, certify_invariant, enumerate_check, kind_check,
    kind_check_incremental, pdr_check,
)
from moxicheck.frontend import ParseError, SymbolError, UnsupportedFeature, parse_file, parse_task
from moxicheck.portfolio import run_engine, run_portfolio
from moxicheck.smt import SolverConfig
from moxicheck.system import ReachabilityTask, Trace, TransitionSystem, Verdict, validate_trace

__version__ = "0.1.0"

__all__ = [
    "parse_task", "parse_file", "ParseError", "SymbolError", "UnsupportedFeature",
    "TransitionSystem", "ReachabilityTask", "Trace", "Verdict", "validate_trace",
    "SolverConfig", "bmc_check", "kind_check", "kind_check_incremental", "pdr_check",
    "certify_invariant", "enumerate_check", "OracleLimitExceeded", "run_engine", "run_portfolio",
]
