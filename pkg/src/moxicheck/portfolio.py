"""Engine dispatch and concurrent portfolio runs."""

from __future__ import annotations

import logging
import threading
import time
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from typing import Sequence

from moxicheck.engines.bmc import DEFAULT_BOUND, bmc_check
from moxicheck.engines.kinduction import DEFAULT_MAX_K, kind_check, kind_check_incremental
from moxicheck.engines.oracle import OracleLimitExceeded, enumerate_check
from moxicheck.engines.pdr import DEFAULT_MAX_FRAMES, pdr_check
from moxicheck.smt import SolverConfig
from moxicheck.system import ReachabilityTask, Verdict

log = logging.getLogger(__name__)

ENGINES = ("bmc", "kind", "pdr", "oracle")


def run_engine(task: ReachabilityTask, engine: str, cfg: SolverConfig | None = None, *,
               bound: int = DEFAULT_BOUND, max_k: int = DEFAULT_MAX_K,
               max_frames: int = DEFAULT_MAX_FRAMES, incremental: bool = True,
               simple_path: bool = False, timeout: float | None = None, stop=None) -> Verdict:
    if engine == "bmc":
        return bmc_check(task, bound, cfg, timeout=timeout, stop=stop)
    if engine == "kind":
        fn = kind_check_incremental if incremental else kind_check
        return fn(task, max_k, cfg, simple_path=simple_path, timeout=timeout, stop=stop)
    if engine == "pdr":
        return pdr_check(task, max_frames, cfg, timeout=timeout, stop=stop)
    if engine == "oracle":
        try:
            return enumerate_check(task, timeout=timeout, stop=stop)
        except OracleLimitExceeded as e:
            return Verdict.unknown("oracle", str(e), error="OracleLimitExceeded")
    raise ValueError(f"unknown engine {engine!r}")


def run_portfolio(task: ReachabilityTask, engines: Sequence[str],
                  cfgs: SolverConfig | Sequence[SolverConfig] | None = None, **options) -> Verdict:
    """Run engines side by side; the first definite verdict wins.

    Losers are cancelled, which kills their solver processes. When several
    definite verdicts are already in at the same moment, the earliest
    engine in ``engines`` wins.
    """
    if not engines:
        raise ValueError("portfolio needs at least one engine")
    if cfgs is None or isinstance(cfgs, SolverConfig):
        cfgs = [cfgs] * len(engines)
    if len(cfgs) != len(engines):
        raise ValueError("one solver configuration per engine expected")
    start = time.monotonic()
    stop = threading.Event()

    def one(engine, cfg):
        try:
            return run_engine(task, engine, cfg, stop=stop, **options)
        except Exception as e:  # an engine crash is just an unknown
            log.exception("engine %s crashed", engine)
            return Verdict.unknown(engine, f"engine crashed: {e}", error=type(e).__name__)

    with ThreadPoolExecutor(max_workers=len(engines)) as pool:
        futures = [pool.submit(one, e, c) for e, c in zip(engines, cfgs)]
        pending = set(futures)
        winner = None
        while pending and winner is None:
            done, pending = wait(pending, return_when=FIRST_COMPLETED)
            definite = [f for f in futures if f.done() and f.result().definite]
            if definite:
                winner = definite[0].result()
        stop.set()
        results = [f.result() for f in futures]
    if winner is not None:
        winner.time = time.monotonic() - start
        return winner
    reasons = "; ".join(f"{r.engine}: {r.reason}" for r in results)
    error = next((r.error for r in results if r.error), None)
    return Verdict.unknown("portfolio", reasons, time=time.monotonic() - start, error=error)
