"""Plumbing shared by the solver-backed engines."""

from __future__ import annotations

import time
from contextlib import contextmanager
from typing import Iterator

from moxicheck.smt import (
    Cancelled, SolverConfig, SolverError, SolverSession, SolverSpawnError,
)
from moxicheck.system import ReachabilityTask, Trace, Verdict
from moxicheck.terms import Term, Variable, free_vars, instantiate, mk_app, mk_not


class EngineUnknown(Exception):
    """Internal: abandon the run with an ``unknown`` verdict."""

    def __init__(self, reason: str, error: str | None = None):
        super().__init__(reason)
        self.reason = reason
        self.error = error


class Unroller:
    """Frame-indexed copies of a task's conditions."""

    def __init__(self, task: ReachabilityTask):
        self.task = task
        sys = task.system
        self.system = sys
        self.init, self.trans = sys.conjoined()
        self.inv = sys.inv
        self.reach = task.reach
        self.not_reach = mk_not(task.reach)
        self.variables = sys.variables
        self.state_vars = sys.state_vars
        self.inputs = sys.inputs

    def init_at(self, i: int = 0) -> Term:
        return instantiate(self.init, i)

    def trans_at(self, i: int) -> Term:
        return instantiate(self.trans, i)

    def reach_at(self, i: int) -> Term:
        return instantiate(self.reach, i)

    def not_reach_at(self, i: int) -> Term:
        return instantiate(self.not_reach, i)

    def inv_at(self, i: int) -> Term:
        return instantiate(self.inv, i)

    def frame_vars(self, i: int) -> list[Variable]:
        return [v.at(i) for v in self.variables]

    def declare_frame(self, sess: SolverSession, i: int):
        sess.ensure_declared(self.frame_vars(i))

    def trace(self, sess: SolverSession, depth: int) -> Trace:
        """Read a ``depth``-step path out of the current model."""
        wanted = [v for i in range(depth + 1) for v in self.frame_vars(i)]
        model = sess.get_model(wanted)
        states = []
        for i in range(depth + 1):
            states.append({v.name: model[v.at(i)] for v in self.variables if v.at(i) in model})
        return Trace(states)


def extended_state(task: ReachabilityTask) -> list[Variable]:
    """State variables plus the inputs that the initial or target condition reads.

    An input read by the initial condition is shared with the first
    transition, and one read by the target is specific to the last step, so
    those inputs behave like state when reasoning about single steps.
    """
    sys = task.system
    used = free_vars(sys.init) | free_vars(sys.inv) | free_vars(task.reach)
    return list(sys.state_vars) + [u for u in sys.inputs if u in used]


def distinct_states(xs: list[Variable], i: int, j: int) -> Term:
    from moxicheck.terms import mk_var

    return mk_app("or", [mk_app("distinct", [mk_var(v.at(i)), mk_var(v.at(j))]) for v in xs])


class Run:
    """Deadline, cancellation and session bookkeeping for one engine run."""

    def __init__(self, engine: str, cfg: SolverConfig | None, task: ReachabilityTask,
                 timeout: float | None = None, stop=None):
        self.engine = engine
        base = cfg or SolverConfig.resolve(None, task.logic)
        self.cfg = base.with_logic(task.logic)
        self.stop = stop
        self.start = time.monotonic()
        self.deadline = None if timeout is None else self.start + timeout
        self.sessions: list[SolverSession] = []
        self.totals: dict[str, int] = {}

    def check(self):
        if self.stop is not None and self.stop.is_set():
            raise Cancelled()
        if self.deadline is not None and time.monotonic() >= self.deadline:
            raise EngineUnknown("timeout")

    def open(self) -> SolverSession:
        self.check()
        sess = SolverSession(self.cfg, stop=self.stop, deadline=self.deadline)
        self.sessions.append(sess)
        return sess

    def close(self, sess: SolverSession):
        sess.close()
        self._absorb(sess)
        self.sessions.remove(sess)

    @contextmanager
    def session(self) -> Iterator[SolverSession]:
        sess = self.open()
        try:
            yield sess
        finally:
            self.close(sess)

    def _absorb(self, sess: SolverSession):
        for k, v in sess.stats.as_dict().items():
            self.totals[k] = self.totals.get(k, 0) + v

    def finish(self):
        for sess in list(self.sessions):
            self.close(sess)

    def stats(self) -> dict:
        out = dict(self.totals)
        for sess in self.sessions:
            for k, v in sess.stats.as_dict().items():
                out[k] = out.get(k, 0) + v
        return out

    def verdict(self, status: str, **kw) -> Verdict:
        return Verdict(status, self.engine, solver=self.cfg.name,
                       time=time.monotonic() - self.start, stats=self.stats(), **kw)

    def sat(self, sess: SolverSession):
        """check-sat that turns ``unknown`` into an abandoned run."""
        res = sess.check_sat()
        if res.is_unknown:
            if res.reason == "timeout" and self.deadline is not None and time.monotonic() >= self.deadline:
                raise EngineUnknown("timeout")
            raise EngineUnknown(f"solver returned unknown: {res.reason}")
        return res.is_sat


def guarded(run: Run, body) -> Verdict:
    """Execute ``body()`` and map backend failures to ``unknown`` verdicts."""
    try:
        return body()
    except EngineUnknown as e:
        return run.verdict("unknown", reason=e.reason, error=e.error)
    except Cancelled:
        return run.verdict("unknown", reason="cancelled")
    except SolverSpawnError as e:
        return run.verdict("unknown", reason=str(e), error=type(e).__name__)
    except SolverError as e:
        return run.verdict("unknown", reason=f"solver failure: {e}", error=type(e).__name__)
    finally:
        run.finish()
