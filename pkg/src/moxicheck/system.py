"""Transition systems, reachability tasks, traces and verdicts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from moxicheck.terms import (
    TRUE, EvalError, Term, Variable, conjoin_invariance, evaluate, free_vars,
)

__all__ = ["TransitionSystem", "ReachabilityTask", "Trace", "Verdict",
           "SUPPORTED_LOGICS", "validate_trace"]

SUPPORTED_LOGICS = ("QF_BV", "QF_ABV", "QF_LIA", "QF_LRA", "QF_NIA", "QF_NRA")


@dataclass(frozen=True)
class TransitionSystem:
    name: str
    inputs: tuple[Variable, ...] = ()
    outputs: tuple[Variable, ...] = ()
    locals: tuple[Variable, ...] = ()
    init: Term = TRUE
    trans: Term = TRUE
    inv: Term = TRUE

    @property
    def state_vars(self) -> tuple[Variable, ...]:
        return self.outputs + self.locals

    @property
    def variables(self) -> tuple[Variable, ...]:
        return self.inputs + self.outputs + self.locals

    def lookup(self, name: str) -> Variable | None:
        for v in self.variables:
            if v.name == name:
                return v
        return None

    def conjoined(self) -> tuple[Term, Term]:
        """Initial and transition conditions with the invariance folded in."""
        return conjoin_invariance(self)


@dataclass(frozen=True)
class ReachabilityTask:
    """One ``(I, T, Inv, Q)`` check: is any state satisfying ``reach`` reachable?"""

    logic: str
    system: TransitionSystem
    query_name: str
    reach_name: str
    reach: Term

    @property
    def name(self) -> str:
        return self.query_name


@dataclass
class Trace:
    """A concrete path. ``states[i]`` maps variable names to values at step i.

    Input values recorded at step i are the ones consumed by the transition
    out of step i (and by the reachable condition on the last step).
    """

    states: list[dict[str, object]]

    def __len__(self):
        return len(self.states)

    @property
    def depth(self) -> int:
        return len(self.states) - 1


@dataclass
class Verdict:
    status: str
    engine: str
    trace: Trace | None = None
    reason: str = ""
    k: int | None = None
    frame: int | None = None
    invariant: Term | None = None
    solver: str | None = None
    time: float = 0.0
    error: str | None = None
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in ("safe", "unsafe", "unknown"):
            raise ValueError(f"bad verdict status {self.status!r}")
        if self.status == "unsafe" and (self.trace is None or len(self.trace) < 1):
            raise ValueError("an unsafe verdict needs a nonempty trace")

    @property
    def definite(self) -> bool:
        return self.status != "unknown"

    @property
    def bound(self) -> int | None:
        return self.k if self.k is not None else self.frame

    @classmethod
    def unknown(cls, engine: str, reason: str, **kw) -> "Verdict":
        return cls("unknown", engine, reason=reason, **kw)


def _env(system: TransitionSystem, cur: Mapping[str, object], nxt: Mapping[str, object] | None):
    env: dict[Variable, object] = {}
    for v in system.variables:
        if v.name in cur:
            env[v] = cur[v.name]
        if nxt is not None and v.is_state and v.name in nxt:
            env[v.prime()] = nxt[v.name]
    return env


def _holds(term: Term, env) -> bool:
    missing = {v for v in free_vars(term) if v not in env}
    if missing:
        raise EvalError("trace omits " + ", ".join(sorted(map(str, missing))))
    return bool(evaluate(term, env))


def validate_trace(task: ReachabilityTask, trace: Trace) -> bool:
    """Check a trace by evaluation alone: initial, every step, and the target."""
    if not trace.states:
        raise ValueError("trace must be nonempty")
    sys = task.system
    init, trans = sys.conjoined()
    states = trace.states
    if not _holds(init, _env(sys, states[0], None)):
        return False
    for cur, nxt in zip(states, states[1:]):
        if not _holds(trans, _env(sys, cur, nxt)):
            return False
    return _holds(task.reach, _env(sys, states[-1], None))
