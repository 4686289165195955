"""k-induction, in a fresh-solver reference form and an incremental form.

For each k >= 1 the base case asks for a target state at depth k-1 along a
path from an initial state, and the step case asks whether k target-free
steps can be followed by a target state. The incremental form keeps one
session per case alive across k: each increment adds the new frame's
transition (and, for the step case, the new ``not reach`` hypothesis)
permanently, and only the depth-dependent goal lives under push/pop.
"""

from __future__ import annotations

from moxicheck.engines.common import Run, Unroller, distinct_states, extended_state, guarded
from moxicheck.smt import SolverConfig
from moxicheck.system import ReachabilityTask, Verdict

DEFAULT_MAX_K = 1000


def kind_check(task: ReachabilityTask, max_k: int = DEFAULT_MAX_K,
               cfg: SolverConfig | None = None, *, simple_path: bool = False,
               timeout: float | None = None, stop=None) -> Verdict:
    """Reference k-induction: both cases re-encoded in new solvers for every k."""
    run = Run("kind", cfg, task, timeout, stop)
    u = Unroller(task)
    xs = extended_state(task)
    return guarded(run, lambda: _fresh(run, u, xs, max_k, simple_path))


def kind_check_incremental(task: ReachabilityTask, max_k: int = DEFAULT_MAX_K,
                           cfg: SolverConfig | None = None, *, simple_path: bool = False,
                           timeout: float | None = None, stop=None) -> Verdict:
    """k-induction reusing two solver stacks across increasing k."""
    run = Run("kind", cfg, task, timeout, stop)
    u = Unroller(task)
    xs = extended_state(task)
    return guarded(run, lambda: _incremental(run, u, xs, max_k, simple_path))


def _fresh(run: Run, u: Unroller, xs, max_k: int, simple_path: bool) -> Verdict:
    for k in range(1, max_k + 1):
        run.check()
        with run.session() as base:
            for i in range(k):
                u.declare_frame(base, i)
            base.assert_term(u.init_at(0))
            for i in range(k - 1):
                base.assert_term(u.trans_at(i))
            base.assert_term(u.reach_at(k - 1))
            if run.sat(base):
                return run.verdict("unsafe", trace=u.trace(base, k - 1), k=k)

        with run.session() as step:
            for i in range(k + 1):
                u.declare_frame(step, i)
            step.assert_term(u.inv_at(0))
            for i in range(k):
                step.assert_term(u.not_reach_at(i))
                step.assert_term(u.trans_at(i))
            if simple_path:
                for j in range(1, k + 1):
                    for i in range(j):
                        step.assert_term(distinct_states(xs, i, j))
            step.assert_term(u.reach_at(k))
            if not run.sat(step):
                return run.verdict("safe", k=k)
    return run.verdict("unknown", reason="k exhausted", k=max_k)


def _incremental(run: Run, u: Unroller, xs, max_k: int, simple_path: bool) -> Verdict:
    base = run.open()
    step = run.open()
    u.declare_frame(base, 0)
    base.assert_term(u.init_at(0))
    u.declare_frame(step, 0)
    step.assert_term(u.inv_at(0))

    for k in range(1, max_k + 1):
        run.check()
        # base: path of k-1 steps from init, target at k-1
        if k >= 2:
            u.declare_frame(base, k - 1)
            base.assert_term(u.trans_at(k - 2))
        base.push()
        base.assert_term(u.reach_at(k - 1))
        if run.sat(base):
            return run.verdict("unsafe", trace=u.trace(base, k - 1), k=k)
        base.pop()

        # step: k target-free steps, then the target
        u.declare_frame(step, k)
        step.assert_term(u.not_reach_at(k - 1))
        step.assert_term(u.trans_at(k - 1))
        if simple_path:
            for i in range(k):
                step.assert_term(distinct_states(xs, i, k))
        step.push()
        step.assert_term(u.reach_at(k))
        if not run.sat(step):
            return run.verdict("safe", k=k)
        step.pop()
    return run.verdict("unknown", reason="k exhausted", k=max_k)
