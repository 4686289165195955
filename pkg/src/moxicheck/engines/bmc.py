"""Bounded model checking."""

from __future__ import annotations

from moxicheck.engines.common import Run, Unroller, guarded
from moxicheck.smt import SolverConfig
from moxicheck.system import ReachabilityTask, Verdict

DEFAULT_BOUND = 1000


def bmc_check(task: ReachabilityTask, max_bound: int = DEFAULT_BOUND,
              cfg: SolverConfig | None = None, *, incremental: bool = True,
              timeout: float | None = None, stop=None) -> Verdict:
    """Look for a path of length 0..max_bound from an initial to a target state.

    BMC never proves safety: exhausting the bound yields ``unknown``.
    """
    run = Run("bmc", cfg, task, timeout, stop)
    u = Unroller(task)
    body = _incremental if incremental else _fresh
    return guarded(run, lambda: body(run, u, max_bound))


def _incremental(run: Run, u: Unroller, max_bound: int) -> Verdict:
    sess = run.open()
    u.declare_frame(sess, 0)
    sess.assert_term(u.init_at(0))
    for k in range(max_bound + 1):
        run.check()
        if k > 0:
            u.declare_frame(sess, k)
            sess.assert_term(u.trans_at(k - 1))
        sess.push()
        sess.assert_term(u.reach_at(k))
        if run.sat(sess):
            trace = u.trace(sess, k)
            return run.verdict("unsafe", trace=trace, k=k)
        sess.pop()
    return run.verdict("unknown", reason="bound exhausted", k=max_bound)


def _fresh(run: Run, u: Unroller, max_bound: int) -> Verdict:
    """Reference formulation: a new solver and the whole unrolling for every k."""
    for k in range(max_bound + 1):
        run.check()
        with run.session() as sess:
            for i in range(k + 1):
                u.declare_frame(sess, i)
            sess.assert_term(u.init_at(0))
            for i in range(k):
                sess.assert_term(u.trans_at(i))
            sess.assert_term(u.reach_at(k))
            if run.sat(sess):
                return run.verdict("unsafe", trace=u.trace(sess, k), k=k)
    return run.verdict("unknown", reason="bound exhausted", k=max_bound)
