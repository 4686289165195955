"""IC3 / property-directed reachability.

Frames are kept in delta form: ``delta[i]`` holds the clauses whose highest
frame is ``i``, so frame ``F_i`` is the union of ``delta[j]`` for ``j >= i``
and clause containment between consecutive frames holds by construction.
Frame 0 is the initial condition itself. Every query runs in one session
under push/pop, with frames, the initial condition and the transition
relation switched on through activation literals.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

from moxicheck.engines.common import EngineUnknown, Run, Unroller, extended_state, guarded
from moxicheck.smt import Opaque, SolverConfig, SolverSession
from moxicheck.system import ReachabilityTask, Trace, Verdict
from moxicheck.terms import (
    BOOL, BitVecSort, BoolSort, IntSort, RealSort, Term, Variable, instantiate, mk_app, mk_bv, mk_const,
    mk_eq, mk_not, mk_var,
)

DEFAULT_MAX_FRAMES = 200


@dataclass
class _Obligation:
    frame: int
    point: dict[Variable, object]
    cube: tuple[Term, ...]
    step_inputs: dict[str, object] = field(default_factory=dict)
    child: "_Obligation | None" = None


def point_literals(point: dict[Variable, object], xs: list[Variable]) -> tuple[Term, ...]:
    """Literals pinning ``xs`` to a model point.

    Bit-vectors are split per bit and numbers into a lower and an upper
    bound, so that literal dropping can widen a point into a region.
    """
    lits: list[Term] = []
    for v in xs:
        val = point[v]
        if isinstance(val, Opaque):
            raise EngineUnknown(f"model value for {v} cannot be represented: {val}")
        ref = mk_var(v)
        if isinstance(v.sort, BoolSort):
            lits.append(ref if val else mk_not(ref))
        elif isinstance(v.sort, BitVecSort):
            w = v.sort.width
            for bit in reversed(range(w)):
                b = (val >> bit) & 1
                sel = ref if w == 1 else mk_app("extract", [ref], (bit, bit))
                lits.append(mk_eq(sel, mk_bv(b, 1)))
        elif isinstance(v.sort, (IntSort, RealSort)):
            c = mk_const(val, v.sort)
            lits.append(mk_app(">=", [ref, c]))
            lits.append(mk_app("<=", [ref, c]))
        else:
            lits.append(mk_eq(ref, mk_const(val, v.sort)))
    return tuple(lits)


class _PDR:
    def __init__(self, run: Run, task: ReachabilityTask, max_frames: int, debug: bool):
        self.run = run
        self.task = task
        self.u = Unroller(task)
        self.xs = extended_state(task)
        self.max_frames = max_frames
        self.debug = debug
        self.delta: list[dict[Term, None]] = [{}]  # index 0 unused
        self.acts: list[Term] = [None]
        self.seq = itertools.count()
        self.sess: SolverSession = run.open()
        s = self.sess
        for i in (0, 1):
            self.u.declare_frame(s, i)
        self.act_init = self._act("__pdr_init")
        self.act_trans = self._act("__pdr_trans")
        s.assert_term(mk_app("=>", [self.act_init, self.u.init_at(0)]))
        s.assert_term(mk_app("=>", [self.act_trans, self.u.trans_at(0)]))
        self.ext_inputs = [v for v in self.xs if not v.is_state]

    def _act(self, name: str) -> Term:
        v = Variable(name, BOOL)
        self.sess.declare(v)
        return mk_var(v)

    @property
    def top(self) -> int:
        return len(self.delta) - 1

    def _new_frame(self):
        self.delta.append({})
        self.acts.append(self._act(f"__pdr_frame_{len(self.delta) - 1}"))

    def _add_clause(self, clause: Term, i: int):
        for j in range(1, i + 1):
            self.delta[j].pop(clause, None)
        self.delta[i][clause] = None
        self.sess.assert_term(mk_app("=>", [self.acts[i], instantiate(clause, 0)]))

    def frame_clauses(self, i: int) -> list[Term]:
        return [c for j in range(i, len(self.delta)) for c in self.delta[j]]

    def _query(self, frame: int | None, terms: list[Term], trans: bool = False) -> bool:
        """Is ``F_frame`` (plus T' if asked) plus ``terms`` satisfiable? Leaves the stack pushed."""
        self.run.check()
        s = self.sess
        s.push()
        if frame == 0:
            s.assert_term(self.act_init)
        elif frame is not None:
            for j in range(frame, len(self.acts)):
                s.assert_term(self.acts[j])
        if trans:
            s.assert_term(self.act_trans)
        for t in terms:
            s.assert_term(t)
        return self.run.sat(s)

    def _ask(self, frame, terms, trans=False) -> bool:
        res = self._query(frame, terms, trans)
        self.sess.pop()
        return res

    def _model_point(self, frame_index: int = 0) -> tuple[dict[Variable, object], dict[str, object]]:
        wanted = [v.at(frame_index) for v in self.u.variables]
        model = self.sess.get_model(wanted)
        point = {v: model[v.at(frame_index)] for v in self.xs}
        values = {v.name: model[v.at(frame_index)] for v in self.u.variables}
        return point, values

    @staticmethod
    def _cube(lits) -> Term:
        return mk_app("and", list(lits))

    # -- main loop
    def check(self) -> Verdict:
        run = self.run
        if self._query(0, [self.u.reach_at(0)]):
            _, values = self._model_point(0)
            return run.verdict("unsafe", trace=Trace([values]), frame=0)
        self.sess.pop()
        self._new_frame()
        while True:
            while True:
                if not self._query(self.top, [self.u.reach_at(0)]):
                    self.sess.pop()
                    break
                point, values = self._model_point(0)
                self.sess.pop()
                bad = _Obligation(self.top, point, point_literals(point, self.xs), step_inputs=values)
                trace = self._block(bad)
                if trace is not None:
                    return run.verdict("unsafe", trace=trace, frame=self.top)
            if self.top >= self.max_frames:
                return run.verdict("unknown", reason="frame budget exhausted", frame=self.top)
            self._new_frame()
            inductive = self._propagate()
            if self.debug:
                self._check_frames()
            if inductive is not None:
                inv = mk_app("and", self.frame_clauses(inductive + 1))
                return run.verdict("safe", frame=inductive, invariant=inv)

    def _block(self, bad: _Obligation) -> Trace | None:
        heap = [(bad.frame, next(self.seq), bad)]
        while heap:
            i, _, ob = heapq.heappop(heap)
            cube = self._cube(ob.cube)
            if not self._ask(i, [instantiate(cube, 0)]):
                continue  # already excluded from F_i
            pred_frame = i - 1
            sat = self._query(pred_frame, [instantiate(mk_not(cube), 0), instantiate(cube, 1)], trans=True)
            if sat:
                point, values = self._model_point(0)
                self.sess.pop()
                pred = _Obligation(pred_frame, point, point_literals(point, self.xs),
                                   step_inputs=values, child=ob)
                if pred_frame == 0 or self._ask(0, [instantiate(self._cube(pred.cube), 0)]):
                    return self._trace(pred)
                heapq.heappush(heap, (pred_frame, next(self.seq), pred))
                heapq.heappush(heap, (i, next(self.seq), ob))
            else:
                self.sess.pop()
                core = self._generalize(ob.cube, i)
                self._add_clause(mk_not(self._cube(core)), i)
        return None

    def _generalize(self, lits: tuple[Term, ...], i: int) -> tuple[Term, ...]:
        """Drop literals (in order) while the cube stays initial-free and inductive relative to F_{i-1}."""
        kept = list(lits)
        for lit in lits:
            cand = [l for l in kept if l is not lit]
            if len(cand) == len(kept):
                continue
            cube = self._cube(cand)
            if self._ask(0, [instantiate(cube, 0)]):
                continue
            if self._ask(i - 1, [instantiate(mk_not(cube), 0), instantiate(cube, 1)], trans=True):
                continue
            kept = cand
        return tuple(kept)

    def _propagate(self) -> int | None:
        for i in range(1, self.top):
            for clause in list(self.delta[i]):
                if not self._ask(i, [mk_not(instantiate(clause, 1))], trans=True):
                    self._add_clause(clause, i + 1)
            if not self.delta[i]:
                return i
        return None

    def _trace(self, first: _Obligation) -> Trace:
        states = []
        ob = first
        while ob is not None:
            states.append(dict(ob.step_inputs))
            ob = ob.child
        return Trace(states)

    def _check_frames(self):
        init_bad = self._ask(0, [mk_not(instantiate(mk_app("and", self.frame_clauses(1)), 0))])
        assert not init_bad, "initial states escape F_1"
        for i in range(1, self.top):
            nxt = mk_app("and", self.frame_clauses(i + 1))
            assert not self._ask(i, [mk_not(instantiate(nxt, 1))], trans=True), f"F_{i} /\\ T does not imply F_{i + 1}'"
        for i in range(1, self.top):
            assert not self._ask(i, [self.u.reach_at(0)]), f"F_{i} meets the target"


def pdr_check(task: ReachabilityTask, max_frames: int = DEFAULT_MAX_FRAMES,
              cfg: SolverConfig | None = None, *, timeout: float | None = None, stop=None,
              debug: bool = False, certify: bool = True) -> Verdict:
    run = Run("pdr", cfg, task, timeout, stop)

    def body():
        verdict = _PDR(run, task, max_frames, debug).check()
        if verdict.status == "safe" and certify:
            ok = certify_invariant(task, verdict.invariant, run.cfg, deadline=run.deadline, stop=run.stop)
            if not ok:
                return run.verdict("unknown", reason="invariant failed certification", frame=verdict.frame)
        return verdict

    return guarded(run, body)


def certify_invariant(task: ReachabilityTask, inv: Term, cfg: SolverConfig | None = None,
                      *, deadline: float | None = None, stop=None) -> bool:
    """Check ``inv`` is an inductive invariant excluding the target.

    Three queries, each in its own session, must all be unsat:
    ``I' and not inv``, ``inv and T' and not inv'``, ``inv and Q``.
    """
    from moxicheck.smt import SolverError, SolverSession

    cfg = (cfg or SolverConfig.resolve(None, task.logic)).with_logic(task.logic)
    init, trans = task.system.conjoined()
    queries = [
        [instantiate(init, 0), mk_not(instantiate(inv, 0))],
        [instantiate(inv, 0), instantiate(trans, 0), mk_not(instantiate(inv, 1))],
        [instantiate(inv, 0), instantiate(task.reach, 0)],
    ]
    for terms in queries:
        try:
            with SolverSession(cfg, stop=stop, deadline=deadline) as s:
                for t in terms:
                    s.assert_term(t)
                if not s.check_sat().is_unsat:
                    return False
        except SolverError:
            return False
    return True
