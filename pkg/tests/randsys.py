"""Seeded random QF_BV transition systems for differential testing."""

from __future__ import annotations

import random

from moxicheck.system import ReachabilityTask, TransitionSystem
from moxicheck.terms import (
    TRUE, BitVec, Variable, mk_and, mk_app, mk_bv, mk_eq, mk_not, mk_or, mk_var,
)

_BINOPS = ["bvadd", "bvsub", "bvand", "bvor", "bvxor", "bvmul", "bvudiv", "bvurem", "bvshl", "bvlshr"]
_CMPS = ["=", "bvult", "bvule", "bvslt", "bvsge"]


class _Gen:
    def __init__(self, rng: random.Random, pool: list[Variable]):
        self.rng = rng
        self.pool = pool

    def leaf(self, w):
        same = [v for v in self.pool if v.sort.width == w]
        if same and self.rng.random() < 0.7:
            return mk_var(self.rng.choice(same))
        if self.pool and self.rng.random() < 0.5:
            v = self.rng.choice(self.pool)
            vw = v.sort.width
            if vw > w:
                lo = self.rng.randrange(vw - w + 1)
                return mk_app("extract", [mk_var(v)], (lo + w - 1, lo))
            if vw < w:
                return mk_app("zero_extend", [mk_var(v)], (w - vw,))
        return mk_bv(self.rng.randrange(1 << w), w)

    def bv(self, w, depth):
        if depth <= 0 or self.rng.random() < 0.3:
            return self.leaf(w)
        r = self.rng.random()
        if r < 0.75:
            return mk_app(self.rng.choice(_BINOPS), [self.bv(w, depth - 1), self.bv(w, depth - 1)])
        if r < 0.85:
            return mk_app(self.rng.choice(["bvnot", "bvneg"]), [self.bv(w, depth - 1)])
        return mk_app("ite", [self.pred(w, depth - 1), self.bv(w, depth - 1), self.bv(w, depth - 1)])

    def atom(self, w, depth):
        return mk_app(self.rng.choice(_CMPS), [self.bv(w, depth), self.bv(w, depth)])

    def pred(self, w, depth):
        r = self.rng.random()
        if depth <= 0 or r < 0.6:
            return self.atom(w, max(depth, 1))
        if r < 0.75:
            return mk_not(self.pred(w, depth - 1))
        op = mk_and if r < 0.9 else mk_or
        return op(self.pred(w, depth - 1), self.pred(w, depth - 1))


def random_task(seed: int, max_state_bits: int = 16, max_input_bits: int = 4) -> ReachabilityTask:
    """A small random system with a functional-ish transition and a random target."""
    rng = random.Random(seed)
    states: list[Variable] = []
    budget = rng.randint(2, max_state_bits)
    while budget > 0:
        w = min(budget, rng.choice([1, 2, 3, 4, 4, 6, 8]))
        kind = rng.choice(["output", "local"])
        states.append(Variable(f"s{len(states)}", BitVec(w), kind))
        budget -= w
    inputs: list[Variable] = []
    budget = rng.randint(0, max_input_bits)
    while budget > 0:
        w = min(budget, rng.choice([1, 2]))
        inputs.append(Variable(f"i{len(inputs)}", BitVec(w), "input"))
        budget -= w
    pool = states + inputs
    g = _Gen(rng, pool)

    init_parts = []
    for v in states:
        if rng.random() < 0.8:
            init_parts.append(mk_eq(mk_var(v), mk_bv(rng.randrange(1 << v.sort.width), v.sort.width)))
    if rng.random() < 0.3:
        init_parts.append(g.pred(rng.choice(states).sort.width, 1))
    init = mk_and(*init_parts)

    trans_parts = []
    for v in states:
        if rng.random() < 0.9:
            trans_parts.append(mk_eq(mk_var(v.prime()), g.bv(v.sort.width, rng.randint(1, 3))))
    if rng.random() < 0.25:
        w = rng.choice(states).sort.width
        trans_parts.append(g.pred(w, 1))
    trans = mk_and(*trans_parts)

    inv = TRUE
    if rng.random() < 0.3:
        inv = g.pred(rng.choice(pool).sort.width, 1)

    reach = g.pred(rng.choice(states).sort.width, rng.randint(0, 2))
    system = TransitionSystem(
        name="rand",
        inputs=tuple(inputs),
        outputs=tuple(v for v in states if v.kind == "output"),
        locals=tuple(v for v in states if v.kind == "local"),
        init=init, trans=trans, inv=inv,
    )
    return ReachabilityTask("QF_BV", system, f"qry_{seed}", "rch", reach)
