"""Explicit-state reachability for small bit-vector systems.

This is the ground truth the solver-backed engines are tested against, so
it never talks to a solver: conditions are evaluated directly (vectorised
with numpy) and the state graph is searched breadth first.

A search node is a pair (state, input). Initial nodes satisfy ``I and Inv``;
from a node (s, u) every successor state s' with ``T(s, u, s') and Inv(s, u)
and Inv(s', u)`` is reached, paired with every input; a node is bad when it
satisfies the target condition.
"""

from __future__ import annotations

import time

import numpy as np

from moxicheck.system import ReachabilityTask, Trace, Verdict
from moxicheck.terms import (
    ArraySort, BitVecSort, BoolSort, Term, Variable, conjuncts, free_vars,
)

__all__ = ["OracleLimitExceeded", "enumerate_check", "vector_eval", "reachable_states"]

DEFAULT_STATE_BITS = 20
DEFAULT_INPUT_BITS = 8
_MAX_WIDTH = 62
_CHUNK = 1 << 20

U64 = np.uint64


class OracleLimitExceeded(Exception):
    pass


def _width(sort) -> int:
    if isinstance(sort, BoolSort):
        return 1
    if isinstance(sort, BitVecSort):
        return sort.width
    raise OracleLimitExceeded(f"sort {sort} is outside the explicit-state oracle's domain")


# ---------------------------------------------------------------- vector evaluation

def _mask(w: int):
    return U64((1 << w) - 1)


def _signed(x, w: int):
    x = x.astype(np.int64)
    return x - ((x >> (w - 1)) & 1) * np.int64(1 << w)


def _udiv(a, b, w):
    safe = np.where(b == 0, U64(1), b)
    return np.where(b == 0, _mask(w), a // safe)


def _urem(a, b, w):
    safe = np.where(b == 0, U64(1), b)
    return np.where(b == 0, a, a % safe)


def _neg(a, w):
    return (~a + U64(1)) & _mask(w)


def _sdiv(a, b, w):
    ms, mt = (a >> U64(w - 1)) & U64(1), (b >> U64(w - 1)) & U64(1)
    aa = np.where(ms == 1, _neg(a, w), a)
    bb = np.where(mt == 1, _neg(b, w), b)
    q = _udiv(aa, bb, w)
    return np.where(ms != mt, _neg(q, w), q)


def _srem(a, b, w):
    ms, mt = (a >> U64(w - 1)) & U64(1), (b >> U64(w - 1)) & U64(1)
    aa = np.where(ms == 1, _neg(a, w), a)
    bb = np.where(mt == 1, _neg(b, w), b)
    r = _urem(aa, bb, w)
    return np.where(ms == 1, _neg(r, w), r)


def _smod(a, b, w):
    m = _mask(w)
    ms, mt = (a >> U64(w - 1)) & U64(1), (b >> U64(w - 1)) & U64(1)
    aa = np.where(ms == 1, _neg(a, w), a)
    bb = np.where(mt == 1, _neg(b, w), b)
    u = _urem(aa, bb, w)
    out = np.where((ms == 1) & (mt == 0), (_neg(u, w) + b) & m,
                   np.where((ms == 0) & (mt == 1), (u + b) & m,
                            np.where((ms == 1) & (mt == 1), _neg(u, w), u)))
    return np.where(u == 0, u, out)


def _shift_amount(b):
    return np.minimum(b, U64(63))


def vector_eval(t: Term, env: dict[Variable, np.ndarray], n: int) -> np.ndarray:
    """Evaluate ``t`` on ``n`` assignments at once.

    Bit-vectors are uint64 arrays, Booleans bool arrays. Widths above 62 bits
    are rejected rather than approximated.
    """
    memo: dict[int, np.ndarray] = {}

    def go(node: Term) -> np.ndarray:
        key = id(node)
        if key in memo:
            return memo[key]
        out = _eval_node(node, go, env, n)
        memo[key] = out
        return out

    return go(t)


def _eval_node(node: Term, go, env, n):
    sort = node.sort
    if isinstance(sort, ArraySort):
        raise OracleLimitExceeded("arrays are outside the explicit-state oracle's domain")
    if isinstance(sort, BitVecSort) and sort.width > _MAX_WIDTH:
        raise OracleLimitExceeded(f"bit-vector width {sort.width} exceeds {_MAX_WIDTH}")
    op = node.op
    if op == "var":
        try:
            return env[node.value]
        except KeyError:
            raise OracleLimitExceeded(f"unbound variable {node.value}") from None
    if op == "const":
        if isinstance(sort, BoolSort):
            return np.full(n, bool(node.value))
        if isinstance(sort, BitVecSort):
            return np.full(n, node.value, dtype=U64)
        raise OracleLimitExceeded(f"sort {sort} is outside the explicit-state oracle's domain")
    if op == "ite":
        c = go(node.args[0])
        return np.where(c, go(node.args[1]), go(node.args[2]))
    xs = [go(a) for a in node.args]
    if op == "not":
        return ~xs[0]
    if op == "and":
        return np.logical_and.reduce(xs)
    if op == "or":
        return np.logical_or.reduce(xs)
    if op == "xor":
        return np.logical_xor.reduce(xs)
    if op == "=>":
        acc = xs[-1]
        for x in reversed(xs[:-1]):
            acc = ~x | acc
        return acc
    if op == "=":
        acc = np.ones(n, dtype=bool)
        for a, b in zip(xs, xs[1:]):
            acc &= a == b
        return acc
    if op == "distinct":
        acc = np.ones(n, dtype=bool)
        for i in range(len(xs)):
            for j in range(i + 1, len(xs)):
                acc &= xs[i] != xs[j]
        return acc

    w = node.args[0].sort.width if isinstance(node.args[0].sort, BitVecSort) else None
    if w is None:
        raise OracleLimitExceeded(f"operator {op} is outside the explicit-state oracle's domain")
    m = _mask(w)
    a = xs[0]
    b = xs[1] if len(xs) > 1 else None
    if op == "bvnot":
        return ~a & m
    if op == "bvneg":
        return _neg(a, w)
    if op in ("bvand", "bvor", "bvxor", "bvadd", "bvmul"):
        acc = a
        for x in xs[1:]:
            if op == "bvand":
                acc = acc & x
            elif op == "bvor":
                acc = acc | x
            elif op == "bvxor":
                acc = acc ^ x
            elif op == "bvadd":
                acc = (acc + x) & m
            else:
                acc = (acc * x) & m
        return acc
    if op == "bvsub":
        return (a + _neg(b, w)) & m
    if op == "bvudiv":
        return _udiv(a, b, w)
    if op == "bvurem":
        return _urem(a, b, w)
    if op == "bvsdiv":
        return _sdiv(a, b, w)
    if op == "bvsrem":
        return _srem(a, b, w)
    if op == "bvsmod":
        return _smod(a, b, w)
    if op == "bvshl":
        return np.where(b >= U64(w), U64(0), (a << _shift_amount(b)) & m)
    if op == "bvlshr":
        return np.where(b >= U64(w), U64(0), a >> _shift_amount(b))
    if op == "bvashr":
        sh = np.minimum(b, U64(w)).astype(np.int64)
        return (_signed(a, w) >> sh).astype(U64) & m
    if op == "bvnand":
        return ~(a & b) & m
    if op == "bvnor":
        return ~(a | b) & m
    if op == "bvxnor":
        return ~(a ^ b) & m
    if op == "bvcomp":
        return (a == b).astype(U64)
    if op == "bvult":
        return a < b
    if op == "bvule":
        return a <= b
    if op == "bvugt":
        return a > b
    if op == "bvuge":
        return a >= b
    if op in ("bvslt", "bvsle", "bvsgt", "bvsge"):
        sa, sb = _signed(a, w), _signed(b, w)
        return {"bvslt": sa < sb, "bvsle": sa <= sb, "bvsgt": sa > sb, "bvsge": sa >= sb}[op]
    if op == "concat":
        acc = np.zeros(n, dtype=U64)
        for arg, x in zip(node.args, xs):
            acc = (acc << U64(arg.sort.width)) | x
        return acc
    if op == "extract":
        hi, lo = node.indices
        return (a >> U64(lo)) & _mask(hi - lo + 1)
    if op == "zero_extend":
        return a
    if op == "sign_extend":
        return _signed(a, w).astype(U64) & _mask(node.sort.width)
    if op == "repeat":
        acc = np.zeros(n, dtype=U64)
        for _ in range(node.indices[0]):
            acc = (acc << U64(w)) | a
        return acc
    if op in ("rotate_left", "rotate_right"):
        r = node.indices[0] % w
        if op == "rotate_right":
            r = (w - r) % w
        if r == 0:
            return a
        return ((a << U64(r)) | (a >> U64(w - r))) & m
    raise OracleLimitExceeded(f"operator {op} is outside the explicit-state oracle's domain")


# ---------------------------------------------------------------- state packing

class _Layout:
    def __init__(self, variables):
        self.vars = list(variables)
        self.offsets = {}
        off = 0
        for v in self.vars:
            self.offsets[v] = off
            off += _width(v.sort)
        self.bits = off

    def unpack(self, packed: np.ndarray, as_var) -> dict[Variable, np.ndarray]:
        env = {}
        for v in self.vars:
            w = _width(v.sort)
            field = (packed >> U64(self.offsets[v])) & _mask(w)
            env[as_var(v)] = field != 0 if isinstance(v.sort, BoolSort) else field
        return env

    def pack(self, values: dict[Variable, np.ndarray], n: int) -> np.ndarray:
        out = np.zeros(n, dtype=U64)
        for v in self.vars:
            x = values[v]
            if x.dtype == bool:
                x = x.astype(U64)
            out |= x << U64(self.offsets[v])
        return out

    def decode(self, packed: int) -> dict[str, object]:
        out = {}
        for v in self.vars:
            w = _width(v.sort)
            val = (int(packed) >> self.offsets[v]) & ((1 << w) - 1)
            out[v.name] = bool(val) if isinstance(v.sort, BoolSort) else val
        return out


def _functional_parts(trans: Term, state_vars) -> dict[Variable, Term]:
    """Find conjuncts ``v' = e`` with ``e`` free of primed variables."""
    defs: dict[Variable, Term] = {}
    for c in conjuncts(trans):
        if c.op != "=" or len(c.args) != 2:
            continue
        for lhs, rhs in (c.args, reversed(c.args)):
            if lhs.op == "var" and lhs.value.primed:
                base = lhs.value.unprime()
                if base in state_vars and base not in defs and not any(v.primed for v in free_vars(rhs)):
                    defs[base] = rhs
                    break
    return defs


# ---------------------------------------------------------------- search

class _Search:
    def __init__(self, task: ReachabilityTask, state_bit_limit: int, input_bit_limit: int):
        if task.logic != "QF_BV":
            raise OracleLimitExceeded(f"logic {task.logic} is outside the explicit-state oracle's domain")
        sys = task.system
        self.task = task
        self.states = _Layout(sys.state_vars)
        self.inputs = _Layout(sys.inputs)
        if self.states.bits > state_bit_limit:
            raise OracleLimitExceeded(f"{self.states.bits} state bits exceed the limit of {state_bit_limit}")
        if self.inputs.bits > input_bit_limit:
            raise OracleLimitExceeded(f"{self.inputs.bits} input bits exceed the limit of {input_bit_limit}")
        self.init, self.trans = sys.conjoined()
        self.reach = task.reach
        self.n_states = 1 << self.states.bits
        self.n_inputs = 1 << self.inputs.bits
        defs = _functional_parts(sys.trans, set(sys.state_vars))
        self.defs = defs
        self.free_next = _Layout([v for v in sys.state_vars if v not in defs])

    def _env(self, s: np.ndarray, u: np.ndarray, nxt: np.ndarray | None = None):
        env = self.states.unpack(s, lambda v: v)
        env.update(self.inputs.unpack(u, lambda v: v))
        if nxt is not None:
            env.update(self.states.unpack(nxt, lambda v: v.prime()))
        return env

    def _pairs(self, states: np.ndarray, start: int, stop: int):
        """Node pairs (state, input) for flat indices in [start, stop)."""
        idx = np.arange(start, stop, dtype=U64)
        m = U64(self.n_inputs)
        return states[(idx // m).astype(np.int64)], idx % m

    def holds(self, term: Term, s, u, nxt=None) -> np.ndarray:
        return vector_eval(term, self._env(s, u, nxt), len(s))

    def initial_nodes(self):
        all_states = np.arange(self.n_states, dtype=U64)
        total = self.n_states * self.n_inputs
        ss, us = [], []
        for start in range(0, total, _CHUNK):
            s, u = self._pairs(all_states, start, min(total, start + _CHUNK))
            ok = self.holds(self.init, s, u)
            ss.append(s[ok])
            us.append(u[ok])
        return np.concatenate(ss), np.concatenate(us)

    def successors(self, s: np.ndarray, u: np.ndarray):
        """All (parent_state, parent_input, next_state) edges out of the given nodes."""
        n = len(s)
        if n == 0:
            empty = np.zeros(0, dtype=U64)
            return empty, empty, empty
        out_s, out_u, out_n = [], [], []
        n_free = 1 << self.free_next.bits
        per_chunk = max(1, _CHUNK // n_free)
        for lo in range(0, n, per_chunk):
            cs, cu = s[lo:lo + per_chunk], u[lo:lo + per_chunk]
            cn = len(cs)
            env = self._env(cs, cu)
            fixed = {v: vector_eval(e, env, cn) for v, e in self.defs.items()}
            rep_s = np.repeat(cs, n_free)
            rep_u = np.repeat(cu, n_free)
            values = {v: np.repeat(x, n_free) for v, x in fixed.items()}
            frees = np.tile(np.arange(n_free, dtype=U64), cn)
            values.update(self.free_next.unpack(frees, lambda v: v))
            nxt = self.states.pack(values, cn * n_free)
            ok = self.holds(self.trans, rep_s, rep_u, nxt)
            out_s.append(rep_s[ok])
            out_u.append(rep_u[ok])
            out_n.append(nxt[ok])
        return np.concatenate(out_s), np.concatenate(out_u), np.concatenate(out_n)

    def bad_inputs(self, states: np.ndarray):
        """For each state, the smallest input making the target true, else -1."""
        n = len(states)
        if n == 0:
            return np.zeros(0, dtype=np.int64)
        best = np.full(n, -1, dtype=np.int64)
        for u0 in range(self.n_inputs):
            todo = best < 0
            if not todo.any():
                break
            u = np.full(n, u0, dtype=U64)
            hit = self.holds(self.reach, states, u) & todo
            best[hit] = u0
        return best

    def _expand(self, states: np.ndarray):
        total = len(states) * self.n_inputs
        for start in range(0, total, _CHUNK):
            s, u = self._pairs(states, start, min(total, start + _CHUNK))
            yield s, u

    def run(self, deadline=None, stop=None):
        """Breadth-first search; returns (trace or None, reachable state set)."""
        level = np.full(self.n_states, -1, dtype=np.int64)
        parent_s = np.zeros(self.n_states, dtype=U64)
        parent_u = np.zeros(self.n_states, dtype=U64)

        init_s, init_u = self.initial_nodes()
        bad0 = self.holds(self.reach, init_s, init_u)
        if bad0.any():
            i = int(np.argmax(bad0))
            return self._trace([int(init_s[i])], [int(init_u[i])]), None

        depth = 0
        node_s, node_u = init_s, init_u
        frontier_iter = [(node_s, node_u)]
        while True:
            if stop is not None and stop.is_set():
                raise _Stopped()
            if deadline is not None and time.monotonic() > deadline:
                raise _Stopped()
            depth += 1
            found_s, found_u, found_n = [], [], []
            for s, u in frontier_iter:
                ps, pu, nx = self.successors(s, u)
                found_s.append(ps)
                found_u.append(pu)
                found_n.append(nx)
            ps, pu, nx = np.concatenate(found_s), np.concatenate(found_u), np.concatenate(found_n)
            fresh = level[nx.astype(np.int64)] < 0
            ps, pu, nx = ps[fresh], pu[fresh], nx[fresh]
            new, first = np.unique(nx, return_index=True)
            if len(new) == 0:
                reached = np.flatnonzero(level >= 0).astype(U64)
                return None, np.union1d(reached, np.unique(init_s))
            idx = new.astype(np.int64)
            level[idx] = depth
            parent_s[idx] = ps[first]
            parent_u[idx] = pu[first]
            bad = self.bad_inputs(new)
            hit = np.flatnonzero(bad >= 0)
            if len(hit):
                last = int(new[hit[0]])
                chain_s, chain_u = [last], [int(bad[hit[0]])]
                cur = last
                for _ in range(depth):
                    chain_s.append(int(parent_s[cur]))
                    chain_u.append(int(parent_u[cur]))
                    cur = int(parent_s[cur])
                chain_s.reverse()
                chain_u.reverse()
                return self._trace(chain_s, chain_u), None
            frontier_iter = self._expand(new)

    def _trace(self, states: list[int], inputs: list[int]) -> Trace:
        out = []
        for s, u in zip(states, inputs):
            d = self.states.decode(s)
            d.update(self.inputs.decode(u))
            out.append(d)
        return Trace(out)


class _Stopped(Exception):
    pass


def enumerate_check(task: ReachabilityTask, state_bit_limit: int = DEFAULT_STATE_BITS,
                    input_bit_limit: int = DEFAULT_INPUT_BITS, *,
                    timeout: float | None = None, stop=None) -> Verdict:
    """Decide the task by exhaustive search; unsafe traces are shortest."""
    start = time.monotonic()
    search = _Search(task, state_bit_limit, input_bit_limit)
    deadline = None if timeout is None else start + timeout
    try:
        trace, _ = search.run(deadline, stop)
    except _Stopped:
        return Verdict("unknown", "oracle", reason="timeout" if not (stop and stop.is_set()) else "cancelled",
                       time=time.monotonic() - start)
    elapsed = time.monotonic() - start
    if trace is None:
        return Verdict("safe", "oracle", time=elapsed)
    return Verdict("unsafe", "oracle", trace=trace, k=trace.depth, time=elapsed)


def reachable_states(task: ReachabilityTask, state_bit_limit: int = DEFAULT_STATE_BITS,
                     input_bit_limit: int = DEFAULT_INPUT_BITS) -> list[dict[str, object]]:
    """All reachable states of the system, ignoring the target condition."""
    from dataclasses import replace

    from moxicheck.terms import FALSE

    quiet = replace(task, reach=FALSE)
    search = _Search(quiet, state_bit_limit, input_bit_limit)
    _, reached = search.run()
    return [search.states.decode(s) for s in reached]
