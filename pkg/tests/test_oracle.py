import numpy as np
import pytest
from conftest import counter_task, task_from
from hypothesis import given, settings
from hypothesis import strategies as st

from moxicheck.engines.oracle import OracleLimitExceeded, enumerate_check, reachable_states, vector_eval
from moxicheck.system import validate_trace
from moxicheck.terms import BitVec, Variable, evaluate, mk_app, mk_bv, mk_var


def test_counter_reachable_set(fig1):
    assert sorted(s["s"] for s in reachable_states(fig1)) == [0, 2, 4, 6]
    assert enumerate_check(fig1).status == "safe"


def test_step_one_variant_shortest_trace():
    v = enumerate_check(counter_task(step="#b001"))
    assert v.status == "unsafe" and v.trace.states == [{"s": 0}, {"s": 1}]


def test_invariance_condition_blocks_path():
    assert enumerate_check(counter_task(inv="(not (= s #b010))", reach="(= s #b100)")).status == "safe"


def test_nonfunctional_transition():
    # s' is only bounded, not determined: every value below s + 2 is a successor
    t = task_from(outputs=[("s", "(_ BitVec 4)")], init="(= s #x0)",
                  trans="(and (bvult s' (bvadd s #x2)) (bvugt s' s))", reach="(= s #x9)")
    v = enumerate_check(t)
    assert v.status == "unsafe" and v.trace.depth == 9
    assert validate_trace(t, v.trace)


def test_input_in_init_and_target():
    t = task_from(inputs=[("x", "(_ BitVec 2)")], outputs=[("s", "(_ BitVec 2)")],
                  init="(= s x)", trans="(= s' s)", reach="(and (= s #b11) (= x #b00))")
    v = enumerate_check(t)
    assert v.status == "unsafe" and v.trace.depth == 1
    assert validate_trace(t, v.trace)


def test_limits():
    with pytest.raises(OracleLimitExceeded):
        enumerate_check(counter_task(width=24, step="#x000001", init="(= s #x000000)", reach="false"))
    with pytest.raises(OracleLimitExceeded):
        enumerate_check(task_from(inputs=[("x", "(_ BitVec 9)")], outputs=[("s", "Bool")], reach="s"))
    with pytest.raises(OracleLimitExceeded):
        enumerate_check(task_from("QF_LIA", outputs=[("x", "Int")], reach="(= x 1)"))


_OPS = ["bvadd", "bvsub", "bvmul", "bvudiv", "bvurem", "bvsdiv", "bvsrem", "bvsmod", "bvand", "bvor",
        "bvxor", "bvshl", "bvlshr", "bvashr", "bvnand", "bvnor", "bvxnor", "bvcomp"]
_CMP = ["bvult", "bvule", "bvugt", "bvuge", "bvslt", "bvsle", "bvsgt", "bvsge", "="]


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 12), st.sampled_from(_OPS + _CMP), st.lists(st.integers(0, 2**12 - 1), min_size=8, max_size=8))
def test_vectorised_evaluation_matches_scalar(w, op, raw):
    a, b = Variable("a", BitVec(w)), Variable("b", BitVec(w))
    vals = [r % (1 << w) for r in raw]
    t = mk_app(op, [mk_var(a), mk_var(b)])
    env = {a: np.array(vals[:4], dtype=np.uint64), b: np.array(vals[4:], dtype=np.uint64)}
    got = vector_eval(t, env, 4)
    want = [evaluate(t, {a: x, b: y}) for x, y in zip(vals[:4], vals[4:])]
    assert [type(w_)(g) for g, w_ in zip(got.tolist(), want)] == want


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 10), st.integers(0, 1023), st.integers(0, 9))
def test_vectorised_extend_extract_rotate(w, raw, k):
    a = Variable("a", BitVec(w))
    x = raw % (1 << w)
    hi = k % w
    for t in (mk_app("extract", [mk_var(a)], (hi, 0)), mk_app("sign_extend", [mk_var(a)], (k,)),
              mk_app("zero_extend", [mk_var(a)], (k,)), mk_app("rotate_left", [mk_var(a)], (k,)),
              mk_app("rotate_right", [mk_var(a)], (k,)), mk_app("repeat", [mk_var(a)], (2,)),
              mk_app("concat", [mk_var(a), mk_bv(1, 2)]), mk_app("bvnot", [mk_var(a)]),
              mk_app("bvneg", [mk_var(a)])):
        got = vector_eval(t, {a: np.array([x], dtype=np.uint64)}, 1)
        assert int(got[0]) == evaluate(t, {a: x}), str(t)
