import pytest
from conftest import counter_task, task_from

from moxicheck.engines.bmc import bmc_check
from moxicheck.engines.kinduction import kind_check, kind_check_incremental
from moxicheck.system import validate_trace

BOTH = [kind_check, kind_check_incremental]


@pytest.mark.parametrize("fn", BOTH)
def test_counter_safe_at_one(fig1, cfg, fn):
    v = fn(fig1, 10, cfg)
    assert v.status == "safe" and v.k == 1


@pytest.mark.parametrize("fn", BOTH)
def test_step_one_variant_unsafe_via_base_case(cfg, fn):
    t = counter_task(step="#b001")
    v = fn(t, 10, cfg)
    assert v.status == "unsafe" and v.k == 2 and v.trace.depth == 1
    assert validate_trace(t, v.trace)


@pytest.mark.parametrize("fn", BOTH)
def test_initial_target_found_at_first_base_case(cfg, fn):
    v = fn(counter_task(init="(= s #b001)", reach="(= s #b001)"), 10, cfg)
    assert v.status == "unsafe" and v.k == 1 and v.trace.states == [{"s": 1}]


@pytest.mark.parametrize("fn", BOTH)
def test_false_target_is_one_inductive(cfg, fn):
    v = fn(counter_task(reach="false"), 10, cfg)
    assert v.status == "safe" and v.k == 1


@pytest.mark.parametrize("fn", BOTH)
def test_needs_deeper_induction(cfg, fn):
    # reachable loop 0..3; the unreachable loop 4 <-> 5 (entered from 6) may jump
    # to the target 7 at any time, so no k closes the step case until repeated
    # states are banned; then the longest target-free simple path 6, 4, 5 gives k = 4
    t = task_from(inputs=[("x", "Bool")], outputs=[("s", "(_ BitVec 3)")], init="(= s #b000)",
                  trans="(= s' (ite (bvult s #b100) (bvand (bvadd s #b001) #b011)"
                        " (ite x #b111 (ite (= s #b100) #b101 #b100))))",
                  reach="(= s #b111)")
    plain = fn(t, 6, cfg)
    assert plain.status == "unknown" and plain.reason == "k exhausted"
    sp = fn(t, 6, cfg, simple_path=True)
    assert sp.status == "safe" and sp.k == 4


@pytest.mark.parametrize("fn", BOTH)
def test_invariance_condition_cuts_the_only_path(cfg, fn):
    v = fn(counter_task(inv="(not (= s #b010))", reach="(= s #b100)"), 10, cfg)
    assert v.status == "safe"


def test_base_case_matches_bmc(cfg):
    t = counter_task(step="#b001", reach="(= s #b101)")
    v = kind_check_incremental(t, 20, cfg)
    b = bmc_check(t, 20, cfg)
    assert v.status == b.status == "unsafe"
    assert v.k - 1 == b.k == 5


def test_depth_stress_incremental_vs_reference(cfg):
    t = counter_task(width=8, step="#x01", init="(= s #x00)", reach="(= s #x28)")
    inc = kind_check_incremental(t, 60, cfg)
    ref = kind_check(t, 60, cfg)
    assert (inc.status, inc.k) == (ref.status, ref.k) == ("unsafe", 41)
    assert inc.trace.states == [{"s": i} for i in range(41)]
    # at most two check-sat calls per k
    assert inc.stats["check_sats"] <= 2 * inc.k
    assert inc.stats["asserts"] < ref.stats["asserts"]


def test_incremental_assert_counts_are_linear(cfg):
    t = counter_task(width=8, step="#x01", init="(= s #x00)", reach="(= s #xc8)")
    counts = {k: kind_check_incremental(t, k, cfg).stats["permanent_asserts"] for k in (10, 20, 40)}
    assert counts[20] - counts[10] == (counts[40] - counts[20]) / 2
    ref = {k: kind_check(t, k, cfg).stats["permanent_asserts"] for k in (10, 20)}
    assert ref[20] > 3.5 * ref[10]


def test_inputs_in_target(cfg):
    t = task_from(inputs=[("x", "Bool")], outputs=[("s", "(_ BitVec 2)")], init="(= s #b00)",
                  trans="(= s' (bvadd s #b01))", reach="(and x (= s #b10))")
    for fn in BOTH:
        v = fn(t, 10, cfg)
        assert v.status == "unsafe" and v.trace.depth == 2
        assert v.trace.states[-1]["x"] is True
        assert validate_trace(t, v.trace)
