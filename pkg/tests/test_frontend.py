import copy
import io
import json
from fractions import Fraction

import pytest
from conftest import BENCH, document, dumps, task_from

from moxicheck.frontend import (
    ParseError, SymbolError, UnsupportedFeature, parse_file, parse_task, tasks_to_json,
)
from moxicheck.terms import BitVec, SortError, free_vars

COUNTER = document("QF_BV", outputs=[("s", "(_ BitVec 3)")], init="(= s #b000)",
                   trans="(= s' (bvadd s #b010))", reach="(= (bvurem s #b010) #b001)")


def parse(doc):
    return parse_task(json.dumps(doc))


def test_counter_file_parses_to_one_task():
    [t] = parse_file(BENCH / "counter.json")
    assert t.logic == "QF_BV"
    assert t.query_name == "qry_rch_1" and t.reach_name == "rch_1"
    assert t.system.name == "main"
    [s] = t.system.outputs
    assert s.name == "s" and s.sort == BitVec(3)
    assert str(t.system.init) == "(= s #b000)"
    assert str(t.system.trans) == "(= s' (bvadd s #b010))"
    assert str(t.system.inv) == "true"
    assert str(t.reach) == "(= (bvurem s #b010) #b001)"
    assert free_vars(t.reach) == {s}


def test_parse_accepts_bytes_and_streams():
    text = dumps(COUNTER)
    assert parse_task(text.encode()) == parse_task(io.StringIO(text))


def test_round_trip_is_identity():
    tasks = parse(COUNTER)
    again = parse(tasks_to_json(tasks))
    assert again == tasks


def test_round_trip_theory_tasks():
    for path in sorted((BENCH / "theories").glob("*.json")):
        tasks = parse_file(path)
        assert parse(tasks_to_json(tasks)) == tasks, path.name


def test_one_task_per_query():
    doc = document("QF_BV", outputs=[("s", "(_ BitVec 2)")], init="(= s #b00)",
                   reaches={"r1": "(= s #b11)", "r2": "(= s #b01)"},
                   queries={"q1": ["r1"], "q2": ["r2"], "q3": ["r1"]})
    tasks = parse(doc)
    assert [(t.query_name, t.reach_name) for t in tasks] == [("q1", "r1"), ("q2", "r2"), ("q3", "r1")]


def test_omitted_conditions_default_to_true():
    [t] = parse(document("QF_BV", outputs=[("s", "(_ BitVec 2)")], reach="(= s #b11)"))
    assert str(t.system.init) == str(t.system.trans) == str(t.system.inv) == "true"


def test_literal_forms():
    t = task_from("QF_LRA", outputs=[("x", "Real")], init="(= x (/ 1 3))",
                  trans="(= x' (+ x 0.25 -2))", reach="(> x 3/4)")
    assert t.reach.args[1].value == Fraction(3, 4)
    b = task_from(outputs=[("s", "(_ BitVec 8)")], init="(= s #x0f)", reach="(= s (_ bv200 8))")
    assert b.system.init.args[1].value == 15
    assert b.reach.args[1].value == 200


def test_object_form_identifier():
    doc = copy.deepcopy(COUNTER)
    doc["commands"][2]["reachable"][0]["formula"] = {
        "identifier": "=", "args": [
            {"identifier": {"symbol": "extract", "indices": [0, 0]}, "args": [{"identifier": "s"}]},
            {"identifier": "#b1"}]}
    [t] = parse(doc)
    assert str(t.reach) == "(= ((_ extract 0 0) s) #b1)"


@pytest.mark.parametrize("where,feature", [("define", "subsys"), ("check", "fairness")])
def test_unsupported_attributes_are_named(where, feature):
    doc = copy.deepcopy(COUNTER)
    idx = 1 if where == "define" else 2
    doc["commands"][idx][feature] = []
    with pytest.raises(UnsupportedFeature) as e:
        parse(doc)
    assert e.value.feature == f":{feature}"
    assert feature in str(e.value)


def test_unsupported_logic():
    doc = copy.deepcopy(COUNTER)
    doc["commands"][0]["logic"] = "QF_ABVFP"
    with pytest.raises(UnsupportedFeature):
        parse(doc)


def test_multi_formula_query_is_unsupported():
    doc = document("QF_BV", outputs=[("s", "(_ BitVec 2)")],
                   reaches={"r1": "(= s #b11)", "r2": "(= s #b01)"}, queries={"q": ["r1", "r2"]})
    with pytest.raises(UnsupportedFeature):
        parse(doc)


@pytest.mark.parametrize("mutate,err", [
    (lambda d: d["commands"][1].update(extra=1), ParseError),
    (lambda d: d.update(junk=[]), ParseError),
    (lambda d: d["commands"].pop(0), ParseError),
    (lambda d: d["commands"].append({"command": "frobnicate"}), ParseError),
    (lambda d: d["commands"][2]["output"][0]["sort"].update(indices=[4]), SymbolError),
    (lambda d: d["commands"][2]["query"][0].update(formulas=["nope"]), SymbolError),
    (lambda d: d["commands"][1].update(init={"identifier": "t"}), SymbolError),
    (lambda d: d["commands"][1].update(init={"identifier": "s'"}), SymbolError),
    (lambda d: d["commands"][1].update(init={"identifier": "s"}), SortError),
    (lambda d: d["commands"][1]["output"].append({"symbol": "s", "sort": {"identifier": "Bool"}}), SymbolError),
])
def test_rejections(mutate, err):
    doc = copy.deepcopy(COUNTER)
    mutate(doc)
    with pytest.raises(err):
        parse(doc)


def test_primed_input_rejected():
    with pytest.raises(SymbolError):
        task_from(inputs=[("x", "Bool")], outputs=[("s", "Bool")], trans="(= s x')", reach="s")


def test_malformed_json():
    with pytest.raises(ParseError):
        parse_task("{not json")


def test_nonlinear_term_rejected_in_linear_logic():
    with pytest.raises(SortError):
        task_from("QF_LIA", outputs=[("x", "Int"), ("y", "Int")], trans="(= x' (* x y))", reach="(> x 0)")
    # multiplication by a constant stays linear
    task_from("QF_LIA", outputs=[("x", "Int")], trans="(= x' (* 3 x))", reach="(> x 0)")


def test_sort_outside_logic_rejected():
    with pytest.raises(SortError):
        task_from("QF_LIA", outputs=[("s", "(_ BitVec 2)")], reach="(= s #b11)")
    with pytest.raises(SortError):
        task_from("QF_BV", outputs=[("x", "Int")], reach="(= x 1)")


def test_arrays_in_qf_abv():
    t = task_from("QF_ABV", outputs=[("m", "(Array (_ BitVec 2) (_ BitVec 4))"), ("p", "(_ BitVec 2)")],
                  trans="(and (= m' (store m p #x1)) (= p' (bvadd p #b01)))",
                  reach="(= (select m #b11) #x1)")
    assert str(t.reach) == "(= (select m #b11) #b0001)"
