"""Reader for the JSON form of MoXI tasks.

Accepted layout::

    {"commands": [
        {"command": "set-logic", "logic": "QF_BV"},
        {"command": "define-system", "symbol": "main",
         "input": [...], "output": [{"symbol": "s", "sort": SORT}], "local": [...],
         "init": TERM, "trans": TERM, "inv": TERM},
        {"command": "check-system", "symbol": "main",
         "input": [...], "output": [...], "local": [...],
         "reachable": [{"symbol": "rch_1", "formula": TERM}],
         "query": [{"symbol": "qry_rch_1", "formulas": ["rch_1"]}]}]}

    SORT = {"identifier": "BitVec", "indices": [3]} | {"identifier": "Array", "parameters": [SORT, SORT]}
    TERM = {"identifier": NAME-or-LITERAL} | {"identifier": OP, "indices": [...], "args": [TERM, ...]}

An identifier may also be given as ``{"symbol": ..., "indices": [...]}``.
A trailing ``'`` on a variable name refers to its next-state value.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import IO, Any

from moxicheck.system import SUPPORTED_LOGICS, ReachabilityTask, TransitionSystem
from moxicheck.terms import (
    BOOL, INT, REAL, ArraySort, BitVecSort, BoolSort, IntSort, RealSort, Sort,
    SortError, Term, Variable, free_vars, mk_app, mk_bool, mk_bv, mk_int, mk_real,
    mk_var,
)

__all__ = ["ParseError", "UnsupportedFeature", "SymbolError", "SortError",
           "parse_task", "parse_file", "task_to_json", "tasks_to_json", "sort_to_json",
           "term_to_json", "check_logic"]


class FrontendError(Exception):
    pass


class ParseError(FrontendError):
    pass


class UnsupportedFeature(FrontendError):
    def __init__(self, feature: str, message: str | None = None):
        self.feature = feature
        super().__init__(message or f"unsupported feature: {feature}")


class SymbolError(FrontendError):
    pass


_UNSUPPORTED_SYSTEM_KEYS = {"subsys"}
_UNSUPPORTED_CHECK_KEYS = {"fairness", "assumption", "current", "fair", "justice"}
_SYSTEM_KEYS = {"command", "symbol", "input", "output", "local", "init", "trans", "inv"}
_CHECK_KEYS = {"command", "symbol", "input", "output", "local", "reachable", "query"}
_KNOWN_MOXI_COMMANDS = {"declare-sort", "define-sort", "declare-const", "define-const",
                        "define-fun", "declare-enum-sort", "exit"}

_LOGIC_SORTS = {
    "QF_BV": (BoolSort, BitVecSort),
    "QF_ABV": (BoolSort, BitVecSort, ArraySort),
    "QF_LIA": (BoolSort, IntSort),
    "QF_NIA": (BoolSort, IntSort),
    "QF_LRA": (BoolSort, RealSort),
    "QF_NRA": (BoolSort, RealSort),
}

_BV_BIN = re.compile(r"#b[01]+\Z")
_BV_HEX = re.compile(r"#x[0-9a-fA-F]+\Z")
_INT = re.compile(r"-?[0-9]+\Z")
_DEC = re.compile(r"-?[0-9]+\.[0-9]+\Z")
_RAT = re.compile(r"-?[0-9]+/[0-9]+\Z")
_BVN = re.compile(r"bv([0-9]+)\Z")


# ---------------------------------------------------------------- helpers

def _expect(obj, typ, what):
    if not isinstance(obj, typ):
        raise ParseError(f"{what}: expected {typ.__name__}, got {type(obj).__name__}")
    return obj


def _ident(node: dict, what: str) -> tuple[str, tuple[int, ...]]:
    if "identifier" not in node:
        raise ParseError(f"{what}: missing 'identifier'")
    ident = node["identifier"]
    indices = node.get("indices", [])
    if isinstance(ident, dict):
        extra = set(ident) - {"symbol", "indices"}
        if extra:
            raise ParseError(f"{what}: unexpected identifier keys {sorted(extra)}")
        indices = list(ident.get("indices", [])) + list(indices)
        ident = ident.get("symbol")
    _expect(ident, str, what)
    _expect(indices, list, f"{what} indices")
    for i in indices:
        if isinstance(i, bool) or not isinstance(i, int):
            raise ParseError(f"{what}: indices must be integers, got {i!r}")
    return ident, tuple(indices)


def parse_sort(node: Any) -> Sort:
    _expect(node, dict, "sort")
    extra = set(node) - {"identifier", "indices", "parameters"}
    if extra:
        raise ParseError(f"sort: unexpected keys {sorted(extra)}")
    name, indices = _ident(node, "sort")
    params = _expect(node.get("parameters", []), list, "sort parameters")
    try:
        if name == "Bool" and not indices and not params:
            return BOOL
        if name == "Int" and not indices and not params:
            return INT
        if name == "Real" and not indices and not params:
            return REAL
        if name == "BitVec" and len(indices) == 1 and not params:
            return BitVecSort(indices[0])
        if name == "Array" and len(params) == 2 and not indices:
            return ArraySort(parse_sort(params[0]), parse_sort(params[1]))
    except SortError as e:
        raise ParseError(str(e)) from None
    raise ParseError(f"unknown or malformed sort {name!r}")


def sort_to_json(sort: Sort) -> dict:
    if isinstance(sort, BitVecSort):
        return {"identifier": "BitVec", "indices": [sort.width]}
    if isinstance(sort, ArraySort):
        return {"identifier": "Array", "parameters": [sort_to_json(sort.index), sort_to_json(sort.element)]}
    return {"identifier": str(sort)}


def _literal(text: str) -> Term | None:
    if text == "true":
        return mk_bool(True)
    if text == "false":
        return mk_bool(False)
    if _BV_BIN.match(text):
        return mk_bv(int(text[2:], 2), len(text) - 2)
    if _BV_HEX.match(text):
        return mk_bv(int(text[2:], 16), 4 * (len(text) - 2))
    if _INT.match(text):
        return mk_int(int(text))
    if _DEC.match(text):
        return mk_real(Fraction(text))
    if _RAT.match(text):
        p, q = text.split("/")
        if int(q) == 0:
            raise ParseError(f"rational literal {text!r} has zero denominator")
        return mk_real(Fraction(int(p), int(q)))
    return None


# ---------------------------------------------------------------- terms

class _Scope:
    def __init__(self, variables: dict[str, Variable], allow_primes: bool, where: str):
        self.variables = variables
        self.allow_primes = allow_primes
        self.where = where


def _parse_term(node: Any, scope: _Scope) -> Term:
    _expect(node, dict, f"{scope.where} term")
    extra = set(node) - {"identifier", "indices", "args"}
    if extra:
        raise ParseError(f"{scope.where}: unexpected term keys {sorted(extra)}")
    name, indices = _ident(node, f"{scope.where} term")
    args = _expect(node.get("args", []), list, f"{scope.where} args")
    if args:
        sub = [_parse_term(a, scope) for a in args]
        return mk_app(name, sub, indices)
    if indices:
        m = _BVN.match(name)
        if m and len(indices) == 1:
            try:
                return mk_bv(int(m.group(1)), indices[0])
            except SortError as e:
                raise SortError(f"{scope.where}: {e}") from None
        raise ParseError(f"{scope.where}: indexed leaf {name!r} {list(indices)}")
    return _leaf(name, scope)


def _leaf(name: str, scope: _Scope) -> Term:
    primed = name.endswith("'")
    base = name[:-1] if primed else name
    var = scope.variables.get(base)
    if var is not None:
        if not primed:
            return mk_var(var)
        if not var.is_state:
            raise SymbolError(f"{scope.where}: input variable {base!r} cannot be primed")
        if not scope.allow_primes:
            raise SymbolError(f"{scope.where}: primed variable {name!r} not allowed here")
        return mk_var(var.prime())
    lit = _literal(name)
    if lit is not None:
        return lit
    if name in ("and", "or"):
        return mk_app(name, [])
    raise SymbolError(f"{scope.where}: undefined symbol {name!r}")


def term_to_json(t: Term) -> dict:
    from moxicheck.smt import literal_text

    if t.op == "var":
        return {"identifier": str(t.value)}
    if t.op == "const":
        return {"identifier": literal_text(t.value, t.sort, json_form=True)}
    out: dict[str, Any] = {"identifier": t.op}
    if t.indices:
        out["indices"] = list(t.indices)
    out["args"] = [term_to_json(a) for a in t.args]
    return out


# ---------------------------------------------------------------- logic

_NONLINEAR_OK = {"QF_NIA", "QF_NRA", "QF_BV", "QF_ABV"}


def _is_ground(t: Term) -> bool:
    return not free_vars(t)


def check_logic(t: Term, logic: str, where: str = "term") -> None:
    """Reject sorts and nonlinear arithmetic that ``logic`` does not admit."""
    allowed = _LOGIC_SORTS[logic]
    seen: set[int] = set()
    stack = [t]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        sorts = [n.sort] + ([n.value.sort] if n.op == "var" else [])
        for s in sorts:
            while isinstance(s, ArraySort) and ArraySort in allowed:
                if not isinstance(s.index, allowed) or not isinstance(s.element, allowed):
                    raise SortError(f"{where}: sort {s} not allowed in {logic}")
                s = s.element
            if not isinstance(s, allowed):
                raise SortError(f"{where}: sort {s} not allowed in {logic}")
        if logic not in _NONLINEAR_OK:
            if n.op == "*" and sum(not _is_ground(a) for a in n.args) > 1:
                raise SortError(f"{where}: nonlinear multiplication in {logic}")
            if n.op in ("/", "div", "mod") and any(not _is_ground(a) for a in n.args[1:]):
                raise SortError(f"{where}: division by a non-constant in {logic}")
        stack.extend(n.args)


# ---------------------------------------------------------------- commands

def _parse_decls(entries: Any, kind: str, what: str) -> list[Variable]:
    out = []
    for e in _expect(entries, list, what):
        _expect(e, dict, what)
        extra = set(e) - {"symbol", "sort"}
        if extra:
            raise ParseError(f"{what}: unexpected keys {sorted(extra)}")
        if "symbol" not in e or "sort" not in e:
            raise ParseError(f"{what}: declarations need 'symbol' and 'sort'")
        name = _expect(e["symbol"], str, f"{what} symbol")
        if not name or name.endswith("'"):
            raise SymbolError(f"{what}: invalid variable name {name!r}")
        out.append(Variable(name, parse_sort(e["sort"]), kind))
    return out


def _signature(cmd: dict, where: str) -> tuple[list[Variable], list[Variable], list[Variable]]:
    ins = _parse_decls(cmd.get("input", []), "input", f"{where} input")
    outs = _parse_decls(cmd.get("output", []), "output", f"{where} output")
    locs = _parse_decls(cmd.get("local", []), "local", f"{where} local")
    seen = set()
    for v in ins + outs + locs:
        if v.name in seen:
            raise SymbolError(f"{where}: duplicate variable {v.name!r}")
        seen.add(v.name)
    return ins, outs, locs


def _bool_condition(node, scope: _Scope, logic: str) -> Term:
    t = _parse_term(node, scope)
    if not isinstance(t.sort, BoolSort):
        raise SortError(f"{scope.where}: condition has sort {t.sort}, expected Bool")
    check_logic(t, logic, scope.where)
    return t


def _define_system(cmd: dict, logic: str) -> TransitionSystem:
    name = _expect(cmd.get("symbol"), str, "define-system symbol")
    for key in _UNSUPPORTED_SYSTEM_KEYS:
        if key in cmd:
            raise UnsupportedFeature(f":{key}", f"define-system {name}: attribute :{key} is not supported")
    extra = set(cmd) - _SYSTEM_KEYS
    if extra:
        raise ParseError(f"define-system {name}: unexpected keys {sorted(extra)}")
    ins, outs, locs = _signature(cmd, f"define-system {name}")
    table = {v.name: v for v in ins + outs + locs}
    conds = {}
    for key, primes in (("init", False), ("trans", True), ("inv", False)):
        if key in cmd:
            conds[key] = _bool_condition(cmd[key], _Scope(table, primes, f"{name} :{key}"), logic)
    return TransitionSystem(name, tuple(ins), tuple(outs), tuple(locs), **conds)


def _check_system(cmd: dict, logic: str, systems: dict[str, TransitionSystem]) -> list[ReachabilityTask]:
    name = _expect(cmd.get("symbol"), str, "check-system symbol")
    for key in _UNSUPPORTED_CHECK_KEYS:
        if key in cmd:
            raise UnsupportedFeature(f":{key}", f"check-system {name}: attribute :{key} is not supported")
    extra = set(cmd) - _CHECK_KEYS
    if extra:
        raise ParseError(f"check-system {name}: unexpected keys {sorted(extra)}")
    if name not in systems:
        raise SymbolError(f"check-system: undefined system {name!r}")
    system = systems[name]
    ins, outs, locs = _signature(cmd, f"check-system {name}")
    for got, want, label in ((ins, system.inputs, "input"), (outs, system.outputs, "output"),
                             (locs, system.locals, "local")):
        if [(v.name, v.sort) for v in got] != [(v.name, v.sort) for v in want]:
            raise SymbolError(f"check-system {name}: {label} signature does not match define-system")

    table = {v.name: v for v in system.variables}
    reachables: dict[str, Term] = {}
    for r in _expect(cmd.get("reachable", []), list, "reachable"):
        _expect(r, dict, "reachable entry")
        if set(r) - {"symbol", "formula"} or "symbol" not in r or "formula" not in r:
            raise ParseError(f"check-system {name}: reachable entries need 'symbol' and 'formula'")
        sym = _expect(r["symbol"], str, "reachable symbol")
        if sym in reachables:
            raise SymbolError(f"check-system {name}: duplicate reachable condition {sym!r}")
        reachables[sym] = _bool_condition(r["formula"], _Scope(table, False, f"{name} :reachable {sym}"), logic)

    tasks = []
    seen_queries = set()
    for q in _expect(cmd.get("query", []), list, "query"):
        _expect(q, dict, "query entry")
        if set(q) - {"symbol", "formulas"} or "symbol" not in q or "formulas" not in q:
            raise ParseError(f"check-system {name}: query entries need 'symbol' and 'formulas'")
        qname = _expect(q["symbol"], str, "query symbol")
        if qname in seen_queries:
            raise SymbolError(f"check-system {name}: duplicate query {qname!r}")
        seen_queries.add(qname)
        refs = _expect(q["formulas"], list, "query formulas")
        if len(refs) != 1:
            raise UnsupportedFeature(
                ":query", f"query {qname}: exactly one reachable condition per query is supported, got {len(refs)}")
        ref = _expect(refs[0], str, "query formula reference")
        if ref not in reachables:
            raise SymbolError(f"query {qname}: undefined reachable condition {ref!r}")
        tasks.append(ReachabilityTask(logic, system, qname, ref, reachables[ref]))
    return tasks


def parse_document(doc: Any) -> list[ReachabilityTask]:
    _expect(doc, dict, "task document")
    if set(doc) - {"commands"} or "commands" not in doc:
        raise ParseError("task document must be an object with a single 'commands' array")
    logic: str | None = None
    systems: dict[str, TransitionSystem] = {}
    tasks: list[ReachabilityTask] = []
    for cmd in _expect(doc["commands"], list, "commands"):
        _expect(cmd, dict, "command")
        kind = cmd.get("command")
        if kind == "set-logic":
            if set(cmd) - {"command", "logic"}:
                raise ParseError("set-logic: unexpected keys")
            logic = _expect(cmd.get("logic"), str, "set-logic logic")
            if logic not in SUPPORTED_LOGICS:
                raise UnsupportedFeature(logic, f"logic {logic} is not supported")
        elif kind in ("define-system", "check-system"):
            if logic is None:
                raise ParseError(f"{kind} before set-logic")
            if kind == "define-system":
                system = _define_system(cmd, logic)
                if system.name in systems:
                    raise SymbolError(f"duplicate system {system.name!r}")
                systems[system.name] = system
            else:
                tasks.extend(_check_system(cmd, logic, systems))
        elif kind in _KNOWN_MOXI_COMMANDS:
            raise UnsupportedFeature(kind, f"command {kind} is not supported")
        else:
            raise ParseError(f"unknown command {kind!r}")
    return tasks


def parse_task(source: bytes | str | IO) -> list[ReachabilityTask]:
    """Parse a JSON task document into one task per query."""
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(f"input is not UTF-8: {e}") from None
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON: {e}") from None
    return parse_document(doc)


def parse_file(path) -> list[ReachabilityTask]:
    with open(path, "rb") as fh:
        return parse_task(fh)


def _decls(vs) -> list[dict]:
    return [{"symbol": v.name, "sort": sort_to_json(v.sort)} for v in vs]


def tasks_to_json(tasks: list[ReachabilityTask]) -> dict:
    """Render tasks back into a document that parses to equal tasks."""
    commands: list[dict] = []
    logic = None
    emitted: dict[str, TransitionSystem] = {}
    checks: dict[tuple[str, str], dict] = {}
    for t in tasks:
        sys = t.system
        if t.logic != logic:
            commands.append({"command": "set-logic", "logic": t.logic})
            logic = t.logic
            emitted = {}
        if emitted.get(sys.name) is not sys:
            if sys.name in emitted:
                raise ValueError(f"two different systems named {sys.name!r}")
            commands.append({
                "command": "define-system", "symbol": sys.name,
                "input": _decls(sys.inputs), "output": _decls(sys.outputs), "local": _decls(sys.locals),
                "init": term_to_json(sys.init), "trans": term_to_json(sys.trans), "inv": term_to_json(sys.inv),
            })
            emitted[sys.name] = sys
        key = (logic, sys.name)
        chk = checks.get(key)
        if chk is None:
            chk = {"command": "check-system", "symbol": sys.name,
                   "input": _decls(sys.inputs), "output": _decls(sys.outputs), "local": _decls(sys.locals),
                   "reachable": [], "query": []}
            checks[key] = chk
            commands.append(chk)
        if not any(r["symbol"] == t.reach_name for r in chk["reachable"]):
            chk["reachable"].append({"symbol": t.reach_name, "formula": term_to_json(t.reach)})
        chk["query"].append({"symbol": t.query_name, "formulas": [t.reach_name]})
    return {"commands": commands}


def task_to_json(task: ReachabilityTask) -> dict:
    return tasks_to_json([task])
