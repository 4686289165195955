"""Build MoXI JSON task documents from SMT-LIB-style text, for fixtures."""

from __future__ import annotations

import json

from moxicheck.smt import parse_sexpr


def term(text_or_sx):
    sx = parse_sexpr(text_or_sx) if isinstance(text_or_sx, str) else text_or_sx
    if isinstance(sx, str):
        return {"identifier": sx}
    head, *rest = sx
    node = {}
    if isinstance(head, list):  # (_ extract i j) applied
        assert head[0] == "_"
        node["identifier"] = head[1]
        node["indices"] = [int(i) for i in head[2:]]
    elif head == "_":  # indexed constant such as (_ bv5 8)
        return {"identifier": rest[0], "indices": [int(i) for i in rest[1:]]}
    else:
        node["identifier"] = head
    node["args"] = [term(a) for a in rest]
    return node


def sort(text_or_sx):
    sx = parse_sexpr(text_or_sx) if isinstance(text_or_sx, str) else text_or_sx
    if isinstance(sx, str):
        return {"identifier": sx}
    if sx[0] == "_":
        return {"identifier": sx[1], "indices": [int(i) for i in sx[2:]]}
    return {"identifier": sx[0], "parameters": [sort(p) for p in sx[1:]]}


def decls(pairs):
    return [{"symbol": name, "sort": sort(s)} for name, s in pairs]


def document(logic, *, inputs=(), outputs=(), locals_=(), init=None, trans=None, inv=None,
             reach=None, reaches=None, name="main", queries=None) -> dict:
    """One system, one check-system; ``reach`` is a single target named ``rch_1``."""
    def sig():
        return {"input": decls(inputs), "output": decls(outputs), "local": decls(locals_)}

    system = {"command": "define-system", "symbol": name, **sig()}
    for key, val in (("init", init), ("trans", trans), ("inv", inv)):
        if val is not None:
            system[key] = term(val)
    reaches = dict(reaches or {})
    if reach is not None:
        reaches["rch_1"] = reach
    if queries is None:
        queries = {f"qry_{r}": [r] for r in reaches}
    check = {"command": "check-system", "symbol": name, **sig(),
             "reachable": [{"symbol": r, "formula": term(f)} for r, f in reaches.items()],
             "query": [{"symbol": q, "formulas": fs} for q, fs in queries.items()]}
    return {"commands": [{"command": "set-logic", "logic": logic}, system, check]}


def dumps(doc) -> str:
    return json.dumps(doc, indent=1)
