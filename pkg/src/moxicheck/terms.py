"""Sorted, quantifier-free first-order terms.

Every term carries the sort computed when it was built, so an ill-sorted
application can never exist. Variables come in three flavours: plain
(``s``), primed (``s'``, the next-state view) and timed (``s@3``, the copy
used in an unrolling). Timed variables are what gets sent to a solver.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Iterable, Mapping

__all__ = [
    "Sort", "BoolSort", "BitVecSort", "IntSort", "RealSort", "ArraySort",
    "BOOL", "INT", "REAL", "BitVec", "Array",
    "Variable", "Term", "ArrayValue",
    "TermError", "SortError", "EvalError",
    "TRUE", "FALSE",
    "mk_var", "mk_const", "mk_bool", "mk_bv", "mk_int", "mk_real", "mk_app",
    "mk_and", "mk_or", "mk_not", "mk_eq",
    "substitute", "instantiate", "prime", "free_vars", "conjoin_invariance",
    "check_sort", "evaluate", "conjuncts", "OPERATORS",
]


class TermError(Exception):
    pass


class SortError(TermError):
    pass


class EvalError(TermError):
    pass


# ---------------------------------------------------------------- sorts

class Sort:
    __slots__ = ()


@dataclass(frozen=True)
class BoolSort(Sort):
    def __str__(self):
        return "Bool"


@dataclass(frozen=True)
class IntSort(Sort):
    def __str__(self):
        return "Int"


@dataclass(frozen=True)
class RealSort(Sort):
    def __str__(self):
        return "Real"


@dataclass(frozen=True)
class BitVecSort(Sort):
    width: int

    def __post_init__(self):
        if not isinstance(self.width, int) or isinstance(self.width, bool) or self.width < 1:
            raise SortError(f"bit-vector width must be a positive integer, got {self.width!r}")

    def __str__(self):
        return f"(_ BitVec {self.width})"


@dataclass(frozen=True)
class ArraySort(Sort):
    index: Sort
    element: Sort

    def __post_init__(self):
        if not isinstance(self.index, Sort) or not isinstance(self.element, Sort):
            raise SortError("array index and element must be sorts")

    def __str__(self):
        return f"(Array {self.index} {self.element})"


BOOL = BoolSort()
INT = IntSort()
REAL = RealSort()


def BitVec(width: int) -> BitVecSort:
    return BitVecSort(width)


def Array(index: Sort, element: Sort) -> ArraySort:
    return ArraySort(index, element)


# ---------------------------------------------------------------- values

@dataclass(frozen=True)
class ArrayValue:
    """A concrete array: a default element plus finitely many overrides."""

    default: object
    entries: tuple = ()

    def select(self, index):
        for k, v in self.entries:
            if k == index:
                return v
        return self.default

    def store(self, index, value) -> "ArrayValue":
        rest = [(k, v) for k, v in self.entries if k != index]
        if value != self.default:
            rest.append((index, value))
        return ArrayValue(self.default, tuple(sorted(rest, key=_value_key)))


def _value_key(kv):
    k = kv[0]
    return (type(k).__name__, k if not isinstance(k, ArrayValue) else repr(k))


def _check_value(value, sort: Sort):
    if isinstance(sort, BoolSort):
        if not isinstance(value, bool):
            raise SortError(f"expected a Boolean literal, got {value!r}")
        return value
    if isinstance(sort, BitVecSort):
        if isinstance(value, bool) or not isinstance(value, int):
            raise SortError(f"expected a bit-vector value, got {value!r}")
        if not 0 <= value < (1 << sort.width):
            raise SortError(f"value {value} does not fit in {sort.width} bits")
        return value
    if isinstance(sort, IntSort):
        if isinstance(value, bool) or not isinstance(value, int):
            raise SortError(f"expected an integer literal, got {value!r}")
        return value
    if isinstance(sort, RealSort):
        if isinstance(value, bool) or not isinstance(value, (int, Fraction)):
            raise SortError(f"expected a rational literal, got {value!r}")
        return Fraction(value)
    if isinstance(sort, ArraySort):
        if not isinstance(value, ArrayValue):
            raise SortError(f"expected an array value, got {value!r}")
        _check_value(value.default, sort.element)
        for k, v in value.entries:
            _check_value(k, sort.index)
            _check_value(v, sort.element)
        return value
    raise SortError(f"unknown sort {sort!r}")


# ---------------------------------------------------------------- variables

@dataclass(frozen=True)
class Variable:
    """A declared symbol.

    ``primed`` marks the next-state view; ``frame`` is set on timed copies
    produced by :func:`instantiate`. A timed variable is never primed.
    """

    name: str
    sort: Sort
    kind: str = "local"
    primed: bool = False
    frame: int | None = None

    def __post_init__(self):
        if not self.name:
            raise SortError("variable name must be nonempty")
        if self.kind not in ("input", "output", "local"):
            raise SortError(f"unknown variable kind {self.kind!r}")
        if self.primed and self.kind == "input":
            raise SortError(f"input variable {self.name!r} cannot be primed")
        if self.primed and self.frame is not None:
            raise SortError("timed variables cannot be primed")

    @property
    def is_state(self) -> bool:
        return self.kind != "input"

    def prime(self) -> "Variable":
        if self.frame is not None:
            raise SortError(f"cannot prime timed variable {self}")
        return replace(self, primed=True)

    def unprime(self) -> "Variable":
        return replace(self, primed=False)

    def at(self, frame: int) -> "Variable":
        if frame < 0:
            raise ValueError("frame index must be nonnegative")
        return replace(self, primed=False, frame=frame)

    def base(self) -> "Variable":
        return replace(self, primed=False, frame=None)

    def __str__(self):
        if self.frame is not None:
            return f"{self.name}@{self.frame}"
        return self.name + ("'" if self.primed else "")


# ---------------------------------------------------------------- terms

class Term:
    """Immutable term node with a cached structural hash.

    ``op`` is ``"var"`` (``value`` holds a :class:`Variable`), ``"const"``
    (``value`` holds the literal) or an SMT-LIB operator symbol.
    """

    __slots__ = ("op", "args", "sort", "value", "indices", "_hash")

    def __init__(self, op: str, args: tuple, sort: Sort, value=None, indices: tuple = ()):
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "sort", sort)
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "_hash", hash((op, args, sort, value, indices)))

    def __setattr__(self, name, value):
        raise AttributeError("terms are immutable")

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Term) or self._hash != other._hash:
            return False
        return (self.op == other.op and self.sort == other.sort
                and self.value == other.value and self.indices == other.indices
                and self.args == other.args)

    def __reduce__(self):
        return (Term, (self.op, self.args, self.sort, self.value, self.indices))

    @property
    def is_var(self) -> bool:
        return self.op == "var"

    @property
    def is_const(self) -> bool:
        return self.op == "const"

    def __repr__(self):
        return f"Term({self})"

    def __str__(self):
        from moxicheck.smt import serialize
        return serialize(self, timed_names=False)


def mk_var(v: Variable) -> Term:
    return Term("var", (), v.sort, v)


def mk_const(value, sort: Sort) -> Term:
    return Term("const", (), sort, _check_value(value, sort))


def mk_bool(b: bool) -> Term:
    return Term("const", (), BOOL, bool(b))


def mk_bv(value: int, width: int) -> Term:
    return mk_const(value, BitVecSort(width))


def mk_int(n: int) -> Term:
    return mk_const(n, INT)


def mk_real(q) -> Term:
    return mk_const(Fraction(q), REAL)


TRUE = mk_bool(True)
FALSE = mk_bool(False)


# ---------------------------------------------------------------- signatures

_CORE_NARY = {"and", "or"}
_BV_UNARY = {"bvnot", "bvneg"}
_BV_NARY = {"bvand", "bvor", "bvxor", "bvadd", "bvmul"}
_BV_BINARY = {"bvsub", "bvudiv", "bvurem", "bvsdiv", "bvsrem", "bvsmod",
              "bvshl", "bvlshr", "bvashr", "bvnand", "bvnor", "bvxnor"}
_BV_COMPARE = {"bvult", "bvule", "bvugt", "bvuge", "bvslt", "bvsle", "bvsgt", "bvsge"}
_BV_INDEXED = {"extract": 2, "zero_extend": 1, "sign_extend": 1, "repeat": 1,
               "rotate_left": 1, "rotate_right": 1}
_ARITH_NARY = {"+", "*"}
_ARITH_COMPARE = {"<=", "<", ">=", ">"}

OPERATORS = frozenset(
    {"not", "and", "or", "xor", "=>", "=", "distinct", "ite"}
    | _BV_UNARY | _BV_NARY | _BV_BINARY | _BV_COMPARE | set(_BV_INDEXED)
    | {"concat", "bvcomp", "select", "store"}
    | _ARITH_NARY | _ARITH_COMPARE | {"-", "/", "div", "mod", "abs", "to_real", "to_int", "is_int"}
)


def _arity(op, args, lo, hi=None):
    n = len(args)
    if n < lo or (hi is not None and n > hi):
        want = f"{lo}" if hi == lo else f"{lo}..{hi if hi is not None else 'n'}"
        raise SortError(f"{op} expects {want} arguments, got {n}")


def _same(op, args, sort=None):
    sorts = {a.sort for a in args}
    if len(sorts) > 1:
        raise SortError(f"{op}: argument sorts differ: {', '.join(sorted(map(str, sorts)))}")
    s = args[0].sort
    if sort is not None and not isinstance(s, sort):
        raise SortError(f"{op}: expected {sort.__name__.replace('Sort', '')} arguments, got {s}")
    return s


def _coerce_numeric(args: list[Term]) -> list[Term]:
    # Int literals in a Real context are promoted; Int-sorted variables are not.
    if not any(isinstance(a.sort, RealSort) for a in args):
        return args
    out = []
    for a in args:
        if isinstance(a.sort, IntSort):
            if not a.is_const:
                raise SortError(f"cannot mix Int term {a} with Real arguments")
            a = mk_real(a.value)
        out.append(a)
    return out


def _infer(op: str, args: list[Term], indices: tuple) -> tuple[list[Term], Sort]:
    if op not in OPERATORS:
        raise SortError(f"unknown operator {op!r}")
    if op in _BV_INDEXED:
        if len(indices) != _BV_INDEXED[op] or not all(isinstance(i, int) and i >= 0 for i in indices):
            raise SortError(f"{op} expects {_BV_INDEXED[op]} nonnegative indices, got {indices!r}")
    elif indices:
        raise SortError(f"{op} takes no indices")

    if op == "not":
        _arity(op, args, 1, 1)
        _same(op, args, BoolSort)
        return args, BOOL
    if op in _CORE_NARY:
        if args:
            _same(op, args, BoolSort)
        return args, BOOL
    if op in ("xor", "=>"):
        _arity(op, args, 2)
        _same(op, args, BoolSort)
        return args, BOOL
    if op in ("=", "distinct"):
        _arity(op, args, 2)
        args = _coerce_numeric(args)
        _same(op, args)
        return args, BOOL
    if op == "ite":
        _arity(op, args, 3, 3)
        if not isinstance(args[0].sort, BoolSort):
            raise SortError("ite condition must be Bool")
        branches = _coerce_numeric(list(args[1:]))
        _same(op, branches)
        return [args[0], *branches], branches[0].sort

    if op in _BV_UNARY:
        _arity(op, args, 1, 1)
        return args, _same(op, args, BitVecSort)
    if op in _BV_NARY:
        _arity(op, args, 2)
        return args, _same(op, args, BitVecSort)
    if op in _BV_BINARY:
        _arity(op, args, 2, 2)
        return args, _same(op, args, BitVecSort)
    if op in _BV_COMPARE:
        _arity(op, args, 2, 2)
        _same(op, args, BitVecSort)
        return args, BOOL
    if op == "bvcomp":
        _arity(op, args, 2, 2)
        _same(op, args, BitVecSort)
        return args, BitVecSort(1)
    if op == "concat":
        _arity(op, args, 2)
        for a in args:
            if not isinstance(a.sort, BitVecSort):
                raise SortError(f"concat expects bit-vectors, got {a.sort}")
        return args, BitVecSort(sum(a.sort.width for a in args))
    if op in _BV_INDEXED:
        _arity(op, args, 1, 1)
        s = args[0].sort
        if not isinstance(s, BitVecSort):
            raise SortError(f"{op} expects a bit-vector, got {s}")
        if op == "extract":
            hi, lo = indices
            if not s.width > hi >= lo:
                raise SortError(f"extract {hi} {lo} out of range for width {s.width}")
            return args, BitVecSort(hi - lo + 1)
        if op in ("zero_extend", "sign_extend"):
            return args, BitVecSort(s.width + indices[0])
        if op == "repeat":
            if indices[0] < 1:
                raise SortError("repeat count must be positive")
            return args, BitVecSort(s.width * indices[0])
        return args, s

    if op == "select":
        _arity(op, args, 2, 2)
        a, i = args
        if not isinstance(a.sort, ArraySort):
            raise SortError(f"select expects an array, got {a.sort}")
        if i.sort != a.sort.index:
            raise SortError(f"select index sort {i.sort} does not match {a.sort.index}")
        return args, a.sort.element
    if op == "store":
        _arity(op, args, 3, 3)
        a, i, e = args
        if not isinstance(a.sort, ArraySort):
            raise SortError(f"store expects an array, got {a.sort}")
        if i.sort != a.sort.index or e.sort != a.sort.element:
            raise SortError(f"store arguments do not match {a.sort}")
        return args, a.sort

    # arithmetic
    if op in _ARITH_NARY or op == "-":
        _arity(op, args, 1 if op == "-" else 2)
        args = _coerce_numeric(args)
        return args, _numeric(op, args)
    if op == "/":
        _arity(op, args, 2)
        args = [mk_real(a.value) if isinstance(a.sort, IntSort) and a.is_const else a for a in args]
        s = _numeric(op, args)
        if not isinstance(s, RealSort):
            raise SortError("/ expects Real arguments")
        return args, REAL
    if op in ("div", "mod"):
        _arity(op, args, 2, 2 if op == "mod" else None)
        return args, _same(op, args, IntSort)
    if op == "abs":
        _arity(op, args, 1, 1)
        return args, _numeric(op, args)
    if op in _ARITH_COMPARE:
        _arity(op, args, 2)
        args = _coerce_numeric(args)
        _numeric(op, args)
        return args, BOOL
    if op == "to_real":
        _arity(op, args, 1, 1)
        _same(op, args, IntSort)
        return args, REAL
    if op in ("to_int", "is_int"):
        _arity(op, args, 1, 1)
        _same(op, args, RealSort)
        return args, INT if op == "to_int" else BOOL
    raise SortError(f"unhandled operator {op!r}")  # pragma: no cover


def _numeric(op, args):
    s = _same(op, args)
    if not isinstance(s, (IntSort, RealSort)):
        raise SortError(f"{op} expects Int or Real arguments, got {s}")
    return s


def mk_app(op: str, args: Iterable[Term], indices: Iterable[int] = ()) -> Term:
    """Build a sort-checked application.

    ``and``/``or`` of zero arguments collapse to their identity and of one
    argument to that argument; nothing else is simplified.
    """
    args = list(args)
    indices = tuple(indices)
    for a in args:
        if not isinstance(a, Term):
            raise SortError(f"argument {a!r} is not a term")
    if op in _CORE_NARY and not indices:
        if not args:
            return TRUE if op == "and" else FALSE
        if len(args) == 1:
            _same(op, args, BoolSort)
            return args[0]
    args, sort = _infer(op, args, indices)
    return Term(op, tuple(args), sort, None, indices)


def mk_and(*args: Term) -> Term:
    return mk_app("and", args)


def mk_or(*args: Term) -> Term:
    return mk_app("or", args)


def mk_not(t: Term) -> Term:
    return mk_app("not", [t])


def mk_eq(a: Term, b: Term) -> Term:
    return mk_app("=", [a, b])


def check_sort(t: Term) -> Sort:
    """Re-run the sort checker over the whole tree; returns the root sort."""
    if t.op == "var":
        if t.sort != t.value.sort:
            raise SortError(f"variable {t.value} annotated with {t.sort}")
        return t.sort
    if t.op == "const":
        _check_value(t.value, t.sort)
        return t.sort
    for a in t.args:
        check_sort(a)
    _, sort = _infer(t.op, list(t.args), t.indices)
    if sort != t.sort:
        raise SortError(f"{t.op}: annotated {t.sort}, checker says {sort}")
    return sort


# ---------------------------------------------------------------- traversal

def _rebuild(t: Term, fn: Callable[[Term], Term | None], memo: dict) -> Term:
    hit = memo.get(t)
    if hit is not None:
        return hit
    out = fn(t)
    if out is None:
        if t.args:
            new_args = tuple(_rebuild(a, fn, memo) for a in t.args)
            if any(n is not o for n, o in zip(new_args, t.args)):
                out = Term(t.op, new_args, t.sort, t.value, t.indices)
            else:
                out = t
        else:
            out = t
    memo[t] = out
    return out


def substitute(t: Term, mapping: Mapping[Variable, Term]) -> Term:
    """Simultaneously replace variables; unmapped variables stay put."""
    if not mapping:
        return t
    for v, r in mapping.items():
        if v.sort != r.sort:
            raise SortError(f"cannot substitute {r.sort} term for {v}: {v.sort}")

    def leaf(node):
        if node.op == "var":
            return mapping.get(node.value, node)
        return None

    return _rebuild(t, leaf, {})


def instantiate(t: Term, frame: int) -> Term:
    """Move a term into the unrolling at ``frame``.

    Unprimed state variables and inputs go to ``frame``, primed state
    variables to ``frame + 1``. Already-timed variables are left alone.
    """
    if frame < 0:
        raise ValueError("frame index must be nonnegative")

    def leaf(node):
        if node.op != "var":
            return None
        v = node.value
        if v.frame is not None:
            return node
        return mk_var(v.at(frame + 1 if v.primed else frame))

    return _rebuild(t, leaf, {})


def prime(t: Term) -> Term:
    """Prime every unprimed state variable; inputs are left unprimed."""

    def leaf(node):
        if node.op != "var":
            return None
        v = node.value
        if v.frame is not None:
            raise SortError(f"cannot prime timed variable {v}")
        if v.primed or not v.is_state:
            return node
        return mk_var(v.prime())

    return _rebuild(t, leaf, {})


def free_vars(t: Term) -> frozenset[Variable]:
    out: set[Variable] = set()
    seen: set[int] = set()
    stack = [t]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        if n.op == "var":
            out.add(n.value)
        else:
            stack.extend(n.args)
    return frozenset(out)


def conjuncts(t: Term) -> list[Term]:
    """Flatten nested ``and`` applications."""
    if t.op == "and":
        out = []
        for a in t.args:
            out.extend(conjuncts(a))
        return out
    if t == TRUE:
        return []
    return [t]


def conjoin_invariance(sys) -> tuple[Term, Term]:
    """Return ``(init and inv, trans and inv and inv')`` for a system."""
    inv = sys.inv
    return mk_app("and", [sys.init, inv]), mk_app("and", [sys.trans, inv, prime(inv)])


# ---------------------------------------------------------------- evaluation

def _to_signed(x: int, w: int) -> int:
    return x - (1 << w) if x >> (w - 1) else x


def _bv_udiv(s, t, w):
    return (1 << w) - 1 if t == 0 else s // t


def _bv_urem(s, t, w):
    return s if t == 0 else s % t


def _bv_sdiv(s, t, w):
    m = (1 << w) - 1
    ms, mt = s >> (w - 1), t >> (w - 1)
    if not ms and not mt:
        return _bv_udiv(s, t, w)
    if ms and not mt:
        return -_bv_udiv(-s & m, t, w) & m
    if not ms and mt:
        return -_bv_udiv(s, -t & m, w) & m
    return _bv_udiv(-s & m, -t & m, w)


def _bv_srem(s, t, w):
    m = (1 << w) - 1
    ms, mt = s >> (w - 1), t >> (w - 1)
    if not ms and not mt:
        return _bv_urem(s, t, w)
    if ms and not mt:
        return -_bv_urem(-s & m, t, w) & m
    if not ms and mt:
        return _bv_urem(s, -t & m, w)
    return -_bv_urem(-s & m, -t & m, w) & m


def _bv_smod(s, t, w):
    m = (1 << w) - 1
    ms, mt = s >> (w - 1), t >> (w - 1)
    abs_s = -s & m if ms else s
    abs_t = -t & m if mt else t
    u = _bv_urem(abs_s, abs_t, w)
    if u == 0 or (not ms and not mt):
        return u
    if ms and not mt:
        return (-u + t) & m
    if not ms and mt:
        return (u + t) & m
    return -u & m


def _int_div(a, b):
    if b == 0:
        raise EvalError("integer division by zero has no fixed value")
    r = a % abs(b)
    return (a - r) // b


def _int_mod(a, b):
    if b == 0:
        raise EvalError("integer modulus by zero has no fixed value")
    return a % abs(b)


def _chain(fn, xs):
    return all(fn(a, b) for a, b in zip(xs, xs[1:]))


def _apply(t: Term, xs: list):
    op = t.op
    if op == "not":
        return not xs[0]
    if op == "and":
        return all(xs)
    if op == "or":
        return any(xs)
    if op == "xor":
        acc = False
        for x in xs:
            acc ^= x
        return acc
    if op == "=>":
        acc = xs[-1]
        for x in reversed(xs[:-1]):
            acc = (not x) or acc
        return acc
    if op == "=":
        return _chain(lambda a, b: a == b, xs)
    if op == "distinct":
        return len(set(xs)) == len(xs)
    if op == "ite":
        return xs[1] if xs[0] else xs[2]
    if op == "select":
        return xs[0].select(xs[1])
    if op == "store":
        return xs[0].store(xs[1], xs[2])

    if isinstance(t.sort, BitVecSort) or op in _BV_COMPARE or op == "bvcomp":
        return _apply_bv(t, xs)
    return _apply_arith(t, xs)


def _apply_bv(t: Term, xs: list):
    op = t.op
    w = t.args[0].sort.width
    m = (1 << w) - 1
    if op == "bvnot":
        return ~xs[0] & m
    if op == "bvneg":
        return -xs[0] & m
    if op in ("bvand", "bvor", "bvxor", "bvadd", "bvmul"):
        acc = xs[0]
        for x in xs[1:]:
            if op == "bvand":
                acc &= x
            elif op == "bvor":
                acc |= x
            elif op == "bvxor":
                acc ^= x
            elif op == "bvadd":
                acc = (acc + x) & m
            else:
                acc = (acc * x) & m
        return acc
    a = xs[0]
    b = xs[1] if len(xs) > 1 else None
    if op == "bvsub":
        return (a - b) & m
    if op == "bvudiv":
        return _bv_udiv(a, b, w)
    if op == "bvurem":
        return _bv_urem(a, b, w)
    if op == "bvsdiv":
        return _bv_sdiv(a, b, w)
    if op == "bvsrem":
        return _bv_srem(a, b, w)
    if op == "bvsmod":
        return _bv_smod(a, b, w)
    if op == "bvshl":
        return 0 if b >= w else (a << b) & m
    if op == "bvlshr":
        return 0 if b >= w else a >> b
    if op == "bvashr":
        sa = _to_signed(a, w)
        return (sa >> min(b, w)) & m
    if op == "bvnand":
        return ~(a & b) & m
    if op == "bvnor":
        return ~(a | b) & m
    if op == "bvxnor":
        return ~(a ^ b) & m
    if op == "bvcomp":
        return int(a == b)
    if op == "bvult":
        return a < b
    if op == "bvule":
        return a <= b
    if op == "bvugt":
        return a > b
    if op == "bvuge":
        return a >= b
    if op in ("bvslt", "bvsle", "bvsgt", "bvsge"):
        sa, sb = _to_signed(a, w), _to_signed(b, w)
        return {"bvslt": sa < sb, "bvsle": sa <= sb, "bvsgt": sa > sb, "bvsge": sa >= sb}[op]
    if op == "concat":
        acc = 0
        for arg, x in zip(t.args, xs):
            acc = (acc << arg.sort.width) | x
        return acc
    if op == "extract":
        hi, lo = t.indices
        return (a >> lo) & ((1 << (hi - lo + 1)) - 1)
    if op == "zero_extend":
        return a
    if op == "sign_extend":
        return _to_signed(a, w) & ((1 << t.sort.width) - 1)
    if op == "repeat":
        acc = 0
        for _ in range(t.indices[0]):
            acc = (acc << w) | a
        return acc
    if op in ("rotate_left", "rotate_right"):
        r = t.indices[0] % w
        if op == "rotate_right":
            r = (w - r) % w
        return ((a << r) | (a >> (w - r))) & m if r else a
    raise EvalError(f"cannot evaluate {op}")  # pragma: no cover


def _apply_arith(t: Term, xs: list):
    op = t.op
    if op == "+":
        return sum(xs[1:], xs[0])
    if op == "*":
        acc = xs[0]
        for x in xs[1:]:
            acc = acc * x
        return acc
    if op == "-":
        if len(xs) == 1:
            return -xs[0]
        acc = xs[0]
        for x in xs[1:]:
            acc = acc - x
        return acc
    if op == "/":
        acc = Fraction(xs[0])
        for x in xs[1:]:
            if x == 0:
                raise EvalError("real division by zero has no fixed value")
            acc = acc / x
        return acc
    if op == "div":
        acc = xs[0]
        for x in xs[1:]:
            acc = _int_div(acc, x)
        return acc
    if op == "mod":
        return _int_mod(xs[0], xs[1])
    if op == "abs":
        return abs(xs[0])
    if op == "<=":
        return _chain(lambda a, b: a <= b, xs)
    if op == "<":
        return _chain(lambda a, b: a < b, xs)
    if op == ">=":
        return _chain(lambda a, b: a >= b, xs)
    if op == ">":
        return _chain(lambda a, b: a > b, xs)
    if op == "to_real":
        return Fraction(xs[0])
    if op == "to_int":
        return int(xs[0] // 1)
    if op == "is_int":
        return Fraction(xs[0]).denominator == 1
    raise EvalError(f"cannot evaluate {op}")  # pragma: no cover


def evaluate(t: Term, env: Mapping[Variable, object]):
    """Constant-fold ``t`` under a full assignment of its free variables."""
    memo: dict[Term, object] = {}

    def go(n: Term):
        if n in memo:
            return memo[n]
        if n.op == "var":
            try:
                val = env[n.value]
            except KeyError:
                raise EvalError(f"no value for variable {n.value}") from None
            if not isinstance(val, (bool, int, Fraction, ArrayValue)):
                raise EvalError(f"value of {n.value} is not a literal: {val!r}")
        elif n.op == "const":
            val = n.value
        elif n.op == "ite":
            val = go(n.args[1]) if go(n.args[0]) else go(n.args[2])
        else:
            val = _apply(n, [go(a) for a in n.args])
        if isinstance(n.sort, RealSort) and not isinstance(val, Fraction):
            val = Fraction(val)
        memo[n] = val
        return val

    return go(t)
