"""SMT-LIB2 text backend: serialization, solver processes, model values.

A :class:`SolverSession` is one child process spoken to over stdin/stdout.
Nothing here is solver specific beyond the default command lines in
:data:`SOLVERS`.
"""

from __future__ import annotations

import itertools
import logging
import os
import re
import select
import shutil
import signal
import subprocess
import threading
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from moxicheck.terms import (
    ArraySort, ArrayValue, BitVecSort, BoolSort, IntSort, RealSort, Sort, Term,
    Variable, free_vars,
)

__all__ = [
    "SOLVERS", "SolverConfig", "SolverSession", "SatResult", "SAT", "UNSAT",
    "SolverError", "SolverSpawnError", "SolverDialectError", "SolverProtocolError",
    "SolverTimeout", "StackUnderflow", "Cancelled", "Opaque",
    "open_session", "serialize", "literal_text", "symbol_name", "sort_text",
    "parse_sexpr", "parse_value",
]

log = logging.getLogger(__name__)

SOLVERS: dict[str, tuple[str, ...]] = {
    "z3": ("z3", "-in", "-smt2"),
    "yices": ("yices-smt2", "--incremental"),
    "cvc5": ("cvc5", "--incremental", "--produce-models", "--lang", "smt2"),
    "mathsat": ("mathsat",),
}
_BASENAMES = {"z3": "z3", "yices-smt2": "yices", "yices": "yices", "cvc5": "cvc5", "mathsat": "mathsat"}

_session_ids = itertools.count()


class SolverError(Exception):
    pass


class SolverSpawnError(SolverError):
    pass


class SolverDialectError(SolverError):
    pass


class SolverProtocolError(SolverError):
    pass


class SolverTimeout(SolverError):
    pass


class StackUnderflow(SolverError):
    pass


class Cancelled(Exception):
    """Raised inside an engine when its run has been cancelled from outside."""


# ---------------------------------------------------------------- serialization

_SIMPLE = re.compile(r"[A-Za-z~!@$%^&*_\-+=<>.?/][A-Za-z0-9~!@$%^&*_\-+=<>.?/]*\Z")
_RESERVED = {"par", "NUMERAL", "DECIMAL", "STRING", "_", "!", "as", "let", "exists",
             "forall", "match", "true", "false",
             # command names are reserved words too
             "assert", "check-sat", "check-sat-assuming", "declare-const", "declare-fun",
             "declare-sort", "define-fun", "define-sort", "echo", "exit", "get-assertions",
             "get-info", "get-model", "get-option", "get-value", "pop", "push", "reset",
             "set-info", "set-logic", "set-option"}


def _quote(name: str) -> str:
    if _SIMPLE.match(name) and name not in _RESERVED:
        return name
    if "|" in name or "\\" in name:
        raise ValueError(f"symbol {name!r} cannot be rendered in SMT-LIB2")
    return f"|{name}|"


def symbol_name(v: Variable, timed_names: bool = True) -> str:
    """Render a variable; timed copies become ``name__at_<frame>``."""
    if v.frame is not None:
        raw = f"{v.name}__at_{v.frame}" if timed_names else f"{v.name}@{v.frame}"
    else:
        raw = v.name + ("'" if v.primed else "")
    return _quote(raw) if timed_names else raw


def sort_text(sort: Sort) -> str:
    return str(sort)


def _int_text(n: int) -> str:
    return str(n) if n >= 0 else f"(- {-n})"


def _real_text(q: Fraction, json_form: bool) -> str:
    if json_form:
        if q.denominator == 1:
            return f"{q.numerator}.0"
        return f"{q.numerator}/{q.denominator}"
    a = abs(q)
    body = f"{a.numerator}.0" if a.denominator == 1 else f"(/ {a.numerator}.0 {a.denominator}.0)"
    return body if q >= 0 else f"(- {body})"


def literal_text(value, sort: Sort, json_form: bool = False) -> str:
    if isinstance(sort, BoolSort):
        return "true" if value else "false"
    if isinstance(sort, BitVecSort):
        return "#b" + format(value, f"0{sort.width}b")
    if isinstance(sort, IntSort):
        return str(value) if json_form else _int_text(value)
    if isinstance(sort, RealSort):
        return _real_text(Fraction(value), json_form)
    if isinstance(sort, ArraySort):
        if json_form:
            raise ValueError("array literals have no JSON form")
        out = f"((as const {sort}) {literal_text(value.default, sort.element)})"
        for k, v in value.entries:
            out = f"(store {out} {literal_text(k, sort.index)} {literal_text(v, sort.element)})"
        return out
    raise TypeError(f"unknown sort {sort!r}")  # pragma: no cover


def serialize(t: Term, timed_names: bool = True) -> str:
    """Canonical SMT-LIB2 text for a term. Deterministic and iterative."""
    memo: dict[Term, str] = {}
    stack: list[tuple[Term, bool]] = [(t, False)]
    while stack:
        node, ready = stack.pop()
        if node in memo:
            continue
        if node.op == "var":
            memo[node] = symbol_name(node.value, timed_names)
        elif node.op == "const":
            memo[node] = literal_text(node.value, node.sort)
        elif not ready:
            stack.append((node, True))
            stack.extend((a, False) for a in reversed(node.args) if a not in memo)
        else:
            head = node.op
            if node.indices:
                head = f"(_ {node.op} {' '.join(map(str, node.indices))})"
            memo[node] = f"({head} {' '.join(memo[a] for a in node.args)})"
    return memo[t]


# ---------------------------------------------------------------- s-expressions

_TOKEN = re.compile(r'\s+|;[^\n]*|\(|\)|"(?:[^"]|"")*"|\|[^|]*\||[^\s()";|]+')


def _tokens(text: str):
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise SolverProtocolError(f"cannot tokenize solver output near {text[pos:pos + 40]!r}")
        tok = m.group(0)
        pos = m.end()
        if tok[0].isspace() or tok[0] == ";":
            continue
        yield tok


def parse_sexpr(text: str):
    """Parse one s-expression into nested lists of atom strings."""
    items = _parse_all(text)
    if len(items) != 1:
        raise SolverProtocolError(f"expected one s-expression, got {len(items)}")
    return items[0]


def _parse_all(text: str) -> list:
    stack: list[list] = [[]]
    for tok in _tokens(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise SolverProtocolError("unbalanced ')' in solver output")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok[1:-1] if tok[0] == "|" else tok)
    if len(stack) != 1:
        raise SolverProtocolError("unbalanced '(' in solver output")
    return stack[0]


def _to_text(sx) -> str:
    if isinstance(sx, list):
        return "(" + " ".join(_to_text(x) for x in sx) + ")"
    return sx


@dataclass(frozen=True)
class Opaque:
    """A model value this backend cannot turn into a literal (e.g. algebraic numbers)."""

    text: str

    def __str__(self):
        return self.text


def _numeral(sx) -> Fraction:
    if isinstance(sx, str):
        try:
            return Fraction(sx)
        except (ValueError, ZeroDivisionError):
            raise SolverProtocolError(f"not a number: {sx!r}") from None
    if sx and sx[0] == "-" and len(sx) == 2:
        return -_numeral(sx[1])
    if sx and sx[0] == "/" and len(sx) == 3:
        den = _numeral(sx[2])
        if den == 0:
            raise SolverProtocolError("zero denominator in solver value")
        return _numeral(sx[1]) / den
    if sx and sx[0] == "to_real" and len(sx) == 2:
        return _numeral(sx[1])
    raise SolverProtocolError(f"not a numeral: {_to_text(sx)}")


def parse_value(sx, sort: Sort):
    """Turn a solver value into an IR literal; unknown forms become :class:`Opaque`."""
    try:
        return _parse_value(sx, sort)
    except SolverProtocolError:
        if isinstance(sort, (RealSort, ArraySort)):
            return Opaque(_to_text(sx))
        raise


def _parse_value(sx, sort: Sort):
    if isinstance(sort, BoolSort):
        if sx in ("true", "false"):
            return sx == "true"
        raise SolverProtocolError(f"bad Boolean value {_to_text(sx)}")
    if isinstance(sort, BitVecSort):
        w = sort.width
        if isinstance(sx, str) and sx.startswith("#b"):
            if len(sx) - 2 != w:
                raise SolverProtocolError(f"bit-vector {sx} does not have width {w}")
            return int(sx[2:], 2)
        if isinstance(sx, str) and sx.startswith("#x"):
            if 4 * (len(sx) - 2) != w:
                raise SolverProtocolError(f"bit-vector {sx} does not have width {w}")
            return int(sx[2:], 16)
        if isinstance(sx, list) and len(sx) == 3 and sx[0] == "_" and sx[1].startswith("bv"):
            if int(sx[2]) != w:
                raise SolverProtocolError(f"bit-vector {_to_text(sx)} does not have width {w}")
            val = int(sx[1][2:])
            if val >= 1 << w:
                raise SolverProtocolError(f"bit-vector {_to_text(sx)} out of range")
            return val
        raise SolverProtocolError(f"bad bit-vector value {_to_text(sx)}")
    if isinstance(sort, IntSort):
        q = _numeral(sx)
        if q.denominator != 1:
            raise SolverProtocolError(f"non-integral Int value {_to_text(sx)}")
        return int(q)
    if isinstance(sort, RealSort):
        return _numeral(sx)
    if isinstance(sort, ArraySort):
        if isinstance(sx, list) and len(sx) == 2 and isinstance(sx[0], list) and sx[0][:2] == ["as", "const"]:
            return ArrayValue(_parse_value(sx[1], sort.element))
        if isinstance(sx, list) and len(sx) == 4 and sx[0] == "store":
            base = _parse_value(sx[1], sort)
            return base.store(_parse_value(sx[2], sort.index), _parse_value(sx[3], sort.element))
        raise SolverProtocolError(f"unsupported array value {_to_text(sx)}")
    raise SolverProtocolError(f"unknown sort {sort}")  # pragma: no cover


# ---------------------------------------------------------------- config

@dataclass
class SolverConfig:
    name: str
    executable: str
    args: tuple[str, ...] = ()
    logic: str = "QF_BV"
    timeout: float | None = None
    dump_dir: str | None = None

    @classmethod
    def resolve(cls, solver: str | None = None, logic: str = "QF_BV", **kw) -> "SolverConfig":
        """Build a config from a solver name (``z3``) or an executable path.

        With no solver given, ``MOXI_SOLVER_PATH`` is used if set, else z3.
        ``MOXI_SOLVER_PATH`` also stands in when a named solver is not on PATH.
        """
        override = os.environ.get("MOXI_SOLVER_PATH")
        if solver is None:
            solver = override or "z3"
        if solver in SOLVERS:
            exe, *args = SOLVERS[solver]
            if shutil.which(exe) is None and override:
                exe = override
            return cls(solver, exe, tuple(args), logic, **kw)
        base = os.path.basename(solver)
        name = _BASENAMES.get(base, base)
        args = SOLVERS[name][1:] if name in SOLVERS else ()
        return cls(name, solver, tuple(args), logic, **kw)

    def with_logic(self, logic: str) -> "SolverConfig":
        return SolverConfig(self.name, self.executable, self.args, logic, self.timeout, self.dump_dir)

    @property
    def argv(self) -> list[str]:
        return [self.executable, *self.args]


@dataclass(frozen=True)
class SatResult:
    kind: str
    reason: str = ""

    @property
    def is_sat(self) -> bool:
        return self.kind == "sat"

    @property
    def is_unsat(self) -> bool:
        return self.kind == "unsat"

    @property
    def is_unknown(self) -> bool:
        return self.kind == "unknown"

    @classmethod
    def unknown(cls, reason: str) -> "SatResult":
        return cls("unknown", reason)

    def __str__(self):
        return self.kind if not self.reason else f"{self.kind} ({self.reason})"


SAT = SatResult("sat")
UNSAT = SatResult("unsat")


@dataclass
class SessionStats:
    asserts: int = 0
    permanent_asserts: int = 0
    check_sats: int = 0
    pushes: int = 0
    pops: int = 0
    declares: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


# ---------------------------------------------------------------- sessions

class SolverSession:
    """An incremental conversation with one solver process.

    ``stop`` is an optional :class:`threading.Event`; when set, a pending
    ``check_sat`` kills the process and raises :class:`Cancelled`.
    ``deadline`` is an absolute :func:`time.monotonic` bound on the session.
    """

    def __init__(self, cfg: SolverConfig, stop: threading.Event | None = None,
                 deadline: float | None = None):
        self.cfg = cfg
        self.stop = stop
        self.deadline = deadline
        self.stats = SessionStats()
        self.depth = 0
        self._scopes: list[set[Variable]] = [set()]
        self._buf = ""
        self._model_ok = False
        self._dump = None
        self.closed = True
        if cfg.dump_dir:
            Path(cfg.dump_dir).mkdir(parents=True, exist_ok=True)
            fname = f"{cfg.name}-{os.getpid()}-{next(_session_ids)}.smt2"
            self._dump = open(Path(cfg.dump_dir) / fname, "w")
        try:
            self.proc = subprocess.Popen(
                cfg.argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL, start_new_session=True)
        except OSError as e:
            self._close_dump()
            raise SolverSpawnError(f"cannot start {cfg.argv[0]!r}: {e}") from None
        self.closed = False
        self._fd = self.proc.stdout.fileno()
        try:
            self._send("(set-option :produce-models true)")
            self._send(f"(set-logic {cfg.logic})")
            self._send("(get-info :name)")
            while True:
                resp = self._read(self._wait_limit(10.0))
                if isinstance(resp, list) and resp and resp[0] == ":name":
                    break
                if resp == "unsupported" or (isinstance(resp, list) and resp and resp[0] == "error"):
                    raise SolverDialectError(f"{cfg.name} rejected logic {cfg.logic}: {_to_text(resp)}")
                if resp == "success":
                    continue
                raise SolverProtocolError(f"unexpected reply while opening session: {_to_text(resp)}")
        except SolverTimeout:
            self.close()
            raise SolverSpawnError(f"{cfg.name} did not answer") from None
        except BaseException:
            self.close()
            raise

    # -- context manager
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass

    # -- low level I/O
    def _log(self, text: str):
        if self._dump is not None:
            self._dump.write(text + "\n")
        log.debug("%s | %s", self.cfg.name, text)

    def _send(self, cmd: str):
        if self.closed:
            raise SolverError("session is closed")
        self._log(cmd)
        try:
            self.proc.stdin.write((cmd + "\n").encode())
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as e:
            self._kill()
            raise SolverProtocolError(f"{self.cfg.name} exited unexpectedly: {e}") from None

    def _wait_limit(self, limit: float | None) -> float | None:
        ends = [x for x in (
            None if limit is None else time.monotonic() + limit,
            self.deadline) if x is not None]
        return min(ends) if ends else None

    def _take(self):
        """Pop one complete s-expression off the buffer, if there is one."""
        depth = 0
        started = False
        pos = 0
        text = self._buf
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                return None
            tok = m.group(0)
            if m.end() == len(text) and tok[0] not in "()" and not tok[0].isspace() and tok[0] != ";":
                return None  # atom may continue in the next chunk
            pos = m.end()
            if tok[0].isspace() or tok[0] == ";":
                continue
            if tok == "(":
                depth += 1
                started = True
            elif tok == ")":
                depth -= 1
            else:
                started = True
            if started and depth == 0:
                chunk, self._buf = text[:pos], text[pos:]
                return parse_sexpr(chunk)
        return None

    def _read(self, until: float | None):
        while True:
            item = self._take()
            if item is not None:
                self._log("; " + _to_text(item))
                return item
            if self.stop is not None and self.stop.is_set():
                self._kill()
                raise Cancelled()
            now = time.monotonic()
            if until is not None and now >= until:
                self._kill()
                raise SolverTimeout(f"{self.cfg.name} timed out")
            wait = 0.05 if self.stop is not None else None
            if until is not None:
                wait = min(wait, until - now) if wait is not None else until - now
            ready, _, _ = select.select([self._fd], [], [], wait)
            if not ready:
                continue
            data = os.read(self._fd, 65536)
            if not data:
                self._kill()
                raise SolverProtocolError(f"{self.cfg.name} closed its output")
            self._buf += data.decode("utf-8", errors="replace")

    def _kill(self):
        if self.closed:
            return
        self.closed = True
        if self.proc.poll() is None:
            try:
                os.killpg(self.proc.pid, signal.SIGKILL)
            except OSError:
                try:
                    self.proc.kill()
                except OSError:
                    pass
        self.proc.wait()
        for f in (self.proc.stdin, self.proc.stdout):
            try:
                f.close()
            except OSError:
                pass
        self._close_dump()

    def _close_dump(self):
        if self._dump is not None:
            self._dump.close()
            self._dump = None

    # -- commands
    @property
    def declared(self) -> set[Variable]:
        return set().union(*self._scopes)

    def is_declared(self, v: Variable) -> bool:
        return any(v in s for s in self._scopes)

    def declare(self, v: Variable):
        if self.is_declared(v):
            raise SolverError(f"variable {v} declared twice")
        self._send(f"(declare-const {symbol_name(v)} {sort_text(v.sort)})")
        self._scopes[-1].add(v)
        self.stats.declares += 1

    def ensure_declared(self, vs: Iterable[Variable]):
        for v in sorted(set(vs), key=lambda x: (x.frame or 0, x.name)):
            if not self.is_declared(v):
                self.declare(v)

    def assert_term(self, t: Term):
        if not isinstance(t.sort, BoolSort):
            raise SolverError(f"cannot assert a term of sort {t.sort}")
        self.ensure_declared(free_vars(t))
        self._send(f"(assert {serialize(t)})")
        self._model_ok = False
        self.stats.asserts += 1
        if self.depth == 0:
            self.stats.permanent_asserts += 1

    def push(self):
        self._send("(push 1)")
        self.depth += 1
        self._scopes.append(set())
        self._model_ok = False
        self.stats.pushes += 1

    def pop(self):
        if self.depth == 0:
            raise StackUnderflow("pop on an empty assertion stack")
        self._send("(pop 1)")
        self.depth -= 1
        self._scopes.pop()
        self._model_ok = False
        self.stats.pops += 1

    def check_sat(self) -> SatResult:
        self._send("(check-sat)")
        self.stats.check_sats += 1
        try:
            resp = self._read(self._wait_limit(self.cfg.timeout))
        except SolverTimeout:
            return SatResult.unknown("timeout")
        if resp == "sat":
            self._model_ok = True
            return SAT
        if resp == "unsat":
            return UNSAT
        if resp == "unknown":
            return SatResult.unknown(self._reason_unknown())
        raise SolverProtocolError(f"{self.cfg.name}: unexpected reply to check-sat: {_to_text(resp)}")

    def _reason_unknown(self) -> str:
        self._send("(get-info :reason-unknown)")
        try:
            resp = self._read(self._wait_limit(5.0))
        except SolverTimeout:
            return "unknown"
        if isinstance(resp, list) and len(resp) == 2 and resp[0] == ":reason-unknown":
            return _to_text(resp[1]).strip('"')
        return "unknown"

    def get_model(self, vs: Sequence[Variable]) -> dict[Variable, object]:
        if not self._model_ok:
            raise SolverError("no model available: last check-sat was not sat or assertions changed")
        vs = [v for v in vs if self.is_declared(v)]
        if not vs:
            return {}
        self._send(f"(get-value ({' '.join(symbol_name(v) for v in vs)}))")
        resp = self._read(self._wait_limit(30.0))
        if not isinstance(resp, list) or (resp and resp[0] == "error"):
            raise SolverProtocolError(f"{self.cfg.name}: bad reply to get-value: {_to_text(resp)}")
        if len(resp) != len(vs):
            raise SolverProtocolError(f"{self.cfg.name}: get-value returned {len(resp)} values for {len(vs)} symbols")
        out = {}
        for v, pair in zip(vs, resp):
            if not isinstance(pair, list) or len(pair) != 2:
                raise SolverProtocolError(f"bad get-value entry {_to_text(pair)}")
            out[v] = parse_value(pair[1], v.sort)
        return out

    def close(self):
        if self.closed:
            self._close_dump()
            return
        try:
            self._log("(exit)")
            self.proc.stdin.write(b"(exit)\n")
            self.proc.stdin.flush()
        except OSError:
            pass
        try:
            self.proc.wait(timeout=0.5)
        except subprocess.TimeoutExpired:
            pass
        self._kill()
        self.proc.wait()


def open_session(cfg: SolverConfig, stop: threading.Event | None = None,
                 deadline: float | None = None) -> SolverSession:
    return SolverSession(cfg, stop=stop, deadline=deadline)
