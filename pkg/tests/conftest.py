from __future__ import annotations

import shutil
import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).resolve().parent
ROOT = TESTS.parent
BENCH = ROOT / "benchmarks"
sys.path.insert(0, str(TESTS))

from moxi_json import document, dumps  # noqa: E402

from moxicheck.frontend import parse_task  # noqa: E402
from moxicheck.smt import SolverConfig  # noqa: E402

SOLVERS = [s for s, exe in (("z3", "z3"), ("yices", "yices-smt2")) if shutil.which(exe)]


def task_from(logic="QF_BV", **kw):
    [task] = parse_task(dumps(document(logic, **kw)))
    return task


def counter_task(step="#b010", reach="(= (bvurem s #b010) #b001)", init="(= s #b000)", inv=None, width=3):
    return task_from(outputs=[("s", f"(_ BitVec {width})")], init=init,
                     trans=f"(= s' (bvadd s {step}))", inv=inv, reach=reach)


@pytest.fixture(params=SOLVERS)
def cfg(request):
    return SolverConfig.resolve(request.param, "QF_BV")


@pytest.fixture
def z3cfg():
    if "z3" not in SOLVERS:
        pytest.skip("z3 not installed")
    return SolverConfig.resolve("z3", "QF_BV")


@pytest.fixture
def fig1():
    return counter_task()
