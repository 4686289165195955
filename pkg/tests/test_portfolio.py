import os
import time
from pathlib import Path

import pytest
from conftest import counter_task, task_from

from moxicheck.portfolio import run_engine, run_portfolio
from moxicheck.system import validate_trace


def solver_children():
    me = str(os.getpid())
    out = []
    for stat in Path("/proc").glob("[0-9]*/stat"):
        try:
            fields = stat.read_text().rsplit(")", 1)[1].split()
        except OSError:
            continue
        if fields[1] == me and fields[0] != "Z":
            out.append(stat.parent.name)
    return out


def test_kind_wins_where_bmc_cannot_conclude(fig1, cfg):
    v = run_portfolio(fig1, ["bmc", "kind"], cfg, bound=5)
    assert v.status == "safe" and v.engine == "kind"


def test_unsafe_either_engine_gives_valid_trace(cfg):
    t = counter_task(step="#b001")
    v = run_portfolio(t, ["bmc", "kind"], cfg)
    assert v.status == "unsafe" and v.engine in ("bmc", "kind")
    assert validate_trace(t, v.trace)


def test_empty_portfolio_rejected():
    with pytest.raises(ValueError):
        run_portfolio(counter_task(), [])


def test_all_unknown_aggregates_reasons(fig1, cfg):
    v = run_portfolio(fig1, ["bmc", "kind"], cfg, bound=3, max_k=0)
    assert v.status == "unknown" and v.engine == "portfolio"
    assert "bmc: bound exhausted" in v.reason and "kind: k exhausted" in v.reason


def test_losers_are_cancelled_and_reaped(cfg):
    # bmc on a false target would run for a long time; kind proves it at k = 1
    t = counter_task(reach="false", width=8, step="#x01", init="(= s #x00)")
    start = time.monotonic()
    v = run_portfolio(t, ["bmc", "kind", "pdr"], cfg, bound=10**6)
    assert v.status == "safe"
    assert time.monotonic() - start < 20
    time.sleep(0.2)
    assert solver_children() == []


def test_engine_crash_counts_as_unknown(fig1, cfg, monkeypatch):
    import moxicheck.portfolio as pf

    def boom(*a, **k):
        raise RuntimeError("kaput")

    monkeypatch.setattr(pf, "pdr_check", boom)
    v = run_portfolio(fig1, ["pdr", "kind"], cfg)
    assert v.status == "safe" and v.engine == "kind"
    alone = run_portfolio(fig1, ["pdr"], cfg)
    assert alone.status == "unknown" and "kaput" in alone.reason


def test_tie_break_follows_list_order(cfg):
    t = counter_task(init="(= s #b001)", reach="(= s #b001)")
    v = run_portfolio(t, ["oracle", "bmc"], cfg)
    assert v.status == "unsafe"


def test_unknown_engine_name():
    with pytest.raises(ValueError):
        run_engine(counter_task(), "magic")


def test_oracle_limit_is_unknown():
    t = task_from("QF_LIA", outputs=[("x", "Int")], reach="(= x 1)")
    v = run_engine(t, "oracle")
    assert v.status == "unknown" and v.error == "OracleLimitExceeded"
