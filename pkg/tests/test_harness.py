import filecmp
import math

import numpy as np
import pytest

from jacobisums import characters as ch
from jacobisums.charsums import gauss_all
from jacobisums.equidist import angles_from_subsets, bound_e1_rhs, discrepancy_exact
from jacobisums.errors import ConfigError
from jacobisums.field import build_field
from jacobisums.harness import (EXPERIMENTS, RUN_COLUMNS, WORKERS_ENV, RunConfig, build_subset,
                                build_tail, effective_workers, expand_vary, parse_k_policy,
                                parse_s_policy, parse_size, parse_subset_spec, parse_tail_spec,
                                run_experiment, summarize, sweep)


def test_parse_size():
    assert parse_size("17", 101) == 17
    assert parse_size("sqrtq", 101) == 11
    assert parse_size("q/10", 1009) == 101
    assert parse_size("q-2", 101) == 99
    assert parse_size("q^0.6", 101) == math.ceil(101**0.6)
    assert parse_size("logq^3", 101) == math.ceil(math.log(101) ** 3)
    with pytest.raises(ValueError):
        parse_size("lots", 101)


def test_parse_specs():
    assert parse_subset_spec("full", 101) == ("full",)
    assert parse_subset_spec("random:sqrtq", 101) == ("random", 11)
    assert parse_subset_spec("interval:2:5", 101) == ("interval", 2, 5)
    assert parse_subset_spec("explicit:1,3", 101) == ("explicit", [1, 3])
    for bad in ("random:100", "interval:0:3", "explicit:", "half"):
        with pytest.raises(ConfigError):
            parse_subset_spec(bad, 101)
    assert parse_tail_spec("none", 101, 2) == ("none",)
    assert parse_tail_spec("random:3", 101, 3) == ("random", 3)
    assert parse_tail_spec("explicit:1,2;3,4", 101, 4) == ("explicit", [[1, 2], [3, 4]])
    for spec, m in (("random:3", 2), ("explicit:1", 4), ("full", 6), ("none", 3)):
        with pytest.raises(ConfigError):
            parse_tail_spec(spec, 101, m)
    assert parse_k_policy("fixed:8") == ("fixed", 8)
    assert parse_k_policy("e1") == ("e1",)
    assert parse_s_policy("3") == ("fixed", 3)
    assert parse_s_policy("corollary:0.5") == ("corollary", 0.5)
    for bad in ("fixed:0", "K"):
        with pytest.raises(ConfigError):
            parse_k_policy(bad)
    for bad in ("0", "21", "corollary:0.7"):
        with pytest.raises(ConfigError):
            parse_s_policy(bad)


def test_build_subset_and_tail_streams_differ():
    a1 = build_subset("random:20", 101, [0, 0, 1])
    a2 = build_subset("random:20", 101, [0, 0, 2])
    assert not np.array_equal(a1.indices, a2.indices)
    assert np.array_equal(build_subset("random:20", 101, [0, 0, 1]).indices, a1.indices)
    assert build_tail("explicit:2", 101, 3, 0).tolist() == [[2]]
    assert build_tail("none", 101, 2, 0).shape == (1, 0)
    assert build_tail("full", 7, 4, 0).shape == (25, 2)


def test_config_round_trip(tmp_path):
    cfg = RunConfig(p=3, k=4, modulus=(2, 0, 0, 1, 1), m=3, a1="random:sqrtq", tail="random:2",
                    draws=3, seed=9, constant=2.5)
    cfg.validate()
    path = tmp_path / "run.ini"
    path.write_text(cfg.to_text())
    back = RunConfig.from_file(path)
    assert back == cfg


def test_config_errors_name_field_and_line():
    text = "[run]\nschema_version = 1\np = 101\nm = three\n"
    with pytest.raises(ConfigError) as exc:
        RunConfig.from_text(text)
    assert exc.value.field == "m" and exc.value.line == 4
    assert "line 4" in str(exc.value) and "'m'" in str(exc.value)
    with pytest.raises(ConfigError) as exc:
        RunConfig.from_text("[run]\nschema_version = 1\ncolour = red\n")
    assert exc.value.field == "colour" and exc.value.line == 3
    with pytest.raises(ConfigError) as exc:
        RunConfig.from_text("[run]\np = 101\n")
    assert exc.value.field == "schema_version"
    with pytest.raises(ConfigError):
        RunConfig.from_text("[run]\nschema_version = 1\na1 = random:500\n")
    with pytest.raises(ConfigError):
        RunConfig.from_text("no section here")
    with pytest.raises(ConfigError):
        RunConfig(m=1).validate()


def test_run_row_is_recomputable():
    cfg = RunConfig(p=101, m=3, a1="random:sqrtq", a2="random:q/10", tail="random:2",
                    k_policy="fixed:8", s_policy="2", seed=4, draws=2)
    rows = run_experiment(cfg, write=False)
    assert [r["draw"] for r in rows] == [0, 1]
    r = rows[1]
    gt = gauss_all(build_field(101))
    a1 = build_subset(cfg.a1, 101, [4, 1, 1])
    a2 = build_subset(cfg.a2, 101, [4, 1, 2])
    tail = build_tail(cfg.tail, 101, 3, [4, 1, 3])
    d = discrepancy_exact(angles_from_subsets(gt, a1, a2, tail)).d_exact
    assert (r["A1"], r["A2"], r["B"]) == (11, 11, 2)
    assert r["count"] == ch.count_a_circle(a1, a2, tail)
    assert r["D_exact"] == d
    assert r["e1_rhs"] == bound_e1_rhs(101, 11, 11)
    assert r["max_ratio_eM1"] <= 1 and r["max_ratio_eM2"] <= 1
    assert r["D_exact"] <= r["et_rhs"]
    assert set(r) == set(RUN_COLUMNS)


def test_empty_a_circle_row():
    cfg = RunConfig(p=11, a1="explicit:1", a2="explicit:9", k_policy="fixed:2")
    (row,) = run_experiment(cfg, write=False)
    assert row["count"] == 0 and row["empty_convention"] == 1
    assert row["D_exact"] == 1.0 and row["disc_method"] == "empty_convention"


def test_run_output_is_deterministic(tmp_path):
    outs = []
    for i in range(2):
        cfg = RunConfig(p=101, a1="random:20", a2="random:30", draws=3, seed=5,
                        output=str(tmp_path / f"out{i}.csv"))
        run_experiment(cfg)
        outs.append(cfg.output)
    assert filecmp.cmp(*outs, shallow=False)


def test_workers_agree(monkeypatch):
    cfg = RunConfig(p=101, a1="random:20", a2="random:30", draws=3, seed=5)
    serial = run_experiment(cfg, write=False)
    parallel = run_experiment(cfg.replace(workers=2), write=False)
    for a, b in zip(serial, parallel):
        for c in RUN_COLUMNS:
            if isinstance(a[c], float):
                assert b[c] == pytest.approx(a[c], rel=1e-10)
            else:
                assert a[c] == b[c]


def test_worker_env_override(monkeypatch):
    cfg = RunConfig(workers=3)
    monkeypatch.delenv(WORKERS_ENV, raising=False)
    assert effective_workers(cfg) == 3
    monkeypatch.setenv(WORKERS_ENV, "1")
    assert effective_workers(cfg) == 1
    monkeypatch.setenv(WORKERS_ENV, "many")
    with pytest.raises(ConfigError):
        effective_workers(cfg)


def test_json_output(tmp_path):
    import json
    path = tmp_path / "o.json"
    run_experiment(RunConfig(p=13, draws=2, format="json", output=str(path)))
    data = json.loads(path.read_text())
    assert len(data["rows"]) == 2 and data["rows"][0]["q"] == 13


def test_expand_vary():
    assert expand_vary([]) == []
    assert expand_vary(["p=5,7", "m=2,3"]) == [
        {"p": "5", "m": "2"}, {"p": "5", "m": "3"}, {"p": "7", "m": "2"}, {"p": "7", "m": "3"}]
    with pytest.raises(ConfigError):
        expand_vary(["p"])


def test_sweep_records_failed_cells():
    rows, summary = sweep(RunConfig(a1="random:5", a2="random:5"), [{"p": "13"}, {"p": "15"}])
    assert len(rows) == 2
    assert rows[0]["error"] == "" and rows[0]["q"] == 13
    assert rows[1]["error"].startswith("NotPrime")
    assert summary["errors"] == 1 and summary["rows"] == 2


def test_sweep_empty_and_summary():
    rows, summary = sweep(RunConfig(), [])
    assert rows == [] and summary == {"rows": 0, "errors": 0}
    s = summarize([{"D_exact": 0.1, "e1_rhs": 0.5, "e0_rhs": 1.0, "A1": 10, "A2": 10, "q": 100,
                    "max_ratio_eM1": 0.1, "max_ratio_eM2": 0.2, "error": ""},
                   {"D_exact": 0.01, "e1_rhs": 0.05, "e0_rhs": 0.1, "A1": 100, "A2": 100,
                    "q": 100, "max_ratio_eM1": 0.3, "max_ratio_eM2": 0.1, "error": ""}])
    assert s["fitted_C_e1"] == pytest.approx(0.2)
    assert s["slope_logD_vs_log_A1A2_over_q"] == pytest.approx(-0.5)
    assert s["max_ratio_eM1"] == 0.3


def test_named_experiments_validate():
    assert set(EXPERIMENTS) == {"e1-trend", "e0-trend", "katz-fixed-tail", "moment-bounds"}
    for base, deltas in EXPERIMENTS.values():
        for d in deltas:
            base.replace(**d).validate()
