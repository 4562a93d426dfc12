import csv
import math
from dataclasses import replace

import pytest

from ising_screen.experiments import (ExperimentConfig, RunRecord, TopologyConfig,
                                      complexity_table, cumulative_complexity, failures_by_n,
                                      phase_table, run_cell, run_grid, sample_complexity,
                                      success_ratio)
from ising_screen.report import emit_report, load_records, write_records

SMALL = dict(p_list=[9], n_list=[300, 600], repetitions=3, methods=["l1-lr", "l0l2-lr"])


def rec(n, ok, rep=0, method="m", p=9, l2=0.1):
    return RunRecord(method, p, n, rep, 0, ok, l2)


def cell(n, successes, total=30, method="m"):
    return [rec(n, i < successes, i, method) for i in range(total)]


def test_config_validation_and_from_dict():
    with pytest.raises(ValueError):
        ExperimentConfig(n_list=[500, 500])
    with pytest.raises(ValueError):
        ExperimentConfig(methods=["nope"])
    with pytest.raises(ValueError):
        ExperimentConfig(repetitions=0)
    cfg = ExperimentConfig.from_dict({"n_start": 100, "n_step": 50, "n_count": 3,
                                      "topology": {"kind": "random_regular", "degree": 3}})
    assert cfg.n_list == (100, 150, 200)
    assert cfg.topology.kind == "random_regular"
    with pytest.raises(ValueError):
        TopologyConfig(kind="star")
    with pytest.raises(ValueError):
        TopologyConfig().build(10, 0)


def test_run_cell_one_record_per_method():
    cfg = ExperimentConfig(**SMALL)
    recs = run_cell(cfg, 9, 300, 0)
    assert [r.method for r in recs] == ["l1-lr", "l0l2-lr"]
    assert all(math.isfinite(r.l2_error) and r.error == "" for r in recs)


def test_run_cell_failure_is_recorded():
    cfg = ExperimentConfig(**{**SMALL, "topology": TopologyConfig(kind="random_regular", degree=9)})
    recs = run_cell(cfg, 9, 300, 0)
    assert all(not r.recovered and math.isnan(r.l2_error) and r.error for r in recs)


def test_run_grid_counts_and_determinism():
    cfg = ExperimentConfig(**SMALL)
    a, b = run_grid(cfg), run_grid(cfg)
    assert len(a) == 2 * 2 * 3
    for m in cfg.methods:
        for n in cfg.n_list:
            assert sum(r.method == m and r.n == n for r in a) == 3
    assert [(r.method, r.n, r.repetition, r.recovered, r.l2_error) for r in a] == \
           [(r.method, r.n, r.repetition, r.recovered, r.l2_error) for r in b]


def test_cache_reuses_cells(tmp_path):
    cfg = ExperimentConfig(**SMALL, cache_dir=str(tmp_path))
    first = run_grid(cfg)
    assert len(list(tmp_path.rglob("*.json"))) == 2 * 2 * 3
    again = run_grid(cfg)
    assert [r.l2_error for r in first] == [r.l2_error for r in again]
    # a method subset reads the same entries and matches a fresh run
    only = ExperimentConfig(**{**SMALL, "methods": ["l0l2-lr"]}, cache_dir=str(tmp_path))
    assert [r.l2_error for r in run_grid(only)] == [r.l2_error for r in first
                                                    if r.method == "l0l2-lr"]
    assert len(list(tmp_path.rglob("*.json"))) == 2 * 2 * 3
    # a different master seed must not read the same cache entries
    run_grid(ExperimentConfig(**SMALL, cache_dir=str(tmp_path), master_seed=1))
    assert len(list(tmp_path.rglob("*.json"))) == 2 * 2 * 2 * 3


def test_stop_when_resolved_skips_larger_n():
    cfg = ExperimentConfig(p_list=[9], n_list=[4000, 8000], repetitions=2,
                           methods=["l0l2-lr"], stop_when_resolved=True, max_failures=2)
    recs = run_grid(cfg)
    assert {r.n for r in recs} == {4000}


def test_stop_when_resolved_is_per_method():
    # max_failures=0 at n=100 resolves nothing; everything resolves by n=4000 with a loose cap
    cfg = ExperimentConfig(p_list=[9], n_list=[100, 4000, 8000], repetitions=2,
                           methods=["l1-lr", "l0l2-lr"], stop_when_resolved=True, max_failures=1)
    recs = run_grid(cfg)
    full = run_grid(replace(cfg, stop_when_resolved=False))
    for m in cfg.methods:
        ns = sorted({r.n for r in recs if r.method == m})
        assert ns == [n for n in cfg.n_list if n <= sample_complexity(full, m, 9, 1)]


def test_success_ratio_examples():
    assert success_ratio(cell(500, 30), "m", 9, 500) == 1.0
    assert success_ratio(cell(500, 27), "m", 9, 500) == pytest.approx(0.9)
    assert success_ratio(cell(500, 0), "m", 9, 500) == 0.0
    with pytest.raises(ValueError):
        success_ratio([], "m", 9, 500)


def test_sample_complexity_examples():
    recs = cell(500, 20) + cell(1000, 25) + cell(1500, 27) + cell(2000, 30)
    assert failures_by_n(recs, "m", 9) == {500: 10, 1000: 5, 1500: 3, 2000: 0}
    assert sample_complexity(recs, "m", 9) == 1500
    assert sample_complexity(recs, "m", 9, max_failures=0) == 2000
    assert sample_complexity(cell(500, 10), "m", 9) is None


def test_cumulative_complexity_examples():
    assert cumulative_complexity({9: 1500, 16: 1000, 25: 2500}) == {9: 1500, 16: 1500, 25: 2500}
    assert cumulative_complexity({9: 1500, 16: None, 25: 2500}) == {9: 1500, 16: None, 25: None}
    assert cumulative_complexity({}) == {}


def test_phase_table_and_complexity_table():
    recs = cell(500, 10) + cell(1000, 30)
    rows = phase_table(recs, "m", 9)
    assert [r[0] for r in rows] == [500, 1000]
    assert rows[1][1] == 1.0 and rows[1][2] == pytest.approx(0.1) and rows[1][3] == pytest.approx(0.0)
    assert complexity_table(recs) == [(9, "m", 1000, 1000)]


def test_emit_report_empty(tmp_path):
    written = emit_report([], tmp_path)
    assert not list(tmp_path.glob("*.svg"))
    assert (tmp_path / "records.csv").read_text().startswith("method,p,n")
    assert (tmp_path / "complexity.csv").read_text() == "p,method,m_star,n_star\n"
    assert len(written) == 2


def test_emit_report_single_cell(tmp_path):
    recs = [rec(500, True, i, "l0l2-lr") for i in range(3)]
    emit_report(recs, tmp_path)
    with open(tmp_path / "phase_transition_l0l2-lr_9.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["n", "success_ratio", "mean_l2", "sd_l2"] and len(rows) == 2
    for name in ("phase_transition_p9.svg", "l2_estimation_p9.svg", "complexity.svg"):
        assert (tmp_path / name).stat().st_size > 0


def test_emit_report_is_reproducible(tmp_path):
    recs = cell(500, 10, 5, "l1-lr") + cell(1000, 5, 5, "l1-lr")
    emit_report(recs, tmp_path / "a")
    emit_report(recs, tmp_path / "b")
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes(), f.name


def test_records_roundtrip(tmp_path):
    recs = [rec(500, True), RunRecord("m", 9, 500, 1, 7, False, math.nan, 0.0, "boom")]
    write_records(recs, tmp_path / "r.csv")
    back = load_records(tmp_path / "r.csv")
    assert back[0].recovered and not back[1].recovered
    assert math.isnan(back[1].l2_error) and back[1].error == "boom"
    with pytest.raises(OSError):
        load_records(tmp_path / "missing.csv")
