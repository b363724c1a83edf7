from __future__ import annotations

import csv
import io
import json
from fractions import Fraction

import pytest

from yardsat.cli import EXIT_INFEASIBLE, EXIT_INPUT, EXIT_OK, ScenarioRun, main, run_scenario
from yardsat.instance import load_instance
from yardsat.report import HEATMAP_COLUMNS, bottlenecks, emit_heatmap, increment, weekly_equivalent
from yardsat.schedule import Solution
from yardsat.solver import saturate
from yardsat.validator import validate

from conftest import data_path

S0 = data_path("mini_marzaglia_s0.yaml")
S1 = data_path("mini_marzaglia_s1.yaml")


def _rows(text):
    return list(csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#")))


@pytest.mark.parametrize(
    "served, period, weekly, pct",
    [(18, 2880, 54, "+15%"), (12, 1440, 72, "+53%"), (16, 1440, 96, "+104%")],
)
def test_weekly_figures(served, period, weekly, pct):
    w = weekly_equivalent(served, period)
    assert w == weekly
    assert increment(w, 47) == pct


def test_weekly_period_uses_seven_days():
    assert weekly_equivalent(47, 7 * 1440) == 47
    assert increment(Fraction(47), 47) == "+0%"
    assert increment(40, 47) == "-15%"


def test_empty_yard_heatmap():
    inst = load_instance(S0)
    verdict, profiles = validate(Solution(()), inst)
    rows = _rows(emit_heatmap(profiles, inst.utilization_cap))
    assert list(rows[0]) == HEATMAP_COLUMNS
    prof = [r for r in rows if r["kind"] == "profile"]
    assert len(prof) == len(inst.resources)
    assert all(r["count"] == "0" for r in prof)
    assert {r["resource"] for r in prof} == {r.id for r in inst.resources}


def test_scenario_0_flags_reach_stacker():
    inst = load_instance(S0)
    sol = saturate(inst).solution
    _, profiles = validate(sol, inst)
    assert bottlenecks(profiles, inst.utilization_cap) == {"RS"}
    rs = profiles["RS"]
    assert rs.avg_fraction <= inst.utilization_cap
    assert rs.saturated_fraction >= Fraction(1, 2)
    summary = {r["resource"]: r for r in _rows(emit_heatmap(profiles, inst.utilization_cap)) if r["kind"] == "summary"}
    assert summary["RS"]["bottleneck"] == "yes"
    assert summary["AD"]["bottleneck"] == "no"


def test_heatmap_breakpoints_tile_the_period():
    inst = load_instance(S1)
    _, profiles = validate(saturate(inst).solution, inst)
    rows = [r for r in _rows(emit_heatmap(profiles)) if r["kind"] == "profile" and r["resource"] == "AD"]
    assert float(rows[0]["window_start_min"]) == 0
    assert float(rows[-1]["window_end_min"]) == 1440
    for a, b in zip(rows, rows[1:]):
        assert a["window_end_min"] == b["window_start_min"]


def _files(path):
    return sorted(p.name for p in path.iterdir())


def test_saturate_run_writes_all_artifacts(tmp_path):
    code = main(["run", str(S1), "--out", str(tmp_path), "--run-id", "s1"])
    assert code == EXIT_OK
    out = tmp_path / "s1"
    assert _files(out) == ["heatmap.csv", "report.txt", "solution.json", "verdict.json"]
    sol = json.loads((out / "solution.json").read_text())
    report = (out / "report.txt").read_text()
    assert sol["status"] == "optimal"
    served = len(sol["served"])
    assert f"trains served: {served} of 10" in report
    assert "weekly equivalent: 54 trains (6 operating days)" in report
    assert "increment vs baseline 36: +50%" in report
    for name in _files(out):
        text = (out / name).read_text()
        assert "s1" in text and sol["input_digest"] in text


def test_validate_only_writes_verdict_only(tmp_path):
    main(["run", str(S1), "--out", str(tmp_path), "--run-id", "a"])
    solution = tmp_path / "a" / "solution.json"
    code = main(["validate", str(S1), str(solution), "--out", str(tmp_path), "--run-id", "v"])
    assert code == EXIT_OK
    assert _files(tmp_path / "v") == ["verdict.json"]
    assert json.loads((tmp_path / "v" / "verdict.json").read_text())["ok"] is True


def test_validate_only_rejects_broken_schedule(tmp_path):
    main(["run", str(S1), "--out", str(tmp_path), "--run-id", "a"])
    doc = json.loads((tmp_path / "a" / "solution.json").read_text())
    ops = doc["trains"][0]["operations"]
    for op in ops:
        op["start_minutes"] = ops[0]["start_minutes"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code = main(["validate", str(S1), str(bad), "--out", str(tmp_path), "--run-id", "v"])
    assert code == EXIT_INFEASIBLE
    assert json.loads((tmp_path / "v" / "verdict.json").read_text())["ok"] is False


def test_export_only_writes_model_and_names(tmp_path):
    code = main(["export", str(S0), "--out", str(tmp_path), "--run-id", "x"])
    assert code == EXIT_OK
    assert _files(tmp_path / "x") == ["model.mps", "model.names"]
    assert "ROWS" in (tmp_path / "x" / "model.mps").read_text()


def test_feasibility_mode(tmp_path):
    ok = main(["run", str(S0), "--mode", "feasibility", "--floor", "8", "--out", str(tmp_path), "--run-id", "f8"])
    no = main(["run", str(S0), "--mode", "feasibility", "--floor", "9", "--out", str(tmp_path), "--run-id", "f9"])
    assert (ok, no) == (EXIT_OK, EXIT_INFEASIBLE)
    assert _files(tmp_path / "f9") == ["solution.json"]


def test_heuristic_mode(tmp_path):
    main(["run", str(S1), "--out", str(tmp_path), "--run-id", "s1"])
    prev = tmp_path / "s1" / "solution.json"
    s2 = data_path("mini_marzaglia_s2.yaml")
    code = main(["run", str(s2), "--mode", "heuristic", "--prev", str(prev), "--out", str(tmp_path), "--run-id", "h"])
    assert code == EXIT_OK
    doc = json.loads((tmp_path / "h" / "solution.json").read_text())
    assert doc["status"] == "optimal" and doc["heuristic"] is True
    assert doc["balance"]["source"] == "previous"


def test_input_errors(tmp_path, capsys):
    missing = tmp_path / "nope.yaml"
    assert main(["run", str(missing), "--out", str(tmp_path)]) == EXIT_INPUT
    broken = tmp_path / "broken.yaml"
    broken.write_text(S0.read_text().replace("duration: 10", "duration: -10", 1))
    assert main(["run", str(broken), "--out", str(tmp_path)]) == EXIT_INPUT
    assert main(["run", str(S0), "--mode", "feasibility", "--out", str(tmp_path)]) == EXIT_INPUT
    err = capsys.readouterr().err
    assert "[parse]" in err and "[options]" in err


def test_artifacts_are_byte_identical(tmp_path):
    runs = []
    for root in ("one", "two"):
        run = ScenarioRun("s1", S1, outputs=tmp_path / root)
        assert run_scenario(run) == EXIT_OK
        runs.append(run)
    assert runs[0].run_id == runs[1].run_id
    for a, b in zip(runs[0].artifacts, runs[1].artifacts):
        assert a.name == b.name
        assert a.read_bytes() == b.read_bytes()


def test_options_change_the_run_id(tmp_path):
    a = ScenarioRun("s1", S1, outputs=tmp_path)
    b = ScenarioRun("s1", S1, outputs=tmp_path, cap="0.9")
    run_scenario(a)
    run_scenario(b)
    assert a.run_id != b.run_id


def test_expand_week(tmp_path):
    out = tmp_path / "week.yaml"
    code = main(["expand-week", str(data_path("marzaglia_layout.yaml")), str(data_path("marzaglia_timetable.yaml")), "-o", str(out)])
    assert code == EXIT_OK
    assert len(load_instance(out).fixed_trains) == 47
