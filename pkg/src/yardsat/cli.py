"""Command-line scenario runner.

Exit codes: 0 ok, 2 infeasible, 3 timeout, 4 input error.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .graph import GraphError, UnavailabilityAssumptionError, build_graph, build_unavailability_arcs
from .heuristic import HeuristicError, heuristic_saturate
from .instance import InstanceError, load_document, parse_instance
from .model import assemble_model
from .mps import export_model
from .report import ReportSettings, capacity_report, emit_heatmap
from .schedule import Solution, solution_from_document, solution_to_document
from .solver import ConstraintPool, SolveResult, SolverOptions, check_floor, saturate
from .timetable import expand_week
from .timeunits import TimeFormatError, minutes_to_ticks, parse_fraction
from .validator import validate

EXIT_OK, EXIT_INFEASIBLE, EXIT_TIMEOUT, EXIT_INPUT = 0, 2, 3, 4
MODES = ("saturate", "feasibility", "heuristic", "export-only", "validate-only")

log = logging.getLogger("yardsat")


class StageError(Exception):
    def __init__(self, stage: str, message: str, code: int = EXIT_INPUT):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.code = code


@dataclass
class ScenarioRun:
    scenario_id: str
    instance_path: Path
    mode: str = "saturate"
    time_budget: float | None = None
    epsilon: str | None = None
    cap: str | None = None
    convention: str = "derived"
    floor: int | None = None
    solution_path: Path | None = None
    prev_path: Path | None = None
    baseline: int | None = None
    operating_days: int | None = None
    seed: int = 0  # reserved
    outputs: Path = Path("outputs")
    run_id: str | None = None
    digest: str = ""
    artifacts: list[Path] = field(default_factory=list)

    def options_key(self) -> str:
        keep = ("mode", "time_budget", "epsilon", "cap", "convention", "floor", "baseline", "operating_days", "seed")
        return json.dumps({k: getattr(self, k) for k in keep}, sort_keys=True)


# --------------------------------------------------------------------------
# helpers


def _digest(*paths: Path | None, extra: str = "") -> str:
    h = hashlib.sha256()
    for p in paths:
        if p is not None:
            h.update(Path(p).read_bytes())
            h.update(b"\0")
    h.update(extra.encode())
    return h.hexdigest()


def _load(run: ScenarioRun):
    try:
        doc = load_document(run.instance_path)
        inst = parse_instance(doc)
        changes: dict[str, Any] = {}
        if run.epsilon is not None:
            changes["epsilon"] = minutes_to_ticks(run.epsilon)
        if run.cap is not None:
            changes["utilization_cap"] = parse_fraction(run.cap)
        if changes:
            inst = dataclasses.replace(inst, **changes)
    except (OSError, yaml.YAMLError, json.JSONDecodeError) as exc:
        raise StageError("parse", f"cannot read {run.instance_path}: {exc}") from None
    except (InstanceError, TimeFormatError, ValueError) as exc:
        raise StageError("parse", str(exc)) from None
    report = doc.get("report") or {} if isinstance(doc, dict) else {}
    settings = ReportSettings(
        baseline_weekly=run.baseline if run.baseline is not None else report.get("baseline_weekly"),
        operating_days=run.operating_days if run.operating_days is not None else int(report.get("operating_days", 6)),
    )
    return inst, settings


def _load_solution(path: Path, inst, stage: str) -> Solution:
    try:
        return solution_from_document(load_document(path), inst)
    except (OSError, yaml.YAMLError, json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
        raise StageError(stage, f"bad solution document {path}: {exc}") from None


def _write(run: ScenarioRun, name: str, text: str) -> None:
    out = run.outputs / run.run_id
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    run.artifacts.append(path)


def _header(run: ScenarioRun) -> str:
    return f"run {run.run_id}\ninput digest {run.digest}"


def _json(run: ScenarioRun, body: dict[str, Any]) -> str:
    doc = {"run_id": run.run_id, "input_digest": run.digest}
    doc.update(body)
    return json.dumps(doc, indent=2) + "\n"


def _emit_solution_artifacts(run: ScenarioRun, inst, settings, sol: Solution | None, status: str, extra: dict) -> bool:
    body: dict[str, Any] = {"instance": inst.name, "status": status}
    if sol is not None:
        body.update(solution_to_document(sol, inst))
    body.update(extra)
    _write(run, "solution.json", _json(run, body))
    if sol is None:
        return True
    verdict, profiles = validate(sol, inst)
    _write(run, "verdict.json", _json(run, {"ok": verdict.ok, "findings": verdict.to_document()}))
    _write(run, "heatmap.csv", emit_heatmap(profiles, inst.utilization_cap, _header(run)))
    _write(run, "report.txt", capacity_report(inst, list(sol.served), status, profiles, settings, _header(run)))
    return verdict.ok


def _status_code(status: str) -> int:
    return {"optimal": EXIT_OK, "heuristic": EXIT_OK, "infeasible_at_floor": EXIT_INFEASIBLE, "timeout": EXIT_TIMEOUT}[status]


# --------------------------------------------------------------------------
# runner


def run_scenario(run: ScenarioRun) -> int:
    if run.mode not in MODES:
        raise StageError("options", f"unknown mode {run.mode!r}")
    inst, settings = _load(run)
    run.digest = _digest(run.instance_path, run.solution_path, run.prev_path, extra=run.options_key())
    if run.run_id is None:
        run.run_id = f"{run.scenario_id}-{run.mode}-{run.digest[:10]}"

    if run.mode == "validate-only":
        if run.solution_path is None:
            raise StageError("options", "validate-only needs --solution")
        sol = _load_solution(run.solution_path, inst, "validate")
        verdict, _ = validate(sol, inst)
        _write(run, "verdict.json", _json(run, {"ok": verdict.ok, "findings": verdict.to_document()}))
        return EXIT_OK if verdict.ok else EXIT_INFEASIBLE

    if run.mode == "export-only":
        try:
            graph = build_graph(inst, convention=run.convention)
            unavail = build_unavailability_arcs(graph)
        except (GraphError, UnavailabilityAssumptionError, ValueError) as exc:
            raise StageError("graph", str(exc)) from None
        model = assemble_model(graph, ConstraintPool(), "max-served", unavail=unavail)
        mps, names = export_model(model)
        _write(run, "model.mps", f"* run {run.run_id} input digest {run.digest}\n" + mps)
        _write(run, "model.names", f"# run {run.run_id} input digest {run.digest}\n" + names)
        return EXIT_OK

    options = SolverOptions(time_budget=run.time_budget, convention=run.convention)
    extra: dict[str, Any] = {}
    try:
        if run.mode == "saturate":
            result = saturate(inst, options)
        elif run.mode == "feasibility":
            if run.floor is None:
                raise StageError("options", "feasibility mode needs --floor")
            result = check_floor(inst, run.floor, options)
        else:
            if run.prev_path is None:
                raise StageError("options", "heuristic mode needs --prev")
            prev = _load_solution(run.prev_path, inst, "heuristic")
            rep = heuristic_saturate(prev, inst, options)
            result = rep.result
            extra["balance"] = {"source": rep.step1_source, "peak_utilization": round(rep.step1_peak_after, 6)}
    except (GraphError, UnavailabilityAssumptionError) as exc:
        raise StageError("graph", str(exc)) from None
    except HeuristicError as exc:
        raise StageError("heuristic", str(exc), EXIT_INFEASIBLE) from None
    extra["statistics"] = result.stats.as_dict()
    extra["incumbents"] = list(result.incumbents)
    extra["heuristic"] = result.heuristic
    if result.diagnostics:
        extra["diagnostics"] = list(result.diagnostics)
    ok = _emit_solution_artifacts(run, inst, settings, result.solution, result.status, extra)
    if not ok:
        raise StageError("validate", "solver output rejected by the validator", EXIT_INFEASIBLE)
    return _status_code(result.status)


# --------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("instance", type=Path, help="instance document (YAML or JSON)")
    p.add_argument("--out", type=Path, default=Path("outputs"), help="outputs root directory")
    p.add_argument("--run-id", default=None, help="override the derived run id")
    p.add_argument("--epsilon", default=None, help="override epsilon (minutes)")
    p.add_argument("--cap", default=None, help="override the utilization cap, e.g. 0.85")
    p.add_argument("--convention", choices=("derived", "paper-literal"), default="derived", help="periodic arc sign convention")
    p.add_argument("--seed", type=int, default=0, help="reserved; the solver is deterministic")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="yardsat", description="Yard saturation solver")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario")
    _common(p)
    p.add_argument("--mode", choices=MODES, default="saturate")
    p.add_argument("--time-budget", type=float, default=None, help="wall-clock seconds")
    p.add_argument("--floor", type=int, default=None, help="train count for feasibility mode")
    p.add_argument("--solution", type=Path, default=None, help="solution document for validate-only")
    p.add_argument("--prev", type=Path, default=None, help="previous scenario solution for heuristic mode")
    p.add_argument("--baseline", type=int, default=None, help="weekly baseline train count")
    p.add_argument("--operating-days", type=int, default=None)
    p.add_argument("--scenario-id", default=None)

    p = sub.add_parser("validate", help="validate a solution document")
    _common(p)
    p.add_argument("solution", type=Path)

    p = sub.add_parser("export", help="export the MILP model in MPS format")
    _common(p)

    p = sub.add_parser("heatmap", help="utilization heatmap CSV of a solution")
    _common(p)
    p.add_argument("solution", type=Path)

    p = sub.add_parser("expand-week", help="expand a weekly timetable into an instance")
    p.add_argument("layout", type=Path)
    p.add_argument("timetable", type=Path)
    p.add_argument("-o", "--output", type=Path, default=None)
    return parser


def _run_from_args(args) -> ScenarioRun:
    mode = {"validate": "validate-only", "export": "export-only"}.get(args.command, getattr(args, "mode", "saturate"))
    return ScenarioRun(
        scenario_id=getattr(args, "scenario_id", None) or args.instance.stem,
        instance_path=args.instance,
        mode=mode,
        time_budget=getattr(args, "time_budget", None),
        epsilon=args.epsilon,
        cap=args.cap,
        convention=args.convention,
        floor=getattr(args, "floor", None),
        solution_path=getattr(args, "solution", None),
        prev_path=getattr(args, "prev", None),
        baseline=getattr(args, "baseline", None),
        operating_days=getattr(args, "operating_days", None),
        seed=args.seed,
        outputs=args.out,
        run_id=args.run_id,
    )


def _heatmap(args) -> int:
    run = _run_from_args(args)
    inst, _ = _load(run)
    run.digest = _digest(run.instance_path, run.solution_path, extra="heatmap")
    run.run_id = run.run_id or f"{run.scenario_id}-heatmap-{run.digest[:10]}"
    sol = _load_solution(args.solution, inst, "heatmap")
    verdict, profiles = validate(sol, inst)
    if not profiles:
        raise StageError("heatmap", "solution fails single-train checks; no profile available", EXIT_INFEASIBLE)
    _write(run, "heatmap.csv", emit_heatmap(profiles, inst.utilization_cap, _header(run)))
    return EXIT_OK


def _expand(args) -> int:
    try:
        doc = expand_week(load_document(args.layout), load_document(args.timetable))
        parse_instance(doc)
    except (OSError, yaml.YAMLError, InstanceError, TimeFormatError) as exc:
        raise StageError("expand", str(exc)) from None
    text = yaml.safe_dump(doc, sort_keys=False)
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.write_text(text)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "expand-week":
            return _expand(args)
        if args.command == "heatmap":
            return _heatmap(args)
        run = _run_from_args(args)
        code = run_scenario(run)
        for path in run.artifacts:
            print(path)
        return code
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
