"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

from __future__ import annotations

import itertools
import random
import time

import pytest
import yaml

from yardsat.cli import EXIT_OK, ScenarioRun, run_scenario
from yardsat.graph import build_graph, build_unavailability_arcs
from yardsat.heuristic import heuristic_saturate
from yardsat.instance import load_instance, parse_instance
from yardsat.model import assemble_model
from yardsat.mps import export_model
from yardsat.oracle import brute_force_optimum
from yardsat.randomgen import random_document
from yardsat.schedule import Solution
from yardsat.separation import Interval, brute_force_violations, separate_intervals, violating_cliques
from yardsat.solver import SolverOptions, saturate
from yardsat.timetable import expand_week
from yardsat.validator import check_periodic, check_single, fold_profile, unrolled_max, validate

from conftest import data_path

N_RANDOM = 200


def _report(capsys, number: int, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")


def _fixed_part(inst, sol):
    fixed = {t.id for t in inst.fixed_trains}
    return Solution(tuple(s for s in sol.schedules if s.train in fixed))


@pytest.fixture(scope="module")
def random_runs():
    runs = []
    start = time.perf_counter()
    for seed in range(N_RANDOM):
        doc = random_document(seed)
        inst = parse_instance(doc)
        oracle = brute_force_optimum(inst)
        res = saturate(inst)
        runs.append((seed, doc, inst, oracle, res))
    return runs, time.perf_counter() - start


def test_criterion_1_oracle_equivalence(random_runs, capsys):
    runs, elapsed = random_runs
    bad, binding = [], 0
    for seed, _, inst, oracle, res in runs:
        if oracle.status == "fixed-infeasible":
            agree = res.status == "infeasible_at_floor"
        else:
            agree = res.status == "optimal" and res.solution.objective(inst) == oracle.objective
            binding += oracle.objective < len(inst.candidate_trains)
        if not agree:
            bad.append(seed)
    ok = not bad and elapsed < 600
    _report(capsys, 1, ok, f"{N_RANDOM - len(bad)}/{N_RANDOM} agree ({binding} with dropped candidates), {elapsed:.1f}s")
    assert not bad
    assert elapsed < 600


def _perturbations(sol, inst):
    for s in sol.schedules:
        t = inst.train(s.train)
        (alo, ahi), (_, qhi) = t.arrival_window, t.departure_window
        yield sol.shifted(s.train, 0, alo - s.starts[0] - 1)
        yield sol.shifted(s.train, 0, ahi - s.starts[0] + 1)
        last = len(s.starts) - 1
        yield sol.shifted(s.train, last, qhi - s.starts[last] + 1)


def test_criterion_2_validator_soundness(random_runs, capsys):
    runs, _ = random_runs
    checked, invalid = 0, []
    perturbed, accepted = 0, []
    for seed, _, inst, _, res in runs:
        if res.solution is None:
            continue
        emitted = [res.solution, heuristic_saturate(_fixed_part(inst, res.solution), inst).result.solution]
        for sol in emitted:
            checked += 1
            single = all(check_single(s, inst.train(s.train), inst).ok for s in sol.schedules)
            if not (single and check_periodic(sol, inst)[0].ok):
                invalid.append(seed)
        for bad in _perturbations(res.solution, inst):
            if perturbed == 100:
                break
            perturbed += 1
            if validate(bad, inst)[0].ok:
                accepted.append(seed)
    ok = not invalid and not accepted and perturbed == 100
    _report(capsys, 2, ok, f"{checked - len(invalid)}/{checked} solutions valid, {perturbed - len(accepted)}/{perturbed} perturbations rejected")
    assert not invalid and not accepted and perturbed == 100


def test_criterion_3_cut_safety(random_runs, capsys):
    runs, _ = random_runs
    differ = []
    for seed, _, inst, _, res in runs:
        plain = saturate(inst, SolverOptions(use_cuts=False))
        if (plain.status, plain.served_count) != (res.status, res.served_count):
            differ.append(seed)
    _report(capsys, 3, not differ, f"{N_RANDOM - len(differ)}/{N_RANDOM} equal optima with and without cuts")
    assert not differ


def test_criterion_4_separation(capsys):
    rng = random.Random(4)
    mismatched = 0
    for _ in range(500):
        n = rng.randint(0, 20)
        ivs = []
        for i in range(n):
            s = rng.randint(0, 100)
            ivs.append(Interval(i, s, s + rng.randint(1, 30)))
        cap = rng.randint(1, 3)
        brute = brute_force_violations(ivs, cap)
        from_cliques = {
            frozenset(c)
            for clique in violating_cliques(ivs, cap)
            for c in itertools.combinations([iv.ref for iv in clique], cap + 1)
        }
        emitted = {frozenset(r) for r in separate_intervals(ivs, cap)}
        if from_cliques != brute or not emitted <= brute or bool(emitted) != bool(brute):
            mismatched += 1
    _report(capsys, 4, mismatched == 0, f"{500 - mismatched}/500 interval families match subset enumeration")
    assert mismatched == 0


def test_criterion_5_folding(capsys):
    rng = random.Random(5)
    mismatched = 0
    for case in range(100):
        k = 2 + case % 2
        period = rng.randint(5, 60)
        ivs = []
        for _ in range(rng.randint(0, 10)):
            s = rng.randrange(k * period)
            ivs.append((s, s + rng.randint(1, k * period)))
        folded = max((c for _, _, c in fold_profile(ivs, period)), default=0)
        if folded != unrolled_max(ivs, period, k):
            mismatched += 1
    _report(capsys, 5, mismatched == 0, f"{100 - mismatched}/100 folded maxima equal the unrolled maxima")
    assert mismatched == 0


def test_criterion_6_fixtures(capsys):
    layout = yaml.safe_load(data_path("marzaglia_layout.yaml").read_text())
    timetable = yaml.safe_load(data_path("marzaglia_timetable.yaml").read_text())
    caps = {r.id: r.capacity for r in parse_instance(layout).resources if r.counts_as_track}
    weekly = len(parse_instance(expand_week(layout, timetable)).fixed_trains)
    served, slow = [], []
    for s in range(4):
        t0 = time.perf_counter()
        res = saturate(load_instance(data_path(f"mini_marzaglia_s{s}.yaml")), SolverOptions(time_budget=60))
        if time.perf_counter() - t0 > 60:
            slow.append(s)
        served.append(res.served_count if res.status == "optimal" else None)
    ordered = None not in served and served[1] >= served[0] and min(served[2:]) >= served[1]
    ok = caps == {"AD": 6, "TS": 6, "ST": 1, "CT": 2} and weekly == 47 and ordered and not slow
    _report(capsys, 6, ok, f"tracks {caps}, {weekly} weekly trains, mini scenarios served {served}")
    assert caps == {"AD": 6, "TS": 6, "ST": 1, "CT": 2}
    assert weekly == 47
    assert ordered and not slow


def test_criterion_7_mps_cross_check(random_runs, capsys):
    pytest.importorskip("highspy")
    from yardsat.mps import solve_with_highs

    runs, _ = random_runs
    compared, differ = 0, []
    for seed, _, inst, _, res in runs:
        if compared == 20:
            break
        if res.status != "optimal":
            continue
        graph = build_graph(inst)
        model = assemble_model(graph, res.pool, "max-served", unavail=build_unavailability_arcs(graph))
        mps, _ = export_model(model)
        status, obj = solve_with_highs(mps)
        compared += 1
        if obj is None or round(-obj) != res.served_count:
            differ.append(seed)
    _report(capsys, 7, not differ and compared == 20, f"{compared - len(differ)}/{compared} HiGHS objectives equal the native optimum")
    assert compared == 20 and not differ


def test_criterion_8_heuristic(random_runs, capsys):
    runs, _ = random_runs
    cases, wrong = 0, []
    s1 = saturate(load_instance(data_path("mini_marzaglia_s1.yaml")), SolverOptions(time_budget=60))
    pairs = [(s1.solution, load_instance(data_path(f"mini_marzaglia_s{s}.yaml")), f"s{s}") for s in (2, 3)]
    pairs += [(_fixed_part(inst, res.solution), inst, seed) for seed, _, inst, _, res in runs if res.solution is not None]
    for prev, inst, label in pairs:
        res = heuristic_saturate(prev, inst, SolverOptions(time_budget=60)).result
        if res.served_count != len(inst.trains):
            continue
        cases += 1
        cold = saturate(inst, SolverOptions(time_budget=60))
        if res.status != "optimal" or res.served_count != cold.served_count:
            wrong.append(label)
    _report(capsys, 8, not wrong and cases > 0, f"{cases - len(wrong)}/{cases} all-served heuristic runs flagged optimal and equal to cold")
    assert cases > 0 and not wrong


def test_criterion_9_determinism(random_runs, tmp_path, capsys):
    runs, _ = random_runs
    differ = []
    for seed, doc, *_ in runs:
        path = tmp_path / f"r{seed}.yaml"
        path.write_text(yaml.safe_dump(doc, sort_keys=False))
        artifacts = []
        for root in ("a", "b"):
            run = ScenarioRun(f"r{seed}", path, outputs=tmp_path / root)
            code = run_scenario(run)
            artifacts.append((code, [(p.name, p.read_bytes()) for p in run.artifacts]))
        if artifacts[0] != artifacts[1] or not artifacts[0][1]:
            differ.append(seed)
    _report(capsys, 9, not differ, f"{N_RANDOM - len(differ)}/{N_RANDOM} repeated runs byte-identical")
    assert not differ
