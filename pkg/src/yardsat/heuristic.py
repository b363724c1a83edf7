"""Two-step warm start: rebalance a previous timetable, then saturate around it.

Step 1 keeps the previously served trains, lets each operation move within a
wide tolerance of its old start and minimizes the largest average resource
utilization. Step 2 fixes the balanced schedule with a tight tolerance and
saturates with the full candidate set.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .graph import ORIGIN, build_graph, build_unavailability_arcs, enumerate_conflicts, tuple_keys
from .instance import Instance, TrainService, plan_node_keys
from .schedule import Solution, TrainSchedule
from .solver import SolveResult, SolverOptions, data_gcd, saturate
from .timeunits import minutes_to_ticks
from .validator import validate

log = logging.getLogger(__name__)

STEP1_TOLERANCE = minutes_to_ticks(120)
STEP2_TOLERANCE = minutes_to_ticks(30)


class HeuristicError(RuntimeError):
    pass


@dataclass(frozen=True)
class FixingDirective:
    base_solution: Solution
    tolerance: int | None  # ticks; None = unbounded
    scope: frozenset[str]
    freeze_plans: bool = True

    def __post_init__(self):
        missing = self.scope - set(self.base_solution.served)
        if missing:
            raise ValueError(f"scoped trains not served in the base solution: {sorted(missing)}")


def fix_with_tolerance(inst: Instance, directive: FixingDirective) -> Instance:
    """Freeze the base plan of scoped trains and box each start in [s - eta, s + eta]."""
    eta = directive.tolerance
    trains = []
    clipped = 0
    for t in inst.trains:
        sched = directive.base_solution.schedule(t.id)
        if t.id not in directive.scope or sched is None:
            trains.append(t)
            continue
        plans = (t.plan(sched.plan),) if directive.freeze_plans else t.plans
        windows = list(t.op_windows)
        if eta is not None:
            keys = plan_node_keys(t.plan(sched.plan))
            windows = [w for w in windows if w[0] not in keys]
            for key, start in zip(keys, sched.starts):
                lo = start - eta
                if lo < 0:
                    clipped += 1
                    lo = 0
                windows.append((key, lo, start + eta))
        trains.append(replace(t, plans=plans, op_windows=tuple(windows)))
    if clipped:
        log.warning("%d tolerance window(s) clipped at time 0", clipped)
    return inst.with_trains(trains)


# --------------------------------------------------------------------------
# step 1: balance


def _relations(graph, sol: Solution):
    """Arcs of the tuple and unavailability choices a feasible schedule realises."""
    start, succ = {ORIGIN: 0}, {}
    for s in sol.schedules:
        path = graph.plan_paths[(s.train, s.plan)]
        for j, u in enumerate(path):
            start[u] = s.starts[j]
            if j + 1 < len(path):
                succ[u] = path[j + 1]

    def sat(arcs):
        return all(start[a.head] - start[a.tail] >= a.length for a in arcs)

    def pick(options, what):
        for arcs in options:
            if sat(arcs):
                return [(a.tail, a.head, a.length) for a in arcs]
        raise HeuristicError(f"schedule realises no alternative of {what}")

    out = []
    for pair in enumerate_conflicts(graph):
        if pair.u not in succ or pair.v not in succ:
            continue
        for key in tuple_keys(graph, pair):
            u, v, _ = key
            ct = graph.conflict_tuple(key)
            su, sv = succ[u], succ[v]
            options = [
                [a for a in ct.u_first if a.tail == su],
                [a for a in ct.v_first if a.tail == sv],
            ]
            if ct.meeting_allowed:
                options.append([a for a in ct.meeting if (a.tail == u and a.head == sv) or (a.tail == v and a.head == su)])
            out += pick(options, f"tuple {key}")
    for it in build_unavailability_arcs(graph):
        if it.node not in succ:
            continue
        v = succ[it.node]
        options = [[a for a in it.before if a.tail == v], [it.after], [a for a in it.during if a.head == v]]
        out += pick(options, f"window {it.resource}#{it.window} period {it.period}")
    return out, start, succ


def balance(inst: Instance, sol: Solution, grid: int | None = None) -> tuple[Solution, float]:
    """Re-time ``sol`` (same plans and conflict resolutions) to minimize the peak average utilization.

    Returns the balanced solution and its objective, the largest ratio
    occupation / (capacity * horizon) over resources.
    """
    if not sol.schedules:
        return sol, 0.0
    graph = build_graph(inst)
    grid = grid or data_gcd(inst)
    arcs, start, _ = _relations(graph, sol)
    for s in sol.schedules:
        for i in graph.plan_arcs[(s.train, s.plan)]:
            a = graph.arcs[i]
            arcs.append((a.tail, a.head, a.length))
    nodes = sorted(set(start) | {ORIGIN})
    col = {u: i for i, u in enumerate(nodes)}
    n = len(nodes) + 1  # last column is theta
    rows, lo, hi = [], [], []
    for x, y, length in arcs:
        row = np.zeros(n)
        row[col[y]] += grid
        row[col[x]] -= grid
        rows.append(row)
        lo.append(length)
        hi.append(np.inf)
    h = inst.horizon
    eps = inst.epsilon
    for r in inst.resources:
        row = np.zeros(n)
        const = 0
        for s in sol.schedules:
            plan = inst.train(s.train).plan(s.plan)
            path = graph.plan_paths[(s.train, s.plan)]
            run = None
            for j, oid in enumerate(plan.sequence):
                uses = r.id in inst.operations[oid].resources
                if uses and run is None:
                    run = path[j]
                elif not uses and run is not None:
                    row[col[path[j]]] += grid
                    row[col[run]] -= grid
                    const += eps
                    run = None
        if not row.any() and const == 0:
            continue
        cap_row = row.copy()
        rows.append(cap_row)
        lo.append(-np.inf)
        hi.append(float(inst.utilization_cap * r.capacity * h - const))
        row[-1] = -r.capacity * h
        rows.append(row)
        lo.append(-np.inf)
        hi.append(float(-const))
    lb = [math.ceil(graph.lb[u] / grid) for u in nodes] + [0]
    ub = [math.floor(graph.ub[u] / grid) for u in nodes] + [np.inf]
    lb[col[ORIGIN]] = ub[col[ORIGIN]] = 0
    c = np.zeros(n)
    c[-1] = 1
    integrality = np.ones(n)
    integrality[-1] = 0
    res = milp(
        c=c,
        constraints=[LinearConstraint(np.array(rows), np.array(lo), np.array(hi))],
        integrality=integrality,
        bounds=Bounds(np.array(lb, dtype=float), np.array(ub, dtype=float)),
    )
    if res.status != 0 or res.x is None:
        raise HeuristicError("balance step infeasible")
    out = []
    for s in sol.schedules:
        path = graph.plan_paths[(s.train, s.plan)]
        out.append(TrainSchedule(s.train, s.plan, tuple(int(round(res.x[col[u]])) * grid for u in path)))
    balanced = Solution(tuple(out))
    return balanced, float(res.x[-1])


def peak_utilization(inst: Instance, sol: Solution) -> float:
    _, profiles = validate(sol, inst)
    return max((float(p.avg_fraction) for p in profiles.values()), default=0.0)


# --------------------------------------------------------------------------
# orchestration


@dataclass
class HeuristicReport:
    step1_source: str  # "previous" or "search"
    step1_peak_before: float | None
    step1_peak_after: float
    result: SolveResult


def heuristic_saturate(prev: Solution, inst: Instance, options: SolverOptions = SolverOptions()) -> HeuristicReport:
    """Step 1 (balance at 120' tolerance) then step 2 (saturate at 30' tolerance)."""
    served = set(prev.served)
    unknown = served - {t.id for t in inst.trains}
    if unknown:
        raise HeuristicError(f"previous solution serves trains unknown to the new scenario: {sorted(unknown)}")
    keep: list[TrainService] = [t for t in inst.trains if t.id in served]
    base_inst = inst.with_trains(keep)
    step1_inst = fix_with_tolerance(base_inst, FixingDirective(prev, STEP1_TOLERANCE, frozenset(served)))
    verdict, _ = validate(prev, step1_inst)
    peak_before = None
    if verdict.ok:
        base, source = prev, "previous"
        peak_before = peak_utilization(step1_inst, prev)
    else:
        res = saturate(step1_inst, replace(options, required=frozenset(served)))
        if res.solution is None or set(res.solution.served) != served:
            raise HeuristicError("step 1 infeasible: the previous timetable does not fit the new scenario")
        base, source = res.solution, "search"
    balanced, peak = balance(step1_inst, base, options.grid)
    check, _ = validate(balanced, step1_inst)
    if not check.ok:
        raise HeuristicError(f"balanced schedule rejected: {check.failures[:3]}")

    step2_inst = fix_with_tolerance(inst, FixingDirective(balanced, STEP2_TOLERANCE, frozenset(served)))
    res = saturate(step2_inst, replace(options, required=frozenset(served)))
    res.heuristic = True
    if res.solution is not None:
        final, _ = validate(res.solution, inst)
        if not final.ok:
            raise HeuristicError(f"step-2 schedule rejected on the scenario instance: {final.failures[:3]}")
    if res.status == "optimal" and len(res.solution.served) < len(inst.trains):
        res.status = "heuristic"
    return HeuristicReport(source, peak_before, peak, res)
