"""Exhaustive reference optimum for tiny instances.

Enumerates every grid-aligned schedule of every plan of every train, then
searches subsets of candidates with forward checking. Capacity and the
utilization cap are additive over trains, so each train schedule is reduced to
a folded occupancy vector and an occupation total per resource. The witness is
re-checked with the validator before it is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .instance import Instance, TrainService, makespan, plan_node_keys
from .schedule import Solution, TrainSchedule
from .solver import data_gcd
from .timeunits import minutes_to_ticks
from .validator import check_unavailability, occupation_g, train_intervals, validate


class OracleRefused(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    status: str  # "optimal" or "fixed-infeasible"
    objective: int | None  # served candidates
    served: int | None
    witness: Solution | None
    schedules_enumerated: int


def enumerate_schedules(train: TrainService, inst: Instance, grid: int, limit: int) -> list[TrainSchedule]:
    """All grid-aligned single-train schedules that also respect unavailability."""
    out: list[TrainSchedule] = []
    (alo, ahi), (qlo, qhi) = train.arrival_window, train.departure_window

    def up(x):
        return -(-x // grid) * grid

    for plan in train.plans:
        seq = plan.sequence
        ops = [inst.operations[o] for o in seq]
        rest = [0] * (len(seq) + 1)
        for j in range(len(seq) - 1, -1, -1):
            rest[j] = rest[j + 1] + ops[j].duration
        keys = plan_node_keys(plan)

        def fits(j, t):
            w = train.op_window(keys[j])
            return w is None or w[0] <= t <= w[1]

        def extend(starts):
            j = len(starts)
            if j == len(seq):
                sched = TrainSchedule(train.id, plan.id, tuple(starts))
                if not check_unavailability(sched, inst):
                    out.append(sched)
                    if len(out) > limit:
                        raise OracleRefused(f"train {train.id} has more than {limit} schedules")
                return
            prev = starts[-1]
            op = ops[j - 1]
            lo = prev + op.duration
            hi = qhi if op.max_wait is None else min(qhi, prev + op.duration + op.max_wait)
            if j == len(seq) - 1:
                lo = max(lo, qlo)
            t = up(lo)
            while t <= hi:
                if t + rest[j] - ops[j].duration <= qhi and fits(j, t):
                    starts.append(t)
                    extend(starts)
                    starts.pop()
                t += grid

        t = up(alo)
        while t <= ahi:
            if fits(0, t):
                extend([t])
            t += grid
    return out


def _vectors(scheds, inst: Instance, unit: int, lo: int, cells: int):
    """Per schedule: concatenated occupancy counts over all resources, and g totals."""
    nres = len(inst.resources)
    V = np.zeros((len(scheds), nres * cells), dtype=np.int32)
    G = np.zeros((len(scheds), nres), dtype=np.int64)
    for i, s in enumerate(scheds):
        for ri, r in enumerate(inst.resources):
            row = V[i, ri * cells : (ri + 1) * cells]
            for a, b in train_intervals(s, inst, r.id):
                c0, c1 = (a - lo) // unit, (b - lo) // unit
                if inst.period is None:
                    row[c0:c1] += 1
                    continue
                full, rem = divmod(c1 - c0, cells)
                row += full
                c0 %= cells
                if c0 + rem <= cells:
                    row[c0 : c0 + rem] += 1
                else:
                    row[c0:] += 1
                    row[: c0 + rem - cells] += 1
            G[i, ri] = occupation_g(s, inst, r.id)
    return V, G


def brute_force_optimum(
    inst: Instance,
    grid_minutes: float = 1,
    max_trains: int = 4,
    max_plans: int = 2,
    max_points: int = 200,
    max_schedules: int = 20000,
) -> OracleResult:
    grid = minutes_to_ticks(grid_minutes)
    horizon = inst.period if inst.period is not None else makespan(inst.trains)
    size = f"{len(inst.trains)} trains, {max((len(t.plans) for t in inst.trains), default=0)} plans, {horizon / grid:g} points"
    if len(inst.trains) > max_trains or any(len(t.plans) > max_plans for t in inst.trains) or horizon > max_points * grid:
        raise OracleRefused(f"instance too large for exhaustive search ({size})")
    unit = math.gcd(grid, data_gcd(inst))
    if inst.period is not None:
        lo, cells = 0, inst.period // unit
    else:
        lo = min(t.arrival_window[0] for t in inst.trains) if inst.trains else 0
        hi = max((t.departure_window[1] for t in inst.trains), default=0) + inst.epsilon
        lo = lo // unit * unit
        cells = max(1, -(-(hi - lo) // unit))
    caps = np.repeat(np.array([r.capacity for r in inst.resources], dtype=np.int32), cells)
    h = inst.horizon
    limits = np.array([math.floor(inst.utilization_cap * r.capacity * h) for r in inst.resources], dtype=np.int64)

    trains = sorted(inst.trains, key=lambda t: not t.is_fixed)
    scheds = [enumerate_schedules(t, inst, grid, max_schedules) for t in trains]
    total = sum(len(s) for s in scheds)
    mats = [_vectors(s, inst, unit, lo, cells) for s in scheds]
    nfixed = sum(1 for t in trains if t.is_fixed)
    n = len(trains)

    best = {"count": -1, "choice": None}
    choice: list[int | None] = [None] * n

    def fits(j, cur_v, cur_g):
        V, G = mats[j]
        if len(V) == 0:
            return np.zeros(0, dtype=bool)
        return np.all(V + cur_v <= caps, axis=1) & np.all(G + cur_g <= limits, axis=1)

    def dfs(j, cur_v, cur_g, count, domains):
        if count + sum(1 for d in domains[j:] if d.any()) <= best["count"]:
            return
        if j == n:
            best["count"], best["choice"] = count, list(choice)
            return
        dom = domains[j]
        for s in np.flatnonzero(dom):
            V, G = mats[j]
            nv, ng = cur_v + V[s], cur_g + G[s]
            new_domains = domains[: j + 1] + [domains[i] & fits(i, nv, ng) for i in range(j + 1, n)]
            if any(not new_domains[i].any() for i in range(j + 1, nfixed)):
                continue
            choice[j] = int(s)
            dfs(j + 1, nv, ng, count + 1, new_domains)
            choice[j] = None
            if best["count"] == n:
                return
        if j >= nfixed:
            dfs(j + 1, cur_v, cur_g, count, domains)

    zero_v = np.zeros(len(caps), dtype=np.int32)
    zero_g = np.zeros(len(inst.resources), dtype=np.int64)
    domains = [fits(j, zero_v, zero_g) for j in range(n)]
    if all(domains[i].any() for i in range(nfixed)):
        dfs(0, zero_v, zero_g, 0, domains)
    if best["choice"] is None:
        return OracleResult("fixed-infeasible", None, None, None, total)
    order = {t.id: i for i, t in enumerate(inst.trains)}
    picked = [scheds[j][s] for j, s in enumerate(best["choice"]) if s is not None]
    picked.sort(key=lambda s: order[s.train])
    witness = Solution(tuple(picked))
    verdict, _ = validate(witness, inst)
    if not verdict.ok:
        raise AssertionError(f"oracle witness rejected by the validator: {verdict.failures}")
    return OracleResult("optimal", witness.objective(inst), len(picked), witness, total)
