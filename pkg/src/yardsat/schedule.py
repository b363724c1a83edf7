"""Schedules and solution documents."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from .instance import Instance, node_name, plan_node_keys
from .timeunits import TICKS_PER_MINUTE, minutes_to_ticks


@dataclass(frozen=True)
class TrainSchedule:
    train: str
    plan: str
    starts: tuple[int, ...]  # one start time (ticks) per position of the plan


@dataclass(frozen=True)
class Solution:
    schedules: tuple[TrainSchedule, ...]

    @property
    def served(self) -> tuple[str, ...]:
        return tuple(s.train for s in self.schedules)

    @property
    def plan_choice(self) -> dict[str, str]:
        return {s.train: s.plan for s in self.schedules}

    def schedule(self, train: str) -> TrainSchedule | None:
        for s in self.schedules:
            if s.train == train:
                return s
        return None

    def objective(self, inst: Instance) -> int:
        """Number of served candidate trains (|T*|)."""
        fixed = {t.id for t in inst.fixed_trains}
        return sum(1 for s in self.schedules if s.train not in fixed)

    def start_times(self, inst: Instance) -> dict[str, int]:
        out = {}
        for s in self.schedules:
            plan = inst.train(s.train).plan(s.plan)
            for key, start in zip(plan_node_keys(plan), s.starts):
                out[node_name(s.train, key)] = start
        return out

    def shifted(self, train: str, position: int, delta: int) -> "Solution":
        """Copy with one start time moved by ``delta`` ticks."""
        out = []
        for s in self.schedules:
            if s.train == train:
                starts = list(s.starts)
                starts[position] += delta
                s = TrainSchedule(s.train, s.plan, tuple(starts))
            out.append(s)
        return Solution(tuple(out))


def _minutes(ticks: int) -> int | float:
    q, r = divmod(ticks, TICKS_PER_MINUTE)
    return q if r == 0 else ticks / TICKS_PER_MINUTE


def solution_to_document(sol: Solution, inst: Instance) -> dict[str, Any]:
    trains = []
    for s in sol.schedules:
        plan = inst.train(s.train).plan(s.plan)
        trains.append(
            {
                "id": s.train,
                "plan": s.plan,
                "operations": [
                    {"op": op, "start_minutes": _minutes(t)} for op, t in zip(plan.sequence, s.starts)
                ],
            }
        )
    return {
        "served": list(sol.served),
        "objective": sol.objective(inst),
        "trains": trains,
    }


def solution_from_document(doc: Mapping[str, Any], inst: Instance) -> Solution:
    out = []
    order = {t.id: i for i, t in enumerate(inst.trains)}
    for td in doc["trains"]:
        train = inst.train(td["id"])
        plan = train.plan(td["plan"])
        ops = td["operations"]
        if [o["op"] for o in ops] != list(plan.sequence):
            raise ValueError(f"train {train.id}: operations do not follow plan {plan.id}")
        out.append(TrainSchedule(train.id, plan.id, tuple(minutes_to_ticks(o["start_minutes"]) for o in ops)))
    out.sort(key=lambda s: order[s.train])
    return Solution(tuple(out))
