"""Independent schedule checks built from the instance alone.

Nothing here touches the disjunctive graph: start times are checked against
the raw windows, durations and waits; capacities by folding occupation
intervals onto the period circle.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .instance import Instance, TrainService, plan_node_keys
from .schedule import Solution, TrainSchedule


@dataclass(frozen=True)
class Finding:
    check: str
    entity: str
    passed: bool
    detail: str = ""


@dataclass
class Verdict:
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(f.passed for f in self.findings)

    @property
    def failures(self) -> list[Finding]:
        return [f for f in self.findings if not f.passed]

    def add(self, check: str, entity: str, passed: bool, detail: str = "") -> None:
        self.findings.append(Finding(check, entity, passed, detail))

    def extend(self, other: "Verdict") -> None:
        self.findings.extend(other.findings)

    def to_document(self) -> list[dict]:
        return [
            {"check": f.check, "entity": f.entity, "result": "pass" if f.passed else "fail", "detail": f.detail}
            for f in self.findings
        ]


@dataclass(frozen=True)
class OccupancyProfile:
    """Concurrent-use count on ``[0, horizon)`` as exact breakpoint segments."""

    resource: str
    capacity: int
    origin: int
    horizon: int
    segments: tuple[tuple[int, int, int], ...]  # (start, end, count)

    @property
    def integral(self) -> int:
        return sum((e - s) * c for s, e, c in self.segments)

    @property
    def peak(self) -> int:
        return max((c for _, _, c in self.segments), default=0)

    @property
    def avg_fraction(self) -> Fraction:
        return Fraction(self.integral, self.capacity * self.horizon)

    @property
    def saturated_fraction(self) -> Fraction:
        full = sum(e - s for s, e, c in self.segments if c >= self.capacity)
        return Fraction(full, self.horizon)


# --------------------------------------------------------------------------
# single train


def check_single(schedule: TrainSchedule, train: TrainService, inst: Instance) -> Verdict:
    """Windows, minimum completion and maximum wait of one train's schedule."""
    v = Verdict()
    tid = train.id
    try:
        plan = train.plan(schedule.plan)
    except KeyError:
        v.add("plan", tid, False, f"unknown plan {schedule.plan!r}")
        return v
    seq, starts = plan.sequence, schedule.starts
    if len(starts) != len(seq):
        v.add("plan", tid, False, f"{len(starts)} start times for {len(seq)} operations")
        return v
    ok = True
    (alo, ahi), (qlo, qhi) = train.arrival_window, train.departure_window
    if not (alo <= starts[0] <= ahi):
        ok = False
        v.add("arrival-window", tid, False, f"arrival {starts[0]} outside [{alo}, {ahi}]")
    if not (qlo <= starts[-1] <= qhi):
        ok = False
        v.add("departure-window", tid, False, f"departure {starts[-1]} outside [{qlo}, {qhi}]")
    for j in range(len(seq) - 1):
        op = inst.operations[seq[j]]
        gap = starts[j + 1] - starts[j]
        if gap < op.duration:
            ok = False
            v.add("minimum completion", f"{tid}:{op.id}", False, f"gap {gap} < duration {op.duration}")
        elif op.max_wait is not None and gap > op.duration + op.max_wait:
            ok = False
            v.add("maximum wait", f"{tid}:{op.id}", False, f"gap {gap} > {op.duration} + {op.max_wait}")
    for key, start in zip(plan_node_keys(plan), starts):
        win = train.op_window(key)
        if win is not None and not (win[0] <= start <= win[1]):
            ok = False
            v.add("operation window", f"{tid}:{key[0]}", False, f"start {start} outside [{win[0]}, {win[1]}]")
    if ok:
        v.add("single", tid, True)
    return v


# --------------------------------------------------------------------------
# occupation intervals


def train_intervals(schedule: TrainSchedule, inst: Instance, resource: str) -> list[tuple[int, int]]:
    """Merged occupation of ``resource`` by one train replica, ``[start, end)``.

    Each operation holds its resources from its start until its successor
    starts, plus the separation tail epsilon.
    """
    plan = inst.train(schedule.train).plan(schedule.plan)
    eps = inst.epsilon
    raw = []
    for j, oid in enumerate(plan.sequence[:-1]):
        if resource in inst.operations[oid].resources:
            raw.append((schedule.starts[j], schedule.starts[j + 1] + eps))
    raw.sort()
    merged: list[tuple[int, int]] = []
    for s, e in raw:
        if merged and s <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], e))
        else:
            merged.append((s, e))
    return merged


def occupation_g(schedule: TrainSchedule, inst: Instance, resource: str) -> int:
    """Run-based occupation: sum over maximal runs of (end of run + eps - start)."""
    plan = inst.train(schedule.train).plan(schedule.plan)
    total, run_start = 0, None
    for j, oid in enumerate(plan.sequence):
        uses = resource in inst.operations[oid].resources
        if uses and run_start is None:
            run_start = schedule.starts[j]
        elif not uses and run_start is not None:
            total += schedule.starts[j] - run_start + inst.epsilon
            run_start = None
    return total


def fold_profile(intervals: Iterable[tuple[int, int]], period: int) -> list[tuple[int, int, int]]:
    """Fold intervals modulo ``period`` with multiplicity; exact breakpoints."""
    delta: dict[int, int] = {0: 0, period: 0}
    base = 0
    for s, e in intervals:
        length = e - s
        if length <= 0:
            continue
        full, rem = divmod(length, period)
        base += full
        if rem:
            a = s % period
            b = a + rem
            if b <= period:
                delta[a] = delta.get(a, 0) + 1
                delta[b] = delta.get(b, 0) - 1
            else:
                delta[a] = delta.get(a, 0) + 1
                delta[period] = delta.get(period, 0) - 1
                delta[0] = delta.get(0, 0) + 1
                delta[b - period] = delta.get(b - period, 0) - 1
    return _segments(delta, 0, period, base)


def line_profile(intervals: Iterable[tuple[int, int]], lo: int, hi: int) -> list[tuple[int, int, int]]:
    delta: dict[int, int] = {lo: 0, hi: 0}
    for s, e in intervals:
        if e > s:
            delta[s] = delta.get(s, 0) + 1
            delta[e] = delta.get(e, 0) - 1
    return _segments(delta, lo, hi, 0)


def _segments(delta: dict[int, int], lo: int, hi: int, base: int) -> list[tuple[int, int, int]]:
    points = sorted(delta)
    count = base
    segs: list[tuple[int, int, int]] = []
    for a, b in zip(points, points[1:]):
        count += delta[a]
        if a >= hi or b <= lo:
            continue
        if segs and segs[-1][2] == count and segs[-1][1] == a:
            segs[-1] = (segs[-1][0], b, count)
        else:
            segs.append((a, b, count))
    return segs


def unrolled_max(intervals: Iterable[tuple[int, int]], period: int, k: int) -> int:
    """Maximum concurrency after copying each interval into 2k consecutive periods.

    Cross-check for :func:`fold_profile`; intervals must start in ``[0, k*period)``.
    """
    events = []
    for s, e in intervals:
        if e <= s:
            continue
        for j in range(2 * k):
            events.append((s + j * period, 1))
            events.append((e + j * period, -1))
    events.sort()
    best = count = 0
    for _, d in events:
        count += d
        best = max(best, count)
    return best


# --------------------------------------------------------------------------
# periodic checks


def _window_instances(start: int, end: int, period: int | None, lo: int, hi: int):
    if period is None:
        if start < hi and end > lo:
            yield start, end
        return
    first = (lo - end) // period
    last = (hi - start) // period + 1
    for j in range(first, last + 1):
        s, e = start + j * period, end + j * period
        if s < hi and e > lo:
            yield s, e


def check_unavailability(schedule: TrainSchedule, inst: Instance) -> list[str]:
    """Violations of resource unavailability by one train (empty when fine).

    An operation holding the resource over ``[s(u), s(u'))`` that meets a
    window instance must be stretched by at least the window length.
    """
    plan = inst.train(schedule.train).plan(schedule.plan)
    out = []
    for j, oid in enumerate(plan.sequence[:-1]):
        op = inst.operations[oid]
        su, sv = schedule.starts[j], schedule.starts[j + 1]
        for rid in sorted(op.resources):
            for w in inst.resource(rid).unavailability_windows:
                for h, h2 in _window_instances(w.start, w.end, inst.period, su, sv):
                    if sv - su < op.duration + (h2 - h):
                        out.append(f"{schedule.train}:{oid} holds {rid} over [{su}, {sv}) during [{h}, {h2})")
    return out


def resource_profiles(sol: Solution, inst: Instance) -> dict[str, OccupancyProfile]:
    profiles = {}
    if inst.period is not None:
        lo, hi = 0, inst.period
    else:
        trains = [inst.train(t) for t in sol.served] or list(inst.trains)
        lo = min((t.arrival_window[0] for t in trains), default=0)
        hi = max((t.departure_window[1] for t in trains), default=0) + inst.epsilon
        hi = max(hi, lo + 1)
    for r in inst.resources:
        ivs = [iv for s in sol.schedules for iv in train_intervals(s, inst, r.id)]
        if inst.period is not None:
            segs = fold_profile(ivs, inst.period)
        else:
            segs = line_profile(ivs, lo, hi)
        profiles[r.id] = OccupancyProfile(r.id, r.capacity, lo, hi - lo, tuple(segs))
    return profiles


def check_periodic(sol: Solution, inst: Instance) -> tuple[Verdict, dict[str, OccupancyProfile]]:
    """Capacity over the period circle, unavailability and the utilization cap."""
    v = Verdict()
    served = list(sol.served)
    if len(set(served)) != len(served):
        v.add("served", "solution", False, "a train is scheduled twice")
    for t in inst.fixed_trains:
        if t.id not in served:
            v.add("fixed-served", t.id, False, "fixed train not scheduled")
    profiles = resource_profiles(sol, inst)
    for rid, prof in profiles.items():
        if prof.peak > prof.capacity:
            where = next(s for s in prof.segments if s[2] > prof.capacity)
            v.add("capacity", rid, False, f"{where[2]} users in [{where[0]}, {where[1]}) > capacity {prof.capacity}")
        else:
            v.add("capacity", rid, True)
    for s in sol.schedules:
        for msg in check_unavailability(s, inst):
            v.add("unavailability", s.train, False, msg)
    budget_scale = inst.horizon
    for r in inst.resources:
        used = sum(occupation_g(s, inst, r.id) for s in sol.schedules)
        limit = inst.utilization_cap * r.capacity * budget_scale
        v.add("utilization", r.id, used <= limit, f"{used} of {float(limit):g}")
    return v, profiles


def validate(sol: Solution, inst: Instance) -> tuple[Verdict, dict[str, OccupancyProfile]]:
    """Every check: single-train feasibility for each served train, then periodic."""
    v = Verdict()
    for s in sol.schedules:
        try:
            train = inst.train(s.train)
        except KeyError:
            v.add("served", s.train, False, "unknown train")
            return v, {}
        v.extend(check_single(s, train, inst))
    if not v.ok:
        return v, {}
    pv, profiles = check_periodic(sol, inst)
    v.extend(pv)
    return v, profiles


def profiles_to_csv(profiles: dict[str, OccupancyProfile]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["resource", "t_start", "t_end", "count"])
    for rid in profiles:
        for s, e, c in profiles[rid].segments:
            w.writerow([rid, s, e, c])
    return buf.getvalue()
