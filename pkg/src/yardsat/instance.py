"""Yard, operation, plan and train-service types; instance ingestion and
derived quantities (makespan, replica count, minimum stays/occupations)."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from pathlib import Path
from types import MappingProxyType
from typing import Any, Iterable, Mapping

import yaml

from .timeunits import TimeFormatError, format_minutes, minutes_to_ticks, parse_fraction

DEFAULT_EPSILON = 1  # ticks, i.e. 0.1 minute
DEFAULT_UTILIZATION_CAP = Fraction(85, 100)


class InstanceError(ValueError):
    """Raised for malformed instances; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class OpKind(str, Enum):
    ARRIVAL = "arrival"
    DEPARTURE = "departure"
    INTERNAL = "internal"


@dataclass(frozen=True)
class UnavailabilityWindow:
    """Resource downtime ``[start, end)`` repeated every period.

    ``end`` may exceed the period for windows that wrap past its end
    (23:00-05:00 is stored as ``[1380, 1740)`` minutes).
    """

    start: int
    end: int

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class Resource:
    id: str
    capacity: int
    counts_as_track: bool = False
    unavailability_windows: tuple[UnavailabilityWindow, ...] = ()


@dataclass(frozen=True)
class Operation:
    id: str
    resources: frozenset[str] = frozenset()
    duration: int = 0
    max_wait: int | None = None  # None = unbounded
    kind: OpKind = OpKind.INTERNAL


@dataclass(frozen=True)
class Plan:
    id: str
    sequence: tuple[str, ...]


NodeKey = tuple[str, int]  # (operation id, occurrence within the plan, from 1)


def plan_node_keys(plan: Plan) -> list[NodeKey]:
    """Per-position node keys: repeated operations get occurrence 2, 3, ..."""
    seen: Counter[str] = Counter()
    keys = []
    for op in plan.sequence:
        seen[op] += 1
        keys.append((op, seen[op]))
    return keys


def node_name(train_id: str, key: NodeKey) -> str:
    op, occ = key
    return f"{train_id}:{op}" if occ == 1 else f"{train_id}:{op}#{occ}"


@dataclass(frozen=True)
class TrainService:
    id: str
    status: str  # "fixed" (in T) or "candidate" (in T')
    plans: tuple[Plan, ...]
    arrival_window: tuple[int, int]
    departure_window: tuple[int, int]
    # extra start-time windows per node key, added when fixing a reference schedule
    op_windows: tuple[tuple[NodeKey, int, int], ...] = ()

    @property
    def is_fixed(self) -> bool:
        return self.status == "fixed"

    def plan(self, plan_id: str) -> Plan:
        for p in self.plans:
            if p.id == plan_id:
                return p
        raise KeyError(f"train {self.id} has no plan {plan_id!r}")

    def op_window(self, key: NodeKey) -> tuple[int, int] | None:
        for k, lo, hi in self.op_windows:
            if k == key:
                return lo, hi
        return None


@dataclass(frozen=True)
class Instance:
    resources: tuple[Resource, ...]
    operations: Mapping[str, Operation]
    trains: tuple[TrainService, ...]
    period: int | None = None
    epsilon: int = DEFAULT_EPSILON
    utilization_cap: Fraction = DEFAULT_UTILIZATION_CAP
    name: str = "instance"

    def __post_init__(self):
        object.__setattr__(self, "operations", MappingProxyType(dict(self.operations)))
        check_instance(self)

    @property
    def resource_map(self) -> dict[str, Resource]:
        return {r.id: r for r in self.resources}

    def resource(self, rid: str) -> Resource:
        for r in self.resources:
            if r.id == rid:
                return r
        raise KeyError(rid)

    def train(self, tid: str) -> TrainService:
        for t in self.trains:
            if t.id == tid:
                return t
        raise KeyError(tid)

    @property
    def fixed_trains(self) -> tuple[TrainService, ...]:
        return tuple(t for t in self.trains if t.is_fixed)

    @property
    def candidate_trains(self) -> tuple[TrainService, ...]:
        return tuple(t for t in self.trains if not t.is_fixed)

    @property
    def track_count(self) -> int:
        return sum(r.capacity for r in self.resources if r.counts_as_track)

    @property
    def horizon(self) -> int:
        """Length used for capacity budgets: the period, or the makespan for plain YSP."""
        if self.period is not None:
            return self.period
        return max(makespan(self.trains), 1)

    def with_trains(self, trains: Iterable[TrainService]) -> "Instance":
        return replace(self, trains=tuple(trains))

    def with_resources(self, resources: Iterable[Resource]) -> "Instance":
        return replace(self, resources=tuple(resources))


def makespan(trains: Iterable[TrainService]) -> int:
    trains = list(trains)
    if not trains:
        return 0
    return max(t.departure_window[1] for t in trains) - min(t.arrival_window[0] for t in trains)


# --------------------------------------------------------------------------
# validation


def check_instance(inst: Instance) -> None:
    if inst.period is not None and inst.period <= 0:
        raise InstanceError("period_minutes", "must be positive")
    if inst.epsilon <= 0:
        raise InstanceError("epsilon_minutes", "must be positive")
    if not (0 < inst.utilization_cap <= 1):
        raise InstanceError("utilization_cap", "must lie in (0, 1]")

    res_ids = set()
    for i, r in enumerate(inst.resources):
        path = f"resources[{i}]"
        if r.id in res_ids:
            raise InstanceError(path, f"duplicate resource id {r.id!r}")
        res_ids.add(r.id)
        if not isinstance(r.capacity, int) or r.capacity < 1:
            raise InstanceError(f"{path}.capacity", "must be a positive integer")
        _check_windows(inst, r, path)

    for oid, op in inst.operations.items():
        path = f"operations[{oid}]"
        for rid in sorted(op.resources):
            if rid not in res_ids:
                raise InstanceError(f"{path}.resources", f"unknown resource {rid!r}")
        if op.duration < 0:
            raise InstanceError(f"{path}.duration", "must be non-negative")
        if op.max_wait is not None and op.max_wait < 0:
            raise InstanceError(f"{path}.max_wait", "must be non-negative or null")
        if op.kind in (OpKind.ARRIVAL, OpKind.DEPARTURE):
            if op.resources or op.duration != 0:
                raise InstanceError(path, f"{op.kind.value} operations need no resources and zero duration")
            if op.max_wait not in (0, None):
                raise InstanceError(f"{path}.max_wait", "must be 0 (first operation starts on arrival) or null")

    positive = [op.duration for op in inst.operations.values() if op.duration > 0]
    if positive and inst.epsilon >= min(positive):
        raise InstanceError("epsilon_minutes", "must be smaller than every positive duration")

    train_ids = set()
    for i, t in enumerate(inst.trains):
        path = f"trains[{t.id}]"
        if t.id in train_ids:
            raise InstanceError(f"trains[{i}]", f"duplicate train id {t.id!r}")
        train_ids.add(t.id)
        if t.status not in ("fixed", "candidate"):
            raise InstanceError(f"{path}.status", f"unknown status {t.status!r}")
        if not t.plans:
            raise InstanceError(f"{path}.plans", "at least one plan is required")
        (alo, ahi), (qlo, qhi) = t.arrival_window, t.departure_window
        if alo < 0:
            raise InstanceError(f"{path}.arrival", "must not be negative")
        if not (alo <= ahi <= qlo <= qhi):
            raise InstanceError(path, "windows must satisfy arrival_lo <= arrival_hi <= departure_lo <= departure_hi")
        if t.is_fixed and (alo != ahi or qlo != qhi):
            raise InstanceError(path, "fixed trains need a single arrival and a single departure time")
        plan_ids = set()
        for j, p in enumerate(t.plans):
            ppath = f"{path}.plans[{p.id}]"
            if p.id in plan_ids:
                raise InstanceError(f"{path}.plans[{j}]", f"duplicate plan id {p.id!r}")
            plan_ids.add(p.id)
            _check_plan(inst, p, ppath)


def _check_plan(inst: Instance, p: Plan, path: str) -> None:
    if len(p.sequence) < 2:
        raise InstanceError(path, "a plan needs at least arrival and departure")
    for pos, oid in enumerate(p.sequence):
        if oid not in inst.operations:
            raise InstanceError(f"{path}.sequence[{pos}]", f"unknown operation {oid!r}")
        kind = inst.operations[oid].kind
        want = OpKind.ARRIVAL if pos == 0 else OpKind.DEPARTURE if pos == len(p.sequence) - 1 else OpKind.INTERNAL
        if kind != want:
            raise InstanceError(f"{path}.sequence[{pos}]", f"expected a {want.value} operation, got {kind.value}")


def _check_windows(inst: Instance, r: Resource, path: str) -> None:
    if not r.unavailability_windows:
        return
    tau = inst.period
    spans = []
    for j, w in enumerate(r.unavailability_windows):
        wpath = f"{path}.unavailable[{j}]"
        if w.start >= w.end:
            raise InstanceError(wpath, "start must precede end")
        if tau is not None:
            if not (0 <= w.start < tau) or w.end > w.start + tau:
                raise InstanceError(wpath, "window must start inside the period and last at most one period")
        spans.append((w.start, w.end))
    spans.sort()
    for (a0, a1), (b0, b1) in zip(spans, spans[1:]):
        if b0 < a1:
            raise InstanceError(f"{path}.unavailable", "windows overlap")
    if tau is not None and len(spans) > 1 and spans[-1][1] > spans[0][0] + tau:
        raise InstanceError(f"{path}.unavailable", "windows overlap across the period boundary")


# --------------------------------------------------------------------------
# derived quantities


def run_count(plan: Plan, operations: Mapping[str, Operation], rid: str) -> int:
    """Number of maximal runs of consecutive operations of ``plan`` using ``rid``."""
    runs, inside = 0, False
    for oid in plan.sequence:
        uses = rid in operations[oid].resources
        if uses and not inside:
            runs += 1
        inside = uses
    return runs


@dataclass(frozen=True)
class DerivedQuantities:
    makespan: int
    replica_count: int
    conflict_replicas: int
    min_stay: Mapping[str, int]
    plan_occupation: Mapping[tuple[str, str, str], int]  # (resource, train, plan)
    train_occupation: Mapping[tuple[str, str], int]  # (resource, train)
    runs: Mapping[tuple[str, str, str], int]  # (resource, train, plan)


def compute_derived(inst: Instance) -> DerivedQuantities:
    """Makespan, replica counts, minimum stays and minimum occupations."""
    zeta = makespan(inst.trains)
    if inst.period is None:
        k = kc = 1
    else:
        k = max(1, math.ceil(zeta / inst.period))
        # the eps tail of the last occupation can reach one more period
        kc = max(1, math.ceil((zeta + inst.epsilon) / inst.period))
    stay = {t.id: t.departure_window[0] - t.arrival_window[1] for t in inst.trains}
    occ: dict[tuple[str, str, str], int] = {}
    runs: dict[tuple[str, str, str], int] = {}
    occ_t: dict[tuple[str, str], int] = {}
    for r in inst.resources:
        for t in inst.trains:
            best = None
            for p in t.plans:
                beta = run_count(p, inst.operations, r.id)
                mu = sum(inst.operations[o].duration for o in p.sequence if r.id in inst.operations[o].resources)
                mu += inst.epsilon * beta
                occ[(r.id, t.id, p.id)] = mu
                runs[(r.id, t.id, p.id)] = beta
                best = mu if best is None else min(best, mu)
            occ_t[(r.id, t.id)] = best or 0
    return DerivedQuantities(
        makespan=zeta,
        replica_count=k,
        conflict_replicas=kc,
        min_stay=MappingProxyType(stay),
        plan_occupation=MappingProxyType(occ),
        train_occupation=MappingProxyType(occ_t),
        runs=MappingProxyType(runs),
    )


# --------------------------------------------------------------------------
# parsing


def _ticks(value: Any, path: str) -> int:
    try:
        return minutes_to_ticks(value)
    except (TimeFormatError, TypeError) as exc:
        raise InstanceError(path, str(exc)) from None


def _window(value: Any, path: str) -> tuple[int, int]:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise InstanceError(path, "a window is [lo, hi]")
        return _ticks(value[0], f"{path}[0]"), _ticks(value[1], f"{path}[1]")
    t = _ticks(value, path)
    return t, t


def _require(doc: Mapping, key: str, path: str) -> Any:
    if not isinstance(doc, Mapping):
        raise InstanceError(path, "expected a mapping")
    if key not in doc:
        raise InstanceError(f"{path}.{key}" if path else key, "missing field")
    return doc[key]


def _parse_plan(doc: Any, path: str) -> Plan:
    pid = _require(doc, "id", path)
    seq = _require(doc, "sequence", path)
    if not isinstance(seq, list) or not all(isinstance(s, str) for s in seq):
        raise InstanceError(f"{path}.sequence", "expected a list of operation ids")
    return Plan(str(pid), tuple(seq))


def parse_instance(doc: Mapping[str, Any]) -> Instance:
    """Build an :class:`Instance` from a parsed YAML/JSON document."""
    if not isinstance(doc, Mapping):
        raise InstanceError("", "instance document must be a mapping")
    period = doc.get("period_minutes")
    tau = None if period is None else _ticks(period, "period_minutes")

    resources = []
    for i, rd in enumerate(_require(doc, "resources", "")):
        path = f"resources[{i}]"
        windows = []
        for j, wd in enumerate(rd.get("unavailable", []) or []):
            wpath = f"{path}.unavailable[{j}]"
            start = _ticks(_require(wd, "start", wpath), f"{wpath}.start")
            end = _ticks(_require(wd, "end", wpath), f"{wpath}.end")
            if end <= start and tau is not None:
                end += tau  # wraps past the period end
            windows.append(UnavailabilityWindow(start, end))
        cap = _require(rd, "capacity", path)
        if isinstance(cap, bool) or not isinstance(cap, int):
            raise InstanceError(f"{path}.capacity", "must be an integer")
        resources.append(
            Resource(
                id=str(_require(rd, "id", path)),
                capacity=cap,
                counts_as_track=bool(rd.get("counts_as_track", False)),
                unavailability_windows=tuple(windows),
            )
        )

    operations: dict[str, Operation] = {}
    for i, od in enumerate(_require(doc, "operations", "")):
        path = f"operations[{i}]"
        oid = str(_require(od, "id", path))
        if oid in operations:
            raise InstanceError(path, f"duplicate operation id {oid!r}")
        try:
            kind = OpKind(od.get("kind", "internal"))
        except ValueError:
            raise InstanceError(f"{path}.kind", f"unknown kind {od.get('kind')!r}") from None
        terminal = kind != OpKind.INTERNAL
        mw = od.get("max_wait", 0 if terminal else None)
        operations[oid] = Operation(
            id=oid,
            resources=frozenset(str(r) for r in od.get("resources", []) or []),
            duration=_ticks(od.get("duration", 0), f"{path}.duration"),
            max_wait=None if mw is None else _ticks(mw, f"{path}.max_wait"),
            kind=kind,
        )

    catalog: dict[str, Plan] = {}
    for i, pd in enumerate(doc.get("plans", []) or []):
        p = _parse_plan(pd, f"plans[{i}]")
        catalog[p.id] = p

    trains_doc = _require(doc, "trains", "")
    if not isinstance(trains_doc, Mapping):
        raise InstanceError("trains", "expected keys 'fixed' and 'candidate'")
    trains = []
    for status in ("fixed", "candidate"):
        for i, td in enumerate(trains_doc.get(status, []) or []):
            path = f"trains.{status}[{i}]"
            plans = []
            for j, pd in enumerate(_require(td, "plans", path)):
                if isinstance(pd, str):
                    if pd not in catalog:
                        raise InstanceError(f"{path}.plans[{j}]", f"unknown plan {pd!r}")
                    plans.append(catalog[pd])
                else:
                    plans.append(_parse_plan(pd, f"{path}.plans[{j}]"))
            trains.append(
                TrainService(
                    id=str(_require(td, "id", path)),
                    status=status,
                    plans=tuple(plans),
                    arrival_window=_window(_require(td, "arrival", path), f"{path}.arrival"),
                    departure_window=_window(_require(td, "departure", path), f"{path}.departure"),
                )
            )

    return Instance(
        resources=tuple(resources),
        operations=operations,
        trains=tuple(trains),
        period=tau,
        epsilon=_ticks(doc.get("epsilon_minutes", 0.1), "epsilon_minutes"),
        utilization_cap=parse_fraction(doc.get("utilization_cap", "0.85")),
        name=str(doc.get("name", "instance")),
    )


def load_document(path: str | Path) -> Any:
    text = Path(path).read_text()
    if str(path).endswith(".json"):
        return json.loads(text)
    return yaml.safe_load(text)


def load_instance(path: str | Path) -> Instance:
    return parse_instance(load_document(path))


def instance_to_document(inst: Instance) -> dict[str, Any]:
    """Inverse of :func:`parse_instance` (times as decimal-minute strings)."""

    def m(t: int) -> str:
        return format_minutes(t)

    def train_doc(t: TrainService) -> dict[str, Any]:
        d: dict[str, Any] = {
            "id": t.id,
            "arrival": m(t.arrival_window[0]) if t.is_fixed else [m(t.arrival_window[0]), m(t.arrival_window[1])],
            "departure": m(t.departure_window[0]) if t.is_fixed else [m(t.departure_window[0]), m(t.departure_window[1])],
            "plans": [{"id": p.id, "sequence": list(p.sequence)} for p in t.plans],
        }
        return d

    return {
        "name": inst.name,
        "period_minutes": None if inst.period is None else m(inst.period),
        "epsilon_minutes": m(inst.epsilon),
        "utilization_cap": str(inst.utilization_cap),
        "resources": [
            {
                "id": r.id,
                "capacity": r.capacity,
                "counts_as_track": r.counts_as_track,
                "unavailable": [{"start": m(w.start), "end": m(w.end)} for w in r.unavailability_windows],
            }
            for r in inst.resources
        ],
        "operations": [
            {
                "id": op.id,
                "kind": op.kind.value,
                "resources": sorted(op.resources),
                "duration": m(op.duration),
                "max_wait": None if op.max_wait is None else m(op.max_wait),
            }
            for op in inst.operations.values()
        ],
        "trains": {
            "fixed": [train_doc(t) for t in inst.trains if t.is_fixed],
            "candidate": [train_doc(t) for t in inst.trains if not t.is_fixed],
        },
    }
