"""Exact saturation by row-and-column generation.

The outer loop raises a cardinality floor one train at a time. Each floor is
decided by the generation loop: solve the restricted problem (only pooled
conflict tuples and capacity sets are enforced), take its earliest schedule,
look for capacity violations with the interval-clique sweep, enlarge the pool
and repeat. The restricted problem is solved by a depth-first search over
train, plan, tuple and unavailability decisions; once those are fixed the
big-M rows collapse to a difference system, kept consistent incrementally.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Callable

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .difference import DifferenceSystem
from .graph import (
    ORIGIN,
    Arc,
    ArcKind,
    DisjunctiveGraph,
    InfeasibleInstance,
    TupleKey,
    UnavailItem,
    build_graph,
    build_unavailability_arcs,
    canonical_tuple,
)
from .instance import Instance, compute_derived
from .schedule import Solution, TrainSchedule
from .separation import ReplicaRef, separate_capacity

SKIP = None
U_FIRST, V_FIRST, MEET = "u", "v", "m"
BEFORE, AFTER, DURING = "before", "after", "during"


class SolverTimeout(Exception):
    pass


@dataclass(frozen=True)
class SolverOptions:
    time_budget: float | None = None  # seconds of wall clock for one saturate call
    use_cuts: bool = True
    convention: str = "derived"
    grid: int | None = None  # lattice (ticks) for utilization repair; default gcd of the data
    required: frozenset[str] = frozenset()  # candidates that must be served
    max_rounds: int | None = None


@dataclass
class ConstraintPool:
    """Pooled conflict tuples (F_h) and capacity sets Q per resource."""

    tuples: set[TupleKey] = field(default_factory=set)
    q: dict[str, set[tuple[ReplicaRef, ...]]] = field(default_factory=dict)

    @property
    def q_count(self) -> int:
        return sum(len(v) for v in self.q.values())

    def add(self, violations) -> int:
        """Add separated ``(resource, Q)`` sets and the tuples of their pairs."""
        new = 0
        for r, q in violations:
            bucket = self.q.setdefault(r, set())
            if q not in bucket:
                bucket.add(q)
                new += 1
            for a in range(len(q)):
                for b in range(a + 1, len(q)):
                    (u, ru), (v, rv) = q[a], q[b]
                    key = canonical_tuple(u, ru, v, rv)
                    if key not in self.tuples:
                        self.tuples.add(key)
                        new += 1
        return new

    def sorted_q(self) -> list[tuple[str, tuple[ReplicaRef, ...]]]:
        return [(r, q) for r in sorted(self.q) for q in sorted(self.q[r])]


def q_pairs(q: tuple[ReplicaRef, ...]) -> list[TupleKey]:
    return [canonical_tuple(q[a][0], q[a][1], q[b][0], q[b][1]) for a in range(len(q)) for b in range(a + 1, len(q))]


@dataclass
class SolveStats:
    rounds: int = 0
    floors: int = 0
    expansions: int = 0
    separated: int = 0
    leaf_repairs: int = 0
    pool_tuples: int = 0
    pool_q: int = 0

    def as_dict(self) -> dict[str, int]:
        return dict(self.__dict__)


@dataclass
class SolveResult:
    status: str  # optimal | infeasible_at_floor | timeout
    solution: Solution | None
    stats: SolveStats
    pool: ConstraintPool
    wall_time: float = 0.0
    diagnostics: list[str] = field(default_factory=list)
    incumbents: list[int] = field(default_factory=list)
    heuristic: bool = False

    @property
    def served_count(self) -> int:
        return 0 if self.solution is None else len(self.solution.served)


# --------------------------------------------------------------------------
# capacity cuts


@dataclass(frozen=True)
class CutData:
    stay_budget: Fraction | None  # cut 12 right-hand side, None when not applicable
    stays: dict[str, int]
    count_bound: int | None  # cut 13
    occupation_budget: dict[str, Fraction]  # cut 14 right-hand side per resource
    plan_occupation: dict[tuple[str, str, str], int]


def cut_data(inst: Instance, derived=None) -> CutData:
    derived = derived or compute_derived(inst)
    h = inst.horizon
    cap = inst.utilization_cap
    # cut 12 is valid only if a served train holds some track for its whole stay
    tracks = {r.id for r in inst.resources if r.counts_as_track}
    track_bound = bool(tracks) and all(
        len(p.sequence) > 2 and all(inst.operations[o].resources & tracks for o in p.sequence[1:-1])
        for t in inst.trains
        for p in t.plans
    )
    stay_budget = cap * inst.track_count * h if track_bound else None
    bound = None
    for r in inst.resources:
        mu = min((derived.train_occupation[(r.id, t.id)] for t in inst.trains), default=0)
        if mu <= 0:
            continue
        b = math.floor(cap * r.capacity * h / mu)
        bound = b if bound is None else min(bound, b)
    return CutData(
        stay_budget=stay_budget,
        stays=dict(derived.min_stay),
        count_bound=bound,
        occupation_budget={r.id: cap * r.capacity * h for r in inst.resources},
        plan_occupation=dict(derived.plan_occupation),
    )


# --------------------------------------------------------------------------
# helpers


def data_gcd(inst: Instance) -> int:
    values = [inst.epsilon]
    if inst.period is not None:
        values.append(inst.period)
    for op in inst.operations.values():
        values += [op.duration, op.max_wait or 0]
    for t in inst.trains:
        values += [*t.arrival_window, *t.departure_window]
        for _, lo, hi in t.op_windows:
            values += [lo, hi]
    for r in inst.resources:
        for w in r.unavailability_windows:
            values += [w.start, w.end]
    return reduce(math.gcd, values, 0) or 1


def _utilization_terms(inst: Instance, train: str, plan_id: str, path: tuple[int, ...]):
    """Per resource: list of (start node, end node) runs of the plan path."""
    plan = inst.train(train).plan(plan_id)
    out: dict[str, list[tuple[int, int]]] = {}
    for r in inst.resources:
        start = None
        for j, oid in enumerate(plan.sequence):
            uses = r.id in inst.operations[oid].resources
            if uses and start is None:
                start = path[j]
            elif not uses and start is not None:
                out.setdefault(r.id, []).append((start, path[j]))
                start = None
    return out


# --------------------------------------------------------------------------
# restricted problem


_DEAD = object()


class _Frame:
    __slots__ = ("item", "options", "next", "mark")

    def __init__(self, item, options, mark):
        self.item = item
        self.options = options
        self.next = 0
        self.mark = mark


class RestrictedSearch:
    """Exact DFS for one restricted feasibility problem (fixed pool and floor)."""

    def __init__(
        self,
        graph: DisjunctiveGraph,
        pool: ConstraintPool,
        floor: int,
        options: SolverOptions,
        unavail: list[UnavailItem],
        cuts: CutData | None,
        deadline: float | None,
        stats: SolveStats,
    ):
        self.g = graph
        self.inst = graph.instance
        self.pool = pool
        self.floor = floor
        self.opts = options
        self.cuts = cuts
        self.deadline = deadline
        self.stats = stats
        self.ds = DifferenceSystem(len(graph.nodes))
        must = {t.id for t in self.inst.fixed_trains} | set(options.required)
        self.must = must

        def width(t):
            return (t.arrival_window[1] - t.arrival_window[0]) + (t.departure_window[1] - t.departure_window[0])

        # chronological order keeps consecutive decisions local in time
        order = sorted(
            enumerate(self.inst.trains),
            key=lambda it: (it[1].arrival_window[0], it[1].id not in must, width(it[1]), it[0]),
        )
        self.trains = [t for _, t in order]

        self.tuples_by_node: dict[int, list[TupleKey]] = {}
        for key in sorted(pool.tuples):
            u, v, _ = key
            self.tuples_by_node.setdefault(u, []).append(key)
            if v != u:
                self.tuples_by_node.setdefault(v, []).append(key)
        self.q_by_tuple: dict[TupleKey, list[list[TupleKey]]] = {}
        for _, q in pool.sorted_q():
            pairs = q_pairs(q)
            for key in pairs:
                self.q_by_tuple.setdefault(key, []).append(pairs)
        self.unavail_by_node: dict[int, list[UnavailItem]] = {}
        for it in unavail:
            self.unavail_by_node.setdefault(it.node, []).append(it)

        # mutable state, all undone through the log
        self.plan_of: dict[str, str | None] = {}
        self.succ: dict[int, int] = {}  # active node -> active successor
        self.active: set[int] = set()
        self.choice: dict[TupleKey, str] = {}
        self.pending: list = []
        self.ptr = 0
        self.tptr = 0
        self.served = 0
        self.stay_sum = 0
        self.occ_sum: dict[str, int] = {r.id: 0 for r in self.inst.resources}
        h = self.inst.horizon
        cap = self.inst.utilization_cap
        self.util_limit = {r.id: math.floor(cap * r.capacity * h) for r in self.inst.resources}
        self.runs: list[tuple[str, int, int, int]] = []  # (resource, first node, node after run, min length)
        self._log: list[tuple] = []

    # -- state management ------------------------------------------------

    def _mark(self):
        return (self.ds.checkpoint(), len(self._log), len(self.pending), self.ptr, self.tptr, self.served, self.stay_sum)

    def _rollback(self, mark) -> None:
        dsm, logn, pend, ptr, tptr, served, stay = mark
        self.ds.rollback(dsm)
        while len(self._log) > logn:
            entry = self._log.pop()
            kind = entry[0]
            if kind == "plan":
                del self.plan_of[entry[1]]
            elif kind == "node":
                self.active.discard(entry[1])
                self.succ.pop(entry[1], None)
            elif kind == "choice":
                del self.choice[entry[1]]
            elif kind == "occ":
                self.occ_sum[entry[1]] -= entry[2]
            elif kind == "runs":
                del self.runs[len(self.runs) - entry[1] :]
            elif kind == "swap":
                p = self.pending
                p[entry[1]], p[entry[2]] = p[entry[2]], p[entry[1]]
        del self.pending[pend:]
        self.ptr, self.tptr, self.served, self.stay_sum = ptr, tptr, served, stay

    def _check_time(self) -> None:
        if self.deadline is not None and self.stats.expansions % 64 == 0 and time.monotonic() > self.deadline:
            raise SolverTimeout()

    # -- items and options -----------------------------------------------

    def _next_item(self):
        """Next decision and its options; ``_DEAD`` if some pending item has none left.

        Pending disjunctions are filtered against the current time windows and
        the one with the fewest remaining options is decided first.
        """
        if self.ptr < len(self.pending):
            best = None
            for i in range(self.ptr, len(self.pending)):
                opts = self._options(self.pending[i])
                if not opts:
                    return _DEAD
                if best is None or len(opts) < len(best[1]):
                    best = (i, opts)
                    if len(opts) == 1:
                        break
            i, opts = best
            if i != self.ptr:
                self._swap(i, self.ptr)
            return self.pending[self.ptr], opts
        if self.tptr < len(self.trains):
            item = ("train", self.trains[self.tptr])
            return item, self._options(item)
        return None

    def _swap(self, i: int, j: int) -> None:
        p = self.pending
        p[i], p[j] = p[j], p[i]
        self._log.append(("swap", i, j))

    def _possible(self, arcs) -> bool:
        f, b = self.ds.fwd, self.ds.bwd
        return all(f[a.tail] + a.length <= -b[a.head] for a in arcs)

    def _meet_closes_q(self, key: TupleKey) -> bool:
        for pairs in self.q_by_tuple.get(key, ()):
            if all(p == key or self.choice.get(p) == MEET for p in pairs):
                return True
        return False

    def _options(self, item) -> list:
        kind = item[0]
        if kind == "train":
            t = item[1]
            opts = list(self.g.viable_plans.get(t.id, ()))
            if t.id not in self.must:
                opts.append(SKIP)
            return opts
        if kind == "tuple":
            return self._tuple_options(item[1])
        return self._unavail_options(item[1])

    def _tuple_arcs(self, key: TupleKey, option: str) -> list[Arc]:
        t = self.g.conflict_tuple(key)
        u, v, _ = key
        su, sv = self.succ[u], self.succ[v]
        if option == U_FIRST:
            return [a for a in t.u_first if a.tail == su]
        if option == V_FIRST:
            return [a for a in t.v_first if a.tail == sv]
        return [a for a in t.meeting if (a.tail == u and a.head == sv) or (a.tail == v and a.head == su)]

    def _tuple_options(self, key: TupleKey) -> list[str]:
        t = self.g.conflict_tuple(key)
        opts = [U_FIRST, V_FIRST] + ([MEET] if t.meeting_allowed and not self._meet_closes_q(key) else [])
        arcs = {o: self._tuple_arcs(key, o) for o in opts}
        opts = [o for o in opts if self._possible(arcs[o])]
        for o in (U_FIRST, V_FIRST):
            if self.ds.entailed(arcs[o]):
                return [o]
        for o in opts:
            if self.ds.satisfied(arcs[o]):
                return [o] + [x for x in opts if x != o]
        return opts

    def _unavail_arcs(self, it: UnavailItem, option: str) -> list[Arc]:
        v = self.succ[it.node]
        if option == BEFORE:
            return [a for a in it.before if a.tail == v]
        if option == AFTER:
            return [it.after]
        return [a for a in it.during if a.head == v]

    def _unavail_options(self, it: UnavailItem) -> list[str]:
        opts = [BEFORE, AFTER, DURING]
        arcs = {o: self._unavail_arcs(it, o) for o in opts}
        opts = [o for o in opts if self._possible(arcs[o])]
        for o in (BEFORE, AFTER):
            if self.ds.entailed(arcs[o]):
                return [o]
        for o in opts:
            if self.ds.satisfied(arcs[o]):
                return [o] + [x for x in opts if x != o]
        return opts

    # -- applying options ------------------------------------------------

    def _apply(self, item, option) -> bool:
        kind = item[0]
        if kind == "train":
            return self._apply_train(item[1], option)
        if kind == "tuple":
            key = item[1]
            self.ptr += 1
            if not self.ds.add_arcs(self._tuple_arcs(key, option)):
                return False
            self.choice[key] = option
            self._log.append(("choice", key))
            if option == MEET:
                for pairs in self.q_by_tuple.get(key, ()):
                    if all(self.choice.get(p) == MEET for p in pairs):
                        return False
            return True
        self.ptr += 1
        return self.ds.add_arcs(self._unavail_arcs(item[1], option))

    def _apply_train(self, t, plan_id) -> bool:
        self.tptr += 1
        self.plan_of[t.id] = plan_id
        self._log.append(("plan", t.id))
        if plan_id is SKIP:
            return self.served + len(self.trains) - self.tptr >= self.floor
        self.served += 1
        if self.cuts is not None:
            c = self.cuts
            if c.stay_budget is not None:
                self.stay_sum += c.stays[t.id]
                if self.stay_sum > c.stay_budget:
                    return False
            if c.count_bound is not None and self.served > c.count_bound:
                return False
            for r in self.inst.resources:
                mu = c.plan_occupation[(r.id, t.id, plan_id)]
                if mu:
                    self.occ_sum[r.id] += mu
                    self._log.append(("occ", r.id, mu))
                    if self.occ_sum[r.id] > c.occupation_budget[r.id]:
                        return False
        g = self.g
        arc_ids = sorted(
            g.plan_arcs[(t.id, plan_id)],
            key=lambda i: (g.arcs[i].kind not in (ArcKind.ARRIVAL_WINDOW, ArcKind.DEPARTURE_WINDOW), i),
        )
        for i in arc_ids:
            a = g.arcs[i]
            if not self.ds.add(a.tail, a.head, a.length):
                return False
        path = g.plan_paths[(t.id, plan_id)]
        pos = {u: j for j, u in enumerate(path)}
        seq = self.inst.train(t.id).plan(plan_id).sequence
        added = 0
        for r, runs in _utilization_terms(self.inst, t.id, plan_id, path).items():
            for a, b in runs:
                lam = sum(self.inst.operations[o].duration for o in seq[pos[a] : pos[b]])
                self.runs.append((r, a, b, lam))
                added += 1
        if added:
            self._log.append(("runs", added))
        new_nodes = []
        for j, u in enumerate(path):
            self.active.add(u)
            if j + 1 < len(path):
                self.succ[u] = path[j + 1]
            self._log.append(("node", u))
            new_nodes.append(u)
        keys = set()
        for u in new_nodes:
            for key in self.tuples_by_node.get(u, ()):
                a, b, _ = key
                if a in self.succ and b in self.succ:
                    keys.add(key)
        lb = g.lb
        for key in sorted(keys, key=lambda k: (min(lb[k[0]], lb[k[1]]), k)):
            self.pending.append(("tuple", key))
        items = []
        for u in new_nodes:
            for it in self.unavail_by_node.get(u, ()):
                if u in self.succ:
                    items.append(it)
        for it in sorted(items, key=lambda it: (it.start, it.node, it.resource, it.window)):
            self.pending.append(("avail", it))
        return True

    # -- search ----------------------------------------------------------

    def run(self) -> dict[int, int] | None:
        """Earliest start times of a feasible leaf, or ``None``."""
        if self.cuts is not None and self.cuts.count_bound is not None and self.floor > self.cuts.count_bound:
            return None
        if len(self.trains) < self.floor:
            return None
        stack: list[_Frame] = []
        nxt = self._next_item()
        if nxt is _DEAD:
            return None
        if nxt is None:
            return self._leaf()
        stack.append(_Frame(nxt[0], nxt[1], self._mark()))
        while stack:
            fr = stack[-1]
            if fr.next >= len(fr.options):
                stack.pop()
                self._rollback(fr.mark)
                continue
            option = fr.options[fr.next]
            fr.next += 1
            self._rollback(fr.mark)
            self.stats.expansions += 1
            self._check_time()
            if not self._apply(fr.item, option) or not self._utilization_bound_ok():
                continue
            nxt = self._next_item()
            if nxt is _DEAD:
                continue
            if nxt is None:
                starts = self._leaf()
                if starts is not None:
                    return starts
                continue
            stack.append(_Frame(nxt[0], nxt[1], self._mark()))
        return None

    def _utilization_bound_ok(self) -> bool:
        """Occupation lower bound per resource from the current time windows."""
        if not self.runs:
            return True
        f, b = self.ds.fwd, self.ds.bwd
        eps = self.inst.epsilon
        used: dict[str, int] = {}
        for r, a, e, lam in self.runs:
            d = f[e] + b[a]
            used[r] = used.get(r, 0) + (d if d > lam else lam) + eps
        lim = self.util_limit
        return all(v <= lim[r] for r, v in used.items())

    def _leaf(self) -> dict[int, int] | None:
        if self.served < self.floor:
            return None
        starts = {u: int(self.ds.fwd[u]) for u in sorted(self.active)}
        starts[ORIGIN] = 0
        if self._utilization_ok(starts):
            return starts
        self.stats.leaf_repairs += 1
        return self._repair(starts)

    def _runs(self):
        out = []
        for t in self.inst.trains:
            p = self.plan_of.get(t.id)
            if p is None:
                continue
            path = self.g.plan_paths[(t.id, p)]
            for r, runs in _utilization_terms(self.inst, t.id, p, path).items():
                out.append((r, runs))
        return out

    def _utilization_ok(self, starts) -> bool:
        eps = self.inst.epsilon
        used: dict[str, int] = {}
        for r, runs in self._runs():
            used[r] = used.get(r, 0) + sum(starts[b] - starts[a] + eps for a, b in runs)
        cap, h = self.inst.utilization_cap, self.inst.horizon
        return all(used[r] <= cap * self.inst.resource(r).capacity * h for r in used)

    def _repair(self, starts) -> dict[int, int] | None:
        """Search the integer lattice for times meeting the utilization cap."""
        grid = self.opts.grid or data_gcd(self.inst)
        nodes = sorted(set(starts) | {ORIGIN})
        col = {u: i for i, u in enumerate(nodes)}
        rows, lo, hi = [], [], []
        n = len(nodes)
        for x in range(self.ds.n):
            for y, length in self.ds.out[x]:
                if x in col and y in col:
                    row = np.zeros(n)
                    row[col[y]] += grid
                    row[col[x]] -= grid
                    rows.append(row)
                    lo.append(length)
                    hi.append(np.inf)
        eps = self.inst.epsilon
        cap, h = self.inst.utilization_cap, self.inst.horizon
        per_res: dict[str, np.ndarray] = {}
        const: dict[str, int] = {}
        for r, runs in self._runs():
            row = per_res.setdefault(r, np.zeros(n))
            for a, b in runs:
                row[col[b]] += grid
                row[col[a]] -= grid
                const[r] = const.get(r, 0) + eps
        for r in sorted(per_res):
            rows.append(per_res[r])
            lo.append(-np.inf)
            hi.append(float(cap * self.inst.resource(r).capacity * h - const[r]))
        lb = np.array([math.ceil(self.g.lb[u] / grid) for u in nodes], dtype=float)
        ub = np.array([math.floor(self.g.ub[u] / grid) for u in nodes], dtype=float)
        lb[col[ORIGIN]] = ub[col[ORIGIN]] = 0
        res = milp(
            c=np.ones(n),
            constraints=[LinearConstraint(np.array(rows), np.array(lo), np.array(hi))] if rows else [],
            integrality=np.ones(n),
            bounds=Bounds(lb, ub),
        )
        if res.status != 0 or res.x is None:
            return None
        return {u: int(round(res.x[col[u]])) * grid for u in nodes}


# --------------------------------------------------------------------------
# generation loop and outer cardinality sequence


def _solution_from(graph: DisjunctiveGraph, search: RestrictedSearch, starts: dict[int, int]) -> Solution:
    out = []
    for t in graph.instance.trains:
        p = search.plan_of.get(t.id)
        if p is None:
            continue
        path = graph.plan_paths[(t.id, p)]
        out.append(TrainSchedule(t.id, p, tuple(starts[u] for u in path)))
    return Solution(tuple(out))


def solve_feasibility(
    graph: DisjunctiveGraph,
    pool: ConstraintPool,
    floor: int,
    options: SolverOptions = SolverOptions(),
    unavail: list[UnavailItem] | None = None,
    stats: SolveStats | None = None,
    deadline: float | None = None,
) -> Solution | None:
    """Generation loop for one floor; returns a schedule serving >= ``floor`` trains."""
    stats = stats or SolveStats()
    if unavail is None:
        unavail = build_unavailability_arcs(graph)
    cuts = cut_data(graph.instance, graph.derived) if options.use_cuts else None
    while True:
        stats.rounds += 1
        search = RestrictedSearch(graph, pool, floor, options, unavail, cuts, deadline, stats)
        starts = search.run()
        if starts is None:
            return None
        violations = separate_capacity(graph, starts, search.succ)
        if not violations:
            return _solution_from(graph, search, starts)
        added = pool.add(violations)
        stats.separated += len(violations)
        stats.pool_tuples, stats.pool_q = len(pool.tuples), pool.q_count
        if added == 0:  # cannot happen: a violated set is never already satisfied
            raise RuntimeError("separation produced no new constraint")
        if options.max_rounds is not None and stats.rounds >= options.max_rounds:
            raise SolverTimeout()


def saturate(
    inst: Instance,
    options: SolverOptions = SolverOptions(),
    on_incumbent: Callable[[Solution], None] | None = None,
) -> SolveResult:
    """Maximum number of candidate trains that fit next to the fixed timetable."""
    t0 = time.monotonic()
    deadline = None if options.time_budget is None else t0 + options.time_budget
    stats = SolveStats()
    pool = ConstraintPool()
    try:
        graph = build_graph(inst, convention=options.convention)
    except InfeasibleInstance as exc:
        return SolveResult("infeasible_at_floor", None, stats, pool, time.monotonic() - t0, [str(exc)])
    unavail = build_unavailability_arcs(graph)
    must = {t.id for t in inst.fixed_trains} | set(options.required)
    floor = len(must)
    best: Solution | None = None
    incumbents: list[int] = []
    status = "optimal"
    try:
        stats.floors += 1
        best = solve_feasibility(graph, pool, floor, options, unavail, stats, deadline)
        if best is None:
            return SolveResult(
                "infeasible_at_floor",
                None,
                stats,
                pool,
                time.monotonic() - t0,
                [f"no schedule serves the {floor} fixed/required trains"],
            )
        incumbents.append(len(best.served))
        if on_incumbent:
            on_incumbent(best)
        while len(best.served) < len(inst.trains):
            stats.floors += 1
            nxt = solve_feasibility(graph, pool, len(best.served) + 1, options, unavail, stats, deadline)
            if nxt is None:
                break
            best = nxt
            incumbents.append(len(best.served))
            if on_incumbent:
                on_incumbent(best)
    except SolverTimeout:
        status = "timeout"
    stats.pool_tuples, stats.pool_q = len(pool.tuples), pool.q_count
    return SolveResult(status, best, stats, pool, time.monotonic() - t0, [], incumbents)


def check_floor(inst: Instance, floor: int, options: SolverOptions = SolverOptions()) -> SolveResult:
    """Feasibility question only: is there a schedule serving at least ``floor`` trains?"""
    t0 = time.monotonic()
    deadline = None if options.time_budget is None else t0 + options.time_budget
    stats = SolveStats(floors=1)
    pool = ConstraintPool()
    try:
        graph = build_graph(inst, convention=options.convention)
    except InfeasibleInstance as exc:
        return SolveResult("infeasible_at_floor", None, stats, pool, time.monotonic() - t0, [str(exc)])
    floor = max(floor, len({t.id for t in inst.fixed_trains} | set(options.required)))
    try:
        sol = solve_feasibility(graph, pool, floor, options, None, stats, deadline)
    except SolverTimeout:
        return SolveResult("timeout", None, stats, pool, time.monotonic() - t0)
    stats.pool_tuples, stats.pool_q = len(pool.tuples), pool.q_count
    if sol is None:
        return SolveResult("infeasible_at_floor", None, stats, pool, time.monotonic() - t0, [f"no schedule serves {floor} trains"])
    return SolveResult("optimal", sol, stats, pool, time.monotonic() - t0, [], [len(sol.served)])
