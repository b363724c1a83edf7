"""Disjunctive (alternative) graph over the operations of all plans.

Every arc ``(tail, head, length)`` stands for ``start[head] >= start[tail] + length``
when active. Node 0 is the origin ``o`` (time zero). Each train contributes a
shrunk DAG in which plans sharing an operation share its node.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator

from .instance import (
    DerivedQuantities,
    Instance,
    InstanceError,
    NodeKey,
    OpKind,
    compute_derived,
    node_name,
    plan_node_keys,
)

ORIGIN = 0


class GraphError(ValueError):
    pass


class InfeasibleInstance(ValueError):
    """A fixed train cannot be scheduled even in isolation."""


class UnavailabilityAssumptionError(ValueError):
    pass


class ArcKind(str, Enum):
    STRICT_FORWARD = "strict-forward"
    STRICT_BACKWARD = "strict-backward"
    ARRIVAL_WINDOW = "arrival-window"
    DEPARTURE_WINDOW = "departure-window"
    FIXED_WINDOW = "fixed-window"
    CONFLICT_PRECEDENCE = "conflict-precedence"
    CONFLICT_MEETING = "conflict-meeting"
    AVAIL_BEFORE = "avail-before"
    AVAIL_AFTER = "avail-after"
    AVAIL_DURING = "avail-during"


@dataclass(frozen=True)
class Node:
    index: int
    id: str
    owner: str | None = None
    operation: str | None = None
    key: NodeKey | None = None
    plans: frozenset[str] = frozenset()
    resources: frozenset[str] = frozenset()
    duration: int = 0


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    length: int
    kind: ArcKind
    plans: frozenset[str] = frozenset()
    conflict_tuple: "TupleKey | None" = None
    avail_period: int | None = None


@dataclass(frozen=True)
class ConflictPair:
    u: int
    v: int
    shared_resources: frozenset[str]

    @property
    def same_node(self) -> bool:
        return self.u == self.v


# (u, v, shift): first replica of u against v shifted by shift periods, u <= v
TupleKey = tuple[int, int, int]


@dataclass(frozen=True)
class ConflictTuple:
    key: TupleKey
    pair: ConflictPair
    anchored: str  # "u" or "v": endpoint taken in its first replica
    replica_index: int  # i in 1..k, replica of the other endpoint
    meeting_allowed: bool
    u_first: tuple[Arc, ...]  # (u', v) for u' in succ(u)
    v_first: tuple[Arc, ...]  # (v', u) for v' in succ(v)
    meeting: tuple[Arc, ...]  # (u, v') and (v, u')

    @property
    def shift(self) -> int:
        return self.key[2]

    @property
    def arcs(self) -> tuple[Arc, ...]:
        return self.u_first + self.v_first + self.meeting


def canonical_tuple(a: int, ra: int, b: int, rb: int) -> TupleKey:
    """Tuple key for node ``a`` in replica ``ra`` against ``b`` in replica ``rb``."""
    if a < b or (a == b and rb >= ra):
        return (a, b, rb - ra)
    return (b, a, ra - rb)


@dataclass(frozen=True)
class UnavailItem:
    """One window instance ``[start, end)`` that node ``node`` must avoid or absorb."""

    node: int
    resource: str
    window: int  # index in the resource's window list
    period: int  # i; the instance is shifted by (i - 1) * tau
    start: int
    end: int
    before: tuple[Arc, ...]  # (v, o) for v in succ(node)
    after: Arc  # (o, node)
    during: tuple[Arc, ...]  # (node, v) for v in succ(node)


@dataclass
class DisjunctiveGraph:
    instance: Instance
    derived: DerivedQuantities
    nodes: list[Node]
    arcs: list[Arc]
    succ: dict[int, tuple[int, ...]]
    train_nodes: dict[str, tuple[int, ...]]
    plan_paths: dict[tuple[str, str], tuple[int, ...]]
    plan_arcs: dict[tuple[str, str], tuple[int, ...]]
    train_arcs: dict[str, tuple[int, ...]]
    convention: str = "derived"
    lb: list[int] = field(default_factory=list)
    ub: list[int] = field(default_factory=list)
    viable_plans: dict[str, tuple[str, ...]] = field(default_factory=dict)
    _node_at: dict[tuple[str, NodeKey], int] = field(default_factory=dict)
    _tuples: dict[TupleKey, ConflictTuple] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.derived.conflict_replicas

    @property
    def tau(self) -> int | None:
        return self.instance.period

    def node_at(self, train: str, key: NodeKey) -> int:
        return self._node_at[(train, key)]

    def successors(self, u: int) -> tuple[int, ...]:
        return self.succ.get(u, ())

    def bounds(self) -> dict[int, tuple[int, int]]:
        return {i: (self.lb[i], self.ub[i]) for i in range(len(self.nodes))}

    def big_m(self, arc: Arc) -> int:
        """Deactivation constant ``ub(tail) - lb(head) + length`` (clamped at 0)."""
        return max(0, self.ub[arc.tail] - self.lb[arc.head] + arc.length)

    def conflict_tuple(self, key: TupleKey) -> ConflictTuple:
        t = self._tuples.get(key)
        if t is None:
            u, v, d = key
            pair = ConflictPair(u, v, self.nodes[u].resources & self.nodes[v].resources)
            t = _make_tuple(self, pair, d)
            self._tuples[key] = t
        return t

    def dump(self) -> str:
        """Plain-text edge list, stable across runs."""
        lines = [f"# nodes {len(self.nodes)} arcs {len(self.arcs)} k {self.k}"]
        for n in self.nodes:
            lines.append(f"node {n.index} {n.id} lb={self.lb[n.index]} ub={self.ub[n.index]}")
        for a in self.arcs:
            plans = ",".join(sorted(a.plans))
            lines.append(
                f"arc {self.nodes[a.tail].id} -> {self.nodes[a.head].id} {a.kind.value} {a.length} [{plans}]"
            )
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# construction


def _train_dag(train, operations) -> tuple[list[NodeKey], dict[NodeKey, set[str]], dict[tuple[NodeKey, NodeKey], set[str]]]:
    first_seen: dict[NodeKey, int] = {}
    plans_of: dict[NodeKey, set[str]] = {}
    edges: dict[tuple[NodeKey, NodeKey], set[str]] = {}
    for p in train.plans:
        keys = plan_node_keys(p)
        for key in keys:
            first_seen.setdefault(key, len(first_seen))
            plans_of.setdefault(key, set()).add(p.id)
        for a, b in zip(keys, keys[1:]):
            edges.setdefault((a, b), set()).add(p.id)
    # Kahn's algorithm, ties broken by first appearance
    indeg = {key: 0 for key in first_seen}
    out: dict[NodeKey, list[NodeKey]] = {key: [] for key in first_seen}
    for a, b in edges:
        indeg[b] += 1
        out[a].append(b)
    heap = [(first_seen[k], k) for k, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, key = heapq.heappop(heap)
        order.append(key)
        for nxt in out[key]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                heapq.heappush(heap, (first_seen[nxt], nxt))
    if len(order) != len(first_seen):
        raise GraphError(f"plans of train {train.id} cannot be merged into an acyclic graph")
    return order, plans_of, edges


def build_graph(inst: Instance, derived: DerivedQuantities | None = None, convention: str = "derived") -> DisjunctiveGraph:
    """Nodes, strict arcs, window arcs and successor sets; node bounds included."""
    if convention not in ("derived", "paper-literal"):
        raise ValueError(f"unknown sign convention {convention!r}")
    derived = derived or compute_derived(inst)
    ops = inst.operations
    nodes = [Node(ORIGIN, "o")]
    arcs: list[Arc] = []
    succ: dict[int, set[int]] = {}
    node_at: dict[tuple[str, NodeKey], int] = {}
    train_nodes, plan_paths, plan_arcs, train_arcs = {}, {}, {}, {}

    for t in inst.trains:
        if not t.plans:
            raise GraphError(f"train {t.id} has no plans")
        order, plans_of, edges = _train_dag(t, ops)
        for key in order:
            op = ops[key[0]]
            idx = len(nodes)
            nodes.append(
                Node(idx, node_name(t.id, key), t.id, op.id, key, frozenset(plans_of[key]), op.resources, op.duration)
            )
            node_at[(t.id, key)] = idx
        train_nodes[t.id] = tuple(node_at[(t.id, k)] for k in order)
        first = len(arcs)
        arc_of_edge: dict[tuple[int, int, ArcKind], int] = {}

        def add(a: Arc) -> int:
            arcs.append(a)
            return len(arcs) - 1

        for (ka, kb), plans in sorted(edges.items(), key=lambda e: (order.index(e[0][0]), order.index(e[0][1]))):
            u, v = node_at[(t.id, ka)], node_at[(t.id, kb)]
            op = ops[ka[0]]
            succ.setdefault(u, set()).add(v)
            arc_of_edge[(u, v, ArcKind.STRICT_FORWARD)] = add(Arc(u, v, op.duration, ArcKind.STRICT_FORWARD, frozenset(plans)))
            if op.max_wait is not None:
                arc_of_edge[(v, u, ArcKind.STRICT_BACKWARD)] = add(
                    Arc(v, u, -(op.duration + op.max_wait), ArcKind.STRICT_BACKWARD, frozenset(plans))
                )
        (alo, ahi), (qlo, qhi) = t.arrival_window, t.departure_window
        for key in order:
            u = node_at[(t.id, key)]
            plans = frozenset(plans_of[key])
            kind = ops[key[0]].kind
            if kind == OpKind.ARRIVAL:
                add(Arc(ORIGIN, u, alo, ArcKind.ARRIVAL_WINDOW, plans))
                add(Arc(u, ORIGIN, -ahi, ArcKind.ARRIVAL_WINDOW, plans))
            elif kind == OpKind.DEPARTURE:
                add(Arc(ORIGIN, u, qlo, ArcKind.DEPARTURE_WINDOW, plans))
                add(Arc(u, ORIGIN, -qhi, ArcKind.DEPARTURE_WINDOW, plans))
            win = t.op_window(key)
            if win is not None:
                add(Arc(ORIGIN, u, win[0], ArcKind.FIXED_WINDOW, plans))
                add(Arc(u, ORIGIN, -win[1], ArcKind.FIXED_WINDOW, plans))
        train_arcs[t.id] = tuple(range(first, len(arcs)))
        for p in t.plans:
            path = tuple(node_at[(t.id, k)] for k in plan_node_keys(p))
            plan_paths[(t.id, p.id)] = path
            plan_arcs[(t.id, p.id)] = tuple(i for i in range(first, len(arcs)) if p.id in arcs[i].plans)

    g = DisjunctiveGraph(
        instance=inst,
        derived=derived,
        nodes=nodes,
        arcs=arcs,
        succ={u: tuple(sorted(vs)) for u, vs in sorted(succ.items())},
        train_nodes=train_nodes,
        plan_paths=plan_paths,
        plan_arcs=plan_arcs,
        train_arcs=train_arcs,
        convention=convention,
        _node_at=node_at,
    )
    compute_node_bounds(g)
    return g


# --------------------------------------------------------------------------
# bounds


def longest_paths(n: int, arcs: Iterable[tuple[int, int, int]], source: int = ORIGIN) -> list[float] | None:
    """Bellman-Ford for longest paths; ``None`` on a positive cycle.

    Unreached nodes keep ``-inf``.
    """
    arcs = list(arcs)
    dist = [float("-inf")] * n
    dist[source] = 0
    for _ in range(n):
        changed = False
        for a, b, w in arcs:
            if dist[a] + w > dist[b]:
                dist[b] = dist[a] + w
                changed = True
        if not changed:
            return dist
    return None


def plan_difference_arcs(g: DisjunctiveGraph, train: str, plan: str) -> list[tuple[int, int, int]]:
    return [(g.arcs[i].tail, g.arcs[i].head, g.arcs[i].length) for i in g.plan_arcs[(train, plan)]]


def compute_node_bounds(g: DisjunctiveGraph) -> None:
    """Per-node ``[lb, ub]`` from the plan difference systems, loosest over viable plans.

    ``lb(o) = ub(o) = 0``. Plans whose own system is inconsistent are dropped
    from ``g.viable_plans``; a fixed train left with none makes the instance
    infeasible.
    """
    n = len(g.nodes)
    lb: list[int | None] = [None] * n
    ub: list[int | None] = [None] * n
    lb[ORIGIN] = ub[ORIGIN] = 0
    for t in g.instance.trains:
        viable = []
        for p in t.plans:
            local = [ORIGIN, *g.plan_paths[(t.id, p.id)]]
            index = {u: i for i, u in enumerate(local)}
            arcs = [(index[a], index[b], w) for a, b, w in plan_difference_arcs(g, t.id, p.id)]
            fwd = longest_paths(len(local), arcs)
            if fwd is None:
                continue
            bwd = longest_paths(len(local), [(b, a, w) for a, b, w in arcs])
            viable.append(p.id)
            for u, i in index.items():
                if u == ORIGIN:
                    continue
                lo, hi = int(fwd[i]), int(-bwd[i])
                lb[u] = lo if lb[u] is None else min(lb[u], lo)
                ub[u] = hi if ub[u] is None else max(ub[u], hi)
        g.viable_plans[t.id] = tuple(viable)
        if not viable and t.is_fixed:
            raise InfeasibleInstance(f"fixed train {t.id} has no schedulable plan")
        for u in g.train_nodes[t.id]:
            if lb[u] is None:  # only in dead plans: keep the raw window
                lb[u], ub[u] = t.arrival_window[0], t.departure_window[1]
    g.lb = [int(x) for x in lb]
    g.ub = [int(x) for x in ub]


# --------------------------------------------------------------------------
# conflicts


def enumerate_conflicts(g: DisjunctiveGraph, include_self: bool | None = None) -> list[ConflictPair]:
    """All unordered node pairs sharing a resource, same-train pairs included.

    Self pairs ``{u, u}`` (a node against its own later replicas) are listed
    when the schedule spans more than one period.
    """
    if include_self is None:
        include_self = g.k > 1
    users: dict[str, list[int]] = {}
    for n in g.nodes[1:]:
        for r in n.resources:
            users.setdefault(r, []).append(n.index)
    found: set[tuple[int, int]] = set()
    for r in sorted(users):
        for u, v in itertools.combinations_with_replacement(users[r], 2):
            if u == v and not include_self:
                continue
            found.add((u, v))
    return [ConflictPair(u, v, g.nodes[u].resources & g.nodes[v].resources) for u, v in sorted(found)]


def tuple_keys(g: DisjunctiveGraph, pair: ConflictPair, k: int | None = None) -> list[TupleKey]:
    """Tuples of a pair: ``(u, v^i)`` for i=1..k and ``(v, u^i)`` for i=2..k.

    First-replica tuples of same-train pairs are omitted: both endpoints then
    belong to one train replica, whose own plan already orders them.
    """
    k = g.k if k is None else k
    u, v = pair.u, pair.v
    if g.tau is None:
        k = 1
    if u == v:
        return [(u, u, d) for d in range(1, k)]
    same_train = g.nodes[u].owner == g.nodes[v].owner
    keys = []
    for d in range(-(k - 1), k):
        if d == 0 and same_train:
            continue
        keys.append((u, v, d))
    return keys


def meeting_allowed(g: DisjunctiveGraph, pair: ConflictPair) -> bool:
    caps = [g.instance.resource(r).capacity for r in pair.shared_resources]
    return bool(caps) and min(caps) > 1


def _make_tuple(g: DisjunctiveGraph, pair: ConflictPair, d: int) -> ConflictTuple:
    eps = g.instance.epsilon
    tau = g.tau or 0
    shift = d * tau if g.convention == "derived" else -d * tau
    u, v = pair.u, pair.v
    key = (u, v, d)
    su, sv = g.successors(u), g.successors(v)
    u_first = tuple(Arc(a, v, eps - shift, ArcKind.CONFLICT_PRECEDENCE, conflict_tuple=key) for a in su)
    v_first = tuple(Arc(b, u, eps + shift, ArcKind.CONFLICT_PRECEDENCE, conflict_tuple=key) for b in sv)
    allowed = meeting_allowed(g, pair)
    meeting: tuple[Arc, ...] = ()
    if allowed:
        meeting = tuple(Arc(u, b, -eps - shift, ArcKind.CONFLICT_MEETING, conflict_tuple=key) for b in sv) + tuple(
            Arc(v, a, -eps + shift, ArcKind.CONFLICT_MEETING, conflict_tuple=key) for a in su
        )
    anchored, index = ("u", d + 1) if d >= 0 else ("v", 1 - d)
    return ConflictTuple(key, pair, anchored, index, allowed, u_first, v_first, meeting)


def build_conflict_tuples(g: DisjunctiveGraph, pairs: Iterable[ConflictPair], k: int | None = None) -> list[ConflictTuple]:
    """Conflict tuples with their precedence and meeting arcs."""
    out = []
    for pair in pairs:
        for key in tuple_keys(g, pair, k):
            out.append(g.conflict_tuple(key))
    return out


# --------------------------------------------------------------------------
# unavailability


def window_instances(g: DisjunctiveGraph, u: int) -> Iterator[tuple[str, int, int, int, int]]:
    """Window instances ``(resource, window, period, start, end)`` that node ``u`` could meet."""
    inst = g.instance
    node = g.nodes[u]
    succs = g.successors(u)
    if not succs:
        return
    lo = g.lb[u]
    hi = max(g.ub[v] for v in succs)
    for rid in sorted(node.resources):
        res = inst.resource(rid)
        for wi, w in enumerate(res.unavailability_windows):
            if inst.period is None:
                if w.start < hi and w.end > lo:
                    yield rid, wi, 1, w.start, w.end
                continue
            tau = inst.period
            first = (lo - w.end) // tau + 1
            last = (hi - w.start) // tau + 1
            for i in range(first, last + 1):
                s, e = w.start + (i - 1) * tau, w.end + (i - 1) * tau
                if s < hi and e > lo:
                    yield rid, wi, i, s, e


def _unavail_item(g: DisjunctiveGraph, u: int, rid: str, wi: int, i: int) -> UnavailItem:
    tau = g.tau or 0
    w = g.instance.resource(rid).unavailability_windows[wi]
    s, e = w.start + (i - 1) * tau, w.end + (i - 1) * tau
    succs = g.successors(u)
    lam = g.nodes[u].duration
    return UnavailItem(
        node=u,
        resource=rid,
        window=wi,
        period=i,
        start=s,
        end=e,
        before=tuple(Arc(v, ORIGIN, -s, ArcKind.AVAIL_BEFORE, avail_period=i) for v in succs),
        after=Arc(ORIGIN, u, e, ArcKind.AVAIL_AFTER, avail_period=i),
        during=tuple(Arc(u, v, lam + w.length, ArcKind.AVAIL_DURING) for v in succs),
    )


def build_unavailability_arcs(g: DisjunctiveGraph, periods: Iterable[int] | None = None) -> list[UnavailItem]:
    """Before/after/during alternatives for every node using an unavailable resource.

    With ``periods=None`` only window instances the node can actually meet
    (given its bounds) are produced. Raises when an operation could be
    interrupted twice.
    """
    items = []
    explicit = None if periods is None else list(periods)
    for node in g.nodes[1:]:
        u = node.index
        if not any(g.instance.resource(r).unavailability_windows for r in node.resources):
            continue
        if not g.successors(u):
            continue
        found = list(window_instances(g, u))
        _check_single_interruption(g, u, found)
        if explicit is None:
            for rid, wi, i, _, _ in found:
                items.append(_unavail_item(g, u, rid, wi, i))
        else:
            for rid in sorted(node.resources):
                for wi, _ in enumerate(g.instance.resource(rid).unavailability_windows):
                    for i in explicit:
                        items.append(_unavail_item(g, u, rid, wi, i))
    return items


def _check_single_interruption(g: DisjunctiveGraph, u: int, found) -> None:
    if len(found) < 2:
        return
    span = max(g.ub[v] for v in g.successors(u)) - g.lb[u]
    op = g.instance.operations[g.nodes[u].operation]
    if op.max_wait is not None:
        span = min(span, op.duration + op.max_wait)
    spans = sorted((s, e) for _, _, _, s, e in found)
    for (s0, e0), (s1, e1) in zip(spans, spans[1:]):
        if span > s1 - e0:
            raise UnavailabilityAssumptionError(
                f"operation {g.nodes[u].id} may be interrupted by two unavailability windows "
                f"([{s0}, {e0}) and [{s1}, {e1}) ticks); bound its max_wait"
            )
