"""Capacity separation via maximal cliques of interval graphs.

Intervals are half-open ``[start, end)``. Two of them conflict iff they share a
point, so the maximal cliques are exactly the active sets just before an end
event that follows a start event in the sorted sweep (ends sort before starts
at equal coordinates).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

MAX_SUBSETS_PER_CLIQUE = 5

# A replica reference: (node index, replica index starting at 1)
ReplicaRef = tuple[int, int]


@dataclass(frozen=True)
class Interval:
    ref: Hashable
    start: int
    end: int
    entity: Hashable = None  # intervals of one entity count once

    @property
    def owner(self) -> Hashable:
        return self.ref if self.entity is None else self.entity


def maximal_cliques(intervals: Sequence[Interval]) -> list[list[Interval]]:
    """All maximal cliques, each sorted by ``ref``; in sweep order."""
    events = []
    for i, iv in enumerate(intervals):
        if iv.end <= iv.start:
            continue
        events.append((iv.start, 1, i))
        events.append((iv.end, 0, i))
    events.sort()
    active: dict[int, Interval] = {}
    cliques = []
    grew = False
    for _, kind, i in events:
        if kind == 1:
            active[i] = intervals[i]
            grew = True
        else:
            if grew:
                cliques.append(sorted(active.values(), key=lambda iv: _key(iv.ref)))
                grew = False
            del active[i]
    return cliques


def _key(ref):
    return (type(ref).__name__, ref)


def _distinct_owners(clique: list[Interval]) -> list[Interval]:
    """One representative interval per owner (the smallest ref)."""
    seen = {}
    for iv in clique:
        if iv.owner not in seen:
            seen[iv.owner] = iv
    return sorted(seen.values(), key=lambda iv: _key(iv.ref))


def violating_cliques(intervals: Sequence[Interval], capacity: int) -> list[list[Interval]]:
    """Maximal cliques whose distinct owners exceed ``capacity`` (deduplicated)."""
    out, seen = [], set()
    for clique in maximal_cliques(intervals):
        reps = _distinct_owners(clique)
        if len(reps) <= capacity:
            continue
        sig = tuple(_key(iv.ref) for iv in reps)
        if sig not in seen:
            seen.add(sig)
            out.append(reps)
    return out


def best_overlap_subset(
    members: Sequence[Interval], size: int, exclude: tuple[Interval, ...] | None = None
) -> tuple[Interval, ...] | None:
    """The ``size`` members whose common intersection is longest (ties by ref), other than ``exclude``."""
    best, best_len = None, None
    for left in sorted({iv.start for iv in members}):
        eligible = [iv for iv in members if iv.start <= left]
        if len(eligible) < size:
            continue
        eligible.sort(key=lambda iv: (-iv.end, _key(iv.ref)))
        options = [eligible[:size]]
        if len(eligible) > size:
            options.append(eligible[: size - 1] + [eligible[size]])
        for chosen in options:
            sub = tuple(sorted(chosen, key=lambda iv: _key(iv.ref)))
            if sub == exclude:
                continue
            length = min(iv.end for iv in chosen) - left
            if length <= 0:
                continue
            if best_len is None or length > best_len:
                best, best_len = sub, length
            break
    return best


def trim_clique(members: Sequence[Interval], capacity: int, limit: int = MAX_SUBSETS_PER_CLIQUE) -> list[tuple[Interval, ...]]:
    """Canonical ``(capacity + 1)``-subsets of a violating clique.

    The longest-overlap subset and the lexicographically first one; when they
    coincide, the longest-overlap subset among the others takes its place.
    """
    size = capacity + 1
    members = sorted(members, key=lambda iv: _key(iv.ref))
    if len(members) == size:
        return [tuple(members)]
    first = tuple(members[:size])
    best = best_overlap_subset(members, size)
    if best == first:
        best = best_overlap_subset(members, size, exclude=first)
    subsets = [s for s in (best, first) if s is not None]
    return subsets[:limit]


def separate_intervals(intervals: Sequence[Interval], capacity: int) -> list[tuple[Hashable, ...]]:
    """Violated ``(capacity + 1)``-sets of refs, deduplicated, in sweep order."""
    out, seen = [], set()
    for clique in violating_cliques(intervals, capacity):
        for sub in trim_clique(clique, capacity):
            refs = tuple(iv.ref for iv in sub)
            if refs not in seen:
                seen.add(refs)
                out.append(refs)
    return out


# --------------------------------------------------------------------------
# brute-force references (used by tests and the acceptance suite)


def brute_force_violations(intervals: Sequence[Interval], capacity: int) -> set[frozenset]:
    """Every ``(capacity + 1)``-set of distinct owners with a common point."""
    out = set()
    for combo in itertools.combinations(intervals, capacity + 1):
        if len({iv.owner for iv in combo}) < capacity + 1:
            continue
        if max(iv.start for iv in combo) < min(iv.end for iv in combo):
            out.add(frozenset(iv.ref for iv in combo))
    return out


def brute_force_maximal_cliques(intervals: Sequence[Interval]) -> set[frozenset]:
    """Maximal cliques by evaluating the active set on every elementary segment."""
    points = sorted({p for iv in intervals if iv.end > iv.start for p in (iv.start, iv.end)})
    sets = set()
    for a in points:
        s = frozenset(iv.ref for iv in intervals if iv.start <= a < iv.end)
        if s:
            sets.add(s)
    return {s for s in sets if not any(s < t for t in sets)}


# --------------------------------------------------------------------------
# schedule-level separation


def normalize(q: Iterable[ReplicaRef]) -> tuple[ReplicaRef, ...]:
    """Shift a replica set so that its smallest replica index is 1."""
    q = list(q)
    shift = min(r for _, r in q) - 1
    return tuple(sorted((u, r - shift) for u, r in q))


def occupation_intervals(graph, starts: dict[int, int], active_succ: dict[int, int], k: int) -> dict[str, list[Interval]]:
    """Per-resource intervals ``[s(u) + (i-1)tau, s(u') + (i-1)tau + eps)`` for i = 1..k."""
    inst = graph.instance
    tau = inst.period or 0
    eps = inst.epsilon
    if inst.period is None:
        k = 1
    per_res: dict[str, list[Interval]] = {}
    for u in sorted(active_succ):
        node = graph.nodes[u]
        if not node.resources:
            continue
        v = active_succ[u]
        for i in range(1, k + 1):
            iv = Interval((u, i), starts[u] + (i - 1) * tau, starts[v] + (i - 1) * tau + eps, (node.owner, i))
            for r in sorted(node.resources):
                per_res.setdefault(r, []).append(iv)
    return per_res


def separate_capacity(graph, starts: dict[int, int], active_succ: dict[int, int], k: int | None = None) -> list[tuple[str, tuple[ReplicaRef, ...]]]:
    """Violated capacity sets ``(resource, Q)`` for a schedule, Q normalized.

    ``active_succ`` maps every active resource-using node to its active
    successor.
    """
    k = graph.k if k is None else k
    out, seen = [], set()
    per_res = occupation_intervals(graph, starts, active_succ, k)
    for r in sorted(per_res):
        cap = graph.instance.resource(r).capacity
        for refs in separate_intervals(per_res[r], cap):
            q = normalize(refs)
            if (r, q) not in seen:
                seen.add((r, q))
                out.append((r, q))
    return out
