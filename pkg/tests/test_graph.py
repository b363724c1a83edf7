from __future__ import annotations

from collections import Counter
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from yardsat.graph import (
    ORIGIN,
    ArcKind,
    GraphError,
    build_conflict_tuples,
    build_graph,
    build_unavailability_arcs,
    canonical_tuple,
    enumerate_conflicts,
    tuple_keys,
)
from yardsat.instance import Instance, parse_instance
from yardsat.randomgen import random_instance
from yardsat.timeunits import minutes_to_ticks as T

from conftest import chain_doc, chain_instance


def _kinds(g):
    return Counter(a.kind for a in g.arcs)


def test_single_plan_arc_sets():
    doc = chain_doc(
        [("u2", ["R"], 10, 5), ("u3", ["R"], 10, None), ("u4", ["R"], 10, None)],
        [{"id": "t", "arrival": [0, 10], "departure": [50, 80]}],
        [{"id": "R", "capacity": 1}],
    )
    doc["operations"][0]["max_wait"] = None  # arrival drawn without a backward arc
    g = build_graph(parse_instance(doc))
    kinds = _kinds(g)
    assert kinds[ArcKind.STRICT_FORWARD] == 4
    assert kinds[ArcKind.STRICT_BACKWARD] == 1
    assert kinds[ArcKind.ARRIVAL_WINDOW] == 2
    assert kinds[ArcKind.DEPARTURE_WINDOW] == 2
    back = next(a for a in g.arcs if a.kind == ArcKind.STRICT_BACKWARD)
    assert back.length == -(T(10) + T(5))
    assert g.nodes[back.head].operation == "u2"


def test_arrival_wait_zero_adds_backward_arc():
    g = build_graph(
        chain_instance(
            [("m", ["R"], 10, None)],
            [{"id": "t", "arrival": [0, 10], "departure": [20, 80]}],
            [{"id": "R", "capacity": 1}],
        )
    )
    back = [a for a in g.arcs if a.kind == ArcKind.STRICT_BACKWARD]
    assert len(back) == 1 and back[0].length == 0


def _branching_doc():
    ops = [{"id": "arr", "kind": "arrival"}, {"id": "dep", "kind": "departure"}]
    ops += [{"id": f"u{i}", "resources": ["R"], "duration": 10} for i in range(1, 6)]
    return {
        "epsilon_minutes": 1,
        "resources": [{"id": "R", "capacity": 2}],
        "operations": ops,
        "trains": {
            "candidate": [
                {
                    "id": "t",
                    "arrival": [0, 0],
                    "departure": [40, 200],
                    "plans": [
                        {"id": "p1", "sequence": ["arr", "u1", "u2", "u3", "u5", "dep"]},
                        {"id": "p2", "sequence": ["arr", "u1", "u2", "u4", "u5", "dep"]},
                    ],
                }
            ]
        },
    }


def test_shared_operations_are_merged():
    g = build_graph(parse_instance(_branching_doc()))
    assert len(g.nodes) - 1 == 7
    fwd = [a for a in g.arcs if a.kind == ArcKind.STRICT_FORWARD]
    assert len(fwd) == 7
    shared = [a for a in fwd if a.plans == {"p1", "p2"}]
    assert len(shared) == 3  # arr-u1, u1-u2, u5-dep
    u2 = g.node_at("t", ("u2", 1))
    assert len(g.successors(u2)) == 2


def test_empty_plan_list_is_rejected():
    inst = chain_instance(
        [("m", ["R"], 10, None)],
        [{"id": "t", "arrival": [0, 10], "departure": [20, 80]}],
        [{"id": "R", "capacity": 1}],
    )
    broken = replace(inst.trains[0], plans=())
    object.__setattr__(inst, "trains", (broken,))  # bypass parse-time checks
    with pytest.raises(GraphError):
        build_graph(inst)


# --------------------------------------------------------------------------
# conflicts


def _pair_instance(cap=1, period=None, dep_hi=60):
    return chain_instance(
        [("ship", ["TS"], 20, None), ("wash", ["W"], 10, None)],
        [
            {"id": "a", "arrival": [0, 10], "departure": [30, dep_hi]},
            {"id": "b", "arrival": [5, 15], "departure": [35, dep_hi]},
        ],
        [{"id": "TS", "capacity": cap}, {"id": "W", "capacity": 1}],
        period=period,
    )


def test_pairs_per_shared_group():
    g = build_graph(_pair_instance())
    pairs = enumerate_conflicts(g)
    named = {(g.nodes[p.u].id, g.nodes[p.v].id, tuple(sorted(p.shared_resources))) for p in pairs}
    assert ("a:ship", "b:ship", ("TS",)) in named
    assert ("a:wash", "b:wash", ("W",)) in named
    assert len(pairs) == 2


def test_disjoint_footprints_have_no_pairs():
    doc = chain_doc(
        [("m", ["R"], 10, None), ("n", ["S"], 10, None)],
        [],
        [{"id": "R", "capacity": 1}, {"id": "S", "capacity": 1}],
    )
    doc["trains"]["candidate"] = [
        {"id": "a", "arrival": [0, 10], "departure": [30, 60], "plans": [{"id": "pa", "sequence": ["arr", "m", "dep"]}]},
        {"id": "b", "arrival": [0, 10], "departure": [30, 60], "plans": [{"id": "pb", "sequence": ["arr", "n", "dep"]}]},
    ]
    assert enumerate_conflicts(build_graph(parse_instance(doc))) == []


def test_same_train_pairs_are_listed():
    g = build_graph(
        chain_instance(
            [("in", ["AD"], 10, None), ("out", ["AD"], 10, None)],
            [{"id": "t", "arrival": [0, 10], "departure": [30, 60]}],
            [{"id": "AD", "capacity": 2}],
        )
    )
    pairs = enumerate_conflicts(g)
    assert [(g.nodes[p.u].id, g.nodes[p.v].id) for p in pairs] == [("t:in", "t:out")]


def test_single_period_tuple_has_four_arcs():
    g = build_graph(_pair_instance(cap=2))
    eps = g.instance.epsilon
    pair = next(p for p in enumerate_conflicts(g) if "TS" in p.shared_resources and not p.same_node)
    (ct,) = build_conflict_tuples(g, [pair])
    assert len(ct.arcs) == 4
    assert sorted(a.length for a in ct.arcs) == [-eps, -eps, eps, eps]
    assert [a.kind for a in ct.u_first + ct.v_first] == [ArcKind.CONFLICT_PRECEDENCE] * 2
    assert {a.kind for a in ct.meeting} == {ArcKind.CONFLICT_MEETING}


def test_capacity_one_pair_has_no_meeting():
    g = build_graph(_pair_instance(cap=1))
    pair = next(p for p in enumerate_conflicts(g) if "TS" in p.shared_resources and not p.same_node)
    (ct,) = build_conflict_tuples(g, [pair])
    assert not ct.meeting_allowed and ct.meeting == ()


def test_two_replicas_give_three_tuples():
    g = build_graph(_pair_instance(cap=2, period=60, dep_hi=100))
    assert g.k == 2
    pair = next(p for p in enumerate_conflicts(g) if "TS" in p.shared_resources and not p.same_node)
    keys = tuple_keys(g, pair, k=2)
    assert len(keys) == 3
    anchors = sorted((g.conflict_tuple(k).anchored, g.conflict_tuple(k).replica_index) for k in keys)
    # (u, v^1), (u, v^2), (v, u^2)
    assert anchors == [("u", 1), ("u", 2), ("v", 2)]


def test_replica_pair_maps_to_anchored_tuple():
    g = build_graph(_pair_instance(cap=2, period=60, dep_hi=100))
    pair = next(p for p in enumerate_conflicts(g) if "TS" in p.shared_resources and not p.same_node)
    key = canonical_tuple(pair.u, 2, pair.v, 3)
    ct = g.conflict_tuple(key)
    assert ct.anchored == "u" and ct.replica_index == 3 - (2 - 1)
    # the mirrored reference lands on the same tuple
    assert canonical_tuple(pair.v, 3, pair.u, 2) == key


def test_periodic_tuple_lengths_follow_shift():
    g = build_graph(_pair_instance(cap=2, period=60, dep_hi=100))
    eps, tau = g.instance.epsilon, g.tau
    pair = next(p for p in enumerate_conflicts(g) if "TS" in p.shared_resources and not p.same_node)
    ct = g.conflict_tuple((pair.u, pair.v, 1))
    assert {a.length for a in ct.u_first} == {eps - tau}
    assert {a.length for a in ct.v_first} == {eps + tau}
    lit = build_graph(g.instance, convention="paper-literal").conflict_tuple((pair.u, pair.v, 1))
    assert {a.length for a in lit.u_first} == {eps + tau}


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_tuple_count_is_2k_minus_1(seed):
    g = build_graph(random_instance(seed))
    for pair in enumerate_conflicts(g):
        keys = tuple_keys(g, pair)
        same = g.nodes[pair.u].owner == g.nodes[pair.v].owner
        if pair.same_node:
            assert len(keys) == g.k - 1
        else:
            assert len(keys) == 2 * g.k - 1 - same
        for key in keys:
            ct = g.conflict_tuple(key)
            su, sv = len(g.successors(pair.u)), len(g.successors(pair.v))
            assert len(ct.u_first) == su and len(ct.v_first) == sv
            assert len(ct.meeting) == ((su + sv) if ct.meeting_allowed else 0)


# --------------------------------------------------------------------------
# unavailability


def _night_instance(period_minutes=1440, dep="30:00"):
    return chain_instance(
        [("ship", ["RS"], 60, None)],
        [{"id": "t", "arrival": ["22:00", "22:00"], "departure": ["23:30", dep]}],
        [{"id": "RS", "capacity": 1, "unavailable": [{"start": "23:00", "end": "05:00"}]}],
        period=period_minutes,
    )


def test_night_shift_arcs():
    g = build_graph(_night_instance())
    assert g.k == 1
    (item,) = build_unavailability_arcs(g)
    u = g.node_at("t", ("ship", 1))
    (v,) = g.successors(u)
    assert item.node == u
    (before,) = item.before
    assert (before.tail, before.head, before.length) == (v, ORIGIN, -T(1380))
    assert (item.after.tail, item.after.head, item.after.length) == (ORIGIN, u, T(1740))
    (during,) = item.during
    assert (during.tail, during.head, during.length) == (u, v, T(60) + T(360))


def test_operation_off_the_resource_gets_no_arcs():
    inst = chain_instance(
        [("ship", ["TS"], 60, None)],
        [{"id": "t", "arrival": ["22:00", "22:00"], "departure": ["23:30", "30:00"]}],
        [{"id": "TS", "capacity": 1}, {"id": "RS", "capacity": 1, "unavailable": [{"start": "23:00", "end": "05:00"}]}],
        period=1440,
    )
    assert build_unavailability_arcs(build_graph(inst)) == []


def test_two_periods_double_the_arcs():
    g = build_graph(_night_instance())
    items = build_unavailability_arcs(g, periods=[1, 2])
    assert len(items) == 2
    tau = g.tau
    assert items[1].after.length - items[0].after.length == tau
    assert items[1].before[0].length - items[0].before[0].length == -tau


# --------------------------------------------------------------------------
# node bounds


def test_bounds_clip_to_windows():
    g = build_graph(
        chain_instance(
            [("a", ["R"], 30, None), ("b", ["R"], 45, None)],
            [{"id": "t", "arrival": [600, 660], "departure": [1200, 1260]}],
            [{"id": "R", "capacity": 1}],
        )
    )
    for u in g.train_nodes["t"]:
        assert g.lb[u] >= T(600) and g.ub[u] <= T(1260)


def test_first_operation_starts_on_arrival():
    g = build_graph(
        chain_instance(
            [("a", ["R"], 30, None), ("b", ["R"], 45, None), ("c", ["R"], 10, None)],
            [{"id": "t", "arrival": [600, 660], "departure": [1200, 1260]}],
            [{"id": "R", "capacity": 1}],
        )
    )
    first = g.node_at("t", ("a", 1))
    third = g.node_at("t", ("b", 1))
    assert g.lb[first] == T(600)
    assert g.ub[first] == T(660)
    assert g.lb[third] == T(600) + T(30)


def test_dump_is_deterministic():
    inst = random_instance(7)
    assert build_graph(inst).dump() == build_graph(inst).dump()


def test_unknown_convention():
    with pytest.raises(ValueError):
        build_graph(random_instance(1), convention="other")


def test_instance_type():
    assert isinstance(random_instance(3), Instance)
