from __future__ import annotations

import importlib.util
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from yardsat.graph import build_graph
from yardsat.model import ModelError, assemble_model, count_model
from yardsat.mps import NameTable, export_model, solve_with_highs
from yardsat.randomgen import random_instance
from yardsat.solver import ConstraintPool, SolverOptions, cut_data, saturate
from yardsat.timeunits import minutes_to_ticks as T

from conftest import chain_instance

HAS_HIGHS = importlib.util.find_spec("highspy") is not None


def _three_on(cap: int):
    return chain_instance(
        [("ship", ["TS"], 20, None)],
        [{"id": n, "arrival": [0, 10], "departure": [30, 60]} for n in ("a", "b", "c")],
        [{"id": "TS", "capacity": cap}],
        period=120,
    )


def _ship_nodes(g):
    return [g.node_at(t, ("ship", 1)) for t in ("a", "b", "c")]


def test_capacity_row_rhs_cap_one():
    g = build_graph(_three_on(1))
    u, v, _ = _ship_nodes(g)
    pool = ConstraintPool()
    pool.add([("TS", ((u, 1), (v, 1)))])
    model = assemble_model(g, pool)
    (row,) = [c for c in model.constraints if c.tag == "capacity"]
    assert row.rhs == math.comb(2, 2) - 1 == 0
    assert row.terms == ()  # no meeting variable exists on a single track


def test_capacity_row_rhs_cap_two():
    g = build_graph(_three_on(2))
    q = tuple((n, 1) for n in _ship_nodes(g))
    pool = ConstraintPool()
    pool.add([("TS", q)])
    model = assemble_model(g, pool)
    (row,) = [c for c in model.constraints if c.tag == "capacity"]
    assert row.rhs == math.comb(3, 2) - 1 == 2
    assert len(row.terms) == 3


def test_capacity_set_of_wrong_size_is_rejected():
    g = build_graph(_three_on(2))
    u, v, _ = _ship_nodes(g)
    pool = ConstraintPool()
    pool.add([("TS", ((u, 1), (v, 1)))])
    with pytest.raises(ModelError):
        assemble_model(g, pool)


def test_single_fixed_train_model():
    inst = chain_instance(
        [("m", ["R"], 30, None)],
        [{"id": "f", "status": "fixed", "arrival": 0, "departure": 40}],
        [{"id": "R", "capacity": 1}],
    )
    g = build_graph(inst)
    model = assemble_model(g, cuts=False)
    vc = model.variable_counts()
    assert vc["phi"] == 1 and vc["w"] == 1
    assert "y" not in vc and "z" not in vc
    fams = model.family_counts()
    assert fams["fixed-trains"] == 1
    (fixed_row,) = [c for c in model.constraints if c.tag == "fixed-trains"]
    assert fixed_row.sense == "=" and fixed_row.rhs == 1
    # every node is tied to the single plan variable
    assert fams["node-activation"] == len(g.nodes) - 1
    # sigma bounds already pin the chain: arr 0, m 0, dep 40
    sig = {v.entity: (v.lb, v.ub) for v in model.catalog.variables if v.family == "sigma"}
    assert sig["sigma[f:m]"] == (0, 0)
    assert sig["sigma[f:dep]"] == (T(40), T(40))
    assert count_model(g, cuts=False) == (len(model.catalog), len(model.constraints))


def test_empty_candidate_set_objective():
    inst = chain_instance(
        [("m", ["R"], 30, None)],
        [{"id": "f", "status": "fixed", "arrival": 0, "departure": 40}],
        [{"id": "R", "capacity": 1}],
    )
    model = assemble_model(build_graph(inst))
    assert model.sense == "max"
    assert list(model.objective.values()) == [Fraction(1)]


# --------------------------------------------------------------------------
# capacity cuts


def test_stay_budget_bound_61():
    trains = [{"id": f"t{i}", "arrival": [0, 0], "departure": [300, 400]} for i in range(3)]
    inst = chain_instance(
        [("stay", ["TRK"], 60, None)],
        trains,
        [{"id": "TRK", "capacity": 15, "counts_as_track": True}],
        period=1440,
        cap="0.85",
    )
    data = cut_data(inst)
    assert data.stay_budget == Fraction(85, 100) * 15 * T(1440)
    assert all(s == T(300) for s in data.stays.values())
    assert math.floor(data.stay_budget / T(300)) == 61


def test_cardinality_bound_two():
    trains = [{"id": f"t{i}", "arrival": [0, 0], "departure": [39, 100]} for i in range(4)]
    inst = chain_instance(
        [("hold", [], 0, None), ("m", ["R"], 39, None)], trains, [{"id": "R", "capacity": 1}], period=100, cap="1"
    )
    assert inst.epsilon == T(1)
    assert cut_data(inst).count_bound == 2
    res = saturate(inst)
    assert res.status == "optimal" and res.served_count == 2


def test_zero_occupation_resource_imposes_no_cut():
    inst = chain_instance(
        [("m", ["R"], 30, None)],
        [{"id": "a", "arrival": [0, 10], "departure": [40, 90]}],
        [{"id": "R", "capacity": 1}, {"id": "IDLE", "capacity": 1}],
        period=100,
        cap="0.85",
    )
    data = cut_data(inst)
    assert data.count_bound == math.floor(1 * 1 * Fraction(85, 100) * T(100) / T(31))


def test_cuts_add_rows():
    inst = random_instance(11)
    g = build_graph(inst)
    with_cuts = assemble_model(g, cuts=True)
    without = assemble_model(g, cuts=False)
    assert len(with_cuts.constraints) > len(without.constraints)
    assert {c.tag for c in with_cuts.constraints} - {c.tag for c in without.constraints} == {"capacity-cuts"}


# --------------------------------------------------------------------------
# counts and export


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10**6), st.sampled_from(["max-served", "feasibility", "min-max-utilization"]))
def test_closed_form_counts(seed, objective):
    inst = random_instance(seed)
    res = saturate(inst, SolverOptions(time_budget=20))
    g = build_graph(inst)
    floor = 1 if objective == "feasibility" else None
    model = assemble_model(g, res.pool, objective=objective, floor=floor)
    assert count_model(g, res.pool, objective=objective, floor=floor) == (len(model.catalog), len(model.constraints))


def test_export_is_deterministic():
    inst = random_instance(5)
    res = saturate(inst)
    g1, g2 = build_graph(inst), build_graph(inst)
    a = export_model(assemble_model(g1, res.pool))
    b = export_model(assemble_model(g2, res.pool))
    assert a == b


def test_mps_layout():
    mps, names = export_model(assemble_model(build_graph(random_instance(2))))
    lines = mps.splitlines()
    sections = [ln for ln in lines if ln and not ln.startswith((" ", "*"))]
    assert sections[0].startswith("NAME")
    assert [s for s in sections[1:]] == ["ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"]
    entries = [ln.split()[0] for ln in names.splitlines()[1:]]
    assert len(entries) == len(set(entries))
    assert all(len(n) <= 8 for n in entries)


def test_name_table_collisions_stay_unique():
    table = NameTable()
    got = {table.name(f"some-very-long-label-{i}", "C") for i in range(2000)}
    assert len(got) == 2000
    assert all(len(n) <= 8 for n in got)


@pytest.mark.skipif(not HAS_HIGHS, reason="highspy not installed")
def test_external_solver_agrees_on_toy(toy_doc):
    from yardsat.instance import parse_instance

    inst = parse_instance(toy_doc)
    res = saturate(inst)
    mps, _ = export_model(assemble_model(build_graph(inst), res.pool))
    status, obj = solve_with_highs(mps)
    assert status.lower() == "optimal"
    assert round(-obj) == res.served_count
