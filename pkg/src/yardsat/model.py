"""The complete mixed-integer model over a disjunctive graph and a constraint pool.

Variables: train service ``phi``, plan choice ``w``, node/arc activation ``x``,
tuple directions ``y`` and meetings ``z``, start times ``sigma``, occupation
``g`` and unavailability choices ``r``. Every arc turns into one big-M row
``sigma[head] - sigma[tail] >= length - M (1 - x[arc])``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .graph import Arc, ArcKind, DisjunctiveGraph, UnavailItem, build_unavailability_arcs
from .instance import run_count
from .solver import ConstraintPool, cut_data, q_pairs

OBJECTIVES = ("max-served", "feasibility", "min-max-utilization")


@dataclass(frozen=True)
class Variable:
    index: int
    entity: str
    family: str
    kind: str  # binary | continuous
    lb: Fraction | None = Fraction(0)
    ub: Fraction | None = None


@dataclass(frozen=True)
class LinearConstraint:
    terms: tuple[tuple[int, Fraction], ...]
    sense: str  # "<=", "=", ">="
    rhs: Fraction
    tag: str
    entity: str


@dataclass
class VariableCatalog:
    variables: list[Variable] = field(default_factory=list)
    by_entity: dict[str, int] = field(default_factory=dict)

    def add(self, entity: str, family: str, kind: str = "binary", lb=Fraction(0), ub=None) -> int:
        if entity in self.by_entity:
            raise ValueError(f"duplicate variable {entity}")
        if kind == "binary":
            ub = Fraction(1)
        i = len(self.variables)
        self.variables.append(Variable(i, entity, family, kind, None if lb is None else Fraction(lb), None if ub is None else Fraction(ub)))
        self.by_entity[entity] = i
        return i

    def __getitem__(self, entity: str) -> int:
        return self.by_entity[entity]

    def __len__(self) -> int:
        return len(self.variables)


@dataclass
class ModelInstance:
    name: str
    catalog: VariableCatalog
    constraints: list[LinearConstraint]
    objective: dict[int, Fraction]
    sense: str  # "max" | "min"
    objective_kind: str

    def family_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for c in self.constraints:
            out[c.tag] = out.get(c.tag, 0) + 1
        return out

    def variable_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for v in self.catalog.variables:
            out[v.family] = out.get(v.family, 0) + 1
        return out


class ModelError(ValueError):
    pass


class _Builder:
    def __init__(self, name: str):
        self.cat = VariableCatalog()
        self.rows: list[LinearConstraint] = []
        self.name = name

    def row(self, terms, sense, rhs, tag, entity):
        merged: dict[int, Fraction] = {}
        for var, coef in terms:
            merged[var] = merged.get(var, Fraction(0)) + Fraction(coef)
        clean = tuple((v, c) for v, c in merged.items() if c != 0)
        self.rows.append(LinearConstraint(clean, sense, Fraction(rhs), tag, entity))


def _arc_label(g: DisjunctiveGraph, a: Arc) -> str:
    return f"{g.nodes[a.tail].id}>{g.nodes[a.head].id}"


def _plan_runs(g: DisjunctiveGraph, train: str, plan_id: str, rid: str) -> list[tuple[int, int]]:
    inst = g.instance
    plan = inst.train(train).plan(plan_id)
    path = g.plan_paths[(train, plan_id)]
    runs, start = [], None
    for j, oid in enumerate(plan.sequence):
        uses = rid in inst.operations[oid].resources
        if uses and start is None:
            start = path[j]
        elif not uses and start is not None:
            runs.append((start, path[j]))
            start = None
    return runs


def assemble_model(
    g: DisjunctiveGraph,
    pool: ConstraintPool | None = None,
    objective: str = "max-served",
    floor: int | None = None,
    unavail: list[UnavailItem] | None = None,
    cuts: bool = True,
    required: frozenset[str] = frozenset(),
) -> ModelInstance:
    """Assemble the model; the capacity family covers only the pooled sets."""
    if objective not in OBJECTIVES:
        raise ModelError(f"unknown objective {objective!r}")
    inst = g.instance
    pool = pool or ConstraintPool()
    unavail = build_unavailability_arcs(g) if unavail is None else unavail
    b = _Builder(inst.name)
    cat = b.cat
    nodes = g.nodes

    # -- variables
    for t in inst.trains:
        cat.add(f"phi[{t.id}]", "phi")
    for t in inst.trains:
        for p in t.plans:
            cat.add(f"w[{t.id}/{p.id}]", "w")
    for n in nodes[1:]:
        cat.add(f"x[{n.id}]", "x-node")
    for i, a in enumerate(g.arcs):
        cat.add(f"xa[{i}:{_arc_label(g, a)}]", "x-arc")
    tuples = [g.conflict_tuple(k) for k in sorted(pool.tuples)]
    for ct in tuples:
        key = ct.key
        cat.add(f"y[{key}:u]", "y")
        cat.add(f"y[{key}:v]", "y")
        if ct.meeting_allowed:
            cat.add(f"z[{key}]", "z")
        for j, a in enumerate(ct.arcs):
            cat.add(f"xc[{key}:{j}]", "x-conflict")
    for it in unavail:
        tag = f"{nodes[it.node].id}/{it.resource}/{it.window}/{it.period}"
        for c in ("before", "after", "during"):
            cat.add(f"r[{tag}:{c}]", "r")
        for j, _ in enumerate(it.before + (it.after,) + it.during):
            cat.add(f"xu[{tag}:{j}]", "x-avail")
    for n in nodes:
        lo, hi = g.lb[n.index], g.ub[n.index]
        cat.add(f"sigma[{n.id}]", "sigma", "continuous", lo, hi)
    g_vars: dict[tuple[str, str, str], int] = {}
    for r in inst.resources:
        for t in inst.trains:
            for p in t.plans:
                if run_count(p, inst.operations, r.id):
                    g_vars[(r.id, t.id, p.id)] = cat.add(f"g[{r.id}/{t.id}/{p.id}]", "g", "continuous", 0, None)
    if objective == "min-max-utilization":
        cat.add("theta", "theta", "continuous", 0, None)

    phi = {t.id: cat[f"phi[{t.id}]"] for t in inst.trains}
    w = {(t.id, p.id): cat[f"w[{t.id}/{p.id}]"] for t in inst.trains for p in t.plans}
    xn = {n.index: cat[f"x[{n.id}]"] for n in nodes[1:]}
    sigma = {n.index: cat[f"sigma[{n.id}]"] for n in nodes}
    xa = [cat[f"xa[{i}:{_arc_label(g, a)}]"] for i, a in enumerate(g.arcs)]
    strict_of = {(a.tail, a.head): xa[i] for i, a in enumerate(g.arcs) if a.kind == ArcKind.STRICT_FORWARD}

    def precedence(a: Arc, x: int | None, label: str):
        big = g.big_m(a)
        terms = [(sigma[a.head], 1), (sigma[a.tail], -1)]
        if x is not None and big:
            terms.append((x, -big))
        b.row(terms, ">=", a.length - (big if x is not None else 0), "precedence", label)

    # -- rows
    must = {t.id for t in inst.fixed_trains} | set(required)
    for t in inst.trains:
        if t.id in must:
            b.row([(phi[t.id], 1)], "=", 1, "fixed-trains", t.id)
    for t in inst.trains:
        b.row([(w[(t.id, p.id)], 1) for p in t.plans] + [(phi[t.id], -1)], "=", 0, "plan-selection", t.id)
    for n in nodes[1:]:
        b.row([(xn[n.index], 1)] + [(w[(n.owner, p)], -1) for p in sorted(n.plans)], "=", 0, "node-activation", n.id)
    for i, a in enumerate(g.arcs):
        owner = nodes[a.head].owner or nodes[a.tail].owner
        b.row([(xa[i], 1)] + [(w[(owner, p)], -1) for p in sorted(a.plans)], "=", 0, "arc-activation", _arc_label(g, a))
    for ct in tuples:
        key = ct.key
        u, v, _ = key
        yu, yv = cat[f"y[{key}:u]"], cat[f"y[{key}:v]"]
        z = cat[f"z[{key}]"] if ct.meeting_allowed else None
        terms = [(yu, 1), (yv, 1), (xn[u], -1), (xn[v], -1)] + ([(z, 1)] if z is not None else [])
        b.row(terms, ">=", -1, "disjunction-selection", str(key))
        nu, nv = len(ct.u_first), len(ct.v_first)
        for j, a in enumerate(ct.arcs):
            xc = cat[f"xc[{key}:{j}]"]
            if j < nu:
                strict, sel = strict_of[(u, a.tail)], yu
            elif j < nu + nv:
                strict, sel = strict_of[(v, a.tail)], yv
            elif j < nu + 2 * nv:
                strict, sel = strict_of[(v, a.head)], z
            else:
                strict, sel = strict_of[(u, a.head)], z
            b.row([(xc, 1), (strict, -1), (sel, -1)], ">=", -1, "arc-activation", f"{key}:{j}")
            precedence(a, xc, f"{key}:{j}")
    for i, a in enumerate(g.arcs):
        precedence(a, xa[i], _arc_label(g, a))
    for r, q in pool.sorted_q():
        cap = inst.resource(r).capacity
        if len(q) != cap + 1:
            raise ModelError(f"capacity set on {r} has {len(q)} members, expected {cap + 1}")
        terms = []
        for key in q_pairs(q):
            for (node, rep) in q:
                if node >= len(nodes) or rep > g.k:
                    raise ModelError(f"capacity set references unknown replica {(node, rep)}")
            if key not in pool.tuples:
                raise ModelError(f"capacity set pair {key} is not pooled")
            if g.conflict_tuple(key).meeting_allowed:
                terms.append((cat[f"z[{key}]"], 1))
        b.row(terms, "<=", comb(len(q), 2) - 1, "capacity", f"{r}:{q}")
    for it in unavail:
        tag = f"{nodes[it.node].id}/{it.resource}/{it.window}/{it.period}"
        rb, ra, rd = (cat[f"r[{tag}:{c}]"] for c in ("before", "after", "during"))
        b.row([(rb, 1), (ra, 1), (rd, 1), (xn[it.node], -1)], "=", 0, "unavailability", tag)
        arcs = it.before + (it.after,) + it.during
        for j, a in enumerate(arcs):
            x = cat[f"xu[{tag}:{j}]"]
            if a.kind == ArcKind.AVAIL_AFTER:
                b.row([(x, 1), (ra, -1)], ">=", 0, "unavailability", f"{tag}:{j}")
            else:
                succ = a.tail if a.kind == ArcKind.AVAIL_BEFORE else a.head
                sel = rb if a.kind == ArcKind.AVAIL_BEFORE else rd
                b.row([(x, 1), (strict_of[(it.node, succ)], -1), (sel, -1)], ">=", -1, "unavailability", f"{tag}:{j}")
            precedence(a, x, f"{tag}:{j}")

    # occupation and utilization
    eps = inst.epsilon
    h = inst.horizon
    cap = inst.utilization_cap
    for (rid, tid, pid), gv in g_vars.items():
        runs = _plan_runs(g, tid, pid, rid)
        beta = len(runs)
        big = sum(g.ub[e] - g.lb[s] for s, e in runs) + eps * beta
        terms = [(gv, 1)]
        for s, e in runs:
            terms += [(sigma[e], -1), (sigma[s], 1)]
        terms.append((w[(tid, pid)], -big))
        b.row(terms, ">=", eps * beta - big, "occupation", f"{rid}/{tid}/{pid}")
    for r in inst.resources:
        terms = [(gv, 1) for (rid, _, _), gv in g_vars.items() if rid == r.id]
        if not terms:
            continue
        if objective == "min-max-utilization":
            b.row(terms + [(cat["theta"], -r.capacity * h)], "<=", 0, "utilization", r.id)
        b.row(terms, "<=", cap * r.capacity * h, "utilization", r.id)

    if objective == "feasibility" and floor is not None:
        b.row([(phi[t.id], 1) for t in inst.trains], ">=", floor, "cardinality-floor", str(floor))

    if objective == "max-served":
        obj, sense = {phi[t.id]: Fraction(1) for t in inst.trains}, "max"
    elif objective == "feasibility":
        obj, sense = {}, "min"
    else:
        obj, sense = {cat["theta"]: Fraction(1)}, "min"
    model = ModelInstance(inst.name, cat, b.rows, obj, sense, objective)
    if cuts:
        add_capacity_cuts(model, g)
    return model


def add_capacity_cuts(model: ModelInstance, g: DisjunctiveGraph) -> ModelInstance:
    """Stay budget over tracks, cardinality bound, and per-resource occupation budget."""
    inst = g.instance
    cat = model.catalog
    data = cut_data(inst, g.derived)
    phi = [(cat[f"phi[{t.id}]"], Fraction(1)) for t in inst.trains]
    if data.stay_budget is not None:
        model.constraints.append(
            LinearConstraint(
                tuple((cat[f"phi[{t.id}]"], Fraction(data.stays[t.id])) for t in inst.trains if data.stays[t.id]),
                "<=",
                Fraction(data.stay_budget),
                "capacity-cuts",
                "stay",
            )
        )
    if data.count_bound is not None:
        model.constraints.append(LinearConstraint(tuple(phi), "<=", Fraction(data.count_bound), "capacity-cuts", "count"))
    for r in inst.resources:
        terms = []
        for t in inst.trains:
            for p in t.plans:
                mu = data.plan_occupation[(r.id, t.id, p.id)]
                if mu:
                    terms.append((cat[f"w[{t.id}/{p.id}]"], Fraction(mu)))
        if terms:
            model.constraints.append(
                LinearConstraint(tuple(terms), "<=", Fraction(data.occupation_budget[r.id]), "capacity-cuts", f"occupation:{r.id}")
            )
    return model


def count_model(
    g: DisjunctiveGraph,
    pool: ConstraintPool | None = None,
    objective: str = "max-served",
    floor: int | None = None,
    unavail: list[UnavailItem] | None = None,
    cuts: bool = True,
    required: frozenset[str] = frozenset(),
) -> tuple[int, int]:
    """Closed-form (variables, rows) of :func:`assemble_model`, for cross-checking."""
    inst = g.instance
    pool = pool or ConstraintPool()
    unavail = build_unavailability_arcs(g) if unavail is None else unavail
    n_nodes = len(g.nodes)
    n_arcs = len(g.arcs)
    n_plans = sum(len(t.plans) for t in inst.trains)
    tuples = [g.conflict_tuple(k) for k in pool.tuples]
    n_tuple_arcs = sum(len(ct.arcs) for ct in tuples)
    n_meet = sum(1 for ct in tuples if ct.meeting_allowed)
    n_avail_arcs = sum(2 * len(g.successors(it.node)) + 1 for it in unavail)
    runs = {
        (r.id, t.id, p.id): run_count(p, inst.operations, r.id) for r in inst.resources for t in inst.trains for p in t.plans
    }
    n_g = sum(1 for v in runs.values() if v)
    used_res = len({r for (r, _, _), v in runs.items() if v})
    variables = (
        len(inst.trains) + n_plans + (n_nodes - 1) + n_arcs + 2 * len(tuples) + n_meet + n_tuple_arcs
        + 3 * len(unavail) + n_avail_arcs + n_nodes + n_g + (objective == "min-max-utilization")
    )
    must = {t.id for t in inst.fixed_trains} | set(required)
    rows = (
        len(must) + len(inst.trains) + (n_nodes - 1) + n_arcs
        + len(tuples) + 2 * n_tuple_arcs
        + n_arcs
        + pool.q_count
        + len(unavail) + 2 * n_avail_arcs
        + n_g + used_res * (2 if objective == "min-max-utilization" else 1)
        + (objective == "feasibility" and floor is not None)
    )
    if cuts:
        data = cut_data(inst, g.derived)
        rows += (data.stay_budget is not None) + (data.count_bound is not None)
        rows += sum(1 for r in inst.resources if any(data.plan_occupation[(r.id, t.id, p.id)] for t in inst.trains for p in t.plans))
    return variables, rows
