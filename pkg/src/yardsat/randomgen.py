"""Seeded generator of small periodic instances for exhaustive cross-checks.

All times are whole minutes and epsilon is one minute, so a one-minute grid
contains every schedule the solver can produce.
"""

from __future__ import annotations

import random

from .instance import Instance, parse_instance


def random_document(seed: int, max_trains: int = 4, max_plans: int = 2, max_resources: int = 3) -> dict:
    rng = random.Random(seed)
    tau = rng.choice([60, 90, 120])
    resources = []
    for i in range(rng.randint(1, max_resources)):
        rd = {"id": f"r{i}", "capacity": rng.choice([1, 2]), "counts_as_track": rng.random() < 0.5}
        if rng.random() < 0.25 and not any("unavailable" in r for r in resources):
            start = rng.randrange(tau)
            rd["unavailable"] = [{"start": start, "end": (start + rng.randint(5, 20)) % tau}]
        resources.append(rd)
    ops = [{"id": "arr", "kind": "arrival"}, {"id": "dep", "kind": "departure"}]
    durations = {}
    for i in range(rng.randint(2, 4)):
        uses = rng.sample([r["id"] for r in resources], rng.randint(1, min(2, len(resources))))
        durations[f"m{i}"] = rng.randint(5, 25)
        ops.append(
            {
                "id": f"m{i}",
                "resources": uses,
                "duration": durations[f"m{i}"],
                "max_wait": rng.choice([0, 2, 5, 10]),
            }
        )
    internal = sorted(durations)
    fixed, candidate = [], []
    n = rng.randint(2, max_trains)
    nfixed = rng.randint(0, min(2, n - 1))
    for j in range(n):
        plans = []
        for p in range(rng.randint(1, max_plans)):
            body = sorted(rng.sample(internal, rng.randint(1, 2)))
            plans.append({"id": f"p{p}", "sequence": ["arr", *body, "dep"]})
        base = sum(durations[o] for o in plans[0]["sequence"][1:-1])
        a = rng.randrange(tau)
        if j < nfixed:
            fixed.append({"id": f"t{j}", "arrival": a, "departure": a + base, "plans": plans})
        else:
            aw = rng.randint(0, 15)
            slack = rng.randint(0, 12)
            dw = rng.randint(0, 15)
            candidate.append(
                {
                    "id": f"t{j}",
                    "arrival": [a, a + aw],
                    "departure": [a + aw + base + slack - 4 if base + slack >= 4 else a + aw, a + aw + base + slack + dw],
                    "plans": plans,
                }
            )
    return {
        "name": f"random-{seed}",
        "period_minutes": tau,
        "epsilon_minutes": 1,
        "utilization_cap": rng.choice(["1", "0.85", "0.6"]),
        "resources": resources,
        "operations": ops,
        "trains": {"fixed": fixed, "candidate": candidate},
    }


def random_instance(seed: int, **kwargs) -> Instance:
    return parse_instance(random_document(seed, **kwargs))
