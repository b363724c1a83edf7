from __future__ import annotations

from importlib import resources
from pathlib import Path

import pytest

from yardsat.instance import parse_instance


def data_path(name: str) -> Path:
    return Path(str(resources.files("yardsat") / "data" / name))


def chain_doc(
    ops: list[tuple[str, list[str], float, float | None]],
    trains: list[dict],
    resources_: list[dict],
    period: float | None = None,
    epsilon: float = 1,
    cap: str = "1",
) -> dict:
    """Instance document with one shared plan ``arr -> ops... -> dep``."""
    operations = [{"id": "arr", "kind": "arrival"}, {"id": "dep", "kind": "departure"}]
    for oid, res, dur, wait in ops:
        operations.append({"id": oid, "resources": res, "duration": dur, "max_wait": wait})
    doc = {
        "name": "chain",
        "epsilon_minutes": epsilon,
        "utilization_cap": cap,
        "resources": resources_,
        "operations": operations,
        "plans": [{"id": "p", "sequence": ["arr", *[o[0] for o in ops], "dep"]}],
        "trains": {"fixed": [], "candidate": []},
    }
    if period is not None:
        doc["period_minutes"] = period
    for t in trains:
        status = t.pop("status", "candidate")
        t.setdefault("plans", ["p"])
        doc["trains"][status].append(t)
    return doc


def chain_instance(*args, **kwargs):
    return parse_instance(chain_doc(*args, **kwargs))


@pytest.fixture
def toy_doc() -> dict:
    """Two candidates competing for a single-track resource, one fixed train elsewhere."""
    return chain_doc(
        [("load", ["T"], 30, 10), ("wash", ["W"], 20, None)],
        [
            {"id": "f", "status": "fixed", "arrival": 0, "departure": 60},
            {"id": "a", "arrival": [10, 20], "departure": [60, 90]},
            {"id": "b", "arrival": [15, 25], "departure": [70, 100]},
        ],
        [{"id": "T", "capacity": 1, "counts_as_track": True}, {"id": "W", "capacity": 2}],
        period=120,
    )
