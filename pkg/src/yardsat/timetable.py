"""Weekly timetable expansion.

A weekly timetable lists recurring services with the weekdays they run on and
clock times. Expansion turns it into one fixed train per (service, day) over a
period of seven days, merged into a layout document that carries resources,
operations and plans.
"""

from __future__ import annotations

import copy
from typing import Any, Mapping

from .instance import InstanceError
from .timeunits import format_minutes, minutes_to_ticks

DAYS = ("mon", "tue", "wed", "thu", "fri", "sat", "sun")
DAY_TICKS = minutes_to_ticks(1440)
WEEK_MINUTES = 7 * 1440

_ALIASES = {"daily": DAYS[:6], "everyday": DAYS}


def _days(value: Any, path: str) -> tuple[str, ...]:
    if isinstance(value, str):
        if value.lower() in _ALIASES:
            return _ALIASES[value.lower()]
        value = [value]
    out = []
    for d in value:
        d = str(d).lower()[:3]
        if d not in DAYS:
            raise InstanceError(path, f"unknown weekday {d!r}")
        out.append(d)
    return tuple(sorted(set(out), key=DAYS.index))


def expand_week(layout: Mapping[str, Any], timetable: Mapping[str, Any]) -> dict[str, Any]:
    """Return an instance document with one fixed train per service and running day.

    ``timetable`` has a ``services`` list; each service gives ``id``, ``days``
    (weekday names or ``daily`` for Monday to Saturday), ``arrival`` and
    ``departure`` clock strings and ``plans``. A departure clock not later
    than the arrival clock falls on the next day.
    """
    doc = copy.deepcopy(dict(layout))
    doc["period_minutes"] = WEEK_MINUTES
    fixed = []
    for i, sd in enumerate(timetable.get("services", [])):
        path = f"services[{i}]"
        try:
            sid = str(sd["id"])
            arr = minutes_to_ticks(str(sd["arrival"]))
            dep = minutes_to_ticks(str(sd["departure"]))
            plans = list(sd["plans"])
        except KeyError as exc:
            raise InstanceError(path, f"missing key {exc.args[0]!r}") from None
        if dep <= arr:
            dep += DAY_TICKS
        for day in _days(sd.get("days", "daily"), f"{path}.days"):
            off = DAYS.index(day) * DAY_TICKS
            fixed.append(
                {
                    "id": f"{sid}-{day}",
                    "arrival": format_minutes(arr + off),
                    "departure": format_minutes(dep + off),
                    "plans": plans,
                }
            )
    trains = dict(doc.get("trains") or {})
    trains["fixed"] = list(trains.get("fixed") or []) + fixed
    trains.setdefault("candidate", [])
    doc["trains"] = trains
    return doc


def weekly_count(timetable: Mapping[str, Any]) -> int:
    return sum(len(_days(sd.get("days", "daily"), f"services[{i}].days")) for i, sd in enumerate(timetable.get("services", [])))
