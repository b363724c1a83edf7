"""Exact time arithmetic.

All internal times are integer *ticks* of a tenth of a minute. Inputs are
decimal minutes (``12.5``), clock strings (``"05:30"``, ``"29:00"``) or
clock strings with a day prefix (``"2d 05:30"``).
"""

from __future__ import annotations

import re
from decimal import Decimal, InvalidOperation
from fractions import Fraction

TICKS_PER_MINUTE = 10

_CLOCK = re.compile(r"^\s*(?:(\d+)\s*d\s*)?(\d+):([0-5]\d)\s*$")


class TimeFormatError(ValueError):
    pass


def minutes_to_ticks(value: int | float | str | Decimal) -> int:
    """Convert decimal minutes (or a clock string) to ticks, exactly."""
    if isinstance(value, bool):
        raise TimeFormatError(f"not a time value: {value!r}")
    if isinstance(value, str):
        m = _CLOCK.match(value)
        if m:
            days = int(m.group(1) or 0)
            return ((days * 24 + int(m.group(2))) * 60 + int(m.group(3))) * TICKS_PER_MINUTE
        try:
            dec = Decimal(value.strip())
        except InvalidOperation:
            raise TimeFormatError(f"cannot parse time {value!r}") from None
    elif isinstance(value, float):
        # repr() gives the shortest round-tripping decimal, so 0.1 stays 0.1
        dec = Decimal(repr(value))
    else:
        dec = Decimal(value)
    ticks = dec * TICKS_PER_MINUTE
    if ticks != ticks.to_integral_value():
        raise TimeFormatError(f"{value!r} is not a multiple of 0.1 minute")
    return int(ticks)


def ticks_to_minutes(ticks: int) -> float:
    return ticks / TICKS_PER_MINUTE


def format_minutes(ticks: int) -> str:
    """Decimal-minute string with no float noise (``125`` -> ``"12.5"``)."""
    q, r = divmod(abs(ticks), TICKS_PER_MINUTE)
    sign = "-" if ticks < 0 else ""
    return f"{sign}{q}" if r == 0 else f"{sign}{q}.{r}"


def format_clock(ticks: int) -> str:
    """``HH:MM`` (hours may exceed 23); tenths are appended when present."""
    minutes, tenth = divmod(ticks, TICKS_PER_MINUTE)
    h, m = divmod(minutes, 60)
    return f"{h:02d}:{m:02d}" + (f".{tenth}" if tenth else "")


def parse_fraction(value: int | float | str) -> Fraction:
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)
