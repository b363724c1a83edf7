"""Utilization heatmap data and the human-readable capacity report."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

from .instance import Instance
from .timeunits import TICKS_PER_MINUTE, format_clock, format_minutes
from .validator import OccupancyProfile

HEATMAP_COLUMNS = [
    "kind",
    "resource",
    "window_start_min",
    "window_end_min",
    "count",
    "capacity",
    "avg_fraction",
    "saturated_fraction",
    "bottleneck",
]

WEEK_MINUTES = 7 * 1440


def _fmt(x: Fraction) -> str:
    return f"{float(x):.4f}"


def bottlenecks(profiles: dict[str, OccupancyProfile], cap: Fraction) -> set[str]:
    """Resources whose average use is within 90% of the cap, or that are full half the time."""
    out = set()
    for rid, p in profiles.items():
        if p.integral and (p.avg_fraction >= Fraction(9, 10) * cap or p.saturated_fraction >= Fraction(1, 2)):
            out.add(rid)
    return out


def emit_heatmap(profiles: dict[str, OccupancyProfile], cap: Fraction = Fraction(85, 100), header: str | None = None) -> str:
    """Long-format CSV: one ``profile`` row per constant segment, one ``summary`` row per resource."""
    buf = io.StringIO()
    if header:
        for line in header.splitlines():
            buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEATMAP_COLUMNS)
    hot = bottlenecks(profiles, cap)
    for rid, p in profiles.items():
        for s, e, c in p.segments:
            w.writerow(["profile", rid, format_minutes(s), format_minutes(e), c, p.capacity, "", "", ""])
    for rid, p in profiles.items():
        w.writerow(
            [
                "summary",
                rid,
                format_minutes(p.origin),
                format_minutes(p.origin + p.horizon),
                p.peak,
                p.capacity,
                _fmt(p.avg_fraction),
                _fmt(p.saturated_fraction),
                "yes" if rid in hot else "no",
            ]
        )
    return buf.getvalue()


# --------------------------------------------------------------------------
# weekly figures


def weekly_equivalent(served: int, period_minutes: Fraction | int, operating_days: int = 6) -> Fraction:
    """Trains per week implied by ``served`` trains per period.

    Periods shorter than a week are repeated over the operating days only;
    a weekly (or longer) period is scaled to seven days.
    """
    tau = Fraction(period_minutes)
    if tau >= WEEK_MINUTES:
        return served * Fraction(WEEK_MINUTES) / tau
    return served * Fraction(operating_days * 1440) / tau


def increment(weekly: Fraction | int, baseline: int) -> str:
    pct = (Fraction(weekly) - baseline) / baseline * 100
    value = int(pct + Fraction(1, 2)) if pct >= 0 else -int(-pct + Fraction(1, 2))
    return f"{value:+d}%"


@dataclass(frozen=True)
class ReportSettings:
    baseline_weekly: int | None = None
    operating_days: int = 6


def capacity_report(
    inst: Instance,
    served: list[str],
    status: str,
    profiles: dict[str, OccupancyProfile],
    settings: ReportSettings = ReportSettings(),
    header: str = "",
) -> str:
    fixed = [t.id for t in inst.fixed_trains]
    added = [t for t in served if t not in set(fixed)]
    lines = []
    if header:
        lines += [f"# {line}" for line in header.splitlines()]
    lines.append(f"instance: {inst.name}")
    lines.append(f"status: {status}")
    if inst.period is not None:
        lines.append(f"period: {format_clock(inst.period)} ({format_minutes(inst.period)} min)")
    else:
        lines.append("period: none (single horizon)")
    lines.append(f"trains served: {len(served)} of {len(inst.trains)} ({len(fixed)} fixed, {len(added)} added of {len(inst.candidate_trains)} candidates)")
    if added:
        lines.append(f"added: {', '.join(added)}")
    if inst.period is not None:
        weekly = weekly_equivalent(len(served), Fraction(inst.period, TICKS_PER_MINUTE), settings.operating_days)
        shown = f"{float(weekly):g}"
        days = "7" if inst.period >= WEEK_MINUTES * TICKS_PER_MINUTE else str(settings.operating_days)
        lines.append(f"weekly equivalent: {shown} trains ({days} operating days)")
        if settings.baseline_weekly:
            lines.append(f"increment vs baseline {settings.baseline_weekly}: {increment(weekly, settings.baseline_weekly)}")
    hot = bottlenecks(profiles, inst.utilization_cap)
    if profiles:
        lines.append("resources:")
        width = max(len(r) for r in profiles)
        for rid, p in profiles.items():
            flag = "  bottleneck" if rid in hot else ""
            lines.append(
                f"  {rid:<{width}}  cap {p.capacity}  peak {p.peak}  avg {float(p.avg_fraction):6.1%}"
                f"  saturated {float(p.saturated_fraction):6.1%}{flag}"
            )
    return "\n".join(lines) + "\n"
