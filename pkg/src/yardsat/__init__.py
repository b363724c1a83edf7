"""Exact saturation of railway transshipment yards, plain and periodic."""

from .instance import Instance, compute_derived, load_instance, parse_instance
from .schedule import Solution, TrainSchedule
from .solver import SolveResult, SolverOptions, check_floor, saturate
from .validator import validate

__all__ = [
    "Instance",
    "Solution",
    "SolveResult",
    "SolverOptions",
    "TrainSchedule",
    "check_floor",
    "compute_derived",
    "load_instance",
    "parse_instance",
    "saturate",
    "validate",
]
__version__ = "0.1.0"
