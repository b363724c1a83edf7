"""Fixed-format MPS writer with a name-map sidecar."""

from __future__ import annotations

import re
import zlib
from fractions import Fraction

from .model import ModelInstance

_SENSE = {"<=": "L", "=": "E", ">=": "G"}
_ALNUM = re.compile(r"[^A-Za-z0-9_]")


def _base36(n: int, width: int) -> str:
    digits = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    out = ""
    for _ in range(width):
        n, d = divmod(n, 36)
        out = digits[d] + out
    return out


class NameTable:
    """Maps entity labels to unique names of at most 8 characters.

    Short labels are kept (with non-alphanumerics dropped); longer or clashing
    ones become a 4-character prefix plus a 4-character hash.
    """

    def __init__(self, reserved: tuple[str, ...] = ()):
        self.used: set[str] = set(reserved)
        self.names: list[tuple[str, str]] = []

    def name(self, label: str, prefix: str) -> str:
        raw = prefix + _ALNUM.sub("", label)
        cand = raw if len(raw) <= 8 else None
        salt = 0
        while cand is None or cand in self.used:
            h = zlib.crc32(f"{label}#{salt}".encode())
            cand = (raw[:4] + _base36(h, 4))[:8]
            salt += 1
        self.used.add(cand)
        self.names.append((cand, label))
        return cand


def _num(x: Fraction) -> str:
    if x.denominator == 1:
        s = str(x.numerator)
    else:
        s = f"{float(x):.10g}"
    if len(s) > 12:
        s = f"{float(x):.6e}"
    return s


def _line(f1: str = "", f2: str = "", f3: str = "", f4: str = "", f5: str = "", f6: str = "") -> str:
    line = f" {f1:<2} {f2:<8}  {f3:<8}  {f4:>12}   {f5:<8}  {f6:>12}"
    return line.rstrip()


def export_model(model: ModelInstance) -> tuple[str, str]:
    """Return ``(mps_text, name_map_text)``; identical models give identical bytes."""
    names = NameTable(reserved=("OBJ", "RHS", "BND", "MARKER"))
    cols = [names.name(v.entity, "C") for v in model.catalog.variables]
    rows = [names.name(f"{c.tag}:{c.entity}", "R") for c in model.constraints]

    by_col: dict[int, list[tuple[str, Fraction]]] = {i: [] for i in range(len(cols))}
    sign = -1 if model.sense == "max" else 1
    for var, coef in sorted(model.objective.items()):
        by_col[var].append(("OBJ", sign * coef))
    for r, c in zip(rows, model.constraints):
        for var, coef in c.terms:
            by_col[var].append((r, coef))

    out = [
        f"* model {model.name}: objective {model.objective_kind}"
        + (" (maximization written as minimization of the negated objective)" if model.sense == "max" else ""),
        f"NAME          {_ALNUM.sub('', model.name)[:8] or 'MODEL'}",
        "ROWS",
        _line("N", "OBJ"),
    ]
    out += [_line(_SENSE[c.sense], r) for r, c in zip(rows, model.constraints)]
    out.append("COLUMNS")
    in_int = False
    marker = 0
    for i, v in enumerate(model.catalog.variables):
        is_int = v.kind == "binary"
        if is_int != in_int:
            out.append(_line("", f"MARKER{marker:02d}"[:8], "'MARKER'", "", "'INTORG'" if is_int else "'INTEND'"))
            marker += 1
            in_int = is_int
        entries = by_col[i]
        if not entries:
            out.append(_line("", cols[i], "OBJ", "0"))
        for j in range(0, len(entries), 2):
            pair = entries[j : j + 2]
            if len(pair) == 2:
                out.append(_line("", cols[i], pair[0][0], _num(pair[0][1]), pair[1][0], _num(pair[1][1])))
            else:
                out.append(_line("", cols[i], pair[0][0], _num(pair[0][1])))
    if in_int:
        out.append(_line("", f"MARKER{marker:02d}"[:8], "'MARKER'", "", "'INTEND'"))
    out.append("RHS")
    for r, c in zip(rows, model.constraints):
        if c.rhs != 0:
            out.append(_line("", "RHS", r, _num(c.rhs)))
    out.append("BOUNDS")
    for i, v in enumerate(model.catalog.variables):
        if v.kind == "binary":
            out.append(_line("UP", "BND", cols[i], "1"))
            continue
        if v.lb is not None and v.ub is not None and v.lb == v.ub:
            out.append(_line("FX", "BND", cols[i], _num(v.lb)))
            continue
        if v.lb is None:
            out.append(_line("MI", "BND", cols[i]))
        elif v.lb != 0:
            out.append(_line("LO", "BND", cols[i], _num(v.lb)))
        if v.ub is not None:
            out.append(_line("UP", "BND", cols[i], _num(v.ub)))
    out.append("ENDATA")
    mps = "\n".join(out) + "\n"
    name_map = "# name entity\n" + "".join(f"{n:<8}  {label}\n" for n, label in names.names)
    return mps, name_map


def solve_with_highs(mps_text: str, time_limit: float = 60.0) -> tuple[str, float | None]:
    """Solve an exported model with HiGHS (optional dependency).

    Returns the model status and the objective as written in the file
    (a maximization shows up negated).
    """
    import os
    import tempfile

    import highspy

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "model.mps")
        with open(path, "w") as fh:
            fh.write(mps_text)
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("time_limit", float(time_limit))
        h.readModel(path)
        h.run()
        status = h.modelStatusToString(h.getModelStatus())
        if status != "Optimal":
            return status, None
        return status, h.getInfo().objective_function_value
