"""Fixed-format MPS export and a matching reader.

Variable and row names are mapped to 8-character tokens (X0000001 /
R0000001, objective row COST) and the mapping is emitted to a JSON sidecar
next to the file (``<path>.names.json``). The reader accepts any
fixed-format file produced by this writer and restores original names when
the sidecar is present, which gives an independent parse path for
round-trip checks against the in-process solve.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .model import MilpModel

_F2, _F3, _F4, _F5 = 4, 14, 24, 39  # 0-based start columns of MPS fields 2..5


def _fmt(value: float) -> str:
    """Shortest representation that fits the 12-character value field."""
    for prec in range(12, 3, -1):
        s = f"{value:.{prec}g}"
        if len(s) <= 12:
            return s
    return f"{value:.3g}"


def _line(field1: str, field2: str, field3: str = "", field4: str = "",
          field5: str = "", field6: str = "") -> str:
    out = " " + field1.ljust(2) + " " + field2
    if field3:
        out = out.ljust(_F3) + field3
    if field4:
        out = out.ljust(_F4) + field4
    if field5:
        out = out.ljust(_F5) + field5
    if field6:
        out = out.ljust(49) + field6
    return out.rstrip()


def render_mps(model: MilpModel) -> tuple[str, dict]:
    """Render fixed-format MPS text plus the short-name mapping.

    Bounds are always emitted explicitly (BV for binaries, LO/MI plus
    UP/FX for continuous variables), so no reader-side defaults apply.
    """
    var_short = {v.name: f"X{i + 1:07d}" for i, v in enumerate(model.variables)}
    row_short = {c.name: f"R{i + 1:07d}" for i, c in enumerate(model.constraints)}

    lines: list[str] = [f"NAME          {model.name[:60]}"]
    lines.append("ROWS")
    lines.append(" N  COST")
    sense_code = {"<=": "L", ">=": "G", "==": "E"}
    for con in model.constraints:
        lines.append(f" {sense_code[con.sense]}  {row_short[con.name]}")

    # column-major entries: objective first, then constraint coefficients
    entries: dict[int, list[tuple[str, float]]] = {i: [] for i in range(model.n_variables)}
    for idx, coef in model.objective.items():
        entries[idx].append(("COST", coef))
    for con in model.constraints:
        for idx, coef in con.coeffs:
            entries[idx].append((row_short[con.name], coef))

    lines.append("COLUMNS")
    in_integer = False
    marker_count = 0
    for i, var in enumerate(model.variables):
        is_int = var.kind == "binary"
        if is_int != in_integer:
            marker_count += 1
            tag = "'INTORG'" if is_int else "'INTEND'"
            lines.append(_line("", f"MARK{marker_count:04d}", "'MARKER'", "", tag))
            in_integer = is_int
        name = var_short[var.name]
        col_entries = entries[i]
        if not col_entries:
            # a column must appear at least once for the variable to exist
            col_entries = [("COST", 0.0)]
        for row, coef in col_entries:
            lines.append(_line("", name, row, _fmt(coef)))
    if in_integer:
        marker_count += 1
        lines.append(_line("", f"MARK{marker_count:04d}", "'MARKER'", "", "'INTEND'"))

    lines.append("RHS")
    for con in model.constraints:
        if con.rhs != 0.0:
            lines.append(_line("", "RHS", row_short[con.name], _fmt(con.rhs)))

    lines.append("BOUNDS")
    for var in model.variables:
        name = var_short[var.name]
        if var.kind == "binary":
            lines.append(_line("BV", "BND", name))
            continue
        if var.lb == var.ub:
            lines.append(_line("FX", "BND", name, _fmt(var.lb)))
            continue
        if math.isinf(var.lb):
            lines.append(_line("MI", "BND", name))
        else:
            lines.append(_line("LO", "BND", name, _fmt(var.lb)))
        if not math.isinf(var.ub):
            lines.append(_line("UP", "BND", name, _fmt(var.ub)))
    lines.append("ENDATA")
    mapping = {
        "model_name": model.name,
        "objective_row": "COST",
        "variables": {short: orig for orig, short in var_short.items()},
        "constraints": {short: orig for orig, short in row_short.items()},
    }
    return "\n".join(lines) + "\n", mapping


def write_mps(model: MilpModel, path: str | Path) -> Path:
    """Write the model in fixed-format MPS with its name-mapping sidecar
    (``<path>.names.json``). Returns the sidecar path."""
    path = Path(path)
    text, mapping = render_mps(model)
    path.write_text(text)
    sidecar = path.with_name(path.name + ".names.json")
    sidecar.write_text(json.dumps(mapping, indent=2, sort_keys=True) + "\n")
    return sidecar


class MpsParseError(ValueError):
    pass


def read_mps(path: str | Path, names_path: str | Path | None = None) -> MilpModel:
    """Parse a fixed-format MPS file back into a MilpModel.

    When the ``.names.json`` sidecar exists (or is given), original names are
    restored. Integer columns must come out binary (bounds within [0, 1]);
    general integers are rejected since the writer never produces them.
    """
    path = Path(path)
    if names_path is None:
        candidate = path.with_name(path.name + ".names.json")
        names_path = candidate if candidate.exists() else None
    var_names: dict[str, str] = {}
    row_names: dict[str, str] = {}
    model_name = path.stem
    if names_path is not None:
        mapping = json.loads(Path(names_path).read_text())
        var_names = mapping.get("variables", {})
        row_names = mapping.get("constraints", {})
        model_name = mapping.get("model_name", model_name)

    section = None
    row_sense: dict[str, str] = {}
    row_order: list[str] = []
    obj_row: str | None = None
    col_order: list[str] = []
    col_entries: dict[str, list[tuple[str, float]]] = {}
    col_integer: dict[str, bool] = {}
    rhs: dict[str, float] = {}
    bounds: dict[str, dict[str, float | None]] = {}
    in_integer = False
    code_to_sense = {"L": "<=", "G": ">=", "E": "=="}

    for raw in path.read_text().splitlines():
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        if raw[0] not in (" ", "\t"):
            head = raw.split()[0].upper()
            if head == "NAME":
                section = "NAME"
            elif head in ("ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA"):
                section = head
                if head == "RANGES":
                    raise MpsParseError("RANGES sections are not supported")
                if head == "ENDATA":
                    break
            else:
                raise MpsParseError(f"unknown section header {head!r}")
            continue
        tokens = raw.split()
        if section == "ROWS":
            code, name = tokens[0].upper(), tokens[1]
            if code == "N":
                if obj_row is None:
                    obj_row = name
                continue
            if code not in code_to_sense:
                raise MpsParseError(f"unknown row type {code!r}")
            row_sense[name] = code_to_sense[code]
            row_order.append(name)
        elif section == "COLUMNS":
            if "'MARKER'" in tokens:
                if "'INTORG'" in tokens:
                    in_integer = True
                elif "'INTEND'" in tokens:
                    in_integer = False
                else:
                    raise MpsParseError(f"malformed marker line: {raw!r}")
                continue
            col = tokens[0]
            if col not in col_entries:
                col_entries[col] = []
                col_order.append(col)
                col_integer[col] = in_integer
            pairs = tokens[1:]
            if len(pairs) % 2 != 0:
                raise MpsParseError(f"malformed COLUMNS line: {raw!r}")
            for row, val in zip(pairs[::2], pairs[1::2]):
                col_entries[col].append((row, float(val)))
        elif section == "RHS":
            pairs = tokens[1:]
            if len(pairs) % 2 != 0:
                raise MpsParseError(f"malformed RHS line: {raw!r}")
            for row, val in zip(pairs[::2], pairs[1::2]):
                rhs[row] = float(val)
        elif section == "BOUNDS":
            btype = tokens[0].upper()
            col = tokens[2]
            entry = bounds.setdefault(col, {"lb": 0.0, "ub": math.inf})
            if btype == "BV":
                entry["lb"], entry["ub"] = 0.0, 1.0
            elif btype == "MI":
                entry["lb"] = -math.inf
            elif btype == "PL":
                entry["ub"] = math.inf
            elif btype == "FR":
                entry["lb"], entry["ub"] = -math.inf, math.inf
            elif btype in ("LO", "UP", "FX", "LI", "UI"):
                val = float(tokens[3])
                if btype in ("LO", "LI"):
                    entry["lb"] = val
                elif btype in ("UP", "UI"):
                    entry["ub"] = val
                else:
                    entry["lb"] = entry["ub"] = val
            else:
                raise MpsParseError(f"unknown bound type {btype!r}")

    if obj_row is None:
        raise MpsParseError("no objective (N) row found")

    model = MilpModel(name=model_name)
    for col in col_order:
        b = bounds.get(col, {"lb": 0.0, "ub": math.inf})
        lb, ub = float(b["lb"]), float(b["ub"])
        kind = "binary" if col_integer[col] else "continuous"
        if kind == "binary" and not (0.0 <= lb and ub <= 1.0):
            raise MpsParseError(f"integer column {col!r} is not binary (bounds {lb}, {ub})")
        model.add_variable(var_names.get(col, col), lb, ub, kind)

    row_coeffs: dict[str, list[tuple[str, float]]] = {name: [] for name in row_order}
    objective: list[tuple[str, float]] = []
    for col in col_order:
        restored = var_names.get(col, col)
        for row, coef in col_entries[col]:
            if row == obj_row:
                if coef != 0.0:
                    objective.append((restored, coef))
            elif row in row_coeffs:
                row_coeffs[row].append((restored, coef))
            else:
                raise MpsParseError(f"COLUMNS references unknown row {row!r}")
    for name in row_order:
        model.add_constraint(
            row_names.get(name, name),
            row_coeffs[name],
            row_sense[name],  # type: ignore[arg-type]
            rhs.get(name, 0.0),
        )
    model.set_objective(objective)
    return model
