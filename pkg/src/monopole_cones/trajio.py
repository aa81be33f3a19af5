"""Reading and writing trajectory files.

Two formats share one schema: CSV with a header row, and JSON lines with one
object per sample using the same field names.  Floats are rendered with 17
significant digits, so a write/read round trip reproduces every sample
bit-for-bit.

Columns, in order:

- abelian runs:  ``t, x1..x3, v1..v3, speed, L1..L3, cos_psi, res_rr,
  res_rv, colliding``
- su(2) runs:    ``t, x1..x5, u1..u4, r, du1..du4, dr, e1..e3, speed,
  L1..L5, cos_psi, res_rr, res_rv, norm_e, colliding``
- cone-geodesic runs: ``t, x1..x{n+1}, v1..v{n-1}, r, dv1..dv{n-1}, dr,
  speed, membership, colliding``

The Cartesian position columns are derived values; analysis reconstructs
states from the chart columns and recomputes every monitor it certifies.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from . import charts, cones, dynamics
from .errors import ParseError
from .integrate import Trajectory

FMT = "%.17g"


def _render(value: float) -> str:
    return FMT % value


def _columns(traj: Trajectory) -> tuple[list[str], np.ndarray]:
    kind = traj.meta.get("kind")
    times = traj.times[:, None]
    colliding = np.full((len(traj), 1), 1.0 if traj.meta.get("colliding") else 0.0)
    if kind == "dirac":
        r, r_dot = dynamics.unpack_dirac(traj.states)
        names = (["t"]
                 + [f"x{i}" for i in (1, 2, 3)]
                 + [f"v{i}" for i in (1, 2, 3)]
                 + ["speed"] + [f"L{i}" for i in (1, 2, 3)]
                 + ["cos_psi", "res_rr", "res_rv", "colliding"])
        data = np.hstack([times, r, r_dot,
                          traj.monitors["speed"][:, None], traj.monitors["L"],
                          traj.monitors["cos_psi"][:, None],
                          traj.monitors["res_rr"][:, None],
                          traj.monitors["res_rv"][:, None], colliding])
    elif kind == "yang":
        u, r, u_dot, r_dot, e = dynamics.unpack_yang(traj.states)
        x = charts.stereo_to_cartesian(u, r)
        names = (["t"]
                 + [f"x{i}" for i in range(1, 6)]
                 + [f"u{i}" for i in range(1, 5)] + ["r"]
                 + [f"du{i}" for i in range(1, 5)] + ["dr"]
                 + [f"e{i}" for i in (1, 2, 3)]
                 + ["speed"] + [f"L{i}" for i in range(1, 6)]
                 + ["cos_psi", "res_rr", "res_rv", "norm_e", "colliding"])
        data = np.hstack([times, x, u, r[:, None], u_dot, r_dot[:, None], e,
                          traj.monitors["speed"][:, None], traj.monitors["L"],
                          traj.monitors["cos_psi"][:, None],
                          traj.monitors["res_rr"][:, None],
                          traj.monitors["res_rv"][:, None],
                          traj.monitors["norm_e"][:, None], colliding])
    elif kind == "cone":
        m = traj.meta["v_dim"]
        v = traj.states[:, :m]
        r = traj.states[:, m]
        v_dot = traj.states[:, m + 1:2 * m + 1]
        r_dot = traj.states[:, 2 * m + 1]
        x = cones.cone_param(v, r, traj.meta["psi"])
        names = (["t"]
                 + [f"x{i}" for i in range(1, m + 3)]
                 + [f"v{i}" for i in range(1, m + 1)] + ["r"]
                 + [f"dv{i}" for i in range(1, m + 1)] + ["dr"]
                 + ["speed", "membership", "colliding"])
        data = np.hstack([times, x, v, r[:, None], v_dot, r_dot[:, None],
                          traj.monitors["speed"][:, None],
                          traj.monitors["membership"][:, None], colliding])
    else:
        raise ValueError(f"cannot serialize trajectory of kind {kind!r}")
    return names, data


def write_trajectory(traj: Trajectory, target, fmt: str = "csv") -> None:
    """Write a trajectory to a path or text stream in the given format."""
    names, data = _columns(traj)
    if hasattr(target, "write"):
        _write_stream(target, names, data, fmt)
        return
    with open(target, "w", newline="") as stream:
        _write_stream(stream, names, data, fmt)


def _write_stream(stream, names, data, fmt: str) -> None:
    if fmt == "csv":
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(names)
        for row in data:
            writer.writerow([_render(v) for v in row])
    elif fmt == "json-lines":
        for row in data:
            record = {name: float(_render(v)) for name, v in zip(names, row)}
            stream.write(json.dumps(record) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}; use 'csv' or 'json-lines'")


def render_trajectory(traj: Trajectory, fmt: str = "csv") -> str:
    """The exact file contents :func:`write_trajectory` would produce."""
    buffer = io.StringIO()
    _write_stream(buffer, *_columns(traj), fmt)
    return buffer.getvalue()


# ----------------------------------------------------------------------
# reading
# ----------------------------------------------------------------------

def _parse_table(text: str) -> tuple[list[str], np.ndarray]:
    stripped = text.lstrip()
    if not stripped:
        raise ParseError("empty trajectory file")
    if stripped[0] == "{":
        records = []
        names: list[str] | None = None
        for line_no, line in enumerate(stripped.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"line {line_no}: invalid JSON record") from exc
            if names is None:
                names = list(record)
            elif list(record) != names:
                raise ParseError(f"line {line_no}: field names changed mid-file")
            records.append([float(record[name]) for name in names])
        if names is None:
            raise ParseError("no records in JSON-lines file")
        return names, np.array(records, dtype=float)
    rows = list(csv.reader(io.StringIO(text)))
    rows = [row for row in rows if row]
    if len(rows) < 2:
        raise ParseError("trajectory file needs a header and at least one sample")
    names = rows[0]
    try:
        data = np.array([[float(cell) for cell in row] for row in rows[1:]])
    except ValueError as exc:
        raise ParseError(f"malformed numeric cell: {exc}") from exc
    if data.shape[1] != len(names):
        raise ParseError("row width does not match header")
    return names, data


def read_trajectory(source) -> Trajectory:
    """Read a trajectory file (CSV or JSON lines), reconstructing the states.

    Monitors present in the file are loaded as-is; analysis recomputes the
    ones it certifies.  Raises :class:`ParseError` on malformed input.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text()
    names, data = _parse_table(text)
    index = {name: i for i, name in enumerate(names)}

    def cols(*wanted):
        try:
            return data[:, [index[name] for name in wanted]]
        except KeyError as exc:
            raise ParseError(f"missing column {exc.args[0]!r}") from exc

    if "u1" in index:
        kind = "yang"
        states = cols("u1", "u2", "u3", "u4", "r",
                      "du1", "du2", "du3", "du4", "dr", "e1", "e2", "e3")
    elif "dv1" in index:
        raise ParseError("cone-geodesic files carry no aperture column and "
                         "cannot be re-analyzed")
    elif "v3" in index and "x4" not in index:
        kind = "dirac"
        states = cols("x1", "x2", "x3", "v1", "v2", "v3")
    else:
        raise ParseError("unrecognized trajectory schema")
    times = cols("t")[:, 0]
    if times.shape[0] >= 2 and np.any(np.diff(times) == 0.0):
        raise ParseError("time column is not strictly monotone")
    monitors = {}
    for name in ("speed", "cos_psi", "res_rr", "res_rv", "norm_e"):
        if name in index:
            monitors[name] = data[:, index[name]]
    l_names = [name for name in names if name.startswith("L")]
    if l_names:
        monitors["L"] = cols(*sorted(l_names))
    meta = {"kind": kind}
    if "colliding" in index:
        meta["colliding"] = bool(data[0, index["colliding"]])
    return Trajectory(times=times, states=states, monitors=monitors, meta=meta)
