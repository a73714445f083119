"""Instance documents and QUBO/Ising coordinate files.

Instance documents are JSON with ``HH:MM`` times::

    {
      "schema_version": 1,
      "name": "line216",
      "blocks":    [{"id": 1, "kind": "station", "capacity": 2}, ...],
      "trains":    [{"id": "IC5320", "direction": 1, "route": [5, 4, 3, 2, 1],
                     "initial_delay": 15}, ...],
      "weights":   {"IC5320": 1.5, ...},
      "timetable": [{"train": "IC5320", "block": 5, "in": "13:53", "out": "13:54",
                     "p_min": 1}, ...],
      "d_max": 7,
      "turnover":  [{"first": "IC1", "second": "IC2", "min_turnover": 20}],
      "penalties": {"p_sum": 1.75, "p_pair": 1.75}
    }

``p_min`` defaults to the scheduled passing time (no reserve) and ``d_max``
may be a single integer or a per-train mapping.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .model import (
    Block,
    BlockKind,
    InstanceError,
    RailwayInstance,
    TimetableEntry,
    Train,
    Turnover,
    fmt_time,
    parse_time,
)

SCHEMA_VERSION = 1
FIXTURES = {
    "line216": "line216.json",
    "line191-reconstructed": "line191_reconstructed.json",
    "simple": "simple.json",
}


class DocumentError(InstanceError):
    """Malformed instance document; ``where`` locates the offending field."""

    def __init__(self, where, message):
        super().__init__(f"{where}: {message}")
        self.where = where


def _field(obj, key, where, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise DocumentError(where, f"missing field {key!r}")
    v = obj[key]
    if kind is not None and not isinstance(v, kind):
        raise DocumentError(f"{where}.{key}", f"expected {getattr(kind, '__name__', kind)}")
    return v


def _time(v, where):
    try:
        return parse_time(v)
    except (AttributeError, ValueError):
        raise DocumentError(where, f"bad time {v!r}, expected HH:MM") from None


def instance_from_document(doc: dict) -> RailwayInstance:
    version = _field(doc, "schema_version", "document", int)
    if version != SCHEMA_VERSION:
        raise DocumentError("schema_version", f"unsupported version {version}")
    blocks = []
    for k, b in enumerate(_field(doc, "blocks", "document", list)):
        where = f"blocks[{k}]"
        try:
            kind = BlockKind(_field(b, "kind", where, str))
        except ValueError:
            raise DocumentError(f"{where}.kind", "must be 'line' or 'station'") from None
        blocks.append(Block(_field(b, "id", where, int), kind, b.get("capacity", 1)))
    weights = doc.get("weights", {})
    trains = []
    train_list = _field(doc, "trains", "document", list)
    if not train_list:
        raise DocumentError("trains", "no trains given")
    for k, t in enumerate(train_list):
        where = f"trains[{k}]"
        tid = _field(t, "id", where, str)
        trains.append(
            Train(
                tid,
                _field(t, "direction", where, int),
                tuple(_field(t, "route", where, list)),
                float(weights.get(tid, t.get("weight", 1.0))),
                int(t.get("initial_delay", 0)),
            )
        )
    timetable = {}
    for k, e in enumerate(_field(doc, "timetable", "document", list)):
        where = f"timetable[{k}]"
        t_in = _time(_field(e, "in", where), f"{where}.in")
        t_out = _time(_field(e, "out", where), f"{where}.out")
        key = (_field(e, "train", where, str), _field(e, "block", where, int))
        if key in timetable:
            raise DocumentError(where, f"duplicate entry for {key}")
        timetable[key] = TimetableEntry(t_in, t_out, int(e.get("p_min", t_out - t_in)))
    d_max = _field(doc, "d_max", "document")
    turnovers = [
        Turnover(
            _field(tv, "first", f"turnover[{k}]", str),
            _field(tv, "second", f"turnover[{k}]", str),
            _field(tv, "min_turnover", f"turnover[{k}]", int),
        )
        for k, tv in enumerate(doc.get("turnover", []))
    ]
    return RailwayInstance(
        blocks, trains, timetable, d_max, turnovers, doc.get("name", ""), doc.get("penalties")
    )


def instance_to_document(inst: RailwayInstance) -> dict:
    d_max = set(inst.d_max.values())
    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": inst.name,
        "blocks": [
            {"id": b.id, "kind": b.kind.value, "capacity": b.capacity} for b in inst.blocks.values()
        ],
        "trains": [
            {"id": t.id, "direction": t.direction, "route": list(t.route), "initial_delay": t.initial_delay}
            for t in inst.trains.values()
        ],
        "weights": {t.id: t.weight for t in inst.trains.values()},
        "timetable": [
            {"train": j, "block": m, "in": fmt_time(e.t_in), "out": fmt_time(e.t_out), "p_min": e.p_min}
            for (j, m), e in inst.timetable.items()
        ],
        "d_max": d_max.pop() if len(d_max) == 1 else dict(inst.d_max),
        "turnover": [
            {"first": tv.first, "second": tv.second, "min_turnover": tv.min_turnover} for tv in inst.turnovers
        ],
    }
    if inst.penalties:
        doc["penalties"] = dict(inst.penalties)
    return doc


def load_instance(path_or_name) -> RailwayInstance:
    """Load an instance file, or a bundled fixture by name."""
    name = str(path_or_name)
    if name in FIXTURES:
        text = resources.files("railqubo.fixtures").joinpath(FIXTURES[name]).read_text()
    else:
        text = Path(path_or_name).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    return instance_from_document(doc)


def dump_instance(inst: RailwayInstance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_document(inst), indent=1) + "\n")


# ----------------------------------------------------------------------
# coordinate files


def _num(v: float) -> str:
    v = float(v)
    return repr(int(v)) if v.is_integer() else repr(v)


def qubo_to_text(qubo) -> str:
    """Upper-triangle coordinate listing of ``x^T Q x``.

    Off-diagonal lines carry ``2 * Q[i, j]`` so that the energy is
    ``sum(diag) + sum(off-diagonal)`` over set bits.
    """
    Q = qubo.Q
    n = Q.shape[0]
    lines = [
        "# format qubo version 1",
        "# off-diagonal values are 2*Q[i,j] (upper triangle)",
        "# variable lines: x index train station delay",
        f"# n {n}",
        f"# p_sum {_num(qubo.p_sum)}",
        f"# p_pair {_num(qubo.p_pair)}",
        f"# L {_num(qubo.offset_L)}",
    ]
    lines += [f"# x {i} {j} {s} {d}" for i, (j, s, d) in enumerate(qubo.index.keys)]
    for i in range(n):
        for j in range(i, n):
            v = Q[i, i] if i == j else 2 * Q[i, j]
            if v != 0:
                lines.append(f"{i} {j} {_num(v)}")
    return "\n".join(lines) + "\n"


def ising_to_text(ising, n_header=None) -> str:
    n = len(ising.h)
    lines = [
        "# format ising version 1",
        "# energy = offset + sum h_i s_i + sum_{i<j} J_ij s_i s_j",
        f"# n {n}",
        f"# offset {_num(ising.offset)}",
    ]
    for i in range(n):
        if ising.h[i] != 0:
            lines.append(f"h {i} {_num(ising.h[i])}")
    for i in range(n):
        for j in range(i + 1, n):
            if ising.J[i, j] != 0:
                lines.append(f"J {i} {j} {_num(ising.J[i, j])}")
    return "\n".join(lines) + "\n"


def _header(lines):
    head = {}
    for line in lines:
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2:
                head[parts[0]] = parts[1]
    return head


def read_qubo_text(text: str) -> tuple[np.ndarray, dict]:
    """Parse a coordinate listing back into a symmetric matrix."""
    lines = text.splitlines()
    head = _header(lines)
    n = int(head["n"])
    Q = np.zeros((n, n))
    for line in lines:
        if not line or line.startswith("#"):
            continue
        i, j, v = line.split()
        i, j, v = int(i), int(j), float(v)
        if i == j:
            Q[i, i] = v
        else:
            Q[i, j] = Q[j, i] = v / 2
    return Q, head


def read_ising_text(text: str):
    lines = text.splitlines()
    head = _header(lines)
    n = int(head["n"])
    h, J = np.zeros(n), np.zeros((n, n))
    for line in lines:
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "h":
            h[int(parts[1])] = float(parts[2])
        else:
            i, j = int(parts[1]), int(parts[2])
            J[i, j] = J[j, i] = float(parts[3])
    return J, h, float(head["offset"])
