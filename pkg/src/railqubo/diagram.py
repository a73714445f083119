"""Distance-time train diagrams as data, CSV and static SVG.

Blocks are stacked vertically in the order they are listed in the instance,
which is expected to follow the line. Time runs left to right.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

from .model import RailwayInstance, fmt_time
from .qubo import Schedule

FORMAT_HEADER = "# format railqubo-diagram version 1"
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"]


@dataclass(frozen=True)
class Row:
    train: str
    block: int
    t_in: int
    t_out: int
    is_station: bool


@dataclass(frozen=True)
class Conflict:
    """Block held by more trains than it can take during ``[start, end]``."""

    block: int
    start: int
    end: int
    trains: tuple[str, ...]


@dataclass
class DiagramData:
    instance: RailwayInstance
    rows: list
    conflicts: list = field(default_factory=list)
    title: str = ""

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(FORMAT_HEADER + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["train", "block", "t_in", "t_out", "is_station"])
        for r in self.rows:
            w.writerow([r.train, r.block, r.t_in, r.t_out, int(r.is_station)])
        return buf.getvalue()

    def conflicts_csv(self) -> str:
        buf = io.StringIO()
        buf.write(FORMAT_HEADER + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["block", "start", "end", "trains"])
        for c in self.conflicts:
            w.writerow([c.block, c.start, c.end, " ".join(c.trains)])
        return buf.getvalue()

    def to_svg(self, px_per_minute: float = 8.0, band: int = 40) -> str:
        return render_svg(self, px_per_minute, band)


def timetable_rows(instance: RailwayInstance) -> list[Row]:
    rows = []
    for j, t in instance.trains.items():
        for m in t.route:
            e = instance.tt(j, m)
            rows.append(Row(j, m, e.t_in, e.t_out, instance.blocks[m].is_station))
    return rows


def schedule_rows(schedule: Schedule) -> list[Row]:
    inst = schedule.instance
    occ = schedule.occupation()
    return [
        Row(j, m, *occ[j, m], inst.blocks[m].is_station) for j, t in inst.trains.items() for m in t.route
    ]


def find_conflicts(instance: RailwayInstance, rows) -> list[Conflict]:
    """Over-occupied blocks.

    Line blocks conflict when two stays overlap for a positive time (a train
    may enter the minute another leaves). Station stays are closed intervals
    checked against the station capacity.
    """
    by_block = {}
    for r in rows:
        by_block.setdefault(r.block, []).append(r)
    out = []
    for m, rs in by_block.items():
        blk = instance.blocks[m]
        rs = sorted(rs, key=lambda r: (r.t_in, r.t_out, r.train))
        if blk.is_station:
            for r in rs:
                present = [q for q in rs if q.t_in <= r.t_in <= q.t_out]
                if len(present) > blk.capacity:
                    end = min(q.t_out for q in present)
                    out.append(Conflict(m, r.t_in, end, tuple(sorted(q.train for q in present))))
        else:
            for a_i, a in enumerate(rs):
                for b in rs[a_i + 1 :]:
                    lo, hi = max(a.t_in, b.t_in), min(a.t_out, b.t_out)
                    if lo < hi:
                        out.append(Conflict(m, lo, hi, tuple(sorted((a.train, b.train)))))
    return sorted(set(out), key=lambda c: (c.start, c.block, c.trains))


def timetable_diagram(instance: RailwayInstance, disturbed: bool = False) -> DiagramData:
    """Scheduled running, or the running implied by the unavoidable delays alone."""
    if disturbed:
        d = {(j, s): instance.d_u(j, s) for j in instance.trains for s in instance.decision_stations(j)}
        sched = Schedule(instance, d)
        return schedule_diagram(sched, title=f"{instance.name} with initial delays, unresolved")
    rows = timetable_rows(instance)
    return DiagramData(instance, rows, find_conflicts(instance, rows), f"{instance.name} timetable")


def schedule_diagram(schedule: Schedule, title: str = "") -> DiagramData:
    rows = schedule_rows(schedule)
    return DiagramData(schedule.instance, rows, find_conflicts(schedule.instance, rows), title)


def render_svg(data: DiagramData, px_per_minute: float = 8.0, band: int = 40) -> str:
    inst = data.instance
    order = list(inst.blocks)
    level = {m: k for k, m in enumerate(order)}
    t0 = min(r.t_in for r in data.rows) - 2
    t1 = max(r.t_out for r in data.rows) + 2
    left, top = 70, 30
    width = left + (t1 - t0) * px_per_minute + 20
    height = top + band * len(order) + 40

    def x(t):
        return left + (t - t0) * px_per_minute

    def y(pos):
        return top + pos * band

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'font-family="sans-serif" font-size="11">',
        f'<text x="{left}" y="16" font-size="13">{escape(data.title)}</text>',
    ]
    for m in order:
        k = level[m]
        fill = "#eeeeee" if inst.blocks[m].is_station else "#ffffff"
        parts.append(f'<rect x="{left}" y="{y(k)}" width="{x(t1) - left:.1f}" height="{band}" fill="{fill}" stroke="#cccccc"/>')
        parts.append(f'<text x="8" y="{y(k) + band / 2 + 4:.1f}">block {m}</text>')
    step = 10 if t1 - t0 > 40 else 5
    for t in range((t0 // step + 1) * step, t1, step):
        parts.append(f'<line x1="{x(t):.1f}" y1="{y(0)}" x2="{x(t):.1f}" y2="{y(len(order))}" stroke="#dddddd"/>')
        parts.append(f'<text x="{x(t) - 14:.1f}" y="{y(len(order)) + 16}">{fmt_time(t)}</text>')
    for c in data.conflicts:
        k = level[c.block]
        w = max(c.end - c.start, 0.5) * px_per_minute
        parts.append(
            f'<rect class="conflict" x="{x(c.start):.1f}" y="{y(k)}" width="{w:.1f}" height="{band}" '
            f'fill="#ff0000" fill-opacity="0.3"><title>{escape(" / ".join(c.trains))}</title></rect>'
        )
    for n, (j, t) in enumerate(inst.trains.items()):
        down = level[t.route[-1]] > level[t.route[0]]
        pts = []
        for r in (r for r in data.rows if r.train == j):
            k = level[r.block]
            if r.is_station:
                pts += [(x(r.t_in), y(k + 0.5)), (x(r.t_out), y(k + 0.5))]
            else:
                a, b = (k, k + 1) if down else (k + 1, k)
                pts += [(x(r.t_in), y(a)), (x(r.t_out), y(b))]
        colour = PALETTE[n % len(PALETTE)]
        path = " ".join(f"{px:.1f},{py:.1f}" for px, py in pts)
        parts.append(f'<polyline class="train" points="{path}" fill="none" stroke="{colour}" stroke-width="2"/>')
        lx, ly = pts[0]
        parts.append(f'<text x="{lx + 3:.1f}" y="{ly - 3:.1f}" fill="{colour}">{escape(j)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
