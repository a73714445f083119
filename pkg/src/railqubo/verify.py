"""Direct checks of a schedule against the dispatching conditions.

These work on delays and times, not on QUBO variables, so they serve as an
independent judge of every solver's output.
"""

from __future__ import annotations

from itertools import combinations

from .constraints import headway_legs
from .qubo import Schedule


def check_capacity(schedule: Schedule) -> list[tuple[int, int, tuple[str, ...]]]:
    """Station over-occupation as ``(station, minute, trains)`` tuples.

    Occupation intervals are closed. Each offending ``(b + 1)``-tuple of
    trains is reported once, at the first minute it occurs.
    """
    inst = schedule.instance
    occ = schedule.occupation()
    for key in occ:
        if key[0] not in inst.trains or key[1] not in inst.blocks:
            raise KeyError(f"schedule refers to unknown train/block {key}")
    out = []
    for b in inst.blocks.values():
        if not b.is_station:
            continue
        spans = sorted((occ[j, b.id], j) for j in inst.trains if (j, b.id) in occ)
        if len(spans) <= b.capacity:
            continue
        seen = set()
        for (start, _), _j in spans:
            present = sorted(j for (a, e), j in spans if a <= start <= e)
            if len(present) <= b.capacity:
                continue
            for combo in combinations(present, b.capacity + 1):
                if combo not in seen:
                    seen.add(combo)
                    out.append((b.id, start, combo))
    return out


def check_conditions(schedule: Schedule, bounds: bool = True) -> list[str]:
    """Violations of delay bounds, minimum passing times, headways, meets and turnovers, as readable strings."""
    inst = schedule.instance
    d = schedule.delays
    problems = []
    if bounds:
        for (j, s), v in d.items():
            dom = inst.delay_domain(j, s)
            if v < dom[0]:
                problems.append(f"bounds: {j}@{s} delay {v} below unavoidable {dom[0]}")
            elif v > dom[-1]:
                problems.append(f"bounds: {j}@{s} delay {v} above {dom[-1]}")
    for j in inst.trains:
        for s in inst.stations(j)[:-2]:
            nxt = inst.next_station(j, s)
            if d[j, nxt] < d[j, s] - inst.time_reserve(j, s):
                problems.append(f"min_passing: {j} {s}->{nxt}")
    for kind, j, s, j2, s2, shift, gap in headway_legs(inst, skip_disjoint=False):
        if d[j2, s2] >= d[j, s] + shift and d[j2, s2] < d[j, s] + shift + gap:
            problems.append(f"{kind}: {j}@{s} then {j2}@{s2}")
    for tv in inst.turnovers:
        pen = inst.penultimate(tv.first)
        start = inst.stations(tv.second)[0]
        if not d[tv.second, start] > d[tv.first, pen] - inst.turnover_slack(tv):
            problems.append(f"rolling_stock: {tv.first}->{tv.second}")
    return problems


def is_admissible(schedule: Schedule, bounds: bool = True) -> bool:
    """Every dispatching rule holds, station capacity included."""
    return not check_conditions(schedule, bounds) and not check_capacity(schedule)
