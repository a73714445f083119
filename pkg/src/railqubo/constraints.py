"""Hard constraints of the time-indexed 0-1 model.

Each QUBO variable says "train ``j`` leaves station ``s`` with delay ``d``".
Exactly one variable per (train, decision station) is set; the dispatching
conditions become pairs of variables that may not both be set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .model import RailwayInstance, shared_legs, windows_overlap


class VariableIndex:
    """Dense numbering of ``(train, station, delay)`` triples.

    Variables are ordered by train (instance order), then station along the
    route, then delay.
    """

    def __init__(self, instance: RailwayInstance):
        self.instance = instance
        self.keys: list[tuple[str, int, int]] = []
        self.groups: list[tuple[str, int]] = []
        self._group_slices = {}
        for j in instance.trains:
            for s in instance.decision_stations(j):
                start = len(self.keys)
                self.keys.extend((j, s, d) for d in instance.delay_domain(j, s))
                self._group_slices[j, s] = range(start, len(self.keys))
                self.groups.append((j, s))
        self._pos = {k: i for i, k in enumerate(self.keys)}

    def __len__(self):
        return len(self.keys)

    def __getitem__(self, key: tuple[str, int, int]) -> int:
        return self._pos[key]

    def __contains__(self, key):
        return key in self._pos

    def get(self, j, s, d):
        return self._pos.get((j, s, d))

    def key(self, i: int) -> tuple[str, int, int]:
        return self.keys[i]

    def group(self, j: str, s: int) -> range:
        return self._group_slices[j, s]


@dataclass
class ConstraintSet:
    index: VariableIndex
    one_hot_groups: list[tuple[int, ...]]
    forbidden_pairs: dict[tuple[int, int], str] = field(default_factory=dict)
    capacity_checks: list[tuple[int, int, tuple[str, ...]]] = field(default_factory=list)

    def add_pairs(self, pairs, tag):
        for i, k in pairs:
            key = (i, k) if i < k else (k, i)
            self.forbidden_pairs.setdefault(key, tag)

    def pairs_by_condition(self) -> dict[str, list[tuple[int, int]]]:
        out = {}
        for p, tag in self.forbidden_pairs.items():
            out.setdefault(tag, []).append(p)
        return out

    def is_feasible(self, x) -> bool:
        """Direct check of the 0-1 program's constraints (no penalties involved)."""
        for g in self.one_hot_groups:
            if sum(int(x[i]) for i in g) != 1:
                return False
        return not any(x[i] and x[k] for i, k in self.forbidden_pairs)

    def describe(self) -> str:
        """Diagnostic listing of groups and tagged pairs."""
        lines = [f"# variables {len(self.index)}", f"# groups {len(self.one_hot_groups)}"]
        for (j, s), g in zip(self.index.groups, self.one_hot_groups):
            lines.append(f"group {j} {s}: {' '.join(map(str, g))}")
        lines.append(f"# pairs {len(self.forbidden_pairs)}")
        for (i, k), tag in sorted(self.forbidden_pairs.items()):
            lines.append(f"pair {tag} {i} {k}  {self.index.key(i)} {self.index.key(k)}")
        return "\n".join(lines) + "\n"


def _domain_pairs(index, j, s, j2, s2, lo_shift, hi_shift):
    """Pairs (x[j,s,d], x[j2,s2,d2]) with ``d + lo_shift <= d2 <= d + hi_shift``."""
    inst = index.instance
    dom2 = inst.delay_domain(j2, s2)
    for d in inst.delay_domain(j, s):
        lo = max(d + lo_shift, dom2[0])
        hi = min(d + hi_shift, dom2[-1])
        for d2 in range(lo, hi + 1):
            yield index[j, s, d], index[j2, s2, d2]


def gen_one_hot(instance: RailwayInstance, index: VariableIndex) -> list[tuple[int, ...]]:
    return [tuple(index.group(j, s)) for j, s in index.groups]


def headway_legs(instance: RailwayInstance, skip_disjoint: bool = True):
    """Yield every ordered leg conflict ``(kind, j, s, j2, s2, shift, gap)``.

    The leg starts at ``s`` for ``j`` and at ``s2`` for ``j2``. When ``j``
    leaves first, ``j2`` must leave at least ``gap`` minutes after it, i.e.
    ``d(j2, s2) >= d(j, s) + shift + gap``. ``kind`` is ``"single_block"`` for
    followers and ``"deadlock"`` for opposing trains. Both orders of every
    train pair are produced.
    """
    for j, j2 in itertools.permutations(instance.trains, 2):
        same = instance.trains[j].direction == instance.trains[j2].direction
        for s, s2 in shared_legs(instance, j, j2):
            if same:
                gap, gap_rev = instance.tau1(j, s), instance.tau1(j2, s2)
            else:
                gap, gap_rev = instance.tau2(j, s), instance.tau2(j2, s2)
            if skip_disjoint and not windows_overlap(instance, j, s, j2, s2, gap, gap_rev):
                continue
            yield ("single_block" if same else "deadlock"), j, s, j2, s2, instance.offset(j, s, j2, s2), gap


def _gen_headway(instance, index, kind, skip_disjoint):
    pairs = []
    for k, j, s, j2, s2, shift, gap in headway_legs(instance, skip_disjoint):
        if k == kind:
            pairs.extend(_domain_pairs(index, j, s, j2, s2, shift, shift + gap - 1))
    return pairs


def gen_single_block(instance, index, skip_disjoint=True):
    """Followers on a shared leg leaving less than the headway apart."""
    return _gen_headway(instance, index, "single_block", skip_disjoint)


def gen_deadlock(instance, index, skip_disjoint=True):
    """Opposing trains entering a shared leg before the other has cleared it."""
    return _gen_headway(instance, index, "deadlock", skip_disjoint)


def gen_min_passing(instance, index):
    """A train may not recover more than the time reserve between stations."""
    pairs = []
    for j in instance.trains:
        for s in instance.stations(j)[:-2]:
            nxt = instance.next_station(j, s)
            alpha = instance.time_reserve(j, s)
            # d2 in {0, ..., d - alpha - 1}
            pairs.extend(_domain_pairs(index, j, s, j, nxt, -(10**9), -alpha - 1))
    return pairs


def gen_rolling_stock(instance, index):
    """The follow-on service may not leave before the turnover is complete."""
    pairs = []
    for tv in instance.turnovers:
        pen = instance.penultimate(tv.first)
        start = instance.stations(tv.second)[0]
        r = instance.turnover_slack(tv)
        # d2 in {0, ..., d - R}
        pairs.extend(_domain_pairs(index, tv.first, pen, tv.second, start, -(10**9), -r))
    return pairs


def capacity_checks(instance):
    """Stations where more trains than tracks could meet: (station, tracks, trains)."""
    checks = []
    for b in instance.blocks.values():
        if not b.is_station:
            continue
        trains = tuple(j for j in instance.trains if b.id in instance.stations(j))
        if len(trains) > b.capacity:
            checks.append((b.id, b.capacity, trains))
    return checks


def build_constraints(instance: RailwayInstance, skip_disjoint: bool = True) -> ConstraintSet:
    index = VariableIndex(instance)
    cs = ConstraintSet(index, gen_one_hot(instance, index), capacity_checks=capacity_checks(instance))
    cs.add_pairs(gen_single_block(instance, index, skip_disjoint), "single_block")
    cs.add_pairs(gen_deadlock(instance, index, skip_disjoint), "deadlock")
    cs.add_pairs(gen_min_passing(instance, index), "min_passing")
    cs.add_pairs(gen_rolling_stock(instance, index), "rolling_stock")
    return cs
