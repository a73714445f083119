"""Railway line, trains, timetable and delay arithmetic.

All times are integer minutes since midnight. A train's delay ``d(j, s)`` is
the difference between its actual and scheduled departure from station ``s``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property


class InstanceError(ValueError):
    """Raised when an instance violates a structural invariant."""


class BlockKind(str, enum.Enum):
    LINE = "line"
    STATION = "station"


@dataclass(frozen=True)
class Block:
    id: int
    kind: BlockKind
    capacity: int = 1

    def __post_init__(self):
        if self.capacity < 1:
            raise InstanceError(f"block {self.id}: capacity must be >= 1")
        if self.kind is BlockKind.LINE and self.capacity != 1:
            raise InstanceError(f"line block {self.id} must have capacity 1")

    @property
    def is_station(self) -> bool:
        return self.kind is BlockKind.STATION


@dataclass(frozen=True)
class Train:
    id: str
    direction: int
    route: tuple[int, ...]
    weight: float = 1.0
    initial_delay: int = 0

    def __post_init__(self):
        if self.direction not in (0, 1):
            raise InstanceError(f"train {self.id}: direction must be 0 or 1")
        if self.weight < 0:
            raise InstanceError(f"train {self.id}: negative weight")
        if self.initial_delay < 0:
            raise InstanceError(f"train {self.id}: negative initial delay")
        if len(set(self.route)) != len(self.route):
            raise InstanceError(f"train {self.id}: route visits a block twice")
        if len(self.route) < 2:
            raise InstanceError(f"train {self.id}: route needs at least two blocks")


@dataclass(frozen=True)
class TimetableEntry:
    """Scheduled occupation of one block by one train."""

    t_in: int
    t_out: int
    p_min: int

    @property
    def p_timetable(self) -> int:
        return self.t_out - self.t_in


@dataclass(frozen=True)
class Turnover:
    """Train ``second`` is served by the rolling stock of ``first``."""

    first: str
    second: str
    min_turnover: int


@dataclass(frozen=True)
class Segment:
    """Station-to-station leg of a train route."""

    train: str
    start: int
    end: int
    blocks: tuple[int, ...]  # intermediate blocks, exclusive of both stations


class RailwayInstance:
    """A single-track line, its trains and their (possibly disturbed) schedule.

    Parameters
    ----------
    blocks, trains : sequences of :class:`Block` / :class:`Train`
    timetable : mapping ``(train_id, block_id) -> TimetableEntry``
    d_max : int or mapping train_id -> int
        Largest acceptable secondary delay.
    turnovers : sequence of :class:`Turnover`
    name : str, optional
    penalties : dict, optional
        Suggested ``p_sum``/``p_pair`` carried along from the instance file.
    """

    def __init__(self, blocks, trains, timetable, d_max, turnovers=(), name="", penalties=None):
        self.name = name
        self.penalties = dict(penalties or {})
        self.blocks = {b.id: b for b in blocks}
        if len(self.blocks) != len(blocks):
            raise InstanceError("duplicate block id")
        self.trains = {t.id: t for t in trains}
        if len(self.trains) != len(trains):
            raise InstanceError("duplicate train id")
        if not self.trains:
            raise InstanceError("instance has no trains")
        self.timetable = dict(timetable)
        if isinstance(d_max, int):
            d_max = {j: d_max for j in self.trains}
        self.d_max = dict(d_max)
        self.turnovers = tuple(turnovers)
        self._validate()

    # ------------------------------------------------------------------
    # validation

    def _validate(self):
        for train in self.trains.values():
            for m in train.route:
                if m not in self.blocks:
                    raise InstanceError(f"train {train.id}: unknown block {m}")
                if (train.id, m) not in self.timetable:
                    raise InstanceError(f"train {train.id}: no timetable entry for block {m}")
            if not (self.blocks[train.route[0]].is_station and self.blocks[train.route[-1]].is_station):
                raise InstanceError(f"train {train.id}: route must start and end at a station")
            entries = [self.timetable[train.id, m] for m in train.route]
            for m, e in zip(train.route, entries):
                if e.t_out < e.t_in:
                    raise InstanceError(f"train {train.id}: leaves block {m} before entering it")
                if not 0 <= e.p_min <= e.p_timetable:
                    raise InstanceError(f"train {train.id}: p_min outside [0, p_timetable] at block {m}")
            for (m, a), (n, b) in zip(zip(train.route, entries), zip(train.route[1:], entries[1:])):
                if a.t_out != b.t_in:
                    raise InstanceError(
                        f"train {train.id}: leaves block {m} at {a.t_out} but enters {n} at {b.t_in}"
                    )
            if train.id not in self.d_max:
                raise InstanceError(f"train {train.id}: missing d_max")
        for key in self.timetable:
            if key[0] not in self.trains:
                raise InstanceError(f"timetable entry for unknown train {key[0]}")
        for j, v in self.d_max.items():
            if j not in self.trains:
                raise InstanceError(f"d_max given for unknown train {j}")
            if v < 0:
                raise InstanceError(f"train {j}: negative d_max")
        for tv in self.turnovers:
            if tv.first not in self.trains or tv.second not in self.trains:
                raise InstanceError(f"turnover {tv.first}->{tv.second}: unknown train")
            if self.stations(tv.first)[-1] != self.stations(tv.second)[0]:
                raise InstanceError(
                    f"turnover {tv.first}->{tv.second}: first train does not terminate where the second starts"
                )
            if len(self.stations(tv.first)) < 2:
                raise InstanceError(f"turnover {tv.first}->{tv.second}: first train has no penultimate station")
        self._turnover_order()  # raises on cycles

    # ------------------------------------------------------------------
    # route geometry

    def route(self, j: str) -> tuple[int, ...]:
        return self.trains[j].route

    def stations(self, j: str) -> tuple[int, ...]:
        """Station blocks on the route of ``j`` in travel order."""
        return self._stations[j]

    @cached_property
    def _stations(self):
        return {
            j: tuple(m for m in t.route if self.blocks[m].is_station) for j, t in self.trains.items()
        }

    def decision_stations(self, j: str) -> tuple[int, ...]:
        """Stations whose departure time is a decision (all but the last)."""
        return self.stations(j)[:-1]

    def penultimate(self, j: str) -> int:
        return self.stations(j)[-2]

    def next_station(self, j: str, s: int) -> int | None:
        st = self.stations(j)
        k = self._index(j, s)
        return st[k + 1] if k + 1 < len(st) else None

    def prev_station(self, j: str, s: int) -> int | None:
        k = self._index(j, s)
        return self.stations(j)[k - 1] if k > 0 else None

    def _index(self, j, s):
        if j not in self.trains:
            raise KeyError(f"unknown train {j!r}")
        try:
            return self.stations(j).index(s)
        except ValueError:
            raise KeyError(f"station {s} not on the route of {j}") from None

    def segment(self, j: str, s: int) -> Segment:
        nxt = self.next_station(j, s)
        if nxt is None:
            raise KeyError(f"station {s} is the last station of {j}")
        route = self.route(j)
        a, b = route.index(s), route.index(nxt)
        return Segment(j, s, nxt, route[a + 1 : b])

    def tt(self, j: str, m: int) -> TimetableEntry:
        return self.timetable[j, m]

    # ------------------------------------------------------------------
    # timing quantities

    def time_reserve(self, j: str, s: int) -> int:
        """Slack between ``s`` and the next station (next station dwell included)."""
        seg = self.segment(j, s)
        return sum(self.tt(j, m).p_timetable - self.tt(j, m).p_min for m in seg.blocks + (seg.end,))

    def tau1(self, j: str, s: int) -> int:
        """Headway a following train must keep behind ``j`` on the leg after ``s``."""
        seg = self.segment(j, s)
        if not seg.blocks:
            return self.tau2(j, s)
        return max(self.tt(j, m).p_timetable for m in seg.blocks)

    def tau2(self, j: str, s: int) -> int:
        """Scheduled running time of ``j`` from leaving ``s`` to entering the next station."""
        seg = self.segment(j, s)
        return self.tt(j, seg.end).t_in - self.tt(j, s).t_out

    def offset(self, j: str, s: int, j2: str, s2: int) -> int:
        """Difference of scheduled departures ``t_out(j, s) - t_out(j2, s2)``."""
        return self.tt(j, s).t_out - self.tt(j2, s2).t_out

    def turnover_slack(self, tv: Turnover) -> int:
        """The shift ``R`` such that ``d(second, first stop) > d(first, penultimate) - R``."""
        pen = self.penultimate(tv.first)
        first_stop = self.stations(tv.second)[0]
        return (
            self.tt(tv.second, first_stop).t_out
            - self.tt(tv.first, pen).t_out
            - self.tau2(tv.first, pen)
            - tv.min_turnover
        )

    # ------------------------------------------------------------------
    # delays

    def _turnover_order(self):
        preds = {j: [] for j in self.trains}
        for tv in self.turnovers:
            preds[tv.second].append(tv)
        order, state = [], {}

        def visit(j):
            if state.get(j) == 1:
                raise InstanceError(f"cyclic turnover chain through {j}")
            if state.get(j) == 2:
                return
            state[j] = 1
            for tv in preds[j]:
                visit(tv.first)
            state[j] = 2
            order.append(j)

        for j in self.trains:
            visit(j)
        return order, preds

    @cached_property
    def unavoidable_delays(self) -> dict[tuple[str, int], int]:
        return propagate_unavoidable_delays(self)

    def d_u(self, j: str, s: int) -> int:
        return self.unavoidable_delays[j, s]

    def delay_domain(self, j: str, s: int) -> range:
        lo = self.d_u(j, s)
        return range(lo, lo + self.d_max[j] + 1)

    def departure_window(self, j: str, s: int) -> tuple[int, int]:
        """Earliest and latest admissible departure from ``s``."""
        dom = self.delay_domain(j, s)
        t = self.tt(j, s).t_out
        return t + dom[0], t + dom[-1]

    def with_d_max(self, d_max) -> "RailwayInstance":
        return RailwayInstance(
            list(self.blocks.values()),
            list(self.trains.values()),
            self.timetable,
            d_max,
            self.turnovers,
            self.name,
            self.penalties,
        )

    def __repr__(self):
        return f"RailwayInstance({self.name!r}, trains={list(self.trains)}, blocks={list(self.blocks)})"


def propagate_unavoidable_delays(instance: RailwayInstance) -> dict[tuple[str, int], int]:
    """Lower bounds on departure delays implied by the initial delays alone.

    Delays shrink by the time reserve of each leg and never go negative.
    A turnover pushes the delay of the follow-on train at its first station to
    at least ``d_U(first, penultimate) - R + 1``.
    """
    order, preds = instance._turnover_order()
    d_u = {}
    for j in order:
        train = instance.trains[j]
        stations = instance.stations(j)
        d = train.initial_delay
        for tv in preds[j]:
            d = max(d, d_u[tv.first, instance.penultimate(tv.first)] - instance.turnover_slack(tv) + 1)
        d_u[j, stations[0]] = d
        for s, nxt in zip(stations, stations[1:]):
            d = max(d - instance.time_reserve(j, s), 0)
            d_u[j, nxt] = d
    return d_u


def common_path(instance: RailwayInstance, j: str, j2: str) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Stations shared by two routes in the travel order of ``j``, and that
    sequence without its final element."""
    other = set(instance.stations(j2))
    path = tuple(s for s in instance.stations(j) if s in other)
    return path, path[:-1]


def shared_legs(instance: RailwayInstance, j: str, j2: str) -> list[tuple[int, int]]:
    """Legs ``(s, next)`` of ``j`` that ``j2`` also runs, in either direction.

    Returns pairs ``(s, s2)`` where ``s2`` is the station ``j2`` departs from
    on that leg: ``s`` for a follower, the next station of ``j`` for an
    opposing train.
    """
    _, starts = common_path(instance, j, j2)
    same = instance.trains[j].direction == instance.trains[j2].direction
    legs = []
    for s in starts:
        nxt = instance.next_station(j, s)
        if same:
            if instance.next_station(j2, s) == nxt:
                legs.append((s, s))
        elif nxt in instance.stations(j2) and instance.next_station(j2, nxt) == s:
            legs.append((s, nxt))
    return legs


def windows_overlap(instance: RailwayInstance, j: str, s: int, j2: str, s2: int, gap1: int, gap2: int) -> bool:
    """Whether two departures can come within the given headways of each other.

    ``gap1`` is the headway needed when ``j`` leaves first, ``gap2`` when ``j2``
    does. False means the pair can never conflict inside the delay bounds.
    """
    lo1, hi1 = instance.departure_window(j, s)
    lo2, hi2 = instance.departure_window(j2, s2)
    return lo2 < hi1 + gap1 and lo1 < hi2 + gap2


def fmt_time(minutes: int) -> str:
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def parse_time(text: str) -> int:
    h, m = text.split(":")
    return int(h) * 60 + int(m)
