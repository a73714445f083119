"""Random small single-track instances for testing and experiments."""

from __future__ import annotations

import numpy as np

from .model import Block, BlockKind, RailwayInstance, TimetableEntry, Train


def random_line(rng, n_stations, max_line_blocks=2, capacities=(2, 3)):
    """Blocks of a line ``station, line..., station, ...`` with consecutive ids."""
    blocks = []
    bid = 1
    for k in range(n_stations):
        blocks.append(Block(bid, BlockKind.STATION, int(rng.choice(capacities))))
        bid += 1
        if k < n_stations - 1:
            for _ in range(int(rng.integers(1, max_line_blocks + 1))):
                blocks.append(Block(bid, BlockKind.LINE))
                bid += 1
    return blocks


def random_instance(
    seed=None,
    max_trains: int = 3,
    max_decision_stations: int = 3,
    max_d_max: int = 3,
    max_initial_delay: int = 4,
    horizon: int = 20,
) -> RailwayInstance:
    """A line of at most ``max_decision_stations + 1`` stations with 2..max_trains trains.

    Each train covers a contiguous stretch of at least two stations in a
    random direction. Scheduled departures are spread over ``horizon``
    minutes so that trains meet often.
    """
    rng = np.random.default_rng(seed)
    n_st = int(rng.integers(2, max_decision_stations + 2))
    blocks = random_line(rng, n_st)
    ids = [b.id for b in blocks]
    station_pos = [i for i, b in enumerate(blocks) if b.is_station]
    run = {b.id: int(rng.integers(1, 5)) for b in blocks if not b.is_station}

    trains, timetable = [], {}
    for t in range(int(rng.integers(2, max_trains + 1))):
        a, b = sorted(rng.choice(n_st, size=2, replace=False))
        direction = int(rng.integers(0, 2))
        route = ids[station_pos[a] : station_pos[b] + 1]
        if direction:
            route = route[::-1]
        clock = int(rng.integers(0, horizon))
        for k, m in enumerate(route):
            blk = blocks[ids.index(m)]
            if blk.is_station:
                p_min = 1
                dwell = 1 if k in (0, len(route) - 1) else int(rng.integers(1, 4))
            else:
                dwell = run[m] + int(rng.integers(0, 2))
                p_min = run[m]
            timetable[str(t), m] = TimetableEntry(clock, clock + dwell, p_min)
            clock += dwell
        trains.append(
            Train(
                str(t),
                direction,
                tuple(route),
                weight=float(rng.choice([0.5, 1.0, 1.5])),
                initial_delay=int(rng.integers(0, max_initial_delay + 1)),
            )
        )
    d_max = int(rng.integers(1, max_d_max + 1))
    total_w = sum(tr.weight for tr in trains)
    pen = total_w + 1.0
    return RailwayInstance(
        blocks, trains, timetable, d_max, name=f"random-{seed}", penalties={"p_sum": pen, "p_pair": pen}
    )
