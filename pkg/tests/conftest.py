import itertools

import pytest

from railqubo.io import load_instance
from railqubo.qubo import build_qubo


@pytest.fixture(scope="session")
def line216():
    return load_instance("line216")


@pytest.fixture(scope="session")
def simple():
    return load_instance("simple")


@pytest.fixture(scope="session")
def line191():
    return load_instance("line191-reconstructed")


@pytest.fixture(scope="session")
def qubo216(line216):
    return build_qubo(line216, 1.75, 1.75)


@pytest.fixture(scope="session")
def qubo_simple(simple):
    return build_qubo(simple, 1.75, 1.75)


def station_legs(inst, j):
    """(station, next station) pairs along a route, read straight off the blocks."""
    st = [m for m in inst.trains[j].route if inst.blocks[m].is_station]
    return list(zip(st, st[1:]))


def leg_blocks(inst, j, s, nxt):
    route = inst.trains[j].route
    return route[route.index(s) + 1 : route.index(nxt)]


def violated(inst, a, b):
    """Whether two delay choices ``a = (j, s, d)``, ``b = (j2, s2, d2)`` break a rule.

    Evaluated from departure times, independently of the constraint generator.
    """
    (j, s, d), (j2, s2, d2) = a, b
    tt = inst.timetable
    legs1, legs2 = dict(station_legs(inst, j)), dict(station_legs(inst, j2))
    if j == j2:
        if s == s2:
            return False
        if legs1.get(s) == s2 and s2 in legs1:  # s2 follows s and is not last
            alpha = sum(tt[j, m].t_out - tt[j, m].t_in - tt[j, m].p_min for m in leg_blocks(inst, j, s, s2) + (s2,))
            return d2 < d - alpha
        if legs1.get(s2) == s and s in legs1:
            return violated(inst, b, a)
        return False

    def dep(jj, ss, dd):
        return tt[jj, ss].t_out + dd

    def headway(jj, ss, nn, same):
        if same:
            inner = leg_blocks(inst, jj, ss, nn)
            if inner:
                return max(tt[jj, m].t_out - tt[jj, m].t_in for m in inner)
        return tt[jj, nn].t_in - tt[jj, ss].t_out

    same = inst.trains[j].direction == inst.trains[j2].direction
    bad = False
    n1, n2 = legs1.get(s), legs2.get(s2)
    if same and s == s2 and n1 is not None and n1 == n2:
        t1, t2 = dep(j, s, d), dep(j2, s2, d2)
        bad |= t1 <= t2 < t1 + headway(j, s, n1, True)
        bad |= t2 <= t1 < t2 + headway(j2, s2, n2, True)
    if not same and n1 == s2 and n2 == s:
        t1, t2 = dep(j, s, d), dep(j2, s2, d2)
        bad |= t1 <= t2 < t1 + headway(j, s, n1, False)
        bad |= t2 <= t1 < t2 + headway(j2, s2, n2, False)
    for tv in inst.turnovers:
        for (x, y) in ((a, b), (b, a)):
            if x[0] == tv.first and y[0] == tv.second:
                pen = station_legs(inst, tv.first)[-1][0]
                first = station_legs(inst, tv.second)[0][0]
                if x[1] == pen and y[1] == first:
                    arrive = tt[tv.first, pen].t_out + x[2] + headway(tv.first, pen, station_legs(inst, tv.first)[-1][1], False)
                    # the turnover must strictly exceed its minimum
                    bad |= dep(tv.second, first, y[2]) <= arrive + tv.min_turnover
    return bad


def oracle_pairs(inst, index):
    out = set()
    for i, k in itertools.combinations(range(len(index)), 2):
        a, b = index.key(i), index.key(k)
        if (a[0], a[1]) != (b[0], b[1]) and violated(inst, a, b):
            out.add((i, k))
    return out
