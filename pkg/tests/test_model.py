import pytest

from railqubo.model import (
    Block,
    BlockKind,
    InstanceError,
    RailwayInstance,
    TimetableEntry,
    Train,
    Turnover,
    common_path,
    fmt_time,
    parse_time,
    propagate_unavoidable_delays,
)

from conftest import station_legs


def one_train(entries, initial=0, d_max=2):
    """Line station-line...-station for one eastbound train; entries: (kind, dwell, p_min)."""
    blocks, tt, clock = [], {}, 0
    for m, (kind, dwell, p_min) in enumerate(entries, start=1):
        blocks.append(Block(m, BlockKind(kind)))
        tt["A", m] = TimetableEntry(clock, clock + dwell, p_min)
        clock += dwell
    train = Train("A", 0, tuple(range(1, len(entries) + 1)), initial_delay=initial)
    return RailwayInstance(blocks, [train], tt, d_max)


def test_time_strings_round_trip():
    assert parse_time("13:53") == 833
    assert fmt_time(833) == "13:53"
    assert fmt_time(parse_time("00:07")) == "00:07"


class TestTimeReserve:
    def test_zero_without_slack(self):
        inst = one_train([("station", 1, 1), ("line", 5, 5), ("station", 2, 2), ("line", 3, 3), ("station", 1, 1)])
        assert inst.time_reserve("A", 1) == 0

    def test_single_block(self):
        inst = one_train([("station", 1, 1), ("line", 5, 3), ("station", 1, 1), ("line", 3, 3), ("station", 1, 1)])
        assert inst.time_reserve("A", 1) == 2

    def test_line216_ic3521_first_leg(self, line216):
        # line block 2 has no reserve, the stop at 3 has two minutes with a one minute minimum
        assert line216.time_reserve("IC3521", 1) == 1

    def test_last_station_has_no_successor(self, line216):
        with pytest.raises(KeyError):
            line216.time_reserve("IC3521", 5)

    def test_unknown_train(self, line216):
        with pytest.raises(KeyError):
            line216.time_reserve("nope", 1)


class TestUnavoidableDelays:
    def test_no_initial_delay(self, line216):
        assert all(v == 0 for (j, _), v in line216.unavoidable_delays.items() if j == "R90602")

    def test_line216_values(self, line216):
        assert line216.d_u("IC5320", 5) == 15
        assert line216.d_u("IC3521", 1) == 5
        assert line216.d_u("IC5320", 3) == 8
        assert line216.d_u("IC3521", 3) == 4

    def test_clamps_at_zero(self):
        inst = one_train([("station", 1, 1), ("line", 10, 3), ("station", 1, 1), ("line", 3, 3), ("station", 1, 1)], initial=5)
        assert inst.d_u("A", 3) == 0

    @pytest.mark.parametrize("name", ["line216", "line191-reconstructed", "simple"])
    def test_recursion_exact(self, name):
        from railqubo.io import load_instance

        inst = load_instance(name)
        d = propagate_unavoidable_delays(inst)
        for j in inst.trains:
            for s, nxt in station_legs(inst, j)[:-1]:
                assert d[j, nxt] == max(d[j, s] - inst.time_reserve(j, s), 0)


def test_tau_examples():
    inst = one_train(
        [("station", 1, 1), ("line", 3, 3), ("line", 5, 5), ("line", 4, 4), ("station", 1, 1), ("line", 8, 8), ("station", 1, 1)]
    )
    assert inst.tau1("A", 1) == 5
    assert inst.tau2("A", 1) == 12
    assert inst.tau1("A", 5) == inst.tau2("A", 5) == 8


def test_tau_line216(line216):
    assert line216.tau2("IC3521", 1) == 15
    assert line216.tau1("IC5320", 5) == 8


@pytest.mark.parametrize("name", ["line216", "line191-reconstructed", "simple"])
def test_tau2_at_least_tau1(name):
    from railqubo.io import load_instance

    inst = load_instance(name)
    for j in inst.trains:
        for s in inst.decision_stations(j):
            assert inst.tau2(j, s) >= inst.tau1(j, s)


def test_common_path(line216):
    assert common_path(line216, "IC5320", "R90602") == ((5, 3, 1), (5, 3))
    assert common_path(line216, "IC3521", "IC5320") == ((1, 3, 5), (1, 3))


def test_common_path_disjoint():
    kinds = [BlockKind.STATION, BlockKind.LINE, BlockKind.STATION] * 2
    blocks = [Block(m, k) for m, k in enumerate(kinds, start=1)]
    tt = {}
    for j, route in (("A", (1, 2, 3)), ("B", (4, 5, 6))):
        for k, m in enumerate(route):
            tt[j, m] = TimetableEntry(4 * k, 4 * k + 4, 4)
    inst = RailwayInstance(blocks, [Train("A", 0, (1, 2, 3)), Train("B", 0, (4, 5, 6))], tt, 1)
    assert common_path(inst, "A", "B") == ((), ())


def test_domain_sizes(line191):
    for j in line191.trains:
        for s in line191.decision_stations(j):
            dom = line191.delay_domain(j, s)
            assert len(dom) == line191.d_max[j] + 1 and dom[0] == line191.d_u(j, s)


@pytest.mark.parametrize("name", ["line216", "line191-reconstructed", "simple"])
def test_timetable_consistency(name):
    from railqubo.io import load_instance

    inst = load_instance(name)
    for j, t in inst.trains.items():
        for m, nxt in zip(t.route, t.route[1:]):
            assert inst.tt(j, m).t_out == inst.tt(j, nxt).t_in
        for m in t.route:
            e = inst.tt(j, m)
            assert 0 < e.p_min <= e.p_timetable or e.p_min == e.p_timetable == 0


def test_turnover_propagation(line191):
    tv = line191.turnovers[0]
    pen = line191.penultimate(tv.first)
    start = line191.stations(tv.second)[0]
    slack = line191.turnover_slack(tv)
    assert line191.d_u(tv.second, start) >= line191.d_u(tv.first, pen) - slack + 1


class TestValidation:
    def test_empty_trains(self):
        with pytest.raises(InstanceError):
            RailwayInstance([Block(1, BlockKind.STATION)], [], {}, 1)

    def test_route_through_unknown_block(self, line216):
        with pytest.raises(InstanceError):
            RailwayInstance(list(line216.blocks.values()), [Train("X", 0, (1, 9))], {}, 1)

    def test_bad_direction(self):
        with pytest.raises(InstanceError):
            Train("X", 2, (1, 2))

    def test_line_capacity(self):
        with pytest.raises(InstanceError):
            Block(2, BlockKind.LINE, 2)

    def test_cyclic_turnover(self, line216):
        with pytest.raises(InstanceError):
            RailwayInstance(
                list(line216.blocks.values()),
                list(line216.trains.values()),
                line216.timetable,
                7,
                turnovers=[Turnover("IC5320", "IC3521", 1), Turnover("IC3521", "IC5320", 1)],
            )
