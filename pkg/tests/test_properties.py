import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from railqubo.constraints import build_constraints
from railqubo.generate import random_instance
from railqubo.io import load_instance
from railqubo.ordering import exact_order_solver
from railqubo.qubo import BrokenOneHot, build_qubo, to_ising
from railqubo.report import Infeasible
from railqubo.verify import check_conditions

from conftest import oracle_pairs, station_legs

FIXTURES = ["simple", "line216", "line191-reconstructed"]
seeds = st.integers(0, 10**6)
fast = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@pytest.fixture(scope="module", params=FIXTURES)
def fixture_qubo(request):
    return build_qubo(load_instance(request.param))


def random_one_hot(qubo, rng):
    x = np.zeros(qubo.n, dtype=np.int8)
    for g in qubo.constraints.one_hot_groups:
        x[g[rng.integers(len(g))]] = 1
    return x


def near_feasible(qubo, rng, base):
    """A copy of ``base`` with a few groups re-drawn and, now and then, a stray bit flip."""
    x = base.copy()
    groups = qubo.constraints.one_hot_groups
    for gi in rng.choice(len(groups), size=rng.integers(1, 3), replace=True):
        g = list(groups[gi])
        x[g] = 0
        x[g[rng.integers(len(g))]] = 1
    if rng.random() < 0.15:
        x[rng.integers(qubo.n)] ^= 1
    return x


def checker_says_feasible(qubo, x):
    try:
        sch = qubo.decode(x)
    except BrokenOneHot:
        return False
    return not check_conditions(sch)


@pytest.mark.filterwarnings("ignore::UserWarning")
@given(seed=seeds, p=st.floats(0.5, 20), q=st.floats(0.5, 20))
@fast
def test_q_symmetric(seed, p, q):
    Q = build_qubo(random_instance(seed), p, q).Q
    assert np.array_equal(Q, Q.T)


def test_fixture_q_symmetric(fixture_qubo):
    assert np.array_equal(fixture_qubo.Q, fixture_qubo.Q.T)


def test_ising_equality(fixture_qubo):
    rng = np.random.default_rng(11)
    ising = to_ising(fixture_qubo.Q)
    X = rng.integers(0, 2, size=(1000, fixture_qubo.n))
    for x in X:
        assert abs(ising.energy(2 * x - 1) - fixture_qubo.energy(x)) <= 1e-9


@given(seed=seeds, bits=st.data())
@fast
def test_ising_equality_random_instances(seed, bits):
    qubo = build_qubo(random_instance(seed))
    if qubo.n == 0:
        return
    x = np.array(bits.draw(st.lists(st.integers(0, 1), min_size=qubo.n, max_size=qubo.n)))
    assert abs(qubo.to_ising().energy(2 * x - 1) - qubo.energy(x)) <= 1e-9


@pytest.mark.parametrize("name", ["line216", "line191-reconstructed"])
def test_hard_penalty_matches_checker(name):
    inst = load_instance(name)
    qubo = build_qubo(inst)
    rng = np.random.default_rng(3)
    base = qubo.encode(exact_order_solver(inst).schedule)
    n_feasible = 0
    for k in range(10_000):
        x = random_one_hot(qubo, rng) if k % 4 == 0 else near_feasible(qubo, rng, base)
        zero = abs(qubo.decompose(x).hard_penalty) <= 1e-9
        assert zero == checker_says_feasible(qubo, x), x
        n_feasible += zero
    # both sides of the equivalence are exercised
    assert 0 < n_feasible < 10_000


@given(seed=seeds, data=st.data())
@fast
def test_hard_penalty_matches_checker_random(seed, data):
    qubo = build_qubo(random_instance(seed))
    if qubo.n == 0:
        return
    rng = np.random.default_rng(data.draw(seeds))
    for _ in range(50):
        x = random_one_hot(qubo, rng)
        if rng.random() < 0.2:
            x[rng.integers(qubo.n)] ^= 1
        assert (abs(qubo.decompose(x).hard_penalty) <= 1e-9) == checker_says_feasible(qubo, x)


@given(seed=seeds, data=st.data())
@fast
def test_decode_encode_identity(seed, data):
    qubo = build_qubo(random_instance(seed))
    if qubo.n == 0:
        return
    x = random_one_hot(qubo, np.random.default_rng(data.draw(seeds)))
    sch = qubo.decode(x)
    assert np.array_equal(qubo.encode(sch), x)
    assert qubo.decode(qubo.encode(sch)) == sch


def test_decode_encode_fixtures(fixture_qubo):
    rng = np.random.default_rng(0)
    for _ in range(200):
        x = random_one_hot(fixture_qubo, rng)
        assert np.array_equal(fixture_qubo.encode(fixture_qubo.decode(x)), x)


def tau_pairs(inst):
    for j in inst.trains:
        for s in inst.decision_stations(j):
            yield j, s


@pytest.mark.parametrize("name", FIXTURES)
def test_tau2_at_least_tau1(name):
    inst = load_instance(name)
    for j, s in tau_pairs(inst):
        assert inst.tau2(j, s) >= inst.tau1(j, s) > 0


@given(seed=seeds)
@fast
def test_tau2_at_least_tau1_random(seed):
    inst = random_instance(seed)
    for j, s in tau_pairs(inst):
        assert inst.tau2(j, s) >= inst.tau1(j, s)


def d_u_oracle(inst):
    """Unavoidable delays by stepping through the raw timetable."""
    tt = inst.timetable
    out = {}
    pending = list(inst.trains)
    while pending:
        for j in list(pending):
            feeds = [tv for tv in inst.turnovers if tv.second == j]
            if any(tv.first in pending for tv in feeds):
                continue
            legs = station_legs(inst, j)
            d = inst.trains[j].initial_delay
            for tv in feeds:
                pen = station_legs(inst, tv.first)[-1][0]
                d = max(d, out[tv.first, pen] - inst.turnover_slack(tv) + 1)
            route = inst.trains[j].route
            for s, nxt in legs:
                out[j, s] = d
                covered = route[route.index(s) + 1 : route.index(nxt) + 1]
                reserve = sum(tt[j, m].t_out - tt[j, m].t_in - tt[j, m].p_min for m in covered)
                d = max(0, d - reserve)
            out[j, legs[-1][1]] = d
            pending.remove(j)
    return out


@pytest.mark.parametrize("name", FIXTURES)
def test_d_u_recursion(name):
    inst = load_instance(name)
    assert inst.unavoidable_delays == d_u_oracle(inst)


@given(seed=seeds)
@fast
def test_d_u_recursion_random(seed):
    inst = random_instance(seed)
    assert inst.unavoidable_delays == d_u_oracle(inst)


@given(seed=seeds)
@fast
def test_d_u_is_tight_for_a_lone_train(seed):
    # running every leg at minimum time reproduces d_U exactly
    inst = random_instance(seed)
    for j in inst.trains:
        d = [inst.d_u(j, s) for s in inst.stations(j)]
        for (s, _), a, b in zip(station_legs(inst, j), d, d[1:]):
            assert b == max(0, a - inst.time_reserve(j, s))


def test_line191_variable_count(line191):
    assert build_qubo(line191).n == 198


@given(seed=seeds)
@fast
def test_generator_matches_oracle_random(seed):
    inst = random_instance(seed)
    cs = build_constraints(inst, skip_disjoint=False)
    assert set(cs.forbidden_pairs) == oracle_pairs(inst, cs.index)


@given(seed=seeds)
@fast
def test_order_solver_respects_conditions(seed):
    inst = random_instance(seed)
    try:
        rep = exact_order_solver(inst)
    except Infeasible:
        return
    assert not check_conditions(rep.schedule)
    qubo = build_qubo(inst)
    assert abs(qubo.decompose(qubo.encode(rep.schedule)).hard_penalty) <= 1e-9
