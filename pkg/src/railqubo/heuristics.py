"""Greedy conflict-resolution dispatching rules.

All three start from the unavoidable delays with no upper bound, then
settle one conflicting train pair at a time until none remain. A choice is
an ordering arc; its consequences are propagated before the next conflict
is examined, so later decisions see the knock-on delays of earlier ones.

``fcfs``
    the most urgent conflict goes to the train that reached the station
    before the contested leg first;
``flfs``
    the most urgent conflict goes to the train that would leave first;
``amcc``
    every open conflict is tried both ways; the choice whose failure would
    cause the largest secondary delay is avoided.

Heuristic delays may exceed ``d_max``; check ``Schedule.within_bounds``.
"""

from __future__ import annotations

import math

from .model import RailwayInstance
from .ordering import DelaySystem, _finish, _urgency
from .qubo import Schedule
from .report import Infeasible, SolverReport


def _arrival(instance, d, j, s):
    if s == instance.stations(j)[0]:
        return instance.tt(j, s).t_in + instance.d_u(j, s)
    return instance.tt(j, s).t_in + d[j, instance.prev_station(j, s)]


def _tiebreak(instance, j, s):
    return (instance.tt(j, s).t_out, j)


def _first_come(system, dj, d):
    inst = system.instance
    ka = (_arrival(inst, d, *dj.a),) + _tiebreak(inst, *dj.a)
    kb = (_arrival(inst, d, *dj.b),) + _tiebreak(inst, *dj.b)
    return dj.first if ka <= kb else dj.second


def _first_leave(system, dj, d):
    inst = system.instance
    ka = (inst.tt(*dj.a).t_out + d[dj.a],) + _tiebreak(inst, *dj.a)
    kb = (inst.tt(*dj.b).t_out + d[dj.b],) + _tiebreak(inst, *dj.b)
    return dj.first if ka <= kb else dj.second


def _rule_driven(system, pick):
    chosen = []
    while True:
        d = system.propagate(chosen)
        if d is None:
            raise Infeasible("dispatching rule produced a cyclic order")
        open_ = [dj for dj in system.disjunctions if dj.violated(d)]
        if not open_:
            return d
        dj = min(open_, key=lambda x: _urgency(system.instance, x, d))
        chosen.append(pick(system, dj, d))


def _max_consequence(system):
    chosen = []
    while True:
        d = system.propagate(chosen)
        if d is None:
            raise Infeasible("no cycle-free order found")
        open_ = [dj for dj in system.disjunctions if dj.violated(d)]
        if not open_:
            return d
        worst = None
        for dj in sorted(open_, key=lambda x: _urgency(system.instance, x, d)):
            outcomes = []
            for arc in (dj.first, dj.second):
                trial = system.propagate(chosen + [arc])
                outcomes.append(math.inf if trial is None else system.max_secondary(trial))
            if outcomes == [math.inf, math.inf]:
                raise Infeasible("conflict cannot be resolved either way")
            cost = max(outcomes)
            if worst is None or cost > worst[0]:
                keep = dj.second if outcomes[0] >= outcomes[1] else dj.first
                worst = (cost, keep)
        chosen.append(worst[1])


def _run(instance, solve) -> Schedule:
    system = DelaySystem(instance, bounded=False)
    return Schedule(instance, solve(system))


def fcfs(instance: RailwayInstance) -> Schedule:
    """First come, first served."""
    return _run(instance, lambda s: _rule_driven(s, _first_come))


def flfs(instance: RailwayInstance) -> Schedule:
    """First leave, first served."""
    return _run(instance, lambda s: _rule_driven(s, _first_leave))


def amcc(instance: RailwayInstance) -> Schedule:
    """Avoid the most costly conflict resolution (greedy on max secondary delay)."""
    return _run(instance, _max_consequence)


HEURISTICS = {"fcfs": fcfs, "flfs": flfs, "amcc": amcc}


def heuristic_report(instance: RailwayInstance, method: str) -> SolverReport:
    """Run a dispatching rule and verify the result.

    ``feasible`` also requires the delays to stay within ``d_max``.
    """
    schedule = HEURISTICS[method](instance)
    system = DelaySystem(instance, bounded=False)
    rep = _finish(method, system, schedule.delays, {}, {"within_d_max": schedule.within_bounds()})
    return rep
