"""Precedence (order-and-delay) view of the dispatching problem.

Delays at decision stations are integer variables bounded below by the
unavoidable delays. Minimum passing times and turnovers are fixed
difference constraints ``d[b] >= d[a] + w``. Every pair of trains sharing a
leg contributes a disjunction: one of them goes first, and the other keeps
the headway. Once all disjunctions are decided, the least delays are found
by longest-path propagation; since the objective never decreases in any
delay, these least delays are optimal for that order.

The exact solver is a depth-first branch and bound over the disjunctions
that are still violated by the current least delays.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .constraints import headway_legs
from .model import RailwayInstance
from .qubo import Schedule
from .report import Infeasible, SolverReport
from .verify import check_capacity, check_conditions


@dataclass(frozen=True)
class Arc:
    """``d[head] >= d[tail] + weight``"""

    tail: tuple[str, int]
    head: tuple[str, int]
    weight: int

    def holds(self, d) -> bool:
        return d[self.head] >= d[self.tail] + self.weight


@dataclass(frozen=True)
class Disjunction:
    """Two trains contending for one leg; ``first`` holds if train ``a`` leads."""

    kind: str
    a: tuple[str, int]
    b: tuple[str, int]
    first: Arc  # a leads
    second: Arc  # b leads

    @property
    def resource(self):
        return (self.kind, tuple(sorted((self.a[1], self.b[1]))))

    @property
    def trains(self):
        return self.a[0], self.b[0]

    def violated(self, d) -> bool:
        return not (self.first.holds(d) or self.second.holds(d))

    def leader(self, d) -> str | None:
        if self.first.holds(d):
            return self.a[0]
        if self.second.holds(d):
            return self.b[0]
        return None


class DelaySystem:
    def __init__(self, instance: RailwayInstance, bounded: bool = True):
        self.instance = instance
        self.bounded = bounded
        self.keys = [(j, s) for j in instance.trains for s in instance.decision_stations(j)]
        self.lower = {k: instance.d_u(*k) for k in self.keys}
        self.upper = {k: instance.d_u(*k) + instance.d_max[k[0]] for k in self.keys} if bounded else None
        self.arcs = []
        for j in instance.trains:
            for s in instance.stations(j)[:-2]:
                self.arcs.append(Arc((j, s), (j, instance.next_station(j, s)), -instance.time_reserve(j, s)))
        for tv in instance.turnovers:
            pen = instance.penultimate(tv.first)
            start = instance.stations(tv.second)[0]
            self.arcs.append(Arc((tv.first, pen), (tv.second, start), 1 - instance.turnover_slack(tv)))
        self.disjunctions = self._disjunctions(skip_disjoint=bounded)

    def _disjunctions(self, skip_disjoint):
        legs = {}
        for kind, j, s, j2, s2, shift, gap in headway_legs(self.instance, skip_disjoint):
            legs[(j, s), (j2, s2)] = (kind, Arc((j, s), (j2, s2), shift + gap))
        out = []
        for (a, b), (kind, arc) in legs.items():
            if (a[0], a[1]) < (b[0], b[1]):
                out.append(Disjunction(kind, a, b, arc, legs[b, a][1]))
        return out

    def propagate(self, extra=()):
        """Least delays satisfying all fixed arcs plus ``extra``; None if impossible."""
        d = dict(self.lower)
        arcs = self.arcs + list(extra)
        for _ in range(len(self.keys) + 1):
            changed = False
            for arc in arcs:
                v = d[arc.tail] + arc.weight
                if v > d[arc.head]:
                    d[arc.head] = v
                    changed = True
            if self.upper is not None and any(d[k] > self.upper[k] for k in self.keys):
                return None
            if not changed:
                return d
        return None  # positive cycle

    def objective(self, d) -> float:
        inst = self.instance
        total = 0.0
        for j, t in inst.trains.items():
            pen = inst.penultimate(j)
            if inst.d_max[j]:
                total += t.weight * (d[j, pen] - self.lower[j, pen]) / inst.d_max[j]
        return total

    def max_secondary(self, d) -> int:
        return max(d[k] - self.lower[k] for k in self.keys)

    def order_assignment(self, d) -> dict:
        """Precedence flags ``{(j, j2, resource): j leads}`` read off delays."""
        out = {}
        for dj in self.disjunctions:
            lead = dj.leader(d)
            if lead is None:
                continue
            a, b = dj.trains
            out[a, b, dj.resource] = lead == a
            out[b, a, dj.resource] = lead == b
        return out


OBJECTIVES = {"weighted": DelaySystem.objective, "max": DelaySystem.max_secondary}


def _finish(method, system, d, params, notes=None):
    inst = system.instance
    sch = Schedule(inst, d)
    rep = SolverReport(method, params, schedule=sch)
    rep.capacity_violations = check_capacity(sch)
    problems = check_conditions(sch)
    rep.feasible = not problems and not rep.capacity_violations
    rep.notes = {"objective_value": system.objective(d), **(notes or {})}
    if problems:
        rep.notes["condition_violations"] = problems
    return rep


def exact_order_solver(instance: RailwayInstance, objective: str = "weighted") -> SolverReport:
    """Optimal schedule of the discretised model by branch and bound on train order.

    ``objective`` is ``"weighted"`` (weighted normalised secondary delay at the
    penultimate stations) or ``"max"`` (largest secondary delay anywhere).
    Raises :class:`Infeasible` if no order fits within ``d_max``.
    """
    system = DelaySystem(instance, bounded=True)
    score = OBJECTIVES[objective]
    best = {"value": math.inf, "d": None}
    nodes = 0

    def search(chosen):
        nonlocal nodes
        nodes += 1
        d = system.propagate(chosen)
        if d is None:
            return
        value = score(system, d)
        if value >= best["value"] - 1e-12:
            return
        open_ = [dj for dj in system.disjunctions if dj.violated(d)]
        if not open_:
            best["value"], best["d"] = value, d
            return
        dj = min(open_, key=lambda x: _urgency(instance, x, d))
        for arc in (dj.first, dj.second):
            search(chosen + [arc])

    search([])
    if best["d"] is None:
        raise Infeasible(f"no train order of {instance.name or 'the instance'} fits within d_max")
    rep = _finish("order", system, best["d"], {"objective": objective}, {"nodes": nodes})
    rep.notes["order"] = system.order_assignment(best["d"])
    return rep


def _urgency(instance, dj, d):
    (j, s), (j2, s2) = dj.a, dj.b
    t1 = instance.tt(j, s).t_out + d[j, s]
    t2 = instance.tt(j2, s2).t_out + d[j2, s2]
    return (min(t1, t2), dj.a, dj.b)


def enumerate_orders(instance: RailwayInstance):
    """Every combination of precedence choices with its least delays (None if infeasible).

    Exponential in the number of contending pairs; meant for small instances
    and as an oracle.
    """
    system = DelaySystem(instance, bounded=True)
    for choice in itertools.product((0, 1), repeat=len(system.disjunctions)):
        arcs = [dj.second if c else dj.first for dj, c in zip(system.disjunctions, choice)]
        yield choice, system.propagate(arcs)


def best_by_enumeration(instance: RailwayInstance, objective: str = "weighted"):
    """Optimal value and delays found by exhaustive order enumeration."""
    system = DelaySystem(instance, bounded=True)
    score = OBJECTIVES[objective]
    best, best_d = math.inf, None
    for _, d in enumerate_orders(instance):
        if d is not None and score(system, d) < best - 1e-12:
            best, best_d = score(system, d), d
    return best, best_d
