"""Agreement check between the QUBO ground state and the exact order solver."""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import RailwayInstance
from .ordering import exact_order_solver
from .qubo import build_qubo, equivalence_signature
from .report import Infeasible
from .spectrum import enumerate_spectrum

TOL = 1e-9


@dataclass
class CrossValidation:
    match: bool
    qubo_objective: float | None
    order_objective: float | None
    ground_degeneracy: int
    order_schedule: object = None
    ground_schedules: list = field(default_factory=list)
    messages: list = field(default_factory=list)

    def __str__(self):
        lines = [f"match: {self.match}"]
        lines += [f"  objective (QUBO ground): {self.qubo_objective}", f"  objective (order): {self.order_objective}"]
        if self.order_schedule is not None:
            lines.append(f"  order signature: {equivalence_signature(self.order_schedule)}")
        for s in self.ground_schedules[:4]:
            lines.append(f"  ground signature: {equivalence_signature(s)}")
        lines += [f"  {m}" for m in self.messages]
        return "\n".join(lines)


def dominant_penalty(instance: RailwayInstance) -> float:
    """A penalty weight above any attainable objective value."""
    return sum(t.weight for t in instance.trains.values()) + 1.0


def cross_validate(instance: RailwayInstance, p_sum=None, p_pair=None) -> CrossValidation:
    """Solve exactly twice and compare optimum value and train order.

    The QUBO side enumerates every one-hot configuration. Penalties default to
    :func:`dominant_penalty` so that the ground state is admissible whenever
    an admissible schedule exists. Ties are allowed: the order solver's
    schedule must share its order signature with at least one ground config.
    """
    pen = dominant_penalty(instance)
    qubo = build_qubo(instance, p_sum if p_sum is not None else pen, p_pair if p_pair is not None else pen)
    sp = enumerate_spectrum(qubo, limit=1, keep=10**6)
    ground = sp.ground
    msgs = []
    try:
        order = exact_order_solver(instance)
    except Infeasible:
        ok = ground.n_feasible == 0
        if not ok:
            msgs.append("order solver found no schedule but the ground state is admissible")
        return CrossValidation(ok, None, None, ground.degeneracy, messages=msgs)

    feasible_cfgs = [x for x, f in zip(ground.configs, ground.config_feasible) if f]
    if not feasible_cfgs:
        msgs.append("ground state violates hard constraints")
        return CrossValidation(False, None, order.notes["objective_value"], ground.degeneracy, order.schedule, messages=msgs)
    q_obj = float(qubo.objective_coeffs @ feasible_cfgs[0])
    o_obj = order.notes["objective_value"]
    schedules = [qubo.decode(x) for x in feasible_cfgs]
    sig = equivalence_signature(order.schedule)
    same_order = any(equivalence_signature(s) == sig for s in schedules)
    if abs(q_obj - o_obj) > TOL:
        msgs.append(f"objective differs by {q_obj - o_obj:.3g}")
    if not same_order:
        msgs.append("no ground configuration shares the order solver's train order")
    return CrossValidation(not msgs, q_obj, o_obj, ground.degeneracy, order.schedule, schedules, msgs)
