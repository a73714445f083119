from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import fmt_time
from .qubo import Energy, QuboInstance, Schedule, equivalence_signature


class Infeasible(RuntimeError):
    """No admissible schedule exists within the delay bounds."""


@dataclass
class SolverReport:
    method: str
    params: dict = field(default_factory=dict)
    best_configs: list = field(default_factory=list)  # (bits, Energy)
    schedule: Schedule | None = None
    feasible: bool = False
    ground_equivalent: bool | None = None
    capacity_violations: list = field(default_factory=list)
    offset_L: float | None = None
    notes: dict = field(default_factory=dict)

    @property
    def energy(self) -> Energy | None:
        return self.best_configs[0][1] if self.best_configs else None

    @property
    def order_signature(self):
        return equivalence_signature(self.schedule) if self.schedule is not None else None

    def to_dict(self) -> dict:
        out = {
            "format": "railqubo-report",
            "version": 1,
            "method": self.method,
            "params": self.params,
            "feasible": self.feasible,
            "ground_equivalent": self.ground_equivalent,
            "capacity_violations": [
                {"station": s, "time": fmt_time(t), "trains": list(js)} for s, t, js in self.capacity_violations
            ],
        }
        if self.energy is not None:
            e = self.energy
            out["energy"] = {
                "total": e.total,
                "objective": e.objective,
                "pair_penalty": e.pair_penalty,
                "sum_penalty": e.sum_penalty,
                "hard_penalty": e.hard_penalty,
                "L": self.offset_L,
            }
            out["configs"] = ["".join(str(int(b)) for b in x) for x, _ in self.best_configs]
        if self.schedule is not None:
            sch = self.schedule
            out["objective"] = sch.objective()
            out["max_secondary_delay"] = sch.max_secondary_delay()
            out["final_secondary_sum"] = sch.final_secondary_sum()
            out["schedule"] = [
                {
                    "train": j,
                    "station": s,
                    "delay": d,
                    "secondary": sch.secondary_delay(j, s),
                    "departure": fmt_time(sch.departure(j, s)),
                }
                for (j, s), d in sch.delays.items()
            ]
            out["order_signature"] = [[s, list(js)] for s, js in self.order_signature]
        out.update({k: _jsonable(v) for k, v in self.notes.items()})
        return out


def _jsonable(value):
    if isinstance(value, dict) and any(not isinstance(k, str) for k in value):
        return [[*(k if isinstance(k, tuple) else (k,)), _jsonable(v)] for k, v in value.items()]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def report_from_bits(method, qubo: QuboInstance, configs, params=None) -> SolverReport:
    """Report on the lowest-energy configurations found by a QUBO solver.

    ``feasible`` means the best configuration breaks no penalised constraint
    and its schedule also respects station capacities.
    """
    from .verify import check_capacity

    configs = [np.asarray(x, dtype=np.int8) for x in configs]
    scored = sorted(((x, qubo.decompose(x)) for x in configs), key=lambda t: t[1].total)
    rep = SolverReport(method, dict(params or {}), scored, offset_L=qubo.offset_L)
    best = scored[0][1] if scored else None
    if best is not None and best.feasible:
        try:
            rep.schedule = qubo.decode(scored[0][0])
        except ValueError as exc:  # a matrix without the full set of one-hot groups
            rep.notes["decode_error"] = str(exc)
            return rep
        rep.capacity_violations = check_capacity(rep.schedule)
        rep.feasible = not rep.capacity_violations
    return rep
