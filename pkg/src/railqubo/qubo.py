"""Penalty compilation of the 0-1 model into a QUBO, Ising conversion,
energy bookkeeping and decoding of bit vectors into schedules."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .constraints import ConstraintSet, VariableIndex, build_constraints
from .model import RailwayInstance

ENERGY_TOL = 1e-9


class BrokenOneHot(ValueError):
    """A bit vector does not select exactly one delay per (train, station)."""

    def __init__(self, groups):
        self.groups = list(groups)
        names = ", ".join(f"{j}@{s}" for j, s in self.groups)
        super().__init__(f"one-hot violated for {names}")


def build_objective(instance: RailwayInstance, index: VariableIndex) -> np.ndarray:
    """Weighted, normalised secondary delay on leaving each penultimate station."""
    c = np.zeros(len(index))
    for i, (j, s, d) in enumerate(index.keys):
        if s != instance.penultimate(j):
            continue
        dmax = instance.d_max[j]
        if dmax:
            c[i] = instance.trains[j].weight * (d - instance.d_u(j, s)) / dmax
    return c


@dataclass(frozen=True)
class Energy:
    total: float
    objective: float
    pair_penalty: float
    sum_penalty: float
    hard_penalty: float

    @property
    def feasible(self) -> bool:
        return abs(self.hard_penalty) <= ENERGY_TOL


@dataclass
class QuboInstance:
    Q: np.ndarray
    p_sum: float
    p_pair: float
    index: VariableIndex
    constraints: ConstraintSet
    objective_coeffs: np.ndarray
    _pairs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.Q.setflags(write=False)
        pairs = np.array(sorted(self.constraints.forbidden_pairs), dtype=int).reshape(-1, 2)
        self._pairs = pairs

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    @property
    def offset_L(self) -> float:
        """``p_sum`` times the number of one-hot constraints."""
        return self.p_sum * len(self.constraints.one_hot_groups)

    @property
    def instance(self) -> RailwayInstance:
        return self.index.instance

    def energy(self, x) -> float:
        x = self._check(x)
        return float(x @ self.Q @ x)

    def energies(self, X) -> np.ndarray:
        """Row-wise energies of a batch of bit vectors."""
        X = np.asarray(X, dtype=float)
        return np.einsum("ij,jk,ik->i", X, self.Q, X)

    def decompose(self, x) -> Energy:
        x = self._check(x)
        f = float(self.objective_coeffs @ x)
        p_pair = 2 * self.p_pair * float(np.sum(x[self._pairs[:, 0]] * x[self._pairs[:, 1]]))
        p_sum = 0.0
        for g in self.constraints.one_hot_groups:
            k = float(x[list(g)].sum())
            p_sum += self.p_sum * (k * k - 2 * k)  # (sum x)^2 - 1 with x^2 = x, constant dropped
        hard = p_pair + p_sum + self.offset_L
        return Energy(f + p_pair + p_sum, f, p_pair, p_sum, hard)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"expected a vector of {self.n} bits, got shape {x.shape}")
        return x

    # ------------------------------------------------------------------

    def decode(self, x) -> "Schedule":
        x = np.asarray(x)
        if x.shape != (self.n,):
            raise ValueError(f"expected a vector of {self.n} bits, got shape {x.shape}")
        delays, broken = {}, []
        for (j, s), g in zip(self.index.groups, self.constraints.one_hot_groups):
            on = [i for i in g if x[i]]
            if len(on) != 1:
                broken.append((j, s))
            else:
                delays[j, s] = self.index.key(on[0])[2]
        if broken:
            raise BrokenOneHot(broken)
        return Schedule(self.instance, delays)

    def encode(self, schedule: "Schedule") -> np.ndarray:
        x = np.zeros(self.n, dtype=np.int8)
        for (j, s), d in schedule.delays.items():
            i = self.index.get(j, s, d)
            if i is None:
                raise ValueError(f"delay {d} of {j} at {s} is outside its domain")
            x[i] = 1
        return x

    def to_ising(self) -> "IsingInstance":
        return to_ising(self.Q)


def assemble(constraints: ConstraintSet, c, p_sum: float, p_pair: float) -> QuboInstance:
    """Effective QUBO: objective on the diagonal plus one-hot and pair penalties."""
    if p_sum <= 0 or p_pair <= 0:
        raise ValueError("penalty coefficients must be positive")
    instance = constraints.index.instance
    w_max = max((t.weight for t in instance.trains.values()), default=0.0)
    if p_sum <= w_max or p_pair <= w_max:
        warnings.warn(
            f"penalties (p_sum={p_sum}, p_pair={p_pair}) do not exceed the largest train weight {w_max}",
            stacklevel=2,
        )
    n = len(constraints.index)
    Q = np.zeros((n, n))
    for g in constraints.one_hot_groups:
        g = np.asarray(g, dtype=int)
        Q[np.ix_(g, g)] += p_sum
        Q[g, g] -= 2 * p_sum
    for i, k in constraints.forbidden_pairs:
        Q[i, k] += p_pair
        Q[k, i] += p_pair
    Q[np.diag_indices(n)] += c
    return QuboInstance(Q, p_sum, p_pair, constraints.index, constraints, np.asarray(c, dtype=float))


def build_qubo(instance: RailwayInstance, p_sum=None, p_pair=None, skip_disjoint=True) -> QuboInstance:
    """Constraints, objective and penalties in one call.

    Penalties default to those stored with the instance.
    """
    p_sum = instance.penalties.get("p_sum") if p_sum is None else p_sum
    p_pair = instance.penalties.get("p_pair") if p_pair is None else p_pair
    if p_sum is None or p_pair is None:
        raise ValueError("no penalty coefficients given and none stored with the instance")
    cs = build_constraints(instance, skip_disjoint)
    return assemble(cs, build_objective(instance, cs.index), p_sum, p_pair)


# ----------------------------------------------------------------------
# Ising form


@dataclass(frozen=True)
class IsingInstance:
    """``E(s) = offset + h.s + sum_{i<j} J_ij s_i s_j`` with ``J`` symmetric, zero diagonal."""

    J: np.ndarray
    h: np.ndarray
    offset: float

    def energy(self, s) -> float:
        s = np.asarray(s, dtype=float)
        return float(self.offset + self.h @ s + 0.5 * s @ self.J @ s)

    def to_qubo_matrix(self) -> tuple[np.ndarray, float]:
        """Inverse map; returns ``(Q, constant)`` with ``x^T Q x + constant = E(2x - 1)``."""
        Q = 2 * self.J.copy()
        Q[np.diag_indices_from(Q)] = 2 * self.h - 2 * self.J.sum(axis=1)
        const = self.offset - self.h.sum() + 0.5 * self.J.sum()
        return Q, const


def to_ising(Q) -> IsingInstance:
    Q = np.asarray(Q, dtype=float)
    J = Q / 2
    np.fill_diagonal(J, 0.0)
    h = Q.sum(axis=1) / 2
    offset = Q.sum() / 4 + np.trace(Q) / 4
    return IsingInstance(J, h, float(offset))


# ----------------------------------------------------------------------
# schedules


class Schedule:
    """Departure delays at decision stations and the block occupation they imply.

    Reserves are taken at stations: between stations a train runs exactly to
    its timetable, shifted by its departure delay. The first station is
    entered ``d_U`` late; the last station is left no earlier than scheduled
    and no sooner than its minimum dwell allows.
    """

    def __init__(self, instance: RailwayInstance, delays: dict):
        self.instance = instance
        self.delays = dict(delays)
        for j in instance.trains:
            for s in instance.decision_stations(j):
                if (j, s) not in self.delays:
                    raise ValueError(f"schedule lacks a delay for {j} at {s}")

    def departure(self, j, s) -> int:
        return self.instance.tt(j, s).t_out + self.delays[j, s]

    def secondary_delay(self, j, s) -> int:
        return self.delays[j, s] - self.instance.d_u(j, s)

    def occupation(self) -> dict[tuple[str, int], tuple[int, int]]:
        inst = self.instance
        occ = {}
        for j in inst.trains:
            stations = inst.stations(j)
            first = stations[0]
            occ[j, first] = (inst.tt(j, first).t_in + inst.d_u(j, first), self.departure(j, first))
            for s in stations[:-1]:
                seg = inst.segment(j, s)
                d = self.delays[j, s]
                for m in seg.blocks:
                    e = inst.tt(j, m)
                    occ[j, m] = (e.t_in + d, e.t_out + d)
                t_in = inst.tt(j, seg.end).t_in + d
                if seg.end == stations[-1]:
                    e = inst.tt(j, seg.end)
                    occ[j, seg.end] = (t_in, max(e.t_out, t_in + e.p_min))
                else:
                    occ[j, seg.end] = (t_in, self.departure(j, seg.end))
        return occ

    def objective(self) -> float:
        inst = self.instance
        total = 0.0
        for j, t in inst.trains.items():
            if inst.d_max[j]:
                total += t.weight * self.secondary_delay(j, inst.penultimate(j)) / inst.d_max[j]
        return total

    def max_secondary_delay(self) -> int:
        return max(self.secondary_delay(j, s) for (j, s) in self.delays)

    def final_secondary_sum(self) -> int:
        """Sum of secondary delays on entering each train's last block."""
        inst = self.instance
        return sum(self.secondary_delay(j, inst.penultimate(j)) for j in inst.trains)

    def within_bounds(self) -> bool:
        return all(d in self.instance.delay_domain(j, s) for (j, s), d in self.delays.items())

    def __eq__(self, other):
        return isinstance(other, Schedule) and self.delays == other.delays

    def __repr__(self):
        return f"Schedule({self.delays})"


def equivalence_signature(schedule: Schedule) -> tuple:
    """Order in which trains enter each block.

    Ties on the entry minute are broken by exit minute, then scheduled entry,
    then train id.
    """
    inst = schedule.instance
    occ = schedule.occupation()
    by_block = {}
    for (j, m), (t0, t1) in occ.items():
        by_block.setdefault(m, []).append((t0, t1, inst.tt(j, m).t_in, j))
    return tuple((m, tuple(e[-1] for e in sorted(by_block[m]))) for m in sorted(by_block))


def is_ground_equivalent(a: Schedule, b: Schedule) -> bool:
    return equivalence_signature(a) == equivalence_signature(b)
