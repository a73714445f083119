"""Exact low-energy spectrum of a QUBO by exhaustive enumeration.

Three search spaces are offered:

``full``
    all ``2**n`` bit vectors (small ``n`` only);
``one_hot``
    vectors with exactly one set bit per one-hot group, i.e. every
    combination of admissible delays;
``one_hot_plus_single``
    the above plus every single-bit perturbation of them (one group empty or
    holding two bits), which exposes the cheapest infeasible levels.
"""

from __future__ import annotations

import enum
import math
import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .qubo import QuboInstance

KEY_DECIMALS = 9


def thread_count() -> int:
    """Worker threads allowed by ``RAILQUBO_THREADS`` (default 1)."""
    raw = os.environ.get("RAILQUBO_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"RAILQUBO_THREADS must be an integer, got {raw!r}") from None


class Mode(str, enum.Enum):
    FULL = "full"
    ONE_HOT = "one_hot"
    ONE_HOT_PLUS_SINGLE = "one_hot_plus_single"


class SearchSpaceTooLarge(ValueError):
    pass


@dataclass
class Level:
    energy: float
    degeneracy: int = 0
    n_feasible: int = 0
    configs: list = field(default_factory=list)
    config_feasible: list = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        """Every configuration at this energy satisfies the hard constraints."""
        return self.n_feasible == self.degeneracy

    @property
    def mixed(self) -> bool:
        return 0 < self.n_feasible < self.degeneracy


@dataclass
class Spectrum:
    levels: list
    mode: Mode
    searched: int

    @property
    def ground(self) -> Level:
        return self.levels[0]

    def feasible_levels(self):
        return [lv for lv in self.levels if lv.n_feasible]

    def as_rows(self):
        return [(lv.energy, lv.degeneracy, lv.n_feasible) for lv in self.levels]


class _Accumulator:
    def __init__(self, limit, keep):
        self.limit, self.keep = limit, keep
        self.levels: dict[float, Level] = {}

    def threshold(self):
        if len(self.levels) < self.limit:
            return math.inf
        return max(self.levels)

    def add(self, energies, feasible, bits_of):
        keys = np.round(energies, KEY_DECIMALS)
        sel = np.flatnonzero(keys <= self.threshold())
        if not sel.size:
            return
        keys = keys[sel]
        uniq, inv, counts = np.unique(keys, return_inverse=True, return_counts=True)
        if len(uniq) > self.limit:
            uniq, counts = uniq[: self.limit], counts[: self.limit]
        for u_idx, (u, cnt) in enumerate(zip(uniq, counts)):
            u = float(u)
            rows = sel[inv == u_idx]
            lv = self.levels.get(u)
            if lv is None:
                lv = self.levels[u] = Level(u)
            lv.degeneracy += int(cnt)
            lv.n_feasible += int(feasible[rows].sum())
            room = self.keep - len(lv.configs)
            if room > 0:
                take = rows[:room]
                lv.configs.extend(bits_of(take))
                lv.config_feasible.extend(bool(f) for f in feasible[take])
        for k in sorted(self.levels)[self.limit :]:
            del self.levels[k]

    def result(self):
        return [self.levels[k] for k in sorted(self.levels)]


def _padded(qubo):
    n = qubo.n
    Qp = np.zeros((n + 1, n + 1))
    Qp[:n, :n] = qubo.Q
    forb = np.zeros((n + 1, n + 1), dtype=bool)
    for i, k in qubo.constraints.forbidden_pairs:
        forb[i, k] = forb[k, i] = True
    return Qp, forb


def _product_chunks(cells, chunk):
    """Mixed-radix enumeration of option tuples.

    ``cells`` is a list of integer arrays of shape ``(k_c, w_c)``; each yielded
    block stacks one chosen row per cell into an ``(N, sum w_c)`` array.
    """
    sizes = [len(c) for c in cells]
    total = math.prod(sizes)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        digits = np.unravel_index(idx, sizes)
        yield np.hstack([c[d] for c, d in zip(cells, digits)])


def _set_energies(Qp, S):
    return Qp[S[:, :, None], S[:, None, :]].sum(axis=(1, 2))


def _set_violations(forb, S):
    return forb[S[:, :, None], S[:, None, :]].any(axis=(1, 2))


def _bits_from_sets(n, S):
    X = np.zeros((len(S), n + 1), dtype=np.int8)
    np.put_along_axis(X, S, 1, axis=1)
    return [row[:n].copy() for row in X]


def search_space_size(qubo: QuboInstance, mode: Mode) -> int:
    mode = Mode(mode)
    sizes = [len(g) for g in qubo.constraints.one_hot_groups]
    if mode is Mode.FULL:
        return 2**qubo.n
    base = math.prod(sizes)
    if mode is Mode.ONE_HOT:
        return base
    extra = sum((1 + k * (k - 1) // 2) * base // k for k in sizes if k)
    return base + extra


def enumerate_spectrum(
    qubo: QuboInstance,
    mode: Mode | str = Mode.ONE_HOT,
    limit: int = 10,
    keep: int = 16,
    max_bits: int = 30,
    max_configs: int = 10**8,
    chunk: int = 1 << 16,
) -> Spectrum:
    """Lowest ``limit`` energy levels with exact degeneracies.

    Up to ``keep`` configurations are stored per level.
    """
    mode = Mode(mode)
    n = qubo.n
    acc = _Accumulator(limit, keep)
    if mode is Mode.FULL:
        if n > max_bits:
            raise SearchSpaceTooLarge(f"full enumeration of {n} bits exceeds the cap of {max_bits}")
        _enumerate_full(qubo, acc, chunk)
        return Spectrum(acc.result(), mode, 2**n)

    size = search_space_size(qubo, mode)
    if size > max_configs:
        raise SearchSpaceTooLarge(f"{size} configurations exceed the cap of {max_configs}")
    Qp, forb = _padded(qubo)
    groups = [np.asarray(g, dtype=int) for g in qubo.constraints.one_hot_groups]
    singles = [g[:, None] for g in groups]
    pad = np.full((1, 1), n)

    def score(S, one_hot_ok):
        E = _set_energies(Qp, S)
        feas = ~_set_violations(forb, S) if one_hot_ok else np.zeros(len(S), dtype=bool)
        return S, E, feas

    def run(cells, one_hot_ok):
        # chunks are scored in parallel but merged in enumeration order
        workers = thread_count()
        with ThreadPoolExecutor(workers) as pool:
            pending = deque()
            for S in _product_chunks(cells, chunk):
                pending.append(pool.submit(score, S, one_hot_ok))
                if len(pending) > 2 * workers:
                    merge(*pending.popleft().result())
            while pending:
                merge(*pending.popleft().result())

    def merge(S, E, feas):
        acc.add(E, feas, lambda rows: _bits_from_sets(n, S[rows]))

    run(singles + ([pad] if mode is Mode.ONE_HOT_PLUS_SINGLE else []), True)
    if mode is Mode.ONE_HOT_PLUS_SINGLE:
        for gi, g in enumerate(groups):
            broken = [(n, n)] + list(combinations(g.tolist(), 2))
            cells = singles[:gi] + singles[gi + 1 :] + [np.array(broken, dtype=int)]
            run(cells, False)
    return Spectrum(acc.result(), mode, size)


def _enumerate_full(qubo, acc, chunk):
    n = qubo.n
    Q = qubo.Q
    groups = qubo.constraints.one_hot_groups
    pairs = np.array(sorted(qubo.constraints.forbidden_pairs), dtype=int).reshape(-1, 2)
    shifts = np.arange(n, dtype=np.int64)
    total = 1 << n
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        X = ((codes[:, None] >> shifts) & 1).astype(np.int8)
        Xf = X.astype(float)
        E = np.einsum("ij,jk,ik->i", Xf, Q, Xf)
        ok = np.ones(len(X), dtype=bool)
        for g in groups:
            ok &= X[:, list(g)].sum(axis=1) == 1
        if len(pairs):
            ok &= ~(X[:, pairs[:, 0]] & X[:, pairs[:, 1]]).any(axis=1)
        acc.add(E, ok, lambda rows: [X[r].copy() for r in rows])
