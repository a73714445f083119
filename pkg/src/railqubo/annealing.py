"""Single-flip Metropolis simulated annealing on a QUBO.

All restarts run side by side as rows of one array; each sweep visits the
bits in index order.
"""

from __future__ import annotations

import numpy as np

from .qubo import QuboInstance
from .report import report_from_bits

DEFAULTS = {"sweeps": 1000, "beta_start": 0.1, "beta_end": 4.0, "restarts": 32, "seed": 0}


def beta_schedule(sweeps, beta_start, beta_end):
    return np.geomspace(beta_start, beta_end, sweeps)


def anneal(Q, sweeps, betas, restarts, rng):
    """Return ``(best_x, best_E)`` per restart."""
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    diag = np.diag(Q).copy()
    x = rng.integers(0, 2, size=(restarts, n)).astype(float)
    field = x @ Q  # field[r, i] = sum_j Q_ij x_rj
    energy = np.einsum("ri,ri->r", x, field)
    best_x, best_e = x.copy(), energy.copy()
    for beta in betas:
        # accept iff u < exp(-beta dE)  <=>  -log(u) / beta > dE
        limits = -np.log1p(-rng.random((n, restarts))) / beta
        for i in range(n):
            xi = x[:, i]
            step = 1.0 - 2.0 * xi
            dE = step * (diag[i] + 2.0 * (field[:, i] - diag[i] * xi))
            accept = dE < limits[i]
            if not accept.any():
                continue
            delta = step * accept
            x[:, i] += delta
            field += np.outer(delta, Q[i])
            energy += dE * accept
        better = energy < best_e - 1e-12
        if better.any():
            best_e[better] = energy[better]
            best_x[better] = x[better]
    # recompute exactly to shed accumulated rounding
    best_e = np.einsum("ri,ij,rj->r", best_x, Q, best_x)
    return best_x.astype(np.int8), best_e


def simulated_annealing(qubo: QuboInstance, **params):
    """Best-of-restarts annealing run.

    Parameters (all optional): ``sweeps``, ``beta_start``, ``beta_end``,
    ``restarts``, ``seed``. The run is deterministic for a given seed.
    """
    unknown = set(params) - set(DEFAULTS)
    if unknown:
        raise TypeError(f"unknown annealing parameters {sorted(unknown)}")
    p = {**DEFAULTS, **params}
    if p["sweeps"] < 1 or p["restarts"] < 1 or p["beta_start"] <= 0 or p["beta_end"] <= 0:
        raise ValueError("annealing parameters must be positive")
    rng = np.random.default_rng(p["seed"])
    xs, es = anneal(qubo.Q, p["sweeps"], beta_schedule(p["sweeps"], p["beta_start"], p["beta_end"]), p["restarts"], rng)
    order = np.argsort(es, kind="stable")
    return report_from_bits("sa", qubo, [xs[k] for k in order], p)
