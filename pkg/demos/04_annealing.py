"""Simulated annealing on the line216 QUBO.

The annealer works on raw bits and knows nothing about trains. The ground
energy from exhaustive search tells us whether each run found the optimum.
"""

# %%
import numpy as np

import railqubo as rq

qubo = rq.qubo.build_qubo(rq.io.load_instance("line216"))
ground = rq.spectrum.enumerate_spectrum(qubo, limit=1).ground.energy

# %% a few seeds with the default schedule, then a deliberately short one
for sweeps in (1000, 20):
    energies = np.array([rq.annealing.simulated_annealing(qubo, seed=s, sweeps=sweeps).energy.total for s in range(10)])
    print(f"{sweeps:5d} sweeps: {np.sum(np.isclose(energies, ground))}/10 at ground {ground:.4f}, worst {energies.max():.4f}")

# %% the same problem as an Ising model
ising = qubo.to_ising()
rep = rq.annealing.simulated_annealing(qubo, seed=0)
x = rep.best_configs[0][0]
print("QUBO", qubo.energy(x), "Ising", ising.energy(2 * x - 1))
print(rep.schedule.delays)
