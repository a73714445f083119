"""Two trains meeting on one line block.

Train 1 runs east, train 2 runs west, and only one of them can hold the
single-track block between the stations at a time. Each train may leave
with delay 1 or 2. This script builds the QUBO, prints the matrix and scores
the four one-hot choices.
"""

# %%
import itertools

import numpy as np

import railqubo as rq

inst = rq.io.load_instance("simple")
qubo = rq.qubo.build_qubo(inst, p_sum=1.75, p_pair=1.75)
for i in range(qubo.n):
    print(i, qubo.constraints.index.key(i))
print(qubo.Q)

# %% every bit vector that picks exactly one delay per train
for choice in itertools.product(*qubo.constraints.one_hot_groups):
    x = np.zeros(qubo.n, dtype=int)
    x[list(choice)] = 1
    e = qubo.decompose(x)
    print(x, f"energy {e.total:+.2f}", "feasible" if e.feasible else "conflict")

# %% the cheapest one lets train 2 through first
best = rq.ordering.exact_order_solver(inst)
print(best.schedule.delays, "objective", best.notes["objective_value"])
