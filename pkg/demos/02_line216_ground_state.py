"""Exhaustive search over the line216 one-hot space.

Three trains, two stations where each may hold back, eight delay values per
station: 8**6 configurations. The lowest energy level is four-fold degenerate
and all four schedules run the trains in the same order.
"""

# %%
import railqubo as rq
from railqubo.spectrum import Mode

inst = rq.io.load_instance("line216")
qubo = rq.qubo.build_qubo(inst, 1.75, 1.75)
print(f"{qubo.n} variables, {len(qubo.constraints.forbidden_pairs)} forbidden pairs")

spectrum = rq.spectrum.enumerate_spectrum(qubo, Mode.ONE_HOT, limit=6)
for level in spectrum.levels:
    print(f"{level.energy:10.6f}  x{level.degeneracy:<4d} feasible {level.n_feasible}")

# %% the ground configurations differ only in a delay that does not change the order
for x in spectrum.ground.configs:
    sch = qubo.decode(x)
    print(sch.delays)
    print("  ", rq.qubo.equivalence_signature(sch))

# %% objective breakdown: weight times secondary delay over d_max at the last decision station
sch = qubo.decode(spectrum.ground.configs[0])
print("objective", sch.objective(), "= 1.5*3/7 + 1.0*4/7 =", 1.5 * 3 / 7 + 4 / 7)
