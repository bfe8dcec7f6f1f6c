"""
Shortest programs on a three-state cycle
========================================

Action count and program length disagree about what "simple" means.  On a
cycle with one action the cheapest way to move two steps is two actions,
but in bits a loop can beat spelling the actions out once the distance
grows.
"""

# %%
# Build the environment and print its action-count matrix.
from icbench import ActionCount, ProgramLength, Regime, SearchBudget, cycle_env
from icbench.ic import ic_matrix
from icbench.vm import disassemble

env = cycle_env(3)
for row in ic_matrix(env, ActionCount()):
    print([cell.cost for cell in row])

# %%
# Program length in both regimes.  The witness is the first minimal
# program in (length, lexicographic) order, so it is reproducible.
budget = SearchBudget(max_bits=16)
for regime in Regime:
    print(f"--- {regime.value}")
    for t, res in enumerate(ic_matrix(env, ProgramLength(regime), budget)[0]):
        print(f"0 -> {t}: {res.cost} bits, {res.exactness.value}")
        print("   " + disassemble(res.witness.instructions).replace("\n", "; "))

# %%
# A longer cycle shows the loop paying off: 20 steps round a 21-cycle.
big = cycle_env(21)
res = ic_matrix(big, ProgramLength(Regime.BARE), SearchBudget(20))[0][20]
print(res.cost, "bits:", disassemble(res.witness.instructions).replace("\n", "; "))
