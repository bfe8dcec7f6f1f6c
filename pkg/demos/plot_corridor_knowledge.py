"""
Knowledge cost on gated corridors
=================================

A gated corridor only opens for one bit string.  A program that can ask
the environment for a route (oracle regime) pays a constant number of
bits; a program that cannot (bare regime) must spell the string out, so
its cost follows how compressible the string is.
"""

# %%
import numpy as np

from icbench import Regime, SearchBudget, gated_corridor, ic_program_length, knowledge_cost

rng = np.random.default_rng(0)
print(f"{'x':>12} {'bare':>5} {'oracle':>6} {'K':>4}")
for n in (4, 6, 8):
    budget = SearchBudget(max_bits=2 * n + 8)
    strings = ["0" * n] + ["".join(map(str, rng.integers(0, 2, n))) for _ in range(3)]
    for x in strings:
        kc = knowledge_cost(gated_corridor(x), 0, n + 1, budget)
        print(f"{x:>12} {kc.bare.cost:>5} {kc.oracle.cost:>6} {kc.value:>4}")

# %%
# ``inf`` means no program within ``2n + 8`` bits works.  That is a
# certified lower bound, not a failure of the search: the result carries
# the ``ExactUpToBudget`` tag.
res = ic_program_length(gated_corridor("10110100"), 0, 9, Regime.BARE, SearchBudget(24))
print(res.cost, res.exactness.value)
