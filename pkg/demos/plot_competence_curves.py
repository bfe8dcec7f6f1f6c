"""
Competence curves on a small grid
=================================

The curve averages ``IC**2 / C`` over all tasks up to a given difficulty.
An optimal agent scores the mean IC, so its curve is a ceiling for every
other agent.  We compare the oracle with a tabular learner at a few
points of its training and with a random walker.
"""

# %%
from icbench import ActionCount, grid_env
from icbench.agents import History, OracleAgent, RandomAgent, TabularAgent
from icbench.evaluation import EvalConfig, competence_curve, ic_table, run_regret, scalar_competence

env = grid_env(3, 3)
ic = ic_table(env, ActionCount())

oracle = competence_curve(OracleAgent(env), env, ic=ic)
walker = competence_curve(RandomAgent(env.dims, seed=1), env, ic=ic)
print("oracle ", oracle.breakpoints, round(scalar_competence(oracle), 4))
print("random ", [(k, round(v, 3)) for k, v in walker.breakpoints], round(scalar_competence(walker), 4))

# %%
# Train the learner on uniformly drawn tasks and snapshot its curve.
learner = TabularAgent(env.dims, seed=1)
history = History()
done = 0
for t in (0, 3, 10, 30):
    if t > done:
        run_regret(learner, env, EvalConfig("C", horizon=t - done, seed=1), history=history)
        done = t
    curve = competence_curve(learner, env, ic=ic)
    print(f"after {t:>2} tasks", [(k, round(v, 3)) for k, v in curve.breakpoints])
