"""Competence curves (how well an agent does per difficulty level) and regret
traces (how fast it learns).

Conventions:

* ``R`` is the set of reachable pairs ``(s, t)`` with ``s != t``.
* A failed task has infinite cost.  In regret sums it is replaced by a
  sentinel delta equal to the cost of a plan one move longer than the
  harness move cap, so it outweighs any successful attempt.
* Under program-length biases an agent's plan is costed as the plain
  EMIT-per-action program that prints it.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .agents import MOVE_CAP_FACTOR, Agent, History, Task, attempt
from .envs import INF, Environment, distance_matrix, reachable_pairs, shortest_path
from .generators import DEFAULT_TEMPERATURE, ensemble_weights
from .ic import ActionCount, ProgramLength, ResourceBias, SearchBudget, ic_matrix
from .vm import action_bits

PROXY_DISCLOSURE = ("environment weights use a run-length description-length proxy, "
                    "not Kolmogorov complexity")

LN2 = math.log(2.0)


# -- costing -------------------------------------------------------------------

def plan_cost(actions: Sequence[int], env: Environment, bias: ResourceBias):
    """Cost of an executed action sequence under ``bias``."""
    k = len(actions)
    if isinstance(bias, ActionCount):
        return k
    bits = 2 + k * (2 + action_bits(env.m))
    if isinstance(bias, ProgramLength):
        return bits
    return bias.alpha * bits + bias.beta * k


def failure_cost(env: Environment, bias: ResourceBias):
    """Sentinel for a failed task: a plan one move past the cap."""
    return plan_cost(range(MOVE_CAP_FACTOR * env.n + 1), env, bias)


def ic_table(env: Environment, bias: ResourceBias, budget: SearchBudget = SearchBudget()) -> np.ndarray:
    """IC for every pair as an object array (``inf`` where unreachable).

    Under program-length biases a reachable pair whose search ran out of
    bits gets the cost of the EMIT program for a shortest path, which is
    an upper bound for the budgeted minimum.
    """
    n = env.n
    out = np.empty((n, n), dtype=object)
    if isinstance(bias, ActionCount):
        dist = distance_matrix(env)
        for s in range(n):
            for t in range(n):
                out[s, t] = int(dist[s, t]) if np.isfinite(dist[s, t]) else INF
        return out
    matrix = ic_matrix(env, bias, budget)
    for s in range(n):
        for t in range(n):
            cost = matrix[s][t].cost
            if cost == INF:
                path = shortest_path(env, s, t)
                if path is not None:
                    cost = plan_cost(path, env, bias)
            out[s, t] = cost
    return out


# -- Dimension 1: competence ---------------------------------------------------------

@dataclass(frozen=True)
class CompetenceCurve:
    """Right-continuous step function; zero before the first breakpoint."""

    breakpoints: tuple  # ((k, value), ...), k strictly increasing

    def __call__(self, k: float) -> float:
        value = 0.0
        for level, v in self.breakpoints:
            if k < level:
                break
            value = v
        return value

    @property
    def levels(self):
        return [k for k, _ in self.breakpoints]

    @property
    def values(self):
        return [v for _, v in self.breakpoints]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["k", "gamma"])
        for k, v in self.breakpoints:
            writer.writerow([_fmt(k), repr(float(v))])
        return buf.getvalue()


def _fmt(value):
    if isinstance(value, Fraction):
        return str(int(value)) if value.denominator == 1 else repr(float(value))
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def _per_task_term(ic, cost) -> float:
    if cost == INF or ic == 0:
        return 0.0
    return float(Fraction(ic) * Fraction(ic) / Fraction(cost))


def competence_curve(agent: Agent, env: Environment, bias: ResourceBias = ActionCount(),
                     budget: SearchBudget = SearchBudget(), ic=None) -> CompetenceCurve:
    """Mean of ``IC^2 / C`` over pairs with ``IC <= k`` at every distinct IC level.

    The agent is costed on each pair from a frozen copy of its experience.
    """
    ic = ic_table(env, bias, budget) if ic is None else ic
    pairs = reachable_pairs(env)
    frozen = agent.frozen_copy()
    terms = []
    for s, t in pairs:
        run = attempt(frozen, env, Task(s, t), History())
        cost = plan_cost(run.actions, env, bias) if run.success else INF
        terms.append((ic[s, t], _per_task_term(ic[s, t], cost)))
    levels = sorted({level for level, _ in terms})
    points = []
    for k in levels:
        inside = [v for level, v in terms if level <= k]
        points.append((k, math.fsum(inside) / len(inside)))
    return CompetenceCurve(tuple(points))


def curve_from_steps(points) -> CompetenceCurve:
    return CompetenceCurve(tuple(sorted(points)))


def aggregate_curves(curves, weights) -> CompetenceCurve:
    """Weighted sum of step functions over the union of breakpoints."""
    levels = sorted({k for c in curves for k in c.levels})
    return CompetenceCurve(tuple(
        (k, math.fsum(w * c(k) for c, w in zip(curves, weights))) for k in levels
    ))


def scalar_competence(curve: CompetenceCurve) -> float:
    """Exact value of ``integral_0^inf 2^-k * Gamma(k) dk`` for a step curve."""
    total = []
    pts = curve.breakpoints
    for i, (k, v) in enumerate(pts):
        lo = 2.0 ** -float(k)
        hi = 2.0 ** -float(pts[i + 1][0]) if i + 1 < len(pts) else 0.0
        total.append(v * (lo - hi) / LN2)
    return math.fsum(total)


# -- Dimension 2: regret -------------------------------------------------------------

@dataclass(frozen=True)
class EvalConfig:
    scheme: str = "B"
    horizon: int = 50
    discount: float = 0.95
    seed: int = 0
    bias: ResourceBias = ActionCount()
    checkpoint_every: int = 1

    def __post_init__(self):
        if self.scheme not in ("A", "B", "C"):
            raise ValueError("scheme must be A, B or C")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not 0 < self.discount < 1:
            raise ValueError("discount must lie in (0, 1)")


@dataclass(frozen=True)
class RegretRecord:
    t: int
    task: Task
    cost: object  # INF when the agent failed
    ic: object
    delta: object  # INF when the agent failed
    capped_delta: object
    cumulative: object
    gap: float | None = None


@dataclass
class RegretTrace:
    records: list = field(default_factory=list)
    coverage_time: int | None = None  # first t with every transition observed

    @property
    def deltas(self):
        return [r.capped_delta for r in self.records]

    @property
    def cumulative(self):
        return [r.cumulative for r in self.records]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        with_gap = any(r.gap is not None for r in self.records)
        header = ["t", "s", "target", "cost", "ic", "delta", "cum"]
        writer.writerow(header + (["G_T"] if with_gap else []))
        for r in self.records:
            row = [r.t, r.task.start, r.task.target, _fmt_cost(r.cost), _fmt(r.ic),
                   _fmt_cost(r.delta), _fmt(r.cumulative)]
            if with_gap:
                row.append("" if r.gap is None else repr(float(r.gap)))
            writer.writerow(row)
        return buf.getvalue()


def _fmt_cost(value):
    return "inf" if value == INF else _fmt(value)


def shadow_regrets(agent: Agent, env: Environment, ic, bias: ResourceBias,
                   pairs=None) -> dict:
    """Regret the agent would incur on each pair, without learning from it."""
    pairs = reachable_pairs(env, include_identity=True) if pairs is None else pairs
    sentinel = failure_cost(env, bias)
    frozen = agent.frozen_copy()
    out = {}
    for s, t in pairs:
        run = attempt(frozen, env, Task(s, t), History())
        out[(s, t)] = plan_cost(run.actions, env, bias) - ic[s, t] if run.success else sentinel
    return out


def adversary_next_task(agent: Agent, env: Environment, ic=None, bias: ResourceBias = ActionCount(),
                        budget: SearchBudget = SearchBudget()) -> Task:
    """Greedy adversary: the reachable pair with the largest shadow regret.

    Ties go to the lexicographically smallest pair.
    """
    ic = ic_table(env, bias, budget) if ic is None else ic
    regrets = shadow_regrets(agent, env, ic, bias)
    best = max(regrets.items(), key=lambda kv: (kv[1], tuple(-x for x in kv[0])))
    return Task(*best[0])


def generalization_gap(agent: Agent, env: Environment, bias: ResourceBias = ActionCount(),
                       budget: SearchBudget = SearchBudget(), ic=None) -> float:
    """Mean shadow regret over reachable pairs ``s != t`` (failures at the sentinel)."""
    ic = ic_table(env, bias, budget) if ic is None else ic
    pairs = reachable_pairs(env)
    if not pairs:
        return 0.0
    regrets = shadow_regrets(agent, env, ic, bias, pairs)
    return float(math.fsum(Fraction(v) for v in regrets.values()) / len(pairs))


def _is_reachable(dist, task: Task) -> bool:
    return bool(np.isfinite(dist[task.start, task.target]))


def _scheme_a_task(agent, env, dist, history, pairs):
    for _ in range(100):
        task = agent.propose_task(history, env.dims)
        if 0 <= task.start < env.n and 0 <= task.target < env.n and _is_reachable(dist, task):
            return task
    return Task(*pairs[0])


def run_regret(agent: Agent, env: Environment, config: EvalConfig = EvalConfig(),
               budget: SearchBudget = SearchBudget(), history: History | None = None) -> RegretTrace:
    """Present ``config.horizon`` tasks and record per-task and cumulative regret.

    Scheme A lets the agent pick tasks, B uses the greedy adversary and C
    draws reachable pairs uniformly and records the generalization gap at
    every checkpoint.
    """
    bias = config.bias
    history = History() if history is None else history
    ic = ic_table(env, bias, budget)
    dist = distance_matrix(env)
    all_pairs = reachable_pairs(env, include_identity=True)
    proper = reachable_pairs(env) or all_pairs
    rng = np.random.default_rng(config.seed)
    sentinel = failure_cost(env, bias)
    trace = RegretTrace()
    total = 0
    full = env.n * env.m
    for t in range(1, config.horizon + 1):
        if config.scheme == "A":
            task = _scheme_a_task(agent, env, dist, history, all_pairs)
        elif config.scheme == "B":
            task = adversary_next_task(agent, env, ic, bias, budget)
        else:
            task = Task(*proper[int(rng.integers(len(proper)))])
        run = attempt(agent, env, task, history)
        agent.current = run.end_state
        history.task_count += 1
        best = ic[task.start, task.target]
        if run.success:
            cost = plan_cost(run.actions, env, bias)
            delta = cost - best
            capped = delta
        else:
            cost = delta = INF
            capped = sentinel
        if delta != INF and delta < 0:
            raise AssertionError(f"negative regret on task {task}: cost {cost} < IC {best}")
        total += capped
        gap = None
        if config.scheme == "C" and t % config.checkpoint_every == 0:
            gap = generalization_gap(agent, env, bias, budget, ic)
        trace.records.append(RegretRecord(t, task, cost, best, delta, capped, total, gap))
        if trace.coverage_time is None and len(history.observed) == full:
            trace.coverage_time = t
    return trace


def discounted_regret(trace: RegretTrace, discount: float) -> float:
    return math.fsum(discount ** r.t * float(r.capped_delta) for r in trace.records)


@dataclass(frozen=True)
class Ensemble:
    members: tuple  # ((env, weight), ...)

    def __post_init__(self):
        total = math.fsum(w for _, w in self.members)
        if not self.members or abs(total - 1.0) > 1e-9 or any(not 0 < w <= 1 for _, w in self.members):
            raise ValueError("ensemble weights must lie in (0, 1] and sum to 1")

    @classmethod
    def from_envs(cls, envs, temperature: float = DEFAULT_TEMPERATURE) -> "Ensemble":
        weights = ensemble_weights(envs, temperature)
        return cls(tuple(zip(envs, (float(w) for w in weights))))

    @property
    def envs(self):
        return [e for e, _ in self.members]

    @property
    def weights(self):
        return [w for _, w in self.members]


@dataclass(frozen=True)
class LearningEfficiency:
    value: float
    per_env: tuple
    disclosure: str = PROXY_DISCLOSURE


def learning_efficiency(agent_factory: Callable[[Environment], Agent], ensemble: Ensemble,
                        config: EvalConfig = EvalConfig(), budget: SearchBudget = SearchBudget(),
                        runner=map) -> LearningEfficiency:
    """Weighted negative discounted regret over a finite ensemble.

    Each member gets a fresh agent from ``agent_factory``.  ``runner`` may be
    a parallel ``map`` that preserves input order.
    """
    jobs = [(agent_factory, env, config, budget) for env in ensemble.envs]
    scores = list(runner(_member_score, jobs))
    value = math.fsum(w * s for w, s in zip(ensemble.weights, scores))
    return LearningEfficiency(value, tuple(scores))


def _member_score(job) -> float:
    factory, env, config, budget = job
    trace = run_regret(factory(env), env, config, budget)
    return -discounted_regret(trace, config.discount)


def scalar_record(name: str, value: float, **extra) -> str:
    rec = {"name": name, "value": value}
    rec.update(extra)
    return json.dumps(rec, sort_keys=True)
