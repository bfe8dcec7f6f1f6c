"""Intervention complexity under action-count, program-length and combined biases.

Action count is plain BFS.  Program length (and the combined bias) is a
budgeted minimisation over programs of the reference machine in
:mod:`icbench.vm`.  A valid program is a sequence of top-level statements
followed by HALT, and a statement's effect on the simulated state only
depends on the state it starts from.  The search therefore runs a layered
shortest-path over ``(state, bits used)`` whose edges are statements,
deduplicated by their effect on every state.  Ties keep the
lexicographically smallest bit string, which reproduces the first hit of a
plain ``(length, lexicographic)`` enumeration.

Every result carries an exactness tag.  ``Exact`` needs a certificate that
no program up to the answer's length could run out of steps; without it
the search falls back to plain enumeration and execution.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Union

import numpy as np

from .envs import INF, Environment, distance_matrix, shortest_path
from .vm import (
    DEFAULT_STEP_BUDGET,
    Fault,
    Program,
    Regime,
    action_bits,
    enumerate_programs,
    execute,
    gamma_encode,
    gamma_length,
    state_bits,
)

DEFAULT_MAX_BITS = 24
HALT_BITS = 2
DEFAULT_PL_SLACK = 8


class Exactness(enum.Enum):
    EXACT = "Exact"
    EXACT_UP_TO_BUDGET = "ExactUpToBudget"


@dataclass(frozen=True)
class SearchBudget:
    max_bits: int = DEFAULT_MAX_BITS
    step_budget: int = DEFAULT_STEP_BUDGET

    def __post_init__(self):
        if self.max_bits < 2:
            raise ValueError("max_bits must be >= 2")
        if self.step_budget < 1:
            raise ValueError("step_budget must be >= 1")


@dataclass(frozen=True)
class ActionCount:
    def __str__(self):
        return "action"


@dataclass(frozen=True)
class ProgramLength:
    regime: Regime = Regime.BARE

    def __str__(self):
        return f"pl-{self.regime.value}"


@dataclass(frozen=True)
class Combined:
    alpha: Fraction = Fraction(1)
    beta: Fraction = Fraction(1)
    regime: Regime = Regime.BARE

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        object.__setattr__(self, "beta", Fraction(self.beta))
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")

    def __str__(self):
        return f"comb-{self.regime.value}(alpha={self.alpha},beta={self.beta})"


ResourceBias = Union[ActionCount, ProgramLength, Combined]


@dataclass(frozen=True)
class ICResult:
    cost: Union[int, Fraction, float]
    witness: Union[Program, tuple, None]
    exactness: Exactness = Exactness.EXACT
    budget: SearchBudget | None = None

    def __post_init__(self):
        if (self.cost == INF) != (self.witness is None):
            raise ValueError("cost is infinite exactly when the witness is absent")

    @property
    def finite(self) -> bool:
        return self.cost != INF

    def to_record(self, env: str, s: int, t: int, bias) -> dict:
        if self.witness is None:
            witness = None
        elif isinstance(self.witness, Program):
            witness = str(self.witness)
        else:
            witness = list(self.witness)
        rec = {
            "env": env,
            "s": s,
            "t": t,
            "bias": str(bias),
            "cost": _json_number(self.cost),
            "exactness": self.exactness.value,
            "witness": witness,
        }
        if self.budget is not None:
            rec["max_bits"] = self.budget.max_bits
            rec["step_budget"] = self.budget.step_budget
        return rec

    def to_json(self, env: str, s: int, t: int, bias) -> str:
        return json.dumps(self.to_record(env, s, t, bias), sort_keys=True)


def _json_number(value):
    if value == INF:
        return "inf"
    if isinstance(value, Fraction):
        return int(value) if value.denominator == 1 else float(value)
    return value


# -- action count --------------------------------------------------------------

def ic_action_count(env: Environment, s: int, t: int) -> ICResult:
    path = shortest_path(env, s, t)
    if path is None:
        return ICResult(INF, None)
    return ICResult(len(path), tuple(path))


def ic_all_pairs_action_count(env: Environment) -> list[list[ICResult]]:
    return [[ic_action_count(env, s, t) for t in range(env.n)] for s in range(env.n)]


# -- program length --------------------------------------------------------------

def _compose(first, second, track_output):
    """Effect of running ``first`` then ``second``."""
    if track_output:
        out = []
        for v, k in first:
            if v < 0:
                out.append((-1, 0))
            else:
                w, k2 = second[v]
                out.append((w, k + k2) if w >= 0 else (-1, 0))
        return tuple(out)
    return tuple(second[v] if v >= 0 else -1 for v in first)


class _StatementTable:
    """Top-level statements of a program, grouped by bit length and effect."""

    def __init__(self, env: Environment, regime: Regime, max_bits: int, track_output: bool):
        self.env = env
        self.regime = regime
        self.track_output = track_output
        self.limit = max_bits - HALT_BITS  # bits available for statements
        n, m = env.dims
        self.n = n
        abits, nbits = action_bits(m), state_bits(n)
        dist = distance_matrix(env)
        finite = dist[np.isfinite(dist)]
        self.max_goto_len = int(finite.max()) if len(finite) else 0

        self.identity = tuple((u, 0) for u in range(n)) if track_output else tuple(range(n))
        limit = self.limit
        # stmt[(f, b)] / seq[(L, b)]: effect -> lexicographically smallest bits
        stmt: dict[tuple[int, int], dict] = {}
        seq: dict[tuple[int, int], dict] = {(0, 0): {self.identity: ""}}
        # step-count upper bounds over the whole grammar (no deduplication)
        stmt_steps: dict[tuple[int, int], int] = {}
        seq_steps: dict[tuple[int, int], int] = {(0, 0): 0}

        leaves = []
        for a in range(m):
            eff = tuple((env.step(u, a), 1) for u in range(n)) if track_output else \
                tuple(env.step(u, a) for u in range(n))
            leaves.append(("01" + format(a, f"0{abits}b"), eff, 2))
        if regime is Regime.ORACLE:
            for t in range(n):
                eff = []
                for u in range(n):
                    d = dist[u, t]
                    if not np.isfinite(d):
                        eff.append((-1, 0) if track_output else -1)
                    else:
                        eff.append((t, int(d)) if track_output else t)
                leaves.append(("11" + format(t, f"0{nbits}b"), tuple(eff), 1 + self.max_goto_len))
        min_leaf = min(len(bits) for bits, _, _ in leaves)
        max_body = max(0, (limit - 4) // min_leaf)

        def put(cells, key, eff, bits):
            cell = cells.setdefault(key, {})
            old = cell.get(eff)
            if old is None or bits < old:
                cell[eff] = bits

        for b in range(1, limit + 1):
            for bits, eff, steps in leaves:
                if len(bits) == b:
                    put(stmt, (1, b), eff, bits)
                    stmt_steps[(1, b)] = max(stmt_steps.get((1, b), 0), steps)
            for body_len in range(1, max_body + 1):
                for c_m1 in range(1, 1 << 30):
                    head = 2 + gamma_length(c_m1) + gamma_length(body_len)
                    if head + body_len * min_leaf > b:
                        break
                    body_bits = b - head
                    bodies = seq.get((body_len, body_bits))
                    if not bodies:
                        continue
                    header = "10" + gamma_encode(c_m1) + gamma_encode(body_len)
                    key = (1 + body_len, b)
                    for eff, body in bodies.items():
                        put(stmt, key, self._power(eff, c_m1 + 1), header + body)
                    steps = 1 + (c_m1 + 1) * seq_steps[(body_len, body_bits)]
                    stmt_steps[key] = max(stmt_steps.get(key, 0), steps)
            if b > limit - 4:
                continue  # longer sequences never fit inside a REPEAT
            for total in range(1, max_body + 1):
                for (f, b1), firsts in list(stmt.items()):
                    if f > total or b1 > b:
                        continue
                    rests = seq.get((total - f, b - b1))
                    if not rests:
                        continue
                    key = (total, b)
                    for eff1, bits1 in firsts.items():
                        for eff2, bits2 in rests.items():
                            put(seq, key, _compose(eff1, eff2, track_output), bits1 + bits2)
                    steps = stmt_steps[(f, b1)] + seq_steps[(total - f, b - b1)]
                    seq_steps[key] = max(seq_steps.get(key, 0), steps)

        self.by_bits: dict[int, list[tuple[tuple, str]]] = {}
        stmt_any_steps: dict[int, int] = {}
        for (f, b), cell in stmt.items():
            merged = dict(self.by_bits.get(b, []))
            for eff, bits in cell.items():
                if eff not in merged or bits < merged[eff]:
                    merged[eff] = bits
            self.by_bits[b] = sorted(merged.items(), key=lambda kv: kv[1])
            stmt_any_steps[b] = max(stmt_any_steps.get(b, 0), stmt_steps[(f, b)])

        # max steps of any program with exactly b bits (HALT included)
        top = {0: 0}
        for b in range(1, limit + 1):
            best = None
            for b1, s1 in stmt_any_steps.items():
                if b1 <= b and (b - b1) in top:
                    cand = s1 + top[b - b1]
                    best = cand if best is None else max(best, cand)
            if best is not None:
                top[b] = best
        self.program_steps = {b + HALT_BITS: s + 1 for b, s in top.items()}

    def _power(self, eff, count):
        if self.track_output:
            out = eff
            for _ in range(count - 1):
                out = _compose(out, eff, True)
            return out
        # functional powers are eventually periodic; stop at the first repeat
        seen = {eff: 1}
        powers = [None, eff]
        cur = eff
        for k in range(2, count + 1):
            cur = _compose(cur, eff, False)
            if cur in seen:
                start = seen[cur]
                period = k - start
                return powers[start + (count - start) % period]
            seen[cur] = k
            powers.append(cur)
        return cur

    def max_steps_up_to(self, bits: int) -> int:
        return max((s for b, s in self.program_steps.items() if b <= bits), default=1)


@lru_cache(maxsize=256)
def _table(env: Environment, regime: Regime, max_bits: int, track_output: bool) -> _StatementTable:
    return _StatementTable(env, regime, max_bits, track_output)


def _layered_search(env, s, regime, budget, alpha=None, beta=None):
    """Best label per target: ``t -> (cost, bits, program bits)``.

    With ``alpha``/``beta`` unset the cost is the bit length.
    """
    combined = alpha is not None
    table = _table(env, regime, budget.max_bits, combined)
    limit = table.limit
    layers: list[dict[int, tuple]] = [dict() for _ in range(limit + 1)]
    layers[0][s] = (Fraction(0), "")
    for b in range(limit + 1):
        layer = layers[b]
        if not layer:
            continue
        for be, stmts in table.by_bits.items():
            nb = b + be
            if nb > limit:
                continue
            target = layers[nb]
            for u, (cost, prefix) in layer.items():
                for eff, bits in stmts:
                    e = eff[u]
                    if combined:
                        v, k = e
                        if v < 0:
                            continue
                        new = (cost + alpha * be + beta * k, prefix + bits)
                    else:
                        v = e
                        if v < 0:
                            continue
                        new = (cost, prefix + bits)
                    old = target.get(v)
                    if old is None or new < old:
                        target[v] = new
    best: dict[int, tuple] = {}
    for b, layer in enumerate(layers):
        total = b + HALT_BITS
        for v, (cost, prefix) in layer.items():
            key = (cost + alpha * HALT_BITS if combined else total, total, prefix + "00")
            if v not in best or key < best[v]:
                best[v] = key
    return best, table


def _brute_force(env, s, t, regime, budget, alpha=None, beta=None):
    """Reference search: enumerate programs in order and execute each one.

    Returns ``(best, faulted_lengths)`` where ``best`` is ``(cost, program)``.
    """
    best = None
    faulted_lengths = []
    for prog in enumerate_programs(env.dims, budget.max_bits, regime):
        if best is not None and (alpha is None or alpha * prog.length > best[0]):
            break
        out = execute(prog, env, regime, s, budget.step_budget)
        if out.fault is Fault.STEP_BUDGET_EXCEEDED:
            faulted_lengths.append(prog.length)
        if not out.ok or out.end_state != t:
            continue
        cost = prog.length if alpha is None else alpha * prog.length + beta * len(out.actions)
        if best is None or cost < best[0]:
            best = (cost, prog)
    return best, faulted_lengths


def _resolve(env, s, t, regime, budget, alpha=None, beta=None, *, best=None, table=None):
    if best is None:
        best, table = _layered_search(env, s, regime, budget, alpha, beta)
    hit = best.get(t)
    if hit is None:
        return ICResult(INF, None, Exactness.EXACT_UP_TO_BUDGET, budget)
    cost, length, bits = hit
    horizon = length if alpha is None else min(budget.max_bits, math.floor(cost / alpha))
    if table.max_steps_up_to(horizon) <= budget.step_budget:
        value = length if alpha is None else cost
        return ICResult(value, Program.from_bits(bits, env.dims), Exactness.EXACT, budget)
    found, faulted = _brute_force(env, s, t, regime, budget, alpha, beta)
    if found is None:
        return ICResult(INF, None, Exactness.EXACT_UP_TO_BUDGET, budget)
    value, prog = found
    limit = prog.length if alpha is None else horizon
    exact = not any(length < limit for length in faulted)
    return ICResult(value, prog, Exactness.EXACT if exact else Exactness.EXACT_UP_TO_BUDGET, budget)


def ic_program_length(env: Environment, s: int, t: int, regime: Regime = Regime.BARE,
                      budget: SearchBudget = SearchBudget()) -> ICResult:
    return _resolve(env, s, t, regime, budget)


def ic_program_length_from(env: Environment, s: int, regime: Regime = Regime.BARE,
                           budget: SearchBudget = SearchBudget()) -> list[ICResult]:
    """Program-length IC from ``s`` to every state, sharing one search."""
    best, table = _layered_search(env, s, regime, budget)
    return [_resolve(env, s, t, regime, budget, best=best, table=table) for t in range(env.n)]


def ic_combined(env: Environment, s: int, t: int, alpha, beta, regime: Regime = Regime.BARE,
                budget: SearchBudget = SearchBudget()) -> ICResult:
    bias = Combined(alpha, beta, regime)
    return _resolve(env, s, t, regime, budget, bias.alpha, bias.beta)


def intervention_complexity(env: Environment, s: int, t: int, bias: ResourceBias,
                            budget: SearchBudget = SearchBudget()) -> ICResult:
    if isinstance(bias, ActionCount):
        return ic_action_count(env, s, t)
    if isinstance(bias, ProgramLength):
        return ic_program_length(env, s, t, bias.regime, budget)
    if isinstance(bias, Combined):
        return ic_combined(env, s, t, bias.alpha, bias.beta, bias.regime, budget)
    raise TypeError(f"unknown bias {bias!r}")


def ic_matrix(env: Environment, bias: ResourceBias, budget: SearchBudget = SearchBudget()) -> list[list[ICResult]]:
    if isinstance(bias, ActionCount):
        return ic_all_pairs_action_count(env)
    if isinstance(bias, ProgramLength):
        return [ic_program_length_from(env, s, bias.regime, budget) for s in range(env.n)]
    rows = []
    for s in range(env.n):
        best, table = _layered_search(env, s, bias.regime, budget, bias.alpha, bias.beta)
        rows.append([_resolve(env, s, t, bias.regime, budget, bias.alpha, bias.beta, best=best, table=table)
                     for t in range(env.n)])
    return rows


def empty_cost(bias: ResourceBias):
    """Cost of the empty intervention (the HALT-only program)."""
    if isinstance(bias, ActionCount):
        return 0
    if isinstance(bias, ProgramLength):
        return HALT_BITS
    return bias.alpha * HALT_BITS


# -- knowledge cost -----------------------------------------------------------------

@dataclass(frozen=True)
class KnowledgeCost:
    value: Union[int, float]
    bare: ICResult
    oracle: ICResult
    indeterminate: bool = False  # both sides infinite within budget

    @property
    def exact(self) -> bool:
        return self.bare.exactness is Exactness.EXACT and self.oracle.exactness is Exactness.EXACT


def knowledge_cost(env: Environment, s: int, t: int, budget: SearchBudget = SearchBudget()) -> KnowledgeCost:
    bare = ic_program_length(env, s, t, Regime.BARE, budget)
    oracle = ic_program_length(env, s, t, Regime.ORACLE, budget)
    if not bare.finite and not oracle.finite:
        return KnowledgeCost(0, bare, oracle, indeterminate=True)
    if not bare.finite:
        return KnowledgeCost(INF, bare, oracle)
    return KnowledgeCost(bare.cost - oracle.cost, bare, oracle)


# -- reward ---------------------------------------------------------------------------

_G: dict[str, Callable[[float], float]] = {
    "id": lambda x: x,
    "log1p": math.log1p,
}


def reward(env: Environment, s: int, t: int, bias: ResourceBias, g: Union[str, Callable] = "id",
           budget: SearchBudget = SearchBudget()):
    """``g(IC)`` for a strictly increasing ``g``; infinite IC stays infinite."""
    fn = _G[g] if isinstance(g, str) else g
    ic = intervention_complexity(env, s, t, bias, budget)
    if not ic.finite:
        return INF
    return fn(ic.cost)


# -- metric structure ------------------------------------------------------------------

@dataclass
class QuasimetricReport:
    bias: str
    slack: float
    identity_ok: bool
    nonnegative: bool
    triangle_checked: int = 0
    triangle_unverified: int = 0
    triangle_violations: list = field(default_factory=list)
    max_composition_excess: float = -INF
    asymmetry_witnesses: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.identity_ok and self.nonnegative and not self.triangle_violations


def quasimetric_report(env: Environment, bias: ResourceBias = ActionCount(), slack=None,
                       budget: SearchBudget = SearchBudget()) -> QuasimetricReport:
    """Check non-negativity, identity and the triangle inequality; list asymmetries.

    ``max_composition_excess`` is the largest observed
    ``IC(s,s'') - IC(s,s') - IC(s',s'')`` over checked triples.  Triples with a
    leg left infinite by the search budget are counted as unverified.
    """
    if slack is None:
        slack = 0 if isinstance(bias, ActionCount) else DEFAULT_PL_SLACK
    matrix = ic_matrix(env, bias, budget)
    cost = [[cell.cost for cell in row] for row in matrix]
    n = env.n
    base = empty_cost(bias)
    report = QuasimetricReport(
        bias=str(bias),
        slack=slack,
        identity_ok=all(cost[s][s] == base for s in range(n)),
        nonnegative=all(c >= 0 for row in cost for c in row),
    )
    reach = distance_matrix(env)
    for s in range(n):
        for mid in range(n):
            if not np.isfinite(reach[s, mid]):
                continue
            for t in range(n):
                if not np.isfinite(reach[mid, t]):
                    continue
                left, right, direct = cost[s][mid], cost[mid][t], cost[s][t]
                if left == INF or right == INF or direct == INF:
                    # only possible when the search budget cut a leg short
                    report.triangle_unverified += 1
                    continue
                report.triangle_checked += 1
                excess = direct - left - right
                report.max_composition_excess = max(report.max_composition_excess, float(excess))
                if direct > left + right + slack:
                    report.triangle_violations.append((s, mid, t))
    for s in range(n):
        for t in range(s + 1, n):
            if cost[s][t] != cost[t][s]:
                report.asymmetry_witnesses.append((s, t))
    return report
