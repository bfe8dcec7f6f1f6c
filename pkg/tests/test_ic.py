import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icbench import (
    ActionCount,
    Combined,
    Exactness,
    ProgramLength,
    Regime,
    SearchBudget,
    cycle_env,
    enumerate_programs,
    execute,
    gated_corridor,
    grid_env,
    ic_action_count,
    ic_all_pairs_action_count,
    ic_combined,
    ic_program_length,
    intervention_complexity,
    knowledge_cost,
    quasimetric_report,
    random_env,
    reward,
)
from icbench.envs import distance_matrix, from_rows
from icbench.ic import ICResult, empty_cost, ic_matrix, ic_program_length_from
from icbench.vm import Emit, Repeat
from oracles import brute_program_ic

SMALL = SearchBudget(max_bits=12)


def test_action_count_examples(cycle3):
    for s in range(3):
        res = ic_action_count(cycle3, s, s)
        assert res.cost == 0 and res.witness == ()
    assert ic_action_count(gated_corridor("101"), 0, 4).cost == 4
    costs = [[c.cost for c in row] for row in ic_all_pairs_action_count(cycle3)]
    assert costs == [[0, 1, 2], [2, 0, 1], [1, 2, 0]]
    assert [[c.cost for c in row] for row in ic_all_pairs_action_count(from_rows("one", [[0]]))] == [[0]]


def test_action_count_unreachable_is_infinite():
    res = ic_action_count(gated_corridor("1"), 3, 0)
    assert res.cost == math.inf and res.witness is None
    assert res.exactness is Exactness.EXACT


def test_icresult_invariant():
    with pytest.raises(ValueError):
        ICResult(math.inf, ())
    with pytest.raises(ValueError):
        ICResult(3, None)


def test_program_length_identity():
    env = random_env(4, 2, seed=1)
    for regime in Regime:
        for s in range(4):
            res = ic_program_length(env, s, s, regime, SMALL)
            assert res.cost == 2 and res.witness.bits == "00"


def test_oracle_corridor_example(corridor10):
    res = ic_program_length(corridor10, 0, 3, Regime.ORACLE)
    assert res.cost == 7
    assert res.witness.bits == "11" + "011" + "00"
    assert res.exactness is Exactness.EXACT
    assert brute_program_ic(corridor10, 0, 3, Regime.ORACLE, 7) == (7, res.witness.bits)


def test_zeros_corridor_two_bits_matches_enumeration():
    env = gated_corridor("00")
    res = ic_program_length(env, 0, 3, Regime.BARE, SearchBudget(14))
    ref = brute_program_ic(env, 0, 3, Regime.BARE, 14)
    assert (res.cost, res.witness.bits) == ref
    ops = {type(i) for i in res.witness.instructions}
    assert Repeat in ops or [type(i) for i in res.witness.instructions].count(Emit) >= 2


def test_combined_examples(cycle3):
    res = ic_combined(cycle3, 0, 1, 1, 1)
    assert res.cost == 6
    for s in range(3):
        assert ic_combined(cycle3, s, s, Fraction(3, 2), 1).cost == 3
    with pytest.raises(ValueError):
        Combined(0, 1)


def test_combined_weights_shift_the_witness():
    env = gated_corridor("000000")
    goal = 7
    budget = SearchBudget(22)
    short_prog = ic_combined(env, 0, goal, 1, Fraction(1, 100), Regime.BARE, budget)
    fail = 8
    short_out = ic_combined(env, 0, fail, 1, 1, Regime.BARE, budget)
    assert any(isinstance(i, Repeat) for i in short_prog.witness.instructions)
    # with beta dominant the single wrong bit to s_fail is the cheapest route
    out = execute(short_out.witness, env, Regime.BARE, 0)
    assert len(out.actions) == 1
    plain = ic_combined(env, 0, goal, Fraction(1, 100), 1, Regime.BARE, budget)
    assert len(execute(plain.witness, env, Regime.BARE, 0).actions) == 7


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(1, 3), st.integers(0, 5000))
def test_program_length_matches_exhaustive_search(n, m, seed):
    env = random_env(n, m, seed)
    max_bits = 11
    for regime in Regime:
        for s in range(n):
            row = ic_program_length_from(env, s, regime, SearchBudget(max_bits))
            for t in range(n):
                ref = brute_program_ic(env, s, t, regime, max_bits)
                if ref is None:
                    assert row[t].cost == math.inf
                    assert row[t].exactness is Exactness.EXACT_UP_TO_BUDGET
                else:
                    assert (row[t].cost, row[t].witness.bits) == ref


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3), st.integers(1, 2), st.integers(0, 5000))
def test_combined_matches_exhaustive_search(n, m, seed):
    env = random_env(n, m, seed)
    max_bits = 10
    alpha, beta = Fraction(1), Fraction(1, 2)
    for s in range(n):
        for t in range(n):
            res = ic_combined(env, s, t, alpha, beta, Regime.BARE, SearchBudget(max_bits))
            ref = brute_program_ic(env, s, t, Regime.BARE, max_bits, alpha=alpha, beta=beta)
            if ref is None:
                assert res.cost == math.inf
            else:
                assert res.cost == ref[0]
                out = execute(res.witness, env, Regime.BARE, s)
                assert alpha * res.witness.length + beta * len(out.actions) == ref[0]


def test_witness_replays_to_target():
    env = random_env(5, 2, seed=4)
    for regime in Regime:
        for s in range(5):
            for t, res in enumerate(ic_program_length_from(env, s, regime)):
                if res.finite:
                    out = execute(res.witness, env, regime, s)
                    assert out.ok and out.end_state == t and res.witness.length == res.cost


def test_action_count_equals_min_output_over_programs():
    # the VM choice does not change action-count IC
    env = random_env(3, 2, seed=9)
    dist = distance_matrix(env)
    for regime in Regime:
        shortest = {}
        for prog in enumerate_programs(env.dims, 13, regime):
            for s in range(3):
                out = execute(prog, env, regime, s)
                if out.ok:
                    key = (s, out.end_state)
                    shortest[key] = min(shortest.get(key, math.inf), len(out.actions))
        for s in range(3):
            for t in range(3):
                assert shortest.get((s, t), math.inf) == dist[s, t]


def test_step_budget_is_reported():
    env = cycle_env(1)
    tiny = SearchBudget(max_bits=20, step_budget=2)
    res = ic_program_length(env, 0, 0, Regime.BARE, tiny)
    assert res.cost == 2 and res.exactness is Exactness.EXACT
    res = ic_program_length(gated_corridor("0"), 0, 2, Regime.BARE, SearchBudget(20, step_budget=3))
    # EMIT EMIT HALT needs 5 steps, nothing fits
    assert res.cost == math.inf and res.exactness is Exactness.EXACT_UP_TO_BUDGET


def test_json_record(cycle3):
    res = ic_program_length(cycle3, 0, 1, Regime.BARE, SMALL)
    rec = res.to_record("c3", 0, 1, ProgramLength())
    assert rec["cost"] == 5 and rec["witness"] == "0b01000" and rec["max_bits"] == 12
    inf = ic_action_count(gated_corridor("1"), 3, 0).to_record("g", 3, 0, ActionCount())
    assert inf["cost"] == "inf" and inf["witness"] is None


def test_knowledge_cost():
    env = gated_corridor("10")
    same = knowledge_cost(env, 0, 0)
    assert same.value == 0 and same.exact
    kc = knowledge_cost(env, 0, 3)
    assert kc.value == kc.bare.cost - kc.oracle.cost >= 0
    none = knowledge_cost(env, 4, 0, SMALL)
    assert none.indeterminate and none.value == 0


def test_reward_order(cycle3):
    vals = [reward(cycle3, 0, t, ActionCount()) for t in (0, 1, 2)]
    assert vals == [0, 1, 2]
    assert reward(cycle3, 0, 0, ActionCount()) == 0
    env = gated_corridor("0110")
    logs = [reward(env, 0, t, ActionCount(), g="log1p") for t in range(6)]
    assert all(a < b for a, b in zip(logs, logs[1:]))


def test_reward_preserves_order_on_random_env():
    env = random_env(6, 2, seed=3)
    pairs = [(s, t) for s in range(6) for t in range(6)]
    ic = {p: intervention_complexity(env, *p, ActionCount()).cost for p in pairs}
    for g in ("id", "log1p"):
        r = {p: reward(env, *p, ActionCount(), g=g) for p in pairs}
        for p in pairs:
            for q in pairs:
                if ic[p] < ic[q] < math.inf:
                    assert r[p] < r[q]


def test_non_degeneracy_on_three_cycle(cycle3):
    for bias in [ActionCount(), ProgramLength(Regime.BARE), ProgramLength(Regime.ORACLE), Combined(1, 1)]:
        values = {c.cost for row in ic_matrix(cycle3, bias, SMALL) for c in row}
        assert len({v for v in values if v != math.inf}) >= 2


def test_quasimetric_examples():
    rep = quasimetric_report(cycle_env(4))
    assert rep.ok and rep.identity_ok and rep.triangle_checked == 64
    assert rep.asymmetry_witnesses
    corridor = quasimetric_report(gated_corridor("011"))
    assert (0, 4) in corridor.asymmetry_witnesses
    assert corridor.ok


def test_quasimetric_program_length_composition():
    env = random_env(4, 2, seed=2)
    rep = quasimetric_report(env, ProgramLength(Regime.BARE), budget=SearchBudget(16))
    assert rep.identity_ok and rep.nonnegative
    # concatenating two programs shares one HALT, so composition never costs extra
    assert rep.max_composition_excess <= 0 and not rep.triangle_violations
    assert empty_cost(ProgramLength()) == 2 and empty_cost(Combined(3, 1)) == 6


def test_grid_distances():
    env = grid_env(3, 3)
    assert ic_action_count(env, 0, 8).cost == 4
