"""Command line entry point: ``icbench <command> [flags]``.

Exit codes: 0 ok, 2 parse error, 3 domain error (bad index, unknown agent),
4 budget-infeasible result under ``--strict``.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from fractions import Fraction
from functools import partial
from pathlib import Path

import numpy as np

from . import agents as agents_mod
from .envs import EnvFormatError, Environment, load_env, serialize_env
from .evaluation import (
    PROXY_DISCLOSURE,
    Ensemble,
    EvalConfig,
    aggregate_curves,
    competence_curve,
    discounted_regret,
    learning_efficiency,
    run_regret,
    scalar_competence,
    scalar_record,
)
from .generators import complexity_proxy, cycle_env, gated_corridor, grid_env, random_env
from .ic import (
    ActionCount,
    Combined,
    Exactness,
    ProgramLength,
    SearchBudget,
    intervention_complexity,
    knowledge_cost,
)
from .vm import DEFAULT_STEP_BUDGET, Regime, disassemble

EXIT_OK, EXIT_PARSE, EXIT_DOMAIN, EXIT_BUDGET = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _bias(args):
    regime = Regime(args.regime)
    if args.bias == "action":
        return ActionCount()
    if args.bias == "pl":
        return ProgramLength(regime)
    return Combined(Fraction(args.alpha), Fraction(args.beta), regime)


def _budget(args) -> SearchBudget:
    return SearchBudget(args.max_bits, args.step_budget)


def _load(path) -> Environment:
    try:
        return load_env(path)
    except EnvFormatError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}") from None
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc.strerror}") from None


def _load_ensemble(directory):
    paths = sorted(Path(directory).glob("*.env"))
    if not paths:
        raise CliError(EXIT_PARSE, f"{directory}: no *.env files")
    return [_load(p) for p in paths]


def _check_state(env: Environment, index: int, flag: str):
    if not 0 <= index < env.n:
        raise CliError(EXIT_DOMAIN, f"{flag} {index} out of range [0,{env.n})")


@contextmanager
def _mapper(jobs: int):
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            yield pool.map
    else:
        yield map


def _write(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _agent_factory(name: str, seed: int, env: Environment):
    return agents_mod.make_agent(name, env, seed)


def _check_agent(name: str):
    if name not in agents_mod.AGENTS:
        raise CliError(EXIT_DOMAIN, f"UnknownAgent: {name}")


# -- commands ---------------------------------------------------------------------

def cmd_ic(args) -> int:
    env = _load(args.env)
    _check_state(env, args.source, "--from")
    _check_state(env, args.target, "--to")
    bias = _bias(args)
    result = intervention_complexity(env, args.source, args.target, bias, _budget(args))
    print(result.to_json(env.name, args.source, args.target, bias))
    if args.disassemble and result.witness is not None and hasattr(result.witness, "instructions"):
        print(disassemble(result.witness.instructions))
    if args.strict and result.exactness is not Exactness.EXACT:
        return EXIT_BUDGET
    return EXIT_OK


def _curve_job(job):
    name, seed, env, bias, budget, scheme, horizon = job
    agent = agents_mod.make_agent(name, env, seed)
    if horizon:
        run_regret(agent, env, EvalConfig(scheme, horizon, seed=seed, bias=bias), budget)
    return competence_curve(agent, env, bias, budget)


def cmd_curve(args) -> int:
    _check_agent(args.agent)
    envs = _load_ensemble(args.ensemble_dir) if args.ensemble_dir else [_load(args.env)]
    bias = _bias(args)
    budget = _budget(args)
    jobs = [(args.agent, args.seed, env, bias, budget, args.scheme, args.horizon) for env in envs]
    with _mapper(args.jobs) as run:
        curves = list(run(_curve_job, jobs))
    if len(envs) == 1:
        curve, weights = curves[0], [1.0]
    else:
        ensemble = Ensemble.from_envs(envs)
        weights = ensemble.weights
        curve = aggregate_curves(curves, weights)
    scalar = scalar_competence(curve)
    extra = {"agent": args.agent, "bias": str(bias), "envs": [e.name for e in envs]}
    if len(envs) > 1:
        extra["weights"] = weights
        extra["note"] = PROXY_DISCLOSURE
    record = scalar_record("scalar_competence", scalar, **extra) + "\n"
    if args.out:
        Path(f"{args.out}.curve.csv").write_text(curve.to_csv(), encoding="utf-8")
        Path(f"{args.out}.scalar.jsonl").write_text(record, encoding="utf-8")
    else:
        sys.stdout.write(curve.to_csv())
    sys.stdout.write(record)
    return EXIT_OK


def cmd_regret(args) -> int:
    _check_agent(args.agent)
    bias = _bias(args)
    budget = _budget(args)
    config = EvalConfig(args.scheme, args.horizon, args.discount, args.seed, bias)
    if args.ensemble_dir:
        envs = _load_ensemble(args.ensemble_dir)
        ensemble = Ensemble.from_envs(envs)
        factory = partial(_agent_factory, args.agent, args.seed)
        with _mapper(args.jobs) as run:
            eff = learning_efficiency(factory, ensemble, config, budget, runner=run)
        record = scalar_record(f"learning_efficiency_{args.scheme}", eff.value, agent=args.agent,
                               envs=[e.name for e in envs], per_env=list(eff.per_env),
                               weights=ensemble.weights, note=eff.disclosure)
        _write(args.out, record + "\n")
        return EXIT_OK
    env = _load(args.env)
    agent = agents_mod.make_agent(args.agent, env, args.seed)
    trace = run_regret(agent, env, config, budget)
    _write(args.out, trace.to_csv())
    summary = scalar_record(f"discounted_regret_{args.scheme}", discounted_regret(trace, args.discount),
                            agent=args.agent, env=env.name, coverage_time=trace.coverage_time)
    if args.out not in (None, "-"):
        sys.stdout.write(summary + "\n")
    return EXIT_OK


def _corridor_row(job):
    n, kind, x, budget = job
    kc = knowledge_cost(gated_corridor(x), 0, n + 1, budget)
    exact = "Exact" if kc.exact else "ExactUpToBudget"
    fmt = lambda v: "inf" if v == float("inf") else str(v)
    return [n, kind, x, fmt(kc.bare.cost), fmt(kc.oracle.cost), fmt(kc.value), exact, budget.max_bits]


def cmd_corridor_demo(args) -> int:
    n_list = [int(v) for v in args.n_list.split(",") if v]
    if any(n < 1 or n > args.max_n for n in n_list):
        raise CliError(EXIT_DOMAIN, f"corridor lengths must lie in [1, {args.max_n}]")
    rng = np.random.default_rng(args.seed)
    jobs = []
    for n in n_list:
        max_bits = args.max_bits if args.max_bits_fixed else 2 * n + 8
        budget = SearchBudget(max_bits, args.step_budget)
        jobs.append((n, "zeros", "0" * n, budget))
        for _ in range(args.seeds):
            x = "".join(str(b) for b in rng.integers(0, 2, size=n))
            jobs.append((n, "random", x, budget))
    with _mapper(args.jobs) as run:
        rows = list(run(_corridor_row, jobs))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "x_kind", "x", "bare_bits", "oracle_bits", "knowledge_cost", "exactness", "max_bits"])
    writer.writerows(rows)
    _write(args.out, buf.getvalue())
    if args.strict and any(r[6] != "Exact" for r in rows):
        return EXIT_BUDGET
    return EXIT_OK


def cmd_generate(args) -> int:
    try:
        if args.command == "gen-corridor":
            env = gated_corridor(args.x)
        elif args.command == "gen-random":
            env = random_env(args.n, args.m, args.seed)
        elif args.command == "gen-cycle":
            env = cycle_env(args.n)
        else:
            env = grid_env(args.w, args.h)
    except ValueError as exc:
        raise CliError(EXIT_DOMAIN, str(exc)) from None
    text = f"# complexity proxy: {complexity_proxy(env)} bits\n" + serialize_env(env)
    _write(args.out, text)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------------

def _add_bias_flags(p):
    p.add_argument("--bias", choices=["action", "pl", "comb"], default="action")
    p.add_argument("--regime", choices=["bare", "oracle"], default="bare")
    p.add_argument("--alpha", default="1")
    p.add_argument("--beta", default="1")
    p.add_argument("--max-bits", type=int, default=24)
    p.add_argument("--step-budget", type=int, default=DEFAULT_STEP_BUDGET)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="icbench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ic", help="intervention complexity of one transition")
    p.add_argument("--env", required=True)
    p.add_argument("--from", dest="source", type=int, required=True)
    p.add_argument("--to", dest="target", type=int, required=True)
    _add_bias_flags(p)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--disassemble", action="store_true")
    p.set_defaults(func=cmd_ic)

    p = sub.add_parser("curve", help="competence curve and scalar competence")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--env")
    src.add_argument("--ensemble-dir")
    p.add_argument("--agent", required=True)
    _add_bias_flags(p)
    p.add_argument("--scheme", choices=["A", "B", "C"], default="B")
    p.add_argument("--horizon", type=int, default=0, help="experience tasks before measuring")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("regret", help="regret trace or ensemble learning efficiency")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--env")
    src.add_argument("--ensemble-dir")
    p.add_argument("--agent", required=True)
    _add_bias_flags(p)
    p.add_argument("--scheme", choices=["A", "B", "C"], default="B")
    p.add_argument("--horizon", type=int, default=50)
    p.add_argument("--discount", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_regret)

    p = sub.add_parser("corridor-demo", help="bare/oracle IC and knowledge cost on gated corridors")
    p.add_argument("--n-list", default="2,4,6,8,10")
    p.add_argument("--seeds", type=int, default=5, help="random strings per length")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-n", type=int, default=10)
    p.add_argument("--max-bits", type=int, default=None,
                   help="fixed search budget (default 2n+8 per row)")
    p.add_argument("--step-budget", type=int, default=DEFAULT_STEP_BUDGET)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_corridor_demo)

    for name, helptext in [("gen-corridor", "gated corridor for a bit string"),
                           ("gen-random", "uniform random environment"),
                           ("gen-cycle", "single-action cycle"),
                           ("gen-grid", "clamped 4-action grid")]:
        p = sub.add_parser(name, help=helptext)
        if name == "gen-corridor":
            p.add_argument("x")
        elif name == "gen-random":
            p.add_argument("n", type=int)
            p.add_argument("m", type=int)
            p.add_argument("--seed", type=int, default=0)
        elif name == "gen-cycle":
            p.add_argument("n", type=int)
        else:
            p.add_argument("w", type=int)
            p.add_argument("h", type=int)
        p.add_argument("--out")
        p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "corridor-demo":
        args.max_bits_fixed = args.max_bits is not None
    try:
        return args.func(args)
    except CliError as exc:
        print(f"icbench: error: {exc}", file=sys.stderr)
        return exc.code
    except ValueError as exc:
        print(f"icbench: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
