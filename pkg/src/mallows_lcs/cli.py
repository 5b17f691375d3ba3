"""Command line entry point: ``mallows-lcs <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from .coupling import CouplingParams, CoupledState, coupled_step
from .density import DensityField, _u_raw
from .experiment import (
    ConfigError,
    ExperimentConfig,
    check_guard,
    convergence_report,
    records_to_csv,
    report_to_json,
    run_trials,
)
from .mallows import MallowsParams, exact_pmf
from .perm_core import Permutation, PermutationError, bruhat_leq, identity, inversion_number
from .sequence_stats import Rectangle, lcs, lis
from .variational import (
    jbar_closed,
    jbar_diag,
    jbar_grid,
    midpoint_dominance_holds,
)


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def cmd_stats(args) -> int:
    pi = Permutation.parse(args.pi)
    tau = Permutation.parse(args.tau)
    _emit({
        "lis_pi": lis(pi), "lis_tau": lis(tau), "lcs": lcs(pi, tau),
        "l(pi)": inversion_number(pi), "l(tau)": inversion_number(tau),
    })
    return 0


def _tv(counts: Counter, total: int, pmf: dict) -> float:
    return 0.5 * sum(abs(counts.get(p, 0) / total - w) for p, w in pmf.items())


def cmd_couple(args) -> int:
    params = CouplingParams(args.q, args.q_prime)
    rng = np.random.Generator(np.random.Philox(args.seed))
    state = CoupledState(identity(args.n), identity(args.n), check=False)
    violations = 0
    cx, cy = Counter(), Counter()
    for _ in range(args.steps):
        state = coupled_step(state, params, rng)
        if not bruhat_leq(state.x, state.y):
            violations += 1
        cx[state.x] += 1
        cy[state.y] += 1
    out = {"n": args.n, "q": args.q, "q_prime": args.q_prime, "steps": args.steps,
           "seed": args.seed, "dominance_violations": violations, "tv_x": None, "tv_y": None}
    if args.steps and args.n <= 8:
        out["tv_x"] = _tv(cx, args.steps, exact_pmf(MallowsParams(args.n, args.q)))
        out["tv_y"] = _tv(cy, args.steps, exact_pmf(MallowsParams(args.n, args.q_prime)))
    _emit(out)
    return 0 if violations == 0 else 1


def cmd_density(args) -> int:
    field = DensityField(args.beta, args.gamma)
    g = np.linspace(0.0, 1.0, args.grid)
    rho = field.grid(g, g)
    lines = ["x,y,u_beta,rho"]
    for i, x in enumerate(g.tolist()):
        ub = _u_raw(x, g, args.beta).tolist()
        for j, y in enumerate(g.tolist()):
            lines.append(f"{x!r},{y!r},{ub[j]!r},{float(rho[i, j])!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_jbar(args) -> int:
    field = DensityField(args.beta, args.gamma)
    bracket = jbar_grid(field, args.K, args.L)
    dominance = midpoint_dominance_holds(field, args.grid)
    _emit({
        "beta": args.beta, "gamma": args.gamma, "K": args.K, "L": args.L,
        "closed_form": jbar_closed(args.beta) if args.beta == args.gamma else None,
        "lower": bracket.lower, "upper": bracket.upper,
        "diagonal_value": jbar_diag(field),
        "midpoint_dominance": dominance,
        "argmax_staircase": list(bracket.argmax_staircase.b),
    })
    return 0


def _experiment_config(args) -> ExperimentConfig:
    overrides = {
        "n": args.n, "trials": args.trials, "seed": args.seed,
        "epsilon": args.epsilon, "cloud": args.cloud,
        "output_path": args.out, "csv_path": args.csv,
    }
    beta, gamma = args.beta, args.gamma
    n = args.n
    if args.q is not None or args.q_prime is not None:
        if n is None and args.config is None:
            raise ConfigError("--q needs --n")
    if args.verify_oracle:
        overrides["verify_oracle"] = True
    if args.no_guard:
        overrides["delta_x_guard"] = False
    if args.rect:
        overrides["rectangles"] = [Rectangle.parse(r) for r in args.rect]
    if args.config:
        base = json.loads(Path(args.config).read_text())
        n = n if n is not None else base.get("n")
    if args.q is not None:
        beta = n * (1.0 - args.q)
    if args.q_prime is not None:
        gamma = n * (1.0 - args.q_prime)
    overrides["beta"] = beta
    overrides["gamma"] = gamma
    if args.config:
        return ExperimentConfig.from_json(args.config, **overrides)
    if n is None:
        raise ConfigError("--n is required without --config")
    kw = {k: v for k, v in overrides.items() if v is not None}
    return ExperimentConfig(**kw)


def cmd_experiment(args) -> int:
    cfg = _experiment_config(args)
    check_guard(cfg)
    records = run_trials(cfg, threads=args.threads)
    if cfg.beta == cfg.gamma:
        target = jbar_closed(cfg.beta)
    else:
        field = DensityField(cfg.beta, cfg.gamma)
        if midpoint_dominance_holds(field, 41):
            target = jbar_diag(field)
        else:
            target = jbar_grid(field, 32, 8)
    report = convergence_report(cfg, records, target)
    text = report_to_json(report)
    if cfg.output_path:
        Path(cfg.output_path).write_text(text)
    else:
        sys.stdout.write(text)
    if cfg.csv_path:
        Path(cfg.csv_path).write_text(records_to_csv(cfg, records))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mallows-lcs",
                                 description="LCS of two Mallows permutations: samplers, densities, bounds, Monte Carlo.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="LIS, LCS and inversion numbers of two permutations")
    p.add_argument("--pi", required=True)
    p.add_argument("--tau", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("couple", help="run the monotone coupling and report dominance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--q-prime", type=float, required=True)
    p.add_argument("--steps", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_couple)

    p = sub.add_parser("density", help="tabulate u and rho on a grid as CSV")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--out")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("jbar", help="bracket the variational constant")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--K", type=int, default=64)
    p.add_argument("--L", type=int, default=16)
    p.add_argument("--grid", type=int, default=41, help="lattice for the midpoint-dominance test")
    p.set_defaults(func=cmd_jbar)

    p = sub.add_parser("experiment", help="Monte Carlo trials and convergence report")
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--n", type=int)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--q", type=float, default=None, help="raw q instead of --beta")
    p.add_argument("--q-prime", type=float, default=None, help="raw q' instead of --gamma")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--rect", action="append", help="x1,x2,y1,y2 (repeatable)")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--cloud", choices=("direct", "inverse"))
    p.add_argument("--no-guard", action="store_true", help="allow dx*|beta| >= ln 2 rectangles")
    p.add_argument("--out")
    p.add_argument("--csv")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--verify-oracle", action="store_true")
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "gamma", 0) is None and args.command in ("density", "jbar"):
        args.gamma = args.beta
    try:
        return args.func(args)
    except (ConfigError, PermutationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
