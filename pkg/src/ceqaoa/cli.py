"""Command-line harness.

Subcommands: `instances` lists the built-in problems, `solve` brute-forces
one, `qaoa` runs a single penalty pair, `ce` tunes the pair, `bench` runs the
random-vs-CE comparison protocol, and `landscape` writes depth-1 grid CSVs.
Exit codes: 0 on success, 1 on usage errors, 2 on runtime failures.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bench import (
    ExperimentConfig,
    builtin_instances,
    get_instance,
    run_benchmark,
    run_landscape,
)
from .cross_entropy import CeConfig, ce_penalty_optimize
from .knapsack import PenaltyPair, canonical_bks_bitstring, solve_bruteforce
from .qaoa import OptimizerConfig, run_qaoa

USAGE_ERROR = 1
RUNTIME_ERROR = 2


class UsageError(ValueError):
    """Bad flag values or configs; reported with exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(USAGE_ERROR)


def _add_shared_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--shots", type=int, default=1024,
                        help="measurements per ratio estimate (default 1024)")
    parser.add_argument("--exact", action="store_true",
                        help="use exact probabilities instead of shots")
    parser.add_argument("--budget", type=int, default=200,
                        help="angle-optimizer objective evaluations (default 200)")


def _shots_of(args) -> int | None:
    return None if args.exact else args.shots


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ceqaoa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("instances", help="list built-in knapsack instances")

    p_solve = sub.add_parser("solve", help="brute-force an instance")
    p_solve.add_argument("instance", help="built-in label or JSON file")

    p_qaoa = sub.add_parser("qaoa", help="run QAOA for one penalty pair")
    p_qaoa.add_argument("instance")
    p_qaoa.add_argument("--p", dest="depth", type=int, default=1,
                        help="circuit depth (default 1)")
    p_qaoa.add_argument("--A", dest="constraint_weight", type=float,
                        required=True, help="constraint penalty weight")
    p_qaoa.add_argument("--B", dest="value_weight", type=float,
                        required=True, help="value weight")
    _add_shared_flags(p_qaoa)

    p_ce = sub.add_parser("ce", help="cross-entropy penalty optimization")
    p_ce.add_argument("instance")
    p_ce.add_argument("--p", dest="depth", type=int, default=1)
    p_ce.add_argument("--generations", type=int, default=10)
    p_ce.add_argument("--population", type=int, default=100)
    p_ce.add_argument("--elite-fraction", type=float, default=0.1)
    p_ce.add_argument("--learning-rate", type=float, default=0.5)
    p_ce.add_argument("--min-variance", type=float, default=0.1)
    p_ce.add_argument("--initial-mean", type=float, default=0.0)
    p_ce.add_argument("--initial-variance", type=float, default=1.0)
    p_ce.add_argument("--output", help="directory for trace CSV/JSON")
    _add_shared_flags(p_ce)

    p_bench = sub.add_parser("bench", help="random vs. CE benchmark protocol")
    p_bench.add_argument("--config", help="JSON config file")
    p_bench.add_argument("--instances", help="comma-separated labels/paths")
    p_bench.add_argument("--depths", help="comma-separated depths, e.g. 1,2,3")
    p_bench.add_argument("--mode", choices=["random", "ce", "both"])
    p_bench.add_argument("--random-pairs", type=int)
    p_bench.add_argument("--runs-per-pair", type=int)
    p_bench.add_argument("--output", help="artifact directory")
    p_bench.add_argument("--reevaluate-elites", action="store_true")
    p_bench.add_argument("--uniform-random", action="store_true",
                         help="draw random-mode pairs uniformly instead of "
                              "from the initial CE distribution")
    p_bench.add_argument("--seed", type=int)
    p_bench.add_argument("--shots", type=int)
    p_bench.add_argument("--exact", action="store_true")
    p_bench.add_argument("--budget", type=int)

    p_land = sub.add_parser("landscape", help="depth-1 energy landscape CSV")
    p_land.add_argument("instance")
    p_land.add_argument("--A", dest="constraint_weight", type=float, required=True)
    p_land.add_argument("--B", dest="value_weight", type=float, required=True)
    p_land.add_argument("--grid", type=int, default=100,
                        help="points per axis (default 100)")
    p_land.add_argument("--bounds", type=float, nargs=2,
                        default=(0.0, 2.0 * np.pi), metavar=("LO", "HI"))
    p_land.add_argument("--overlay", action="store_true",
                        help="also record the points an angle optimization samples")
    p_land.add_argument("--output", default=".", help="output directory")
    _add_shared_flags(p_land)

    return parser


def _cmd_instances() -> int:
    print(f"{'label':<6}{'weights':<12}{'values':<12}{'capacity':<10}{'qubits':<8}bks")
    for inst in builtin_instances():
        bks = str(canonical_bks_bitstring(inst))
        weights = ",".join(map(str, inst.weights))
        values = ",".join(map(str, inst.values))
        print(f"{inst.label:<6}{weights:<12}{values:<12}"
              f"{inst.capacity:<10}{inst.qubit_count:<8}{bks}")
    return 0


def _cmd_solve(args) -> int:
    instance = get_instance(args.instance)
    value, packings = solve_bruteforce(instance)
    print(f"instance {instance.label}: optimal value {value}")
    for packing in sorted(packings, key=lambda s: tuple(sorted(s))):
        items = ",".join(str(i + 1) for i in sorted(packing)) or "(empty)"
        print(f"  packing: items {items}")
    print(f"  bks bitstring: {canonical_bks_bitstring(instance)}")
    return 0


def _cmd_qaoa(args) -> int:
    instance = get_instance(args.instance)
    pair = PenaltyPair(args.constraint_weight, args.value_weight)
    config = OptimizerConfig(evaluation_budget=args.budget, seed=args.seed)
    result = run_qaoa(
        instance, pair, args.depth, config,
        shots=_shots_of(args), rng=np.random.default_rng(args.seed),
    )
    print(f"instance {instance.label}, p={args.depth}, "
          f"A={pair.constraint_weight}, B={pair.value_weight}")
    print(f"  best expectation:    {result.best_expectation:.6f}")
    print(f"  approximation ratio: {result.approximation_ratio:.6f}")
    print(f"  evaluations used:    {result.evaluations_used}")
    betas = ", ".join(f"{b:.4f}" for b in result.best_params.betas)
    gammas = ", ".join(f"{g:.4f}" for g in result.best_params.gammas)
    print(f"  betas:  [{betas}]")
    print(f"  gammas: [{gammas}]")
    return 0


def _cmd_ce(args) -> int:
    instance = get_instance(args.instance)
    ce_config = CeConfig(
        generations=args.generations,
        population=args.population,
        elite_fraction=args.elite_fraction,
        learning_rate=args.learning_rate,
        min_variance=args.min_variance,
        initial_mean=args.initial_mean,
        initial_variance=args.initial_variance,
        seed=args.seed,
    )
    optimizer = OptimizerConfig(evaluation_budget=args.budget, seed=args.seed)
    best, trace = ce_penalty_optimize(
        instance, args.depth, optimizer, ce_config,
        shots=_shots_of(args), rng=np.random.default_rng(args.seed),
    )
    final = trace.generations[-1]
    elite_mean = float(final.fitnesses[final.elite_indices].mean())
    print(f"instance {instance.label}, p={args.depth}: "
          f"best pair A={best.constraint_weight:.4f} B={best.value_weight:.4f}")
    print(f"  final-generation elite mean fitness: {elite_mean:.4f}")
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"ce_trace_{instance.label}_p{args.depth}.csv"
        json_path = out / f"ce_trace_{instance.label}_p{args.depth}.json"
        trace.write_csv(csv_path)
        trace.write_json(json_path)
        print(f"  trace written to {csv_path} and {json_path}")
    return 0


def _bench_config(args) -> ExperimentConfig:
    if args.config:
        config = ExperimentConfig.from_json(args.config)
    else:
        config = ExperimentConfig()
    overrides = {}
    if args.instances is not None:
        overrides["instances"] = tuple(args.instances.split(","))
    if args.depths is not None:
        parts = [d for d in args.depths.split(",") if d]
        overrides["depths"] = tuple(int(d) for d in parts)
    if args.mode is not None:
        overrides["mode"] = args.mode
    if args.random_pairs is not None:
        overrides["random_pairs"] = args.random_pairs
    if args.runs_per_pair is not None:
        overrides["runs_per_pair"] = args.runs_per_pair
    if args.output is not None:
        overrides["output"] = args.output
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.exact:
        overrides["shots"] = None
    elif args.shots is not None:
        overrides["shots"] = args.shots
    if args.reevaluate_elites:
        overrides["reevaluate_elites"] = True
    if args.uniform_random:
        overrides["random_sampling"] = "uniform"
    if args.budget is not None:
        overrides["optimizer"] = replace(
            config.optimizer, evaluation_budget=args.budget
        )
    if overrides:
        config = replace(config, **overrides)
    return config


def _cmd_bench(args) -> int:
    try:
        config = _bench_config(args)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    result = run_benchmark(config)
    print(f"wrote {len(result.records)} records to {result.records_path}")
    print(f"summary in {result.summary_path}")
    for key, stats in sorted(result.summary["comparison"].items()):
        print(f"  {key}: mean ce {stats['mean_ce']:.4f} "
              f"vs random {stats['mean_random']:.4f} "
              f"(x{stats['ce_over_random']:.2f})")
    return 0


def _cmd_landscape(args) -> int:
    instance = get_instance(args.instance)
    pair = PenaltyPair(args.constraint_weight, args.value_weight)
    optimizer = OptimizerConfig(evaluation_budget=args.budget, seed=args.seed)
    bounds = (float(args.bounds[0]), float(args.bounds[1]))
    paths = run_landscape(
        instance,
        pair,
        resolution=args.grid,
        beta_bounds=bounds,
        gamma_bounds=bounds,
        overlay=args.overlay,
        output_dir=args.output,
        optimizer=optimizer,
        seed=args.seed,
    )
    for path in paths:
        print(f"wrote {path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "instances":
            return _cmd_instances()
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "qaoa":
            return _cmd_qaoa(args)
        if args.command == "ce":
            return _cmd_ce(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "landscape":
            return _cmd_landscape(args)
        parser.error(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"ceqaoa: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ValueError, OSError) as exc:
        print(f"ceqaoa: error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    return 0


if __name__ == "__main__":
    sys.exit(main())
