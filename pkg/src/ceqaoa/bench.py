"""Seed-reproducible benchmark protocol: random vs. CE-tuned penalty pairs.

For every requested (instance, depth) the random mode draws a handful of
penalty pairs from the initial CE distribution and scores each pair over
several independent runs, while the CE mode runs the full penalty
optimization and records the final generation's elites with their fitness.
Each run's generator is derived from the master seed and the run's identity
(instance, depth, mode, pair, run), so adding or dropping a group never
changes any other group's numbers and repeated runs are byte-identical.

Artifacts are a flat records CSV plus a JSON summary with box-plot statistics
per group and the CE/random mean ratio per (instance, depth).
"""
from __future__ import annotations

import csv
import json
import zlib
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .cross_entropy import (
    CeConfig,
    CeDistribution,
    ce_penalty_optimize,
    constraint_weight_range,
    penalty_sampler,
    sample_truncated_normal,
)
from .knapsack import KnapsackInstance, PenaltyPair, load_instance
from .qaoa import OptimizerConfig, run_qaoa

MODE_RANDOM = "random"
MODE_CE = "ce"

_MODE_IDS = {MODE_RANDOM: 0, MODE_CE: 1}
_ROLE_PAIRS = 0
_ROLE_RUN = 1


def builtin_instances() -> list[KnapsackInstance]:
    """The five standard two-item instances shipped with the package."""
    return [
        KnapsackInstance("A", weights=(1, 1), values=(2, 1), capacity=1),
        KnapsackInstance("B", weights=(1, 1), values=(1, 2), capacity=1),
        KnapsackInstance("C", weights=(1, 1), values=(2, 1), capacity=2),
        KnapsackInstance("D", weights=(2, 3), values=(2, 1), capacity=2),
        KnapsackInstance("E", weights=(1, 2), values=(2, 1), capacity=2),
    ]


def get_instance(name: str | Path) -> KnapsackInstance:
    """Resolve a built-in label or a path to an instance JSON file."""
    for instance in builtin_instances():
        if instance.label == str(name):
            return instance
    path = Path(name)
    if path.exists():
        return load_instance(path)
    raise ValueError(f"unknown instance {name!r}: not a built-in label or file")


def derive_seed(master: int, *key: int) -> int:
    """Stable child seed for a hierarchical key under the master seed."""
    seq = np.random.SeedSequence(master, spawn_key=tuple(int(k) for k in key))
    return int(seq.generate_state(1)[0])


def _label_key(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


@dataclass(frozen=True)
class ExperimentConfig:
    """Protocol settings; every field maps onto a CLI flag."""

    instances: tuple[str, ...] = ("A", "B", "C", "D", "E")
    depths: tuple[int, ...] = (1, 2, 3)
    mode: str = "both"
    random_pairs: int = 5
    runs_per_pair: int = 10
    shots: int | None = 1024
    seed: int = 0
    output: str = "bench-out"
    random_sampling: str = "initial-distribution"
    reevaluate_elites: bool = False
    ce: CeConfig = field(default_factory=CeConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(self.instances))
        object.__setattr__(self, "depths", tuple(int(d) for d in self.depths))
        if not self.instances:
            raise ValueError("at least one instance is required")
        if not self.depths or any(d < 1 for d in self.depths):
            raise ValueError("depths must be a nonempty list of integers >= 1")
        if self.mode not in (MODE_RANDOM, MODE_CE, "both"):
            raise ValueError("mode must be 'random', 'ce', or 'both'")
        if self.random_sampling not in ("initial-distribution", "uniform"):
            raise ValueError(
                "random_sampling must be 'initial-distribution' or 'uniform'"
            )
        if self.random_pairs < 1 or self.runs_per_pair < 1:
            raise ValueError("random_pairs and runs_per_pair must be positive")

    @property
    def modes(self) -> tuple[str, ...]:
        return (MODE_RANDOM, MODE_CE) if self.mode == "both" else (self.mode,)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        if "ce" in data:
            data["ce"] = CeConfig(**data["ce"])
        if "optimizer" in data:
            data["optimizer"] = OptimizerConfig(**data["optimizer"])
        if data.pop("exact", False):
            data["shots"] = None
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class RunRecord:
    instance: str
    depth: int
    mode: str
    pair_index: int
    run_index: int
    constraint_weight: float
    value_weight: float
    approximation_ratio: float
    best_expectation: float
    evaluations_used: int
    seed: int


CSV_COLUMNS = (
    "instance",
    "p",
    "mode",
    "pair_index",
    "run_index",
    "A",
    "B",
    "approximation_ratio",
    "best_expectation",
    "evaluations_used",
    "seed",
)


def _record_row(r: RunRecord) -> list:
    return [
        r.instance,
        r.depth,
        r.mode,
        r.pair_index,
        r.run_index,
        repr(r.constraint_weight),
        repr(r.value_weight),
        repr(r.approximation_ratio),
        repr(r.best_expectation),
        r.evaluations_used,
        r.seed,
    ]


def write_records_csv(records: list[RunRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for record in records:
            writer.writerow(_record_row(record))


def _sample_random_pairs(
    instance: KnapsackInstance, config: ExperimentConfig, rng: np.random.Generator
) -> list[PenaltyPair]:
    pairs = []
    if config.random_sampling == "uniform":
        for _ in range(config.random_pairs):
            value_weight = rng.uniform(*config.ce.value_weight_range)
            lo, hi = constraint_weight_range(value_weight, instance, config.ce)
            pairs.append(PenaltyPair(rng.uniform(lo, hi), value_weight))
    else:
        sampler = penalty_sampler(instance, config.ce)
        initial = CeDistribution.initial(config.ce, dim=2)
        for _ in range(config.random_pairs):
            vec = sampler(initial, rng)
            pairs.append(PenaltyPair(float(vec[0]), float(vec[1])))
    return pairs


def run_random_mode(
    instance: KnapsackInstance, depth: int, config: ExperimentConfig
) -> list[RunRecord]:
    """Score `random_pairs` initial-distribution pairs, each over
    `runs_per_pair` independently seeded runs."""
    key = _label_key(instance.label)
    pair_rng = np.random.default_rng(
        derive_seed(config.seed, key, depth, _MODE_IDS[MODE_RANDOM], _ROLE_PAIRS)
    )
    pairs = _sample_random_pairs(instance, config, pair_rng)
    records = []
    for pair_index, pair in enumerate(pairs):
        for run_index in range(config.runs_per_pair):
            seed = derive_seed(
                config.seed,
                key,
                depth,
                _MODE_IDS[MODE_RANDOM],
                _ROLE_RUN,
                pair_index,
                run_index,
            )
            result = run_qaoa(
                instance,
                pair,
                depth,
                config.optimizer,
                shots=config.shots,
                rng=np.random.default_rng(seed),
            )
            records.append(
                RunRecord(
                    instance=instance.label,
                    depth=depth,
                    mode=MODE_RANDOM,
                    pair_index=pair_index,
                    run_index=run_index,
                    constraint_weight=pair.constraint_weight,
                    value_weight=pair.value_weight,
                    approximation_ratio=result.approximation_ratio,
                    best_expectation=result.best_expectation,
                    evaluations_used=result.evaluations_used,
                    seed=seed,
                )
            )
    return records


def run_ce_mode(
    instance: KnapsackInstance, depth: int, config: ExperimentConfig
) -> list[RunRecord]:
    """Run the penalty optimization and record the final generation's elites,
    ordered by descending fitness."""
    key = _label_key(instance.label)
    ce_seed = derive_seed(config.seed, key, depth, _MODE_IDS[MODE_CE], _ROLE_RUN)
    _, trace = ce_penalty_optimize(
        instance,
        depth,
        config.optimizer,
        config.ce,
        shots=config.shots,
        rng=np.random.default_rng(ce_seed),
    )
    final = trace.generations[-1]
    records = []
    for rank, sample_index in enumerate(final.elite_indices):
        pair = PenaltyPair(
            float(final.samples[sample_index, 0]),
            float(final.samples[sample_index, 1]),
        )
        ratio = float(final.fitnesses[sample_index])
        expectation = np.nan
        evaluations = config.optimizer.evaluation_budget
        seed = ce_seed
        if config.reevaluate_elites:
            seed = derive_seed(
                config.seed, key, depth, _MODE_IDS[MODE_CE], _ROLE_RUN, rank, 0
            )
            result = run_qaoa(
                instance,
                pair,
                depth,
                config.optimizer,
                shots=config.shots,
                rng=np.random.default_rng(seed),
            )
            ratio = result.approximation_ratio
            expectation = result.best_expectation
            evaluations = result.evaluations_used
        records.append(
            RunRecord(
                instance=instance.label,
                depth=depth,
                mode=MODE_CE,
                pair_index=rank,
                run_index=0,
                constraint_weight=pair.constraint_weight,
                value_weight=pair.value_weight,
                approximation_ratio=ratio,
                best_expectation=float(expectation),
                evaluations_used=evaluations,
                seed=seed,
            )
        )
    return records


def _group_key(instance: str, depth: int, mode: str) -> str:
    return f"{instance}:p{depth}:{mode}"


def _box_stats(ratios: np.ndarray) -> dict:
    q1, median, q3 = np.percentile(ratios, [25.0, 50.0, 75.0])
    return {
        "count": int(ratios.size),
        "min": float(ratios.min()),
        "q1": float(q1),
        "median": float(median),
        "q3": float(q3),
        "max": float(ratios.max()),
        "mean": float(ratios.mean()),
    }


def summarize(records: list[RunRecord]) -> dict:
    """Box-plot statistics per group and CE/random mean ratios."""
    groups: dict[str, list[float]] = {}
    for record in records:
        key = _group_key(record.instance, record.depth, record.mode)
        groups.setdefault(key, []).append(record.approximation_ratio)
    summary = {
        key: _box_stats(np.asarray(vals)) for key, vals in groups.items()
    }
    comparison = {}
    pairs = {(r.instance, r.depth) for r in records}
    for instance, depth in sorted(pairs):
        random_key = _group_key(instance, depth, MODE_RANDOM)
        ce_key = _group_key(instance, depth, MODE_CE)
        if random_key in summary and ce_key in summary:
            mean_random = summary[random_key]["mean"]
            mean_ce = summary[ce_key]["mean"]
            comparison[f"{instance}:p{depth}"] = {
                "mean_random": mean_random,
                "mean_ce": mean_ce,
                "ce_over_random": (
                    mean_ce / mean_random if mean_random > 0 else float("inf")
                ),
            }
    return {"groups": summary, "comparison": comparison}


@dataclass(frozen=True)
class BenchmarkResult:
    records: tuple[RunRecord, ...]
    summary: dict
    records_path: Path
    summary_path: Path


def run_benchmark(config: ExperimentConfig) -> BenchmarkResult:
    """Execute the full instance x depth x mode matrix and write artifacts."""
    records: list[RunRecord] = []
    for name in config.instances:
        instance = get_instance(name)
        for depth in config.depths:
            for mode in config.modes:
                if mode == MODE_RANDOM:
                    records.extend(run_random_mode(instance, depth, config))
                else:
                    records.extend(run_ce_mode(instance, depth, config))
    summary = summarize(records)

    out_dir = Path(config.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    records_path = out_dir / "records.csv"
    summary_path = out_dir / "summary.json"
    write_records_csv(records, records_path)
    with open(summary_path, "w", encoding="utf-8", newline="") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return BenchmarkResult(tuple(records), summary, records_path, summary_path)


def run_landscape(
    instance: KnapsackInstance,
    penalties: PenaltyPair,
    resolution: int,
    beta_bounds: tuple[float, float] = (0.0, 2.0 * np.pi),
    gamma_bounds: tuple[float, float] = (0.0, 2.0 * np.pi),
    overlay: bool = False,
    output_dir: str | Path = ".",
    optimizer: OptimizerConfig | None = None,
    seed: int = 0,
) -> list[Path]:
    """Write the depth-1 landscape grid CSV and, optionally, the points an
    angle optimization actually sampled on it."""
    from .knapsack import build_diagonal
    from .qaoa import landscape_scan, optimize_angles

    diagonal = build_diagonal(instance, penalties)
    grid = landscape_scan(diagonal, resolution, beta_bounds, gamma_bounds)
    out_dir = Path(output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tag = (
        f"{instance.label}_A{penalties.constraint_weight:g}"
        f"_B{penalties.value_weight:g}"
    )
    grid_path = out_dir / f"landscape_{tag}.csv"
    grid.write_csv(grid_path)
    written = [grid_path]
    if overlay:
        optimizer = optimizer or OptimizerConfig()
        result = optimize_angles(
            diagonal,
            depth=1,
            config=optimizer,
            rng=np.random.default_rng(seed),
            keep_trace=True,
        )
        overlay_path = out_dir / f"optimizer_samples_{tag}.csv"
        with open(overlay_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["beta", "gamma", "expectation"])
            for params, value in result.trace:
                writer.writerow(
                    [repr(params.betas[0]), repr(params.gammas[0]), repr(value)]
                )
        written.append(overlay_path)
    return written
