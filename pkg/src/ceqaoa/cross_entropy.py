"""Cross-entropy optimization over truncated normal sampling distributions.

Each generation draws a population, scores it, keeps the top elite fraction,
and refits the per-coordinate mean and variance by maximum likelihood
(population form), blended with the previous parameters through the learning
rate and floored at the minimum variance. The penalty-pair variant couples
the two coordinates through their sampling ranges: the value weight B is
drawn first over its fixed range, then the constraint weight A over
[B*max(values) + margin_lo, B*max(values) + margin_hi], so every evaluated
pair satisfies the validity condition by construction.

Per-sample randomness comes from child generators spawned per generation, so
traces are reproducible regardless of evaluation order.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .knapsack import KnapsackInstance, PenaltyPair
from .qaoa import OptimizerConfig, run_qaoa


@dataclass(frozen=True)
class CeConfig:
    """Settings for the sample/select/refit loop and the penalty ranges."""

    generations: int = 10
    population: int = 100
    elite_fraction: float = 0.1
    learning_rate: float = 0.5
    min_variance: float = 0.1
    initial_mean: float = 0.0
    initial_variance: float = 1.0
    value_weight_range: tuple[float, float] = (0.1, 10.0)
    constraint_margins: tuple[float, float] = (0.1, 10.0)
    seed: int | None = None

    def __post_init__(self):
        if not 0.0 < self.elite_fraction <= 1.0:
            raise ValueError("elite_fraction must be in (0, 1]")
        if self.population < 1 or self.generations < 1:
            raise ValueError("population and generations must be positive")
        if self.min_variance <= 0:
            raise ValueError("min_variance must be positive")
        if self.initial_variance <= 0:
            raise ValueError("initial_variance must be positive")
        for lo, hi in (self.value_weight_range, self.constraint_margins):
            if not lo < hi:
                raise ValueError("range bounds must satisfy lo < hi")

    @property
    def elite_count(self) -> int:
        return math.ceil(self.population * self.elite_fraction)


def sample_truncated_normal(
    mean: float,
    variance: float,
    lower: float,
    upper: float,
    rng: np.random.Generator,
) -> float:
    """One draw from Normal(mean, variance) conditioned on [lower, upper].

    Inverse-CDF on the truncated interval: exactly one uniform consumed per
    draw, and the result always lies inside the range.
    """
    if not lower < upper:
        raise ValueError("truncation range must satisfy lower < upper")
    if variance <= 0:
        raise ValueError("variance must be positive")
    sigma = math.sqrt(variance)
    cdf_lo = ndtr((lower - mean) / sigma)
    cdf_hi = ndtr((upper - mean) / sigma)
    u = rng.random()
    if cdf_hi - cdf_lo <= 0.0:
        # entire mass numerically outside the range: snap to the nearer end
        return lower if mean < lower else upper
    x = mean + sigma * float(ndtri(cdf_lo + u * (cdf_hi - cdf_lo)))
    return min(max(x, lower), upper)


@dataclass(frozen=True)
class CeDistribution:
    """Independent univariate normals, one per coordinate."""

    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "means", np.asarray(self.means, dtype=float))
        object.__setattr__(self, "variances", np.asarray(self.variances, dtype=float))
        if self.means.shape != self.variances.shape or self.means.ndim != 1:
            raise ValueError("means and variances must be 1-D and equal length")
        if np.any(self.variances <= 0):
            raise ValueError("variances must be positive")

    @classmethod
    def initial(cls, config: CeConfig, dim: int) -> "CeDistribution":
        return cls(
            np.full(dim, config.initial_mean),
            np.full(dim, config.initial_variance),
        )


def update_distribution(
    elites: np.ndarray, previous: CeDistribution, config: CeConfig
) -> CeDistribution:
    """Refit means/variances on the elites (population-form MLE), smooth with
    the learning rate, and floor the variances."""
    elites = np.asarray(elites, dtype=float)
    if elites.ndim != 2 or elites.shape[0] < 1:
        raise ValueError("elites must be a nonempty (count, dim) array")
    lr = config.learning_rate
    mle_mean = elites.mean(axis=0)
    mle_var = np.mean((elites - mle_mean) ** 2, axis=0)
    means = (1.0 - lr) * previous.means + lr * mle_mean
    variances = (1.0 - lr) * previous.variances + lr * mle_var
    variances = np.maximum(variances, config.min_variance)
    return CeDistribution(means, variances)


Sampler = Callable[[CeDistribution, np.random.Generator], np.ndarray]
Objective = Callable[[np.ndarray, np.random.Generator], float]


@dataclass(frozen=True)
class CeGeneration:
    samples: np.ndarray  # (population, dim)
    fitnesses: np.ndarray  # (population,)
    elite_indices: np.ndarray  # (elite_count,)
    dist_before: CeDistribution
    dist_after: CeDistribution


@dataclass(frozen=True)
class CeTrace:
    generations: tuple[CeGeneration, ...]

    def to_json_dict(self) -> dict:
        return {
            "generations": [
                {
                    "means_before": g.dist_before.means.tolist(),
                    "variances_before": g.dist_before.variances.tolist(),
                    "samples": g.samples.tolist(),
                    "fitnesses": g.fitnesses.tolist(),
                    "elite_indices": g.elite_indices.tolist(),
                    "means_after": g.dist_after.means.tolist(),
                    "variances_after": g.dist_after.variances.tolist(),
                }
                for g in self.generations
            ]
        }

    def write_json(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_csv(self, path: str | Path) -> None:
        """Per-sample rows; penalty coordinates are labelled A and B."""
        if self.generations and self.generations[0].samples.shape[1] != 2:
            raise ValueError("CSV export expects two coordinates (A, B)")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(
                ["generation", "sample_index", "A", "B", "fitness", "is_elite"]
            )
            for g_idx, gen in enumerate(self.generations, start=1):
                elite = set(int(i) for i in gen.elite_indices)
                for s_idx, (sample, fit) in enumerate(
                    zip(gen.samples, gen.fitnesses)
                ):
                    writer.writerow(
                        [
                            g_idx,
                            s_idx,
                            repr(float(sample[0])),
                            repr(float(sample[1])),
                            repr(float(fit)),
                            1 if s_idx in elite else 0,
                        ]
                    )


def independent_sampler(
    ranges: Sequence[tuple[float, float]],
) -> Sampler:
    """Sampler with a fixed truncation range per coordinate."""

    def sample(dist: CeDistribution, rng: np.random.Generator) -> np.ndarray:
        return np.array(
            [
                sample_truncated_normal(m, v, lo, hi, rng)
                for (m, v), (lo, hi) in zip(
                    zip(dist.means, dist.variances), ranges
                )
            ]
        )

    return sample


def ce_generic(
    objective: Objective,
    sampler: Sampler,
    config: CeConfig,
    rng: np.random.Generator | None = None,
    dim: int = 1,
) -> tuple[np.ndarray, CeTrace]:
    """Maximize `objective` over samples drawn by `sampler`.

    Returns the best sample ever evaluated (earliest on ties) and the full
    trace. Each sample gets its own child generator, shared between the
    sampler and the objective, so results do not depend on evaluation order.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    dist = CeDistribution.initial(config, dim)
    generations: list[CeGeneration] = []
    best_sample: np.ndarray | None = None
    best_fitness = -math.inf

    for _ in range(config.generations):
        streams = rng.spawn(config.population)
        samples = np.empty((config.population, dim))
        fitnesses = np.empty(config.population)
        for i, stream in enumerate(streams):
            samples[i] = sampler(dist, stream)
            fitnesses[i] = objective(samples[i], stream)

        order = np.argsort(-fitnesses, kind="stable")
        elite_indices = order[: config.elite_count]
        updated = update_distribution(samples[elite_indices], dist, config)
        generations.append(
            CeGeneration(
                samples=samples,
                fitnesses=fitnesses,
                elite_indices=np.asarray(elite_indices),
                dist_before=dist,
                dist_after=updated,
            )
        )
        top = int(elite_indices[0])
        if fitnesses[top] > best_fitness:
            best_fitness = float(fitnesses[top])
            best_sample = samples[top].copy()
        dist = updated

    assert best_sample is not None
    return best_sample, CeTrace(tuple(generations))


def constraint_weight_range(
    value_weight: float, instance: KnapsackInstance, config: CeConfig
) -> tuple[float, float]:
    """Sampling range for A given B: margins above B*max(values)."""
    base = value_weight * instance.max_value
    return base + config.constraint_margins[0], base + config.constraint_margins[1]


def penalty_sampler(instance: KnapsackInstance, config: CeConfig) -> Sampler:
    """Draw the value weight first, then the constraint weight over the
    range that the drawn value implies. Coordinate order is (A, B)."""

    def sample(dist: CeDistribution, rng: np.random.Generator) -> np.ndarray:
        value_weight = sample_truncated_normal(
            dist.means[1], dist.variances[1], *config.value_weight_range, rng
        )
        lo, hi = constraint_weight_range(value_weight, instance, config)
        constraint_weight = sample_truncated_normal(
            dist.means[0], dist.variances[0], lo, hi, rng
        )
        return np.array([constraint_weight, value_weight])

    return sample


def ce_penalty_optimize(
    instance: KnapsackInstance,
    depth: int,
    optimizer_config: OptimizerConfig | None = None,
    ce_config: CeConfig | None = None,
    shots: int | None = 1024,
    rng: np.random.Generator | None = None,
) -> tuple[PenaltyPair, CeTrace]:
    """Tune the penalty pair by cross-entropy with the approximation ratio of
    a fresh angle optimization as the fitness of each sampled pair."""
    ce_config = ce_config or CeConfig()
    optimizer_config = optimizer_config or OptimizerConfig()
    if rng is None:
        rng = np.random.default_rng(ce_config.seed)

    def fitness(sample: np.ndarray, stream: np.random.Generator) -> float:
        pair = PenaltyPair(float(sample[0]), float(sample[1]))
        result = run_qaoa(
            instance, pair, depth, optimizer_config, shots=shots, rng=stream
        )
        return result.approximation_ratio

    best, trace = ce_generic(
        fitness, penalty_sampler(instance, ce_config), ce_config, rng, dim=2
    )
    return PenaltyPair(float(best[0]), float(best[1])), trace
