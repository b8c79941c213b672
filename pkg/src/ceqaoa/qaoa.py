"""Depth-p alternation of cost and driver propagators, and its optimization.

The variational objective is the energy expectation of the state obtained by
applying, for each layer k, the cost propagator with angle gamma_k followed
by the driver layer with angle beta_k to the uniform superposition. Angles
are tuned with a bounded (mu+lambda) evolution strategy: keep the best
`elite_count` points, spawn offspring by Gaussian perturbation with a
per-dimension step size adapted by the 1/5 success rule, clamp to bounds,
and stop once the evaluation budget is spent. The reported optimum is the
best point ever evaluated.

Populations and landscape grids are evaluated as statevector batches;
`objective` on a single parameter set goes through the same code path.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .knapsack import (
    Assignment,
    DiagonalHamiltonian,
    KnapsackInstance,
    PenaltyPair,
    build_diagonal,
    canonical_bks_bitstring,
)
from .statevector import (
    apply_cost_propagator,
    apply_driver_layer,
    expectation_diagonal,
    probability_of,
    sample_shots,
    uniform_superposition,
)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class QaoaParams:
    """Angle schedule: betas drive the mixer, gammas the cost phases."""

    betas: tuple[float, ...]
    gammas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        if len(self.betas) != len(self.gammas):
            raise ValueError("betas and gammas must have the same length")

    @property
    def depth(self) -> int:
        return len(self.betas)


@dataclass(frozen=True)
class OptimizerConfig:
    """Budgeted evolution-strategy settings for the angle search.

    `step_growth`/`step_shrink` rescale the mutation step after each
    generation by the 1/5 success rule; both at 1.0 keep the step fixed.
    """

    evaluation_budget: int = 200
    population_size: int = 20
    elite_count: int = 5
    initial_step: float = 0.4
    step_growth: float = 1.0
    step_shrink: float = 1.0
    seed: int | None = None
    beta_bounds: tuple[float, float] = (0.0, TWO_PI)
    gamma_bounds: tuple[float, float] = (0.0, TWO_PI)

    def __post_init__(self):
        if self.population_size < 1 or self.elite_count < 1:
            raise ValueError("population and elite count must be positive")
        if self.elite_count >= self.population_size:
            raise ValueError("elite_count must be smaller than population_size")
        if self.evaluation_budget < self.population_size:
            raise ValueError("budget must cover at least one population")
        if not 0 < self.initial_step:
            raise ValueError("initial_step must be positive")
        if self.step_growth < 1.0 or not 0.0 < self.step_shrink <= 1.0:
            raise ValueError("step_growth must be >= 1 and step_shrink in (0, 1]")
        for lo, hi in (self.beta_bounds, self.gamma_bounds):
            if not lo < hi:
                raise ValueError("bounds must satisfy lo < hi")


@dataclass(frozen=True)
class QaoaResult:
    best_params: QaoaParams
    best_expectation: float
    approximation_ratio: float | None
    evaluations_used: int
    trace: tuple[tuple[QaoaParams, float], ...] | None = None


@dataclass(frozen=True)
class LandscapeGrid:
    """Objective evaluated on a (beta, gamma) grid at depth 1."""

    beta_axis: np.ndarray
    gamma_axis: np.ndarray
    expectations: np.ndarray  # shape (len(beta_axis), len(gamma_axis))
    min_value: float
    argmin: tuple[int, int]

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["beta", "gamma", "expectation"])
            for i, beta in enumerate(self.beta_axis):
                for j, gamma in enumerate(self.gamma_axis):
                    writer.writerow(
                        [repr(float(beta)), repr(float(gamma)),
                         repr(float(self.expectations[i, j]))]
                    )


def prepare_state(
    diagonal: DiagonalHamiltonian, params: QaoaParams
) -> np.ndarray:
    """Evolve the uniform superposition through all layers, cost then driver."""
    state = uniform_superposition(diagonal.qubit_count)
    for beta, gamma in zip(params.betas, params.gammas):
        state = apply_cost_propagator(state, diagonal, gamma)
        state = apply_driver_layer(state, beta)
    return state


def _objective_batch(
    diagonal: DiagonalHamiltonian, betas: np.ndarray, gammas: np.ndarray
) -> np.ndarray:
    """Expectations for a batch of angle schedules, shapes (n, p) -> (n,)."""
    n, depth = betas.shape
    dim = diagonal.dimension
    state = np.full((n, dim), 1.0 / math.sqrt(dim), dtype=np.complex128)
    for k in range(depth):
        state = apply_cost_propagator(state, diagonal, gammas[:, k])
        state = apply_driver_layer(state, betas[:, k])
    return expectation_diagonal(state, diagonal)


def objective(diagonal: DiagonalHamiltonian, params: QaoaParams) -> float:
    """Energy expectation of the prepared state."""
    return float(expectation_diagonal(prepare_state(diagonal, params), diagonal))


def _params_from_vector(vec: np.ndarray, depth: int) -> QaoaParams:
    return QaoaParams(betas=tuple(vec[:depth]), gammas=tuple(vec[depth:]))


def optimize_angles(
    diagonal: DiagonalHamiltonian,
    depth: int,
    config: OptimizerConfig | None = None,
    rng: np.random.Generator | None = None,
    keep_trace: bool = False,
) -> QaoaResult:
    """Minimize the expectation over the bounded 2p-dimensional angle box.

    Deterministic given the generator state; evaluations never exceed the
    budget and the best point ever seen is returned.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    config = config or OptimizerConfig()
    if rng is None:
        rng = np.random.default_rng(config.seed)

    ndim = 2 * depth
    lo = np.array([config.beta_bounds[0]] * depth + [config.gamma_bounds[0]] * depth)
    hi = np.array([config.beta_bounds[1]] * depth + [config.gamma_bounds[1]] * depth)
    sigma = config.initial_step * (hi - lo)
    min_sigma = 1e-9 * (hi - lo)

    def evaluate(points: np.ndarray) -> np.ndarray:
        return _objective_batch(diagonal, points[:, :depth], points[:, depth:])

    trace: list[tuple[QaoaParams, float]] = []

    def record(points: np.ndarray, values: np.ndarray) -> None:
        if keep_trace:
            trace.extend(
                (_params_from_vector(pt, depth), float(v))
                for pt, v in zip(points, values)
            )

    population = rng.uniform(lo, hi, size=(config.population_size, ndim))
    fitness = evaluate(population)
    record(population, fitness)
    used = config.population_size

    best_idx = int(np.argmin(fitness))
    best_point = population[best_idx].copy()
    best_value = float(fitness[best_idx])

    while used < config.evaluation_budget:
        order = np.argsort(fitness, kind="stable")
        parents = population[order[: config.elite_count]]
        parent_fitness = fitness[order[: config.elite_count]]

        n_children = min(config.population_size, config.evaluation_budget - used)
        choice = rng.integers(0, config.elite_count, size=n_children)
        noise = rng.standard_normal((n_children, ndim)) * sigma
        children = np.clip(parents[choice] + noise, lo, hi)
        child_fitness = evaluate(children)
        record(children, child_fitness)
        used += n_children

        improved = child_fitness < parent_fitness[choice]
        success = float(np.mean(improved)) if n_children else 0.0
        sigma = np.maximum(
            sigma * (config.step_growth if success > 0.2 else config.step_shrink),
            min_sigma,
        )

        pool = np.vstack([parents, children])
        pool_fitness = np.concatenate([parent_fitness, child_fitness])
        keep = np.argsort(pool_fitness, kind="stable")[: config.population_size]
        population, fitness = pool[keep], pool_fitness[keep]

        gen_best = int(np.argmin(child_fitness)) if n_children else 0
        if n_children and child_fitness[gen_best] < best_value:
            best_value = float(child_fitness[gen_best])
            best_point = children[gen_best].copy()

    return QaoaResult(
        best_params=_params_from_vector(best_point, depth),
        best_expectation=best_value,
        approximation_ratio=None,
        evaluations_used=used,
        trace=tuple(trace) if keep_trace else None,
    )


def approximation_ratio(
    state: np.ndarray,
    bks: Assignment,
    shots: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Probability mass on the best known solution: exact when `shots` is
    None, otherwise the fraction of sampled measurements hitting it."""
    if shots is None:
        return probability_of(state, bks)
    if rng is None:
        raise ValueError("shot sampling needs an explicit generator")
    counts = sample_shots(state, shots, rng)
    return counts.frequency(bks.index)


def run_qaoa(
    instance: KnapsackInstance,
    penalties: PenaltyPair,
    depth: int,
    config: OptimizerConfig | None = None,
    shots: int | None = 1024,
    rng: np.random.Generator | None = None,
) -> QaoaResult:
    """Full pipeline for one penalty pair: build the diagonal, optimize the
    angles, and score the best state against the brute-force optimum."""
    config = config or OptimizerConfig()
    if rng is None:
        rng = np.random.default_rng(config.seed)
    bks = canonical_bks_bitstring(instance)
    diagonal = build_diagonal(instance, penalties)
    opt_rng, shot_rng = rng.spawn(2)
    result = optimize_angles(diagonal, depth, config, opt_rng)
    state = prepare_state(diagonal, result.best_params)
    ratio = approximation_ratio(state, bks, shots=shots, rng=shot_rng)
    return replace(result, approximation_ratio=ratio)


def landscape_scan(
    diagonal: DiagonalHamiltonian,
    resolution: int,
    beta_bounds: tuple[float, float] = (0.0, TWO_PI),
    gamma_bounds: tuple[float, float] = (0.0, TWO_PI),
) -> LandscapeGrid:
    """Depth-1 objective on a uniform grid over the half-open bounds."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    beta_axis = np.linspace(*beta_bounds, resolution, endpoint=False)
    gamma_axis = np.linspace(*gamma_bounds, resolution, endpoint=False)
    grid = np.empty((resolution, resolution))
    gammas = gamma_axis[:, None]
    for i, beta in enumerate(beta_axis):
        betas = np.full((resolution, 1), beta)
        grid[i, :] = _objective_batch(diagonal, betas, gammas)
    flat = int(np.argmin(grid))
    argmin = (flat // resolution, flat % resolution)
    return LandscapeGrid(
        beta_axis=beta_axis,
        gamma_axis=gamma_axis,
        expectations=grid,
        min_value=float(grid[argmin]),
        argmin=argmin,
    )
