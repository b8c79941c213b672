"""Cross-entropy penalty tuning for knapsack QAOA on a dense statevector
simulator, with a seed-reproducible benchmark harness."""

from .knapsack import (
    Assignment,
    DiagonalHamiltonian,
    IsingCoefficients,
    KnapsackInstance,
    PenaltyPair,
    PenaltyValidityWarning,
    UnrepresentableOptimum,
    build_diagonal,
    canonical_bks_bitstring,
    evaluate_binary,
    evaluate_ising,
    expand_ising,
    load_instance,
    solve_bruteforce,
)
from .statevector import (
    ShotCounts,
    apply_cost_propagator,
    apply_driver_layer,
    expectation_diagonal,
    probability_of,
    sample_shots,
    uniform_superposition,
)
from .qaoa import (
    LandscapeGrid,
    OptimizerConfig,
    QaoaParams,
    QaoaResult,
    approximation_ratio,
    landscape_scan,
    objective,
    optimize_angles,
    prepare_state,
    run_qaoa,
)
from .cross_entropy import (
    CeConfig,
    CeDistribution,
    CeTrace,
    ce_generic,
    ce_penalty_optimize,
    sample_truncated_normal,
    update_distribution,
)
from .bench import (
    ExperimentConfig,
    RunRecord,
    builtin_instances,
    get_instance,
    run_benchmark,
    run_ce_mode,
    run_landscape,
    run_random_mode,
)

__version__ = "0.1.0"
