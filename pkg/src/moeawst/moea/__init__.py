from .engine import (
    ALGORITHMS,
    Evaluation,
    GenerationLog,
    Individual,
    OptimizerConfig,
    Problem,
    RunResult,
    pareto_subset,
    rank_population,
    run_moea_wst,
    run_moead,
    run_nsga2,
    run_random_search,
    survive,
)
from .operators import (
    FrontTooSmallWarning,
    binary_tournament,
    bitflip_mutation,
    feasible_by_design_crossover,
    inversion_mutation,
    one_point_crossover,
    reverse_segment,
    sbx_crossover,
    wst_tournament_select,
)
from .pareto import (
    WeightVectorSet,
    build_weight_vectors,
    chebyshev_scalarize,
    coverage_metric,
    crowding_distance,
    dominates,
    hypervolume,
    non_dominated_mask,
    non_dominated_sort,
    weakly_dominates,
    weighted_sum_scalarize,
)
