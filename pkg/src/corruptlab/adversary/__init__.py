from .additive import (
    adaptive_additive_max,
    added_points,
    binomial_max,
    clean_points,
    conversion_size,
    expected_clean_deviation,
    mal_max,
    malicious_run,
    native_subtractive_max,
    noniid_max,
    noniid_run,
    oblivious_add_max,
    oblivious_sub_max,
    resample_coupling,
    subtractive_test,
)
from .easy import (
    EasyDirectionResult,
    adaptive_simulates_oblivious,
    delta_removals,
    delta_removals_batch,
    removal_statistics,
    run_easy_direction_mc,
)
from .feasible import (
    AdaptiveMaxResult,
    ObliviousMaxResult,
    adaptive_feasible,
    adaptive_max,
    best_corruption,
    oblivious_max,
    reachable_counts,
    recommended_m,
    sample_cost,
    subsample_filter,
)
from .lipschitz import maximal_coupling, random_feasible_corruption, transfer_corruption
from .types import (
    AdaptiveStrategy,
    RemovalBudgetReport,
    Sample,
    TestFunction,
    all_equal_test,
    constant_test,
    identity_strategy,
)

__all__ = [
    "AdaptiveMaxResult",
    "AdaptiveStrategy",
    "EasyDirectionResult",
    "ObliviousMaxResult",
    "RemovalBudgetReport",
    "Sample",
    "TestFunction",
    "adaptive_additive_max",
    "adaptive_feasible",
    "adaptive_max",
    "adaptive_simulates_oblivious",
    "added_points",
    "all_equal_test",
    "best_corruption",
    "binomial_max",
    "clean_points",
    "constant_test",
    "conversion_size",
    "delta_removals",
    "delta_removals_batch",
    "expected_clean_deviation",
    "identity_strategy",
    "mal_max",
    "malicious_run",
    "maximal_coupling",
    "native_subtractive_max",
    "noniid_max",
    "noniid_run",
    "oblivious_add_max",
    "oblivious_max",
    "oblivious_sub_max",
    "random_feasible_corruption",
    "reachable_counts",
    "recommended_m",
    "removal_statistics",
    "resample_coupling",
    "run_easy_direction_mc",
    "sample_cost",
    "subsample_filter",
    "subtractive_test",
    "transfer_corruption",
]
