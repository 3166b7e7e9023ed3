from .grouping import (
    Core,
    GroupedDist,
    GroupingError,
    ScanResult,
    cmi_average,
    cor_average,
    correlation_rounding_scan,
    goal_distribution,
    grouped,
    grouping_error,
    mi_average,
    power_table,
)
from .rounding import (
    REPORT_SCHEMA,
    InfoCheck,
    NoCorruptionRounding,
    RoundingResult,
    SimulationReport,
    few_groups_rounding_exact,
    indistinguishability_gap,
    low_degree_info_check,
    mixture_rounding_check,
    no_corruption_rounding_mc,
    rounding_error,
    simulate_randomized_oblivious,
)

__all__ = [
    "Core",
    "GroupedDist",
    "GroupingError",
    "InfoCheck",
    "NoCorruptionRounding",
    "REPORT_SCHEMA",
    "RoundingResult",
    "ScanResult",
    "SimulationReport",
    "cmi_average",
    "cor_average",
    "correlation_rounding_scan",
    "few_groups_rounding_exact",
    "goal_distribution",
    "grouped",
    "grouping_error",
    "indistinguishability_gap",
    "low_degree_info_check",
    "mi_average",
    "mixture_rounding_check",
    "no_corruption_rounding_mc",
    "power_table",
    "rounding_error",
    "simulate_randomized_oblivious",
]
