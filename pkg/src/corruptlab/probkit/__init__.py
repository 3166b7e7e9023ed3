from .info import (
    conditional_mutual_information,
    conditional_total_correlation,
    entropy,
    kl_divergence,
    mutual_information,
    total_correlation,
    tv_distance,
)
from .simplex import LPError, solve
from .transport import is_feasible, min_cost_transport, nearest_oblivious, optimal_coupling
from .types import (
    NULL,
    CapExceeded,
    Coupling,
    Dist,
    Domain,
    DomainError,
    JointDist,
    all_tuples,
    compositions,
    mixture,
    multinomial_coef,
    product_power,
)

__all__ = [
    "NULL",
    "CapExceeded",
    "Coupling",
    "Dist",
    "Domain",
    "DomainError",
    "JointDist",
    "LPError",
    "all_tuples",
    "compositions",
    "conditional_mutual_information",
    "conditional_total_correlation",
    "entropy",
    "is_feasible",
    "kl_divergence",
    "min_cost_transport",
    "mixture",
    "multinomial_coef",
    "mutual_information",
    "nearest_oblivious",
    "optimal_coupling",
    "product_power",
    "solve",
    "total_correlation",
    "tv_distance",
]
