from .builders import (
    LabeledDomain,
    build_additive,
    build_agnostic,
    build_strong,
    build_subtractive,
    identity_cost,
    zero_one_cost,
)
from .function import INF, CostFunction, as_fraction, budget_degree, degree
from .serial import dumps, loads

__all__ = [
    "INF",
    "CostFunction",
    "LabeledDomain",
    "as_fraction",
    "budget_degree",
    "build_additive",
    "build_agnostic",
    "build_strong",
    "build_subtractive",
    "degree",
    "dumps",
    "identity_cost",
    "loads",
    "zero_one_cost",
]
