"""Cost functions for the standard contamination models."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..probkit.types import NULL, Domain
from .function import INF, CostFunction, as_fraction


def _price(eta) -> Fraction:
    eta = as_fraction(eta)
    if not 0 < eta <= 1:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    return 1 / eta


def build_strong(domain: Domain, eta) -> CostFunction:
    """Any change costs ``1/eta``: the adaptive side may rewrite an eta-fraction."""
    price = _price(eta)
    return CostFunction.from_callable(domain, lambda x, y: 0 if x == y else price)


def identity_cost(domain: Domain) -> CostFunction:
    """Only the diagonal is finite; no corruption is possible."""
    return CostFunction.from_callable(domain, lambda x, y: 0 if x == y else INF)


def zero_one_cost(domain: Domain) -> CostFunction:
    """Unit price for any change; transport cost under it is the TV distance."""
    return build_strong(domain, 1)


@dataclass(frozen=True)
class LabeledDomain:
    """All ``(input, label)`` pairs, flattened input-major into a Domain."""

    inputs: tuple
    labels: tuple

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "labels", tuple(self.labels))
        if not self.inputs or not self.labels:
            raise ValueError("inputs and labels must be nonempty")
        if len(set(self.inputs)) != len(self.inputs) or len(set(self.labels)) != len(self.labels):
            raise ValueError("inputs and labels must be unique")

    @property
    def domain(self) -> Domain:
        return Domain(tuple((x, y) for x in self.inputs for y in self.labels))


def build_agnostic(labeled: LabeledDomain, eta) -> CostFunction:
    """Label flips cost ``1/eta``; moving the input is forbidden."""
    price = _price(eta)

    def rho(a, b):
        if a == b:
            return 0
        return price if a[0] == b[0] else INF

    return CostFunction.from_callable(labeled.domain, rho)


def build_subtractive(domain: Domain, eta) -> tuple[Domain, CostFunction]:
    """Deleting a point (sending it to ⌀) costs ``1/eta``; nothing else is allowed."""
    price = _price(eta)
    aug = domain.augment()

    def rho(x, y):
        if x == y:
            return 0
        return price if y is NULL else INF

    return aug, CostFunction.from_callable(aug, rho)


def build_additive(domain: Domain, eta) -> tuple[Domain, CostFunction]:
    """Filling an empty slot (⌀ to any point) costs ``1/eta``; real points are fixed."""
    price = _price(eta)
    aug = domain.augment()

    def rho(x, y):
        if x == y:
            return 0
        return price if x is NULL else INF

    return aug, CostFunction.from_callable(aug, rho)
