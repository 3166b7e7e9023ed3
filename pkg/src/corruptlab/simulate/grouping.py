"""Grouping adaptive samples by cores and measuring how product-like the groups are."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..probkit.info import (
    conditional_mutual_information,
    conditional_total_correlation,
    mutual_information,
)
from ..probkit.types import Dist, Domain, DomainError, JointDist


@dataclass(frozen=True)
class Core:
    domain: Domain
    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        for x in self.entries:
            if x not in self.domain:
                raise DomainError(f"core entry {x!r} is not in the domain")

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(self.domain.index(x) for x in self.entries)


def _ordered_marginal(joint: JointDist, width: int, exchangeable: bool) -> np.ndarray:
    """Average of the marginals over every ordered choice of ``width`` distinct positions."""
    if width == 0:
        return np.ones(())
    if exchangeable:
        return np.array(joint.marginal(list(range(width))))
    acc = np.zeros((joint.domain.size,) * width)
    count = 0
    for combo in itertools.combinations(range(joint.arity), width):
        table = joint.marginal(list(combo))
        for perm in itertools.permutations(range(width)):
            acc += np.transpose(table, perm)
            count += 1
    return acc / count


class GroupedDist:
    """Joint law of a size-``n`` subsample and a disjoint size-``k`` core.

    ``table`` has ``n + k`` axes: the first ``n`` index the subsample, the last
    ``k`` the core.  Every ordered disjoint choice of positions gets equal
    weight.
    """

    def __init__(self, adaptive: JointDist, n: int, k: int, table: np.ndarray, exchangeable_path: bool):
        self.adaptive = adaptive
        self.n = n
        self.k = k
        self.table = table
        self.exchangeable_path = exchangeable_path

    @property
    def domain(self) -> Domain:
        return self.adaptive.domain

    @property
    def m(self) -> int:
        return self.adaptive.arity

    def subsample_law(self) -> np.ndarray:
        """Law of the subsample alone (the core summed out)."""
        if self.k == 0:
            return self.table
        return self.table.sum(axis=tuple(range(self.n, self.n + self.k)))

    def core_probs(self) -> np.ndarray:
        if self.k == 0:
            return np.ones(())
        return self.table.sum(axis=tuple(range(self.n)))

    def cores(self, tol: float = 0.0):
        """Cores with positive probability, in index order, with their probability."""
        probs = self.core_probs()
        if self.k == 0:
            yield (), 1.0
            return
        for idx in itertools.product(range(self.domain.size), repeat=self.k):
            p = float(probs[idx])
            if p > tol:
                yield idx, p

    def group(self, core_idx: Sequence[int]) -> np.ndarray:
        """Law of the subsample given the core (index tuple)."""
        core_idx = tuple(core_idx)
        if self.k == 0:
            return self.table
        slab = self.table[(Ellipsis,) + core_idx]
        s = slab.sum()
        if s <= 0:
            raise ValueError(f"core {core_idx} has probability zero")
        return slab / s


def grouped(adaptive: JointDist, n: int, k: int) -> GroupedDist:
    if n < 1 or k < 0 or n + k > adaptive.arity:
        raise ValueError(f"need 1 <= n and n + k <= m; got n={n}, k={k}, m={adaptive.arity}")
    exch = adaptive.is_exchangeable(1e-12)
    table = _ordered_marginal(adaptive, n + k, exch)
    return GroupedDist(adaptive, n, k, table, exch)


def _resolve_core(g: GroupedDist, core) -> tuple[int, ...]:
    if isinstance(core, Core):
        return core.indices
    return tuple(g.domain.index(x) for x in core)


def goal_distribution(g: GroupedDist, core) -> Dist:
    """Average point of the group for ``core`` (a :class:`Core` or label tuple)."""
    law = g.group(_resolve_core(g, core))
    return Dist(g.domain, _average_marginal(law))


def _average_marginal(law: np.ndarray) -> np.ndarray:
    n = law.ndim
    acc = np.zeros(law.shape[0])
    for i in range(n):
        other = tuple(j for j in range(n) if j != i)
        acc += law.sum(axis=other) if other else law
    return acc / n


def power_table(mass: np.ndarray, n: int) -> np.ndarray:
    out = mass
    for _ in range(n - 1):
        out = np.multiply.outer(out, mass)
    return out


@dataclass(frozen=True)
class GroupingError:
    value: float
    bound: float | None
    k: int


def grouping_error(g: GroupedDist, k_max: int | None = None, d: int | None = None) -> GroupingError:
    """``E_c tv(group(c), goal(c)^n)``, exactly, next to ``sqrt(n^2 ln d / (2 k_max))``."""
    total = 0.0
    for core, p in g.cores():
        law = g.group(core)
        goal = _average_marginal(law)
        total += p * 0.5 * float(np.abs(law - power_table(goal, g.n)).sum())
    bound = None
    if k_max and d:
        bound = math.sqrt(g.n**2 * math.log(d) / (2 * k_max))
    return GroupingError(total, bound, g.k)


def _blocks(m: int, sizes: Sequence[int], exchangeable: bool):
    """Disjoint unordered index blocks of the given sizes, each choice once."""
    if exchangeable:
        start, out = 0, []
        for s in sizes:
            out.append(list(range(start, start + s)))
            start += s
        yield out
        return

    def rec(avail, rest):
        if not rest:
            yield []
            return
        for combo in itertools.combinations(avail, rest[0]):
            left = [i for i in avail if i not in combo]
            for tail in rec(left, rest[1:]):
                yield [list(combo)] + tail

    yield from rec(list(range(m)), list(sizes))


def cor_average(joint: JointDist, a: int, b: int, exchangeable: bool | None = None) -> float:
    """Total correlation of ``a`` coordinates given ``b`` others, averaged over blocks."""
    if exchangeable is None:
        exchangeable = joint.is_exchangeable(1e-12)
    vals = [conditional_total_correlation(joint, A, B) for A, B in _blocks(joint.arity, [a, b], exchangeable)]
    return float(np.mean(vals))


def mi_average(joint: JointDist, a: int, b: int, exchangeable: bool | None = None) -> float:
    """Mutual information between ``a`` and ``b`` disjoint coordinates, averaged over blocks."""
    if b == 0:
        return 0.0
    if exchangeable is None:
        exchangeable = joint.is_exchangeable(1e-12)
    vals = [mutual_information(joint, A, B) for A, B in _blocks(joint.arity, [a, b], exchangeable)]
    return float(np.mean(vals))


def cmi_average(joint: JointDist, a: int, b: int, c: int, exchangeable: bool | None = None) -> float:
    if exchangeable is None:
        exchangeable = joint.is_exchangeable(1e-12)
    vals = [
        conditional_mutual_information(joint, A, B, C)
        for A, B, C in _blocks(joint.arity, [a, b, c], exchangeable)
    ]
    return float(np.mean(vals))


@dataclass(frozen=True)
class ScanResult:
    k_star: int
    values: tuple
    rhs: float
    residual: float
    exchangeable_path: bool

    @property
    def holds(self) -> bool:
        return self.residual >= -1e-9


def correlation_rounding_scan(joint: JointDist, n: int, k_max: int) -> ScanResult:
    """Conditional total correlation for every core size up to ``k_max``.

    Picks the smallest minimiser and compares the minimum with
    ``n(n-1) / (2(k_max+1)) * I(1; n + k_max - 1)``.
    """
    if n < 1 or k_max < 0 or n + k_max > joint.arity:
        raise ValueError(f"need n + k_max <= m; got n={n}, k_max={k_max}, m={joint.arity}")
    exch = joint.is_exchangeable(1e-12)
    values = tuple(cor_average(joint, n, k, exch) for k in range(k_max + 1))
    best = min(values)
    k_star = next(k for k, v in enumerate(values) if v <= best + 1e-12)
    rhs = n * (n - 1) / (2 * (k_max + 1)) * mi_average(joint, 1, n + k_max - 1, exch)
    return ScanResult(k_star, values, rhs, rhs - best, exch)
