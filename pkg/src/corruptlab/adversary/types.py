"""Samples, test functions and adaptive strategies."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from ..probkit.types import (
    DEFAULT_CELL_CAP,
    Dist,
    Domain,
    DomainError,
    JointDist,
    check_cap,
    compositions,
    multinomial_coef,
)


@dataclass(frozen=True)
class Sample:
    domain: Domain
    entries: tuple

    def __post_init__(self):
        entries = tuple(self.entries)
        for x in entries:
            if x not in self.domain:
                raise DomainError(f"sample entry {x!r} is not in the domain")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_indices(cls, domain: Domain, idx: Iterable[int]) -> "Sample":
        return cls(domain, tuple(domain.label(i) for i in idx))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(self.domain.index(x) for x in self.entries)

    def counts(self) -> tuple[int, ...]:
        """Multiset view: how often each domain element occurs."""
        out = [0] * self.domain.size
        for i in self.indices:
            out[i] += 1
        return tuple(out)

    def empirical(self) -> Dist:
        c = np.array(self.counts(), dtype=float)
        return Dist(self.domain, c / c.sum())


def _falling(a: int, b: int) -> int:
    return math.perm(a, b) if b <= a else 0


class TestFunction:
    """A test ``f: X^n -> [0, 1]`` on label tuples.

    Every quantity this package needs from ``f`` is a linear functional of
    ``F(c) = sum of f(t) over tuples t with count vector c``, so that table is
    built once per domain and cached.  For ``exchangeable`` functions one
    representative per count vector is evaluated instead of all ``|X|^n``
    tuples; a few random permutations are spot-checked.
    """

    __test__ = False  # not a pytest class

    def __init__(
        self,
        arity: int,
        evaluator: Callable[[tuple], float],
        exchangeable: bool = False,
        name: str = "f",
    ):
        if arity < 1:
            raise ValueError("arity must be at least 1")
        self.arity = arity
        self.evaluator = evaluator
        self.exchangeable = exchangeable
        self.name = name
        self._tables: dict = {}
        self._sub_cache: dict = {}

    def __repr__(self) -> str:
        return f"TestFunction({self.name}, n={self.arity}, exchangeable={self.exchangeable})"

    def __call__(self, labels: Sequence) -> float:
        labels = tuple(labels)
        if len(labels) != self.arity:
            raise ValueError(f"{self.name} expects {self.arity} points, got {len(labels)}")
        v = float(self.evaluator(labels))
        if not (-1e-12 <= v <= 1 + 1e-12):
            raise ValueError(f"{self.name} returned {v}, outside [0, 1]")
        return min(max(v, 0.0), 1.0)

    def count_table(self, domain: Domain, cap: int = DEFAULT_CELL_CAP) -> tuple[np.ndarray, np.ndarray]:
        """``(C, F)``: count vectors as rows of ``C`` and their summed values ``F``."""
        key = domain
        if key in self._tables:
            return self._tables[key]
        n, size = self.arity, domain.size
        vectors = list(compositions(n, size))
        pos = {c: i for i, c in enumerate(vectors)}
        F = np.zeros(len(vectors))
        if self.exchangeable:
            rng = np.random.default_rng(0)
            for i, c in enumerate(vectors):
                rep = tuple(domain.label(j) for j, k in enumerate(c) for _ in range(k))
                v = self(rep)
                if n > 1:
                    for _ in range(2):
                        perm = tuple(rep[p] for p in rng.permutation(n))
                        if abs(self(perm) - v) > 1e-12:
                            raise ValueError(f"{self.name} is flagged exchangeable but is not")
                F[i] = multinomial_coef(c) * v
        else:
            check_cap(size, n, cap)
            for t in itertools.product(range(size), repeat=n):
                c = [0] * size
                for j in t:
                    c[j] += 1
                F[pos[tuple(c)]] += self(tuple(domain.label(j) for j in t))
        C = np.array(vectors, dtype=np.int64).reshape(len(vectors), size)
        self._tables[key] = (C, F)
        return C, F

    def iid_value(self, p: Dist) -> float:
        """``E_{S ~ p^n}[f(S)]``."""
        C, F = self.count_table(p.domain)
        with np.errstate(divide="ignore", invalid="ignore"):
            weights = np.prod(np.where(C > 0, p.mass[None, :] ** C, 1.0), axis=1)
        return float(weights @ F)

    def iid_values(self, domain: Domain, masses: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`iid_value` over the rows of ``masses``."""
        C, F = self.count_table(domain)
        masses = np.asarray(masses, dtype=float)
        logs = np.where(C[None, :, :] > 0, masses[:, None, :] ** C[None, :, :], 1.0)
        return np.prod(logs, axis=2) @ F

    def subsample_value(self, domain: Domain, counts: Sequence[int]) -> float:
        """``E[f(Phi_{m->n}(S))]`` for any ``S`` with the given count vector.

        Positions are drawn uniformly without replacement, so the value depends
        only on the multiset of ``S``: each ordered tuple with count vector
        ``c`` appears with probability ``prod_j (counts_j)_(c_j) / (m)_n``.
        """
        counts = tuple(int(c) for c in counts)
        key = (domain, counts)
        hit = self._sub_cache.get(key)
        if hit is not None:
            return hit
        m = sum(counts)
        n = self.arity
        if n > m:
            raise ValueError(f"cannot subsample {n} points from {m}")
        C, F = self.count_table(domain)
        total = 0.0
        denom = _falling(m, n)
        for row, val in zip(C, F):
            if val == 0.0:
                continue
            w = 1
            for a, c in zip(counts, row):
                if c:
                    w *= _falling(a, int(c))
                    if w == 0:
                        break
            if w:
                total += w * val
        value = total / denom
        self._sub_cache[key] = value
        return value

    def subsample_value_tuples(self, sample: Sample) -> float:
        """Same quantity by enumerating every ordered choice of positions."""
        m, n = len(sample), self.arity
        if n > m:
            raise ValueError(f"cannot subsample {n} points from {m}")
        total = 0.0
        count = 0
        for pos in itertools.permutations(range(m), n):
            total += self(tuple(sample.entries[p] for p in pos))
            count += 1
        return total / count


def constant_test(arity: int, value: float) -> TestFunction:
    return TestFunction(arity, lambda s: value, exchangeable=True, name=f"const{value}")


def all_equal_test(arity: int) -> TestFunction:
    return TestFunction(arity, lambda s: float(all(x == s[0] for x in s)), exchangeable=True, name="all_equal")


@dataclass
class AdaptiveStrategy:
    """Maps a clean sample (index tuple) to its corruption.

    Exact mode: ``table`` maps every clean tuple to either one corrupted tuple
    or a *list* of ``(weight, corrupted tuple)`` pairs (for strategies that
    randomise ties).  Missing keys mean "leave the sample alone".  Monte Carlo mode: ``callback(indices, rng)``.
    """

    domain: Domain
    m: int
    table: Mapping[tuple, object] | None = None
    callback: Callable | None = None
    name: str = "strategy"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.table is None) == (self.callback is None):
            raise ValueError("give exactly one of table or callback")

    def outcomes(self, clean: tuple) -> list[tuple[float, tuple]]:
        if self.table is None:
            raise ValueError("outcome lists are only available in table mode")
        out = self.table.get(tuple(clean), tuple(clean))
        if isinstance(out, list):
            return [(float(w), tuple(t)) for w, t in out]
        return [(1.0, tuple(out))]

    def apply(self, clean: Sequence[int], rng: np.random.Generator | None = None) -> tuple:
        clean = tuple(int(i) for i in clean)
        if self.callback is not None:
            return tuple(self.callback(clean, rng))
        choices = self.outcomes(clean)
        if len(choices) == 1:
            return choices[0][1]
        if rng is None:
            raise ValueError("a randomised table entry needs an rng")
        w = np.array([c[0] for c in choices])
        return choices[int(rng.choice(len(choices), p=w / w.sum()))][1]

    def check_budget(self, rho, clean: Sequence[int], corrupted: Sequence[int]) -> bool:
        from .feasible import sample_cost

        cost = sample_cost(rho, clean, corrupted)
        return cost is not None and cost <= len(clean)

    def verify(self, rho) -> None:
        """Raise if any table entry exceeds the per-sample budget."""
        for clean in self.table or {}:
            for _, corrupted in self.outcomes(clean):
                if not self.check_budget(rho, clean, corrupted):
                    raise ValueError(f"{self.name}: {clean} -> {corrupted} exceeds the budget")

    def pushforward(self, base: Dist, cap: int = DEFAULT_CELL_CAP) -> JointDist:
        """Law of the corrupted sample when the clean one is ``base^m``."""
        size = self.domain.size
        check_cap(size, self.m, cap)
        table = np.zeros((size,) * self.m)
        for clean in itertools.product(range(size), repeat=self.m):
            p = float(np.prod(base.mass[list(clean)]))
            if p == 0.0:
                continue
            if self.table is not None:
                for w, out in self.outcomes(clean):
                    table[out] += p * w
            else:
                table[self.apply(clean)] += p
        return JointDist(self.domain, table, cap)


def identity_strategy(domain: Domain, m: int) -> AdaptiveStrategy:
    return AdaptiveStrategy(domain, m, callback=lambda s, rng=None: s, name="identity")


@dataclass(frozen=True)
class RemovalBudgetReport:
    counts: np.ndarray
    points: int

    def __post_init__(self):
        c = np.asarray(self.counts)
        if np.any(c < 0) or np.any(c > self.points):
            raise ValueError("removal counts must lie in [0, points]")

    @property
    def mean(self) -> float:
        return float(np.mean(self.counts))

    @property
    def stderr(self) -> float:
        return float(np.std(self.counts, ddof=1) / np.sqrt(len(self.counts))) if len(self.counts) > 1 else 0.0

    @property
    def bound(self) -> float:
        return 5.0 * math.sqrt(self.points)

    def tail(self, v: float) -> tuple[float, float, float]:
        """Empirical Pr[count >= v], its standard error, and 2/v + 4n/v^2."""
        hits = np.asarray(self.counts) >= v
        p = float(hits.mean())
        se = math.sqrt(max(p * (1 - p), 0.0) / len(hits))
        return p, se, 2.0 / v + 4.0 * self.points / v**2
