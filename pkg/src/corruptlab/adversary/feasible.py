"""Exact feasible sets and maximum success probabilities."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from ..costs.function import INF, CostFunction
from ..probkit.transport import FEASIBILITY_SLACK, min_cost_transport, nearest_oblivious
from ..probkit.types import (
    CapExceeded,
    Dist,
    DomainError,
    compositions,
    multinomial_coef,
)
from .types import Sample, TestFunction

FEASIBLE_SET_CAP = 10**6


def sample_cost(rho: CostFunction, clean: Sequence[int], corrupted: Sequence[int]) -> Fraction | None:
    """Exact total cost of a per-coordinate corruption; ``None`` if any arc is forbidden."""
    total = Fraction(0)
    for a, b in zip(clean, corrupted):
        c = rho.entry(a, b)
        if c is INF:
            return None
        total += c
    return total


def _lift(base: Dist, rho: CostFunction) -> Dist:
    if base.domain == rho.domain:
        return base
    if rho.domain.augmented and base.domain == rho.domain.base:
        return base.lift(rho.domain)
    raise DomainError("base distribution does not live on the cost function's domain")


def adaptive_feasible(rho: CostFunction, s: Sample, cap: int = FEASIBLE_SET_CAP) -> Iterator[Sample]:
    """Every ``S'`` with ``sum_i rho(S_i, S'_i) <= m``, in lexicographic index order."""
    idx = s.indices
    m = len(idx)
    options = [[(j, rho.entry(i, j)) for j in range(rho.domain.size) if rho.entry(i, j) is not INF] for i in idx]
    if math.prod(len(o) for o in options) > cap:
        raise CapExceeded(f"feasible set of up to {math.prod(len(o) for o in options)} samples exceeds cap {cap}")
    budget = Fraction(m)
    out = [0] * m

    def dfs(pos: int, remaining: Fraction):
        if pos == m:
            yield Sample.from_indices(rho.domain, out)
            return
        for j, c in options[pos]:
            if c <= remaining:
                out[pos] = j
                yield from dfs(pos + 1, remaining - c)

    yield from dfs(0, budget)


def best_corruption(f: TestFunction, rho: CostFunction, s: Sample) -> tuple[float, Sample]:
    """Sup over the feasible set of ``E f(Phi(S'))``; first maximiser in enumeration order."""
    best_v, best_s = -1.0, s
    for cand in adaptive_feasible(rho, s):
        v = f.subsample_value(rho.domain, cand.counts())
        if v > best_v + 1e-15:
            best_v, best_s = v, cand
    return best_v, best_s


def reachable_counts(rho: CostFunction, counts: Sequence[int]) -> dict[tuple, Fraction]:
    """Corrupted count vectors reachable from a clean multiset, with their cheapest cost.

    Builds the multiset of ``S'`` one source symbol at a time: the ``a_x``
    copies of ``x`` are split among the finite-cost destinations of ``x``.
    """
    size = rho.domain.size
    states: dict[tuple, Fraction] = {(0,) * size: Fraction(0)}
    budget = Fraction(sum(counts))
    for x, a in enumerate(counts):
        if a == 0:
            continue
        dests = rho.destinations(x)
        nxt: dict[tuple, Fraction] = {}
        for split in compositions(a, len(dests)):
            add = [0] * size
            cost = Fraction(0)
            for (j, c), k in zip(dests, split):
                add[j] += k
                if k:
                    cost += c * k
            if cost > budget:
                continue
            for vec, base_cost in states.items():
                total = base_cost + cost
                if total > budget:
                    continue
                key = tuple(u + v for u, v in zip(vec, add))
                prev = nxt.get(key)
                if prev is None or total < prev:
                    nxt[key] = total
        states = nxt
    return states


def count_vector_prob(p: np.ndarray, counts: Sequence[int]) -> float:
    if any(c > 0 and p[j] == 0 for j, c in enumerate(counts)):
        return 0.0
    return multinomial_coef(counts) * float(np.prod([p[j] ** c for j, c in enumerate(counts) if c]))


@dataclass(frozen=True)
class AdaptiveMaxResult:
    value: float
    clean_value: float
    method: str
    best: dict  # clean count vector -> (value, corrupted count vector)


def adaptive_max(
    f: TestFunction,
    rho: CostFunction,
    base: Dist,
    m: int,
    method: str = "counts",
    cap: int = 10**7,
) -> AdaptiveMaxResult:
    """``E_{S ~ D^m}[ sup_{S' feasible} E f(Phi_{m->n}(S')) ]`` computed exactly.

    ``counts`` works on multisets (valid because the subsampling filter makes
    the payoff depend on the multiset only); ``tuples`` enumerates every clean
    tuple and every feasible corruption and serves as an independent route.
    """
    base = _lift(base, rho)
    n = f.arity
    if n > m:
        raise ValueError(f"test arity {n} exceeds sample size {m}")
    size = rho.domain.size
    total = 0.0
    clean_total = 0.0
    best: dict = {}
    if method == "counts":
        for counts in compositions(m, size):
            p = count_vector_prob(base.mass, counts)
            if p == 0.0:
                continue
            top_v, top_c = -1.0, counts
            for vec in sorted(reachable_counts(rho, counts)):
                v = f.subsample_value(rho.domain, vec)
                if v > top_v + 1e-15:
                    top_v, top_c = v, vec
            best[counts] = (top_v, top_c)
            total += p * top_v
            clean_total += p * f.subsample_value(rho.domain, counts)
    elif method == "tuples":
        if m * size**m > cap:
            raise CapExceeded(f"{size}^{m} clean samples exceed cap {cap}")
        for idx in itertools.product(range(size), repeat=m):
            p = float(np.prod(base.mass[list(idx)]))
            if p == 0.0:
                continue
            s = Sample.from_indices(rho.domain, idx)
            v, s_best = best_corruption_tuples(f, rho, s)
            best[idx] = (v, s_best.indices)
            total += p * v
            clean_total += p * f.subsample_value_tuples(s)
    else:
        raise ValueError(f"unknown method {method!r}")
    return AdaptiveMaxResult(total, clean_total, method, best)


def best_corruption_tuples(f: TestFunction, rho: CostFunction, s: Sample) -> tuple[float, Sample]:
    best_v, best_s = -1.0, s
    for cand in adaptive_feasible(rho, s):
        v = f.subsample_value_tuples(cand)
        if v > best_v + 1e-15:
            best_v, best_s = v, cand
    return best_v, best_s


@dataclass(frozen=True)
class ObliviousMaxResult:
    value: float
    dist: Dist
    grid_points: int
    feasible_points: int
    error_bound: float


_GRID_CACHE: dict = {}


def feasible_grid(rho: CostFunction, base: Dist, resolution: int) -> np.ndarray:
    """Grid points ``k / resolution`` of the simplex lying in the feasible set."""
    key = (rho, base, resolution)
    hit = _GRID_CACHE.get(key)
    if hit is not None:
        return hit
    size = base.domain.size
    pts = []
    for c in compositions(resolution, size):
        mass = np.array(c, dtype=float) / resolution
        if min_cost_transport(base, Dist(base.domain, mass), rho) <= 1.0 + FEASIBILITY_SLACK:
            pts.append(mass)
    grid = np.array(pts).reshape(-1, size)
    if len(_GRID_CACHE) > 64:
        _GRID_CACHE.clear()
    _GRID_CACHE[key] = grid
    return grid


def _feasible(rho, base, mass) -> bool:
    if np.any(mass < -1e-12):
        return False
    mass = np.clip(mass, 0.0, None)
    mass = mass / mass.sum()
    return min_cost_transport(base, Dist(base.domain, mass), rho) <= 1.0 + FEASIBILITY_SLACK


def oblivious_max(
    f: TestFunction,
    rho: CostFunction,
    base: Dist,
    resolution: int = 24,
    refine: bool = True,
    max_size: int = 5,
) -> ObliviousMaxResult:
    """``sup_{D' feasible} E_{S ~ D'^n} f(S)`` by simplex gridding plus local refinement.

    Seeds also include, for every point ``y``, the feasible distribution
    closest to the point mass at ``y``.  ``error_bound`` is ``n`` times the
    TV radius of a grid cell; it bounds the loss from gridding only when the
    optimum is within one cell of a feasible grid point.
    """
    base = _lift(base, rho)
    size = base.domain.size
    if size > max_size:
        raise CapExceeded(f"simplex gridding is limited to |X| <= {max_size}")
    grid = feasible_grid(rho, base, resolution)
    seeds = [base.mass]
    for y in range(size):
        target, _ = nearest_oblivious(rho, base, Dist.point_mass(base.domain, base.domain.label(y)))
        seeds.append(target.mass)
    cands = np.vstack([grid, np.array(seeds)]) if len(grid) else np.array(seeds)
    vals = f.iid_values(base.domain, cands)
    order = np.argsort(-vals, kind="stable")
    best_mass, best_val = cands[order[0]].copy(), float(vals[order[0]])
    if refine:
        # Local search from the few best starting points.
        for start in order[: min(3, len(order))]:
            mass, val = _ascend(f, rho, base, cands[start].copy(), float(vals[start]), 1.0 / resolution)
            if val > best_val + 1e-15:
                best_mass, best_val = mass, val
    best_mass = np.clip(best_mass, 0.0, None)
    best_mass /= best_mass.sum()
    radius = (size - 1) / (2.0 * resolution)
    return ObliviousMaxResult(
        value=best_val,
        dist=Dist(base.domain, best_mass),
        grid_points=math.comb(resolution + size - 1, size - 1),
        feasible_points=len(grid),
        error_bound=f.arity * radius,
    )


def _ascend(f, rho, base, mass, val, step, min_step=1e-7, max_rounds=200):
    size = len(mass)
    rounds = 0
    while step >= min_step and rounds < max_rounds:
        rounds += 1
        improved = False
        for i in range(size):
            for j in range(size):
                if i == j or mass[i] <= 0:
                    continue
                delta = min(step, mass[i])
                trial = mass.copy()
                trial[i] -= delta
                trial[j] += delta
                v = float(f.iid_values(base.domain, trial[None, :])[0])
                if v > val + 1e-13 and _feasible(rho, base, trial):
                    mass, val, improved = trial, v, True
        if not improved:
            step /= 2
    return mass, val


def subsample_filter(s: Sample, n: int, rng: np.random.Generator) -> Sample:
    """``n`` entries at distinct uniformly random positions, in draw order."""
    m = len(s)
    if n > m:
        raise ValueError(f"cannot subsample {n} of {m} points")
    pos = rng.choice(m, size=n, replace=False)
    return Sample(s.domain, tuple(s.entries[p] for p in pos))


def recommended_m(n: int, d: int, eps: float, constant: float) -> int:
    """``ceil(constant * n^4 (ln d)^2 / eps^4)``."""
    if d < 2:
        raise ValueError("degree must be at least 2")
    if not 0 < eps < 1 and eps != 1:
        raise ValueError("eps must lie in (0, 1]")
    if constant <= 0:
        raise ValueError("constant must be positive")
    if n < 1:
        raise ValueError("n must be positive")
    return math.ceil(constant * n**4 * math.log(d) ** 2 / eps**4)
