"""Adaptive simulation of an oblivious adversary by reverting expensive corruptions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..costs.function import CostFunction
from ..probkit.transport import FEASIBILITY_SLACK, optimal_coupling
from ..probkit.types import Dist
from .feasible import _lift
from .types import AdaptiveStrategy, RemovalBudgetReport, TestFunction

BATCH = 2_000


def delta_removals(costs: Sequence, budget) -> int:
    """Fewest entries to drop so the rest sum to at most ``budget``.

    Dropping the largest entries first is optimal: any set of ``r`` removals
    leaves at least the sum of the ``len - r`` smallest entries.
    """
    vals = list(costs)
    if any(c < 0 for c in vals):
        raise ValueError("costs must be nonnegative")
    vals.sort(reverse=True)
    total = sum(vals)
    removed = 0
    while total > budget:
        total -= vals[removed]
        removed += 1
    return removed


def delta_removals_batch(costs: np.ndarray, budget: float, slack: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise :func:`delta_removals` plus the descending-cost order of each row."""
    order = np.argsort(-costs, axis=1, kind="stable")
    sorted_c = np.take_along_axis(costs, order, axis=1)
    total = sorted_c.sum(axis=1)
    csum = np.concatenate([np.zeros((costs.shape[0], 1)), np.cumsum(sorted_c, axis=1)], axis=1)
    remaining = total[:, None] - csum
    counts = np.argmax(remaining <= budget + slack, axis=1)
    return counts, order


def adaptive_simulates_oblivious(rho: CostFunction, base: Dist, target: Dist, m: int) -> AdaptiveStrategy:
    """Strategy that draws each corrupted point from the optimal coupling given
    the clean point, then reverts the costliest changes until the realised
    total cost is at most ``m``."""
    base = _lift(base, rho)
    target = _lift(target, rho)
    cost, coupling = optimal_coupling(base, target, rho)
    if not cost <= 1.0 + FEASIBILITY_SLACK:
        raise ValueError(f"target is not a feasible oblivious corruption (transport cost {cost})")
    size = base.domain.size
    kernel = np.array([coupling.conditional(i) for i in range(size)])
    cum = np.cumsum(kernel, axis=1)
    cum[:, -1] = 1.0
    price = rho.finite_values

    def callback(clean, rng):
        x = np.asarray(clean)
        u = rng.random(len(x))
        y = (u[:, None] > cum[x]).sum(axis=1)
        counts, order = delta_removals_batch(price[x, y][None, :], float(m))
        y[order[0, : counts[0]]] = x[order[0, : counts[0]]]
        return tuple(int(v) for v in y)

    return AdaptiveStrategy(
        base.domain,
        m,
        callback=callback,
        name="revert-costliest",
        meta={"kernel": kernel, "cum": cum, "price": price, "transport_cost": cost, "target": target},
    )


@dataclass(frozen=True)
class EasyDirectionResult:
    adaptive_value: float
    adaptive_stderr: float
    oblivious_value: float
    gap: float
    removals: RemovalBudgetReport
    trials: int
    seed: int
    max_realised_cost: float


def run_easy_direction_mc(
    strategy: AdaptiveStrategy, f: TestFunction, base: Dist, trials: int, seed: int
) -> EasyDirectionResult:
    """Monte Carlo value of ``f`` after subsampling the strategy's output.

    The subsampling expectation is exact given the corrupted multiset.  Trials
    run in fixed blocks, each with its own stream spawned from ``seed``.
    """
    meta = strategy.meta
    cum, price, m = meta["cum"], meta["price"], strategy.m
    domain = strategy.domain
    base = base if base.domain == domain else base.lift(domain)
    base_cum = np.cumsum(base.mass)
    base_cum[-1] = 1.0
    values = np.empty(trials)
    removals = np.empty(trials, dtype=np.int64)
    worst = 0.0
    size = domain.size
    n_blocks = math.ceil(trials / BATCH)
    for b in range(n_blocks):
        rng = np.random.default_rng(np.random.SeedSequence([seed, b]))
        lo, hi = b * BATCH, min(trials, (b + 1) * BATCH)
        k = hi - lo
        x = (rng.random((k, m))[:, :, None] > base_cum[None, None, :]).sum(axis=2)
        u = rng.random((k, m))
        y = (u[:, :, None] > cum[x]).sum(axis=2)
        costs = price[x, y]
        counts, order = delta_removals_batch(costs, float(m))
        rank = np.empty_like(order)
        np.put_along_axis(rank, order, np.arange(m)[None, :].repeat(k, 0), axis=1)
        revert = rank < counts[:, None]
        y = np.where(revert, x, y)
        worst = max(worst, float(price[x, y].sum(axis=1).max()))
        cnt = np.stack([(y == j).sum(axis=1) for j in range(size)], axis=1)
        values[lo:hi] = [f.subsample_value(domain, tuple(row)) for row in cnt]
        removals[lo:hi] = counts
    target = meta["target"]
    oblivious = f.iid_value(target)
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return EasyDirectionResult(
        adaptive_value=mean,
        adaptive_stderr=se,
        oblivious_value=oblivious,
        gap=abs(mean - oblivious),
        removals=RemovalBudgetReport(removals, m),
        trials=trials,
        seed=seed,
        max_realised_cost=worst,
    )


def removal_statistics(sampler, n: int, trials: int, seed: int) -> RemovalBudgetReport:
    """Distribution of the removal count for ``n`` i.i.d. costs drawn by ``sampler(rng, shape)``."""
    counts = np.empty(trials, dtype=np.int64)
    for b in range(math.ceil(trials / BATCH)):
        rng = np.random.default_rng(np.random.SeedSequence([seed, b]))
        lo, hi = b * BATCH, min(trials, (b + 1) * BATCH)
        c, _ = delta_removals_batch(sampler(rng, (hi - lo, n)), float(n))
        counts[lo:hi] = c
    return RemovalBudgetReport(counts, n)
