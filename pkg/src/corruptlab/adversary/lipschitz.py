"""Transferring an oblivious corruption from one base distribution to a nearby one."""
from __future__ import annotations

import numpy as np

from ..costs.function import CostFunction
from ..probkit.transport import FEASIBILITY_SLACK, optimal_coupling
from ..probkit.types import Coupling, Dist


def maximal_coupling(p: Dist, q: Dist) -> Coupling:
    """Coupling that agrees with probability ``1 - tv(p, q)``."""
    n = p.domain.size
    common = np.minimum(p.mass, q.mass)
    table = np.diag(common)
    ep, eq = p.mass - common, q.mass - common
    excess = ep.sum()
    if excess > 0:
        table = table + np.outer(ep, eq) / excess
    return Coupling(p, q, table.reshape(n, n))


def transfer_corruption(rho: CostFunction, d1: Dist, d2: Dist, d1_corrupt: Dist) -> tuple[Dist, float]:
    """Corruption of ``d2`` that stays within ``tv(d1, d2)`` of ``d1_corrupt``.

    Couple ``x1 ~ d1`` and ``x2 ~ d2`` maximally, draw ``y1`` from the optimal
    transport plan given ``x1``, and set ``y2 = y1`` when ``x1 = x2`` and
    ``y2 = x2`` otherwise.  Returns the law of ``y2`` and the expected cost of
    the induced coupling of ``x2`` and ``y2``.
    """
    cost1, plan = optimal_coupling(d1, d1_corrupt, rho)
    if not cost1 <= 1.0 + FEASIBILITY_SLACK:
        raise ValueError("d1_corrupt is not a feasible corruption of d1")
    pair = maximal_coupling(d1, d2).table
    size = d1.domain.size
    kernel = np.array([plan.conditional(i) for i in range(size)])
    same = np.diag(pair)
    mass = same @ kernel + (pair.sum(axis=0) - same)
    # cost of the (x2, y2) coupling: only agreeing pairs move
    moved = same[:, None] * kernel
    price = np.where(rho.finite_mask, rho.finite_values, 0.0)
    cost2 = float((moved * price).sum())
    mass = np.clip(mass, 0.0, None)
    return Dist(d2.domain, mass / mass.sum()), cost2


def random_feasible_corruption(rho: CostFunction, base: Dist, rng: np.random.Generator) -> Dist:
    """A random member of the feasible set.

    Draws a random kernel over finite-cost destinations, then mixes it with
    the identity just enough to bring the expected cost down to 1.
    """
    size = base.domain.size
    mask = rho.finite_mask
    kernel = np.zeros((size, size))
    for i in range(size):
        dests = np.nonzero(mask[i])[0]
        kernel[i, dests] = rng.dirichlet(np.full(len(dests), 0.5))
    plan = base.mass[:, None] * kernel
    cost = float((plan * np.where(mask, rho.finite_values, 0.0)).sum())
    t = 1.0 if cost <= 1.0 else 1.0 / cost
    plan = t * plan + (1 - t) * np.diag(base.mass)
    mass = np.clip(plan.sum(axis=0), 0.0, None)
    return Dist(base.domain, mass / mass.sum())
