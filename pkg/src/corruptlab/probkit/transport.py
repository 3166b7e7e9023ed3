"""Optimal transport between finite distributions under a cost table.

``rho`` is anything exposing ``domain``, ``finite_mask`` and ``finite_values``
(see :class:`corruptlab.costs.CostFunction`).  Forbidden arcs never enter the
linear program, so infinite costs are never multiplied by anything.
"""
from __future__ import annotations

import math

import numpy as np

from .info import tv_distance
from .simplex import Infeasible, solve
from .types import Coupling, Dist, DomainError

FEASIBILITY_SLACK = 1e-7


def _check(p: Dist, rho) -> None:
    if p.domain != rho.domain:
        raise DomainError("distribution and cost function live on different domains")


def _arcs(rho, rows=None):
    mask = rho.finite_mask
    n = mask.shape[0]
    rows = range(n) if rows is None else rows
    return [(i, j) for i in rows for j in range(n) if mask[i, j]]


def optimal_coupling(p: Dist, q: Dist, rho) -> tuple[float, Coupling | None]:
    """Cheapest coupling of ``p`` and ``q``; ``(inf, None)`` when none is finite."""
    _check(p, rho)
    _check(q, rho)
    n = p.domain.size
    # Rows without mass carry no flow; dropping them keeps the LP small.
    rows = [i for i in range(n) if p.mass[i] > 0]
    cols = [j for j in range(n) if q.mass[j] > 0]
    col_pos = {j: c for c, j in enumerate(cols)}
    arcs = [(i, j) for (i, j) in _arcs(rho, rows) if j in col_pos]
    if not arcs:
        return math.inf, None
    cost = np.array([rho.finite_values[i, j] for i, j in arcs])
    A = np.zeros((len(rows) + len(cols), len(arcs)))
    for a, (i, j) in enumerate(arcs):
        A[rows.index(i), a] = 1.0
        A[len(rows) + col_pos[j], a] = 1.0
    b = np.concatenate([p.mass[rows], q.mass[cols]])
    try:
        res = solve(cost, A_eq=A, b_eq=b)
    except Infeasible:
        return math.inf, None
    table = np.zeros((n, n))
    for a, (i, j) in enumerate(arcs):
        table[i, j] = res.x[a]
    # Renormalise the tiny residuals the solver leaves behind.
    table = _repair(table, p.mass, q.mass)
    return float(res.objective), Coupling(p, q, table)


def _repair(table: np.ndarray, r: np.ndarray, c: np.ndarray) -> np.ndarray:
    t = np.clip(table, 0.0, None)
    for _ in range(3):
        rs = t.sum(axis=1)
        scale = np.divide(r, rs, out=np.zeros_like(r), where=rs > 0)
        t = t * scale[:, None]
        cs = t.sum(axis=0)
        scale = np.divide(c, cs, out=np.zeros_like(c), where=cs > 0)
        t = t * scale[None, :]
    return t


def min_cost_transport(p: Dist, q: Dist, rho) -> float:
    """Infimum over couplings of the expected corruption cost."""
    value, _ = optimal_coupling(p, q, rho)
    return value


def is_feasible(base: Dist, target: Dist, rho, slack: float = FEASIBILITY_SLACK) -> bool:
    return min_cost_transport(base, target, rho) <= 1.0 + slack


def nearest_oblivious(rho, base: Dist, goal: Dist) -> tuple[Dist, float]:
    """Closest distribution to ``goal`` (in TV) among feasible corruptions of ``base``.

    One LP: flow ``x_ij`` on finite arcs out of ``base`` with expected cost at
    most 1, plus slacks ``t_j >= |sum_i x_ij - goal_j|``; minimise ``sum t / 2``.
    """
    _check(base, rho)
    _check(goal, rho)
    n = base.domain.size
    rows = [i for i in range(n) if base.mass[i] > 0]
    arcs = _arcs(rho, rows)
    n_arc = len(arcs)
    n_var = n_arc + n
    c = np.concatenate([np.zeros(n_arc), 0.5 * np.ones(n)])
    A_eq = np.zeros((len(rows), n_var))
    for a, (i, _) in enumerate(arcs):
        A_eq[rows.index(i), a] = 1.0
    b_eq = base.mass[rows]
    A_ub = np.zeros((1 + 2 * n, n_var))
    b_ub = np.zeros(1 + 2 * n)
    for a, (i, j) in enumerate(arcs):
        A_ub[0, a] = rho.finite_values[i, j]
        A_ub[1 + j, a] = 1.0
        A_ub[1 + n + j, a] = -1.0
    b_ub[0] = 1.0
    for j in range(n):
        A_ub[1 + j, n_arc + j] = -1.0
        A_ub[1 + n + j, n_arc + j] = -1.0
        b_ub[1 + j] = goal.mass[j]
        b_ub[1 + n + j] = -goal.mass[j]
    res = solve(c, A_eq=A_eq, b_eq=b_eq, A_ub=A_ub, b_ub=b_ub)
    mass = np.zeros(n)
    for a, (_, j) in enumerate(arcs):
        mass[j] += res.x[a]
    mass = np.clip(mass, 0.0, None)
    mass /= mass.sum()
    target = Dist(base.domain, mass)
    return target, tv_distance(target, goal)
