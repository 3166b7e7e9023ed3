"""Rounding group goals to legal oblivious corruptions, and the end-to-end simulation."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..adversary.feasible import _lift
from ..adversary.types import AdaptiveStrategy, TestFunction
from ..costs.function import CostFunction, degree
from ..probkit.info import mutual_information
from ..probkit.transport import FEASIBILITY_SLACK, min_cost_transport, nearest_oblivious
from ..probkit.types import Dist, JointDist
from .grouping import (
    GroupedDist,
    _average_marginal,
    _blocks,
    correlation_rounding_scan,
    grouped,
    grouping_error,
    power_table,
)


@dataclass(frozen=True)
class InfoCheck:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-9


def low_degree_info_check(
    base: Dist, strategy: AdaptiveStrategy, r: int, rho: CostFunction | None = None, d: int | None = None
) -> InfoCheck:
    """Average ``I(S'_i; S'_B)`` over a point and ``r`` others, against ``m/(m-r) ln d``.

    ``d`` defaults to the degree of ``rho``; when ``rho`` is given every table
    entry is checked against the budget first.
    """
    m = strategy.m
    if not 0 < r < m:
        raise ValueError("need 0 < r < m")
    if rho is not None:
        strategy.verify(rho)
        d = degree(rho) if d is None else d
    if d is None:
        raise ValueError("give rho or d")
    joint = strategy.pushforward(_lift(base, rho) if rho is not None else base)
    exch = joint.is_exchangeable(1e-12)
    vals = [mutual_information(joint, A, B) for A, B in _blocks(m, [1, r], exch)]
    lhs = float(np.mean(vals))
    rhs = m / (m - r) * math.log(d)
    return InfoCheck(lhs, rhs)


@dataclass(frozen=True)
class RoundingResult:
    value: float
    bound: float | None
    components: tuple  # ((core index tuple, probability, rounded Dist, goal Dist, tv), ...)


def rounding_error(g: GroupedDist, rho: CostFunction, base: Dist, d: int | None = None) -> RoundingResult:
    """``E_c[n * tv(D'(c), goal(c))]`` with ``D'(c)`` the closest legal corruption.

    ``n * tv`` upper-bounds the TV between the n-fold products.  Zero-probability
    cores are skipped.
    """
    if g.k > g.m / 2:
        raise ValueError(f"core size {g.k} exceeds m/2 = {g.m / 2}")
    base = _lift(base, rho)
    comps = []
    total = 0.0
    for core, p in g.cores():
        goal = Dist(g.domain, _average_marginal(g.group(core)))
        rounded, tv = nearest_oblivious(rho, base, goal)
        comps.append((core, p, rounded, goal, tv))
        total += p * g.n * tv
    d = degree(rho) if d is None else d
    bound = 2 * g.n * math.sqrt(g.k * math.log(d) / g.m) if d >= 2 else 0.0
    return RoundingResult(total, bound, tuple(comps))


REPORT_SCHEMA = "simulation-report/1"


@dataclass
class SimulationReport:
    k: int
    scan_values: tuple
    grouping: float
    rounding: float
    total: float
    mixture: list  # [(weight, Dist)]
    grouping_bound: float
    rounding_bound: float
    exchangeable_path: bool
    feasible: bool
    extra: dict = field(default_factory=dict)

    @property
    def triangle_holds(self) -> bool:
        return self.total <= self.grouping + self.rounding + 1e-7

    def to_text(self) -> str:
        """Key-value text; the mixture is a nested block of weight/mass lines."""
        lines = [
            f"schema: {REPORT_SCHEMA}",
            f"k: {self.k}",
            "scan_values: " + " ".join(f"{v:.12g}" for v in self.scan_values),
            f"grouping_error: {self.grouping:.12g}",
            f"rounding_error: {self.rounding:.12g}",
            f"total_tv: {self.total:.12g}",
            f"grouping_bound: {self.grouping_bound:.12g}",
            f"rounding_bound: {self.rounding_bound:.12g}",
            f"exchangeable_path: {str(self.exchangeable_path).lower()}",
            f"all_components_feasible: {str(self.feasible).lower()}",
            f"mixture_components: {len(self.mixture)}",
            "mixture:",
        ]
        for w, dist in self.mixture:
            lines.append(f"  - weight: {w:.12g}")
            lines.append("    mass: " + " ".join(f"{x:.12g}" for x in dist.mass))
        return "\n".join(lines) + "\n"

    @staticmethod
    def parse_text(text: str) -> dict:
        """Read back the scalar fields and the mixture as plain numbers."""
        out: dict = {"mixture": []}
        for line in text.splitlines():
            stripped = line.strip()
            if stripped.startswith("- weight:"):
                out["mixture"].append({"weight": float(stripped.split(":", 1)[1])})
            elif stripped.startswith("mass:"):
                out["mixture"][-1]["mass"] = [float(x) for x in stripped.split(":", 1)[1].split()]
            elif ":" in stripped and not line.startswith(" "):
                key, val = stripped.split(":", 1)
                if key != "mixture":
                    out[key] = val.strip()
        return out


def _mixture_table(mixture: Sequence[tuple[float, Dist]], n: int) -> np.ndarray:
    acc = None
    for w, dist in mixture:
        t = w * power_table(dist.mass, n)
        acc = t if acc is None else acc + t
    return acc


def simulate_randomized_oblivious(
    adaptive: JointDist, rho: CostFunction, base: Dist, n: int, k_max: int
) -> SimulationReport:
    """Approximate the subsampled adaptive law by a mixture of oblivious products.

    The core size is the smallest minimiser of the correlation-rounding scan;
    each core's goal is rounded to its closest legal corruption, weighted by
    the core's probability.
    """
    if adaptive.domain != rho.domain:
        raise ValueError("adaptive law and cost function live on different domains")
    base = _lift(base, rho)
    scan = correlation_rounding_scan(adaptive, n, k_max)
    k = scan.k_star
    g = grouped(adaptive, n, k)
    d = degree(rho)
    gerr = grouping_error(g)
    rerr = rounding_error(g, rho, base, d)
    mixture = [(p, rounded) for _, p, rounded, _, _ in rerr.components]
    target = g.subsample_law()
    total = 0.5 * float(np.abs(target - _mixture_table(mixture, n)).sum())
    feasible = all(min_cost_transport(base, dist, rho) <= 1.0 + FEASIBILITY_SLACK for _, dist in mixture)
    gb = math.sqrt(n**2 * math.log(d) / (2 * k_max)) if k_max > 0 else math.inf
    rb = 2 * n * math.sqrt(k * math.log(d) / adaptive.arity)
    return SimulationReport(
        k=k,
        scan_values=scan.values,
        grouping=gerr.value,
        rounding=rerr.value,
        total=total,
        mixture=mixture,
        grouping_bound=gb,
        rounding_bound=rb,
        exchangeable_path=scan.exchangeable_path,
        feasible=feasible,
        extra={"scan_rhs": scan.rhs, "grouping_hypothesis": n + k_max <= adaptive.arity / 2},
    )


def indistinguishability_gap(mixture: Sequence[tuple[float, JointDist]], family_sup: float, f: TestFunction) -> float:
    """``|E_mixture f - family_sup|``."""
    weights = np.array([w for w, _ in mixture], dtype=float)
    if not mixture or np.any(weights < -1e-12) or abs(weights.sum() - 1.0) > 1e-9:
        raise ValueError("mixture weights must form a probability vector")
    value = 0.0
    for w, joint in mixture:
        if joint.arity != f.arity:
            raise ValueError("mixture component arity does not match the test")
        for idx, p in joint.items():
            value += w * p * f(tuple(joint.domain.label(i) for i in idx))
    return abs(value - family_sup)


def few_groups_rounding_exact(
    base: Dist,
    strategy: AdaptiveStrategy,
    rho: CostFunction,
    labeling: Callable[[tuple], int],
    n_groups: int,
) -> tuple[float, float]:
    """Exact ``E_g inf tv(D', goal'(g))`` for a table strategy and a labelling of ``S'``.

    Returns ``(value, sqrt(ln|G| / (2m)))``.
    """
    base = _lift(base, rho)
    m = strategy.m
    size = base.domain.size
    acc = np.zeros((n_groups, size))
    prob = np.zeros(n_groups)
    for clean in itertools.product(range(size), repeat=m):
        p = float(np.prod(base.mass[list(clean)]))
        if p == 0.0:
            continue
        for w, out in strategy.outcomes(clean):
            g = int(labeling(out))
            if not 0 <= g < n_groups:
                raise ValueError("labelling returned a group outside range")
            prob[g] += p * w
            acc[g] += p * w * np.bincount(out, minlength=size) / m
    total = 0.0
    for g in range(n_groups):
        if prob[g] <= 0:
            continue
        goal = Dist(base.domain, acc[g] / prob[g])
        _, tv = nearest_oblivious(rho, base, goal)
        total += prob[g] * tv
    return total, math.sqrt(math.log(n_groups) / (2 * m))


def mixture_rounding_check(rho: CostFunction, base: Dist, family: Sequence[Dist], weights: Sequence[float]) -> tuple[float, float]:
    """``(inf tv to the mixture, mixture of the inf tvs)``; the first never exceeds the second."""
    base = _lift(base, rho)
    w = np.asarray(weights, dtype=float)
    mix = Dist(base.domain, sum(wi * d.mass for wi, d in zip(w, family)))
    _, lhs = nearest_oblivious(rho, base, mix)
    rhs = float(sum(wi * nearest_oblivious(rho, base, d)[1] for wi, d in zip(w, family)))
    return lhs, rhs


@dataclass(frozen=True)
class NoCorruptionRounding:
    value: float
    stderr: float
    bound: float
    trials: int


def no_corruption_rounding_mc(
    base: Dist,
    m: int,
    labeling: Callable[[np.ndarray], np.ndarray],
    n_groups: int,
    trials: int,
    seed: int,
    batches: int = 10,
) -> NoCorruptionRounding:
    """Monte Carlo ``E_g tv(D, goal(g))`` for clean samples and a labelling.

    ``labeling(emp, rng)`` maps a ``(trials, |X|)`` array of empirical
    distributions to group ids.  The standard error comes from ``batches`` independent batch
    means, each re-estimating the goals from its own trials.
    """
    size = base.domain.size
    per = trials // batches
    estimates = []
    for b in range(batches):
        rng = np.random.default_rng(np.random.SeedSequence([seed, b]))
        counts = rng.multinomial(m, base.mass, size=per)
        emp = counts / m
        g = np.asarray(labeling(emp, rng), dtype=np.int64)
        est = 0.0
        for grp in range(n_groups):
            sel = g == grp
            if not sel.any():
                continue
            goal = emp[sel].mean(axis=0)
            est += sel.mean() * 0.5 * float(np.abs(goal - base.mass).sum())
        estimates.append(est)
    est = np.array(estimates)
    se = float(est.std(ddof=1) / math.sqrt(batches))
    return NoCorruptionRounding(float(est.mean()), se, math.sqrt(math.log(n_groups) / (2 * m)), per * batches)
