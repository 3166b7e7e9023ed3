"""Adaptive adversary simulating an oblivious one: Monte Carlo certificate and removal statistics."""
from __future__ import annotations

import math

import numpy as np

from ..adversary import TestFunction, adaptive_simulates_oblivious, removal_statistics, run_easy_direction_mc
from ..costs import build_strong
from ..probkit import Dist, Domain, nearest_oblivious
from .config import ExperimentConfig
from .report import Report


def top_symbol_test(domain: Domain, n: int) -> TestFunction:
    """Accept when every point equals the last symbol of the domain."""
    top = domain.label(domain.size - 1)
    return TestFunction(n, lambda s: float(all(x == top for x in s)), exchangeable=True, name="all-top")


def run_easy_direction(cfg: ExperimentConfig) -> Report:
    cfg = cfg.resolved()
    rep = Report(cfg.experiment, cfg.as_dict())
    dom = Domain.range(cfg.domain_size)
    base = Dist.uniform(dom)
    rho = build_strong(dom, cfg.eta)
    n, m = cfg.n, cfg.m
    f = top_symbol_test(dom, n)
    target, _ = nearest_oblivious(rho, base, Dist.point_mass(dom, dom.label(dom.size - 1)))
    rep.measure("target", list(target.mass))

    strat = adaptive_simulates_oblivious(rho, base, target, m)
    rep.log(f"running {cfg.trials} trials at m={m}")
    res = run_easy_direction_mc(strat, f, base, cfg.trials, cfg.seed)
    rep.measure("adaptive_value", res.adaptive_value)
    rep.measure("oblivious_value", res.oblivious_value)
    rep.measure("trials", res.trials)
    rep.check("gap between simulated adaptive and oblivious values", res.gap, "<=", cfg.epsilon,
              3 * res.adaptive_stderr, stderr=res.adaptive_stderr)
    rep.check("realised cost never exceeds the budget (max total / m)", res.max_realised_cost / m, "<=", 1.0, 1e-9)

    rem = res.removals
    rep.measure("removals", {"mean": rem.mean, "stderr": rem.stderr, "max": int(np.max(rem.counts))})
    rep.check("mean reverted points <= 5 sqrt(m)", rem.mean, "<=", rem.bound, 3 * rem.stderr, stderr=rem.stderr)
    root = math.sqrt(m)
    for mult in (1, 2, 4):
        v = mult * root
        p, se, bound = rem.tail(v)
        rep.check(f"Pr[reverted >= {mult} sqrt(m)] within 2/v + 4m/v^2", p, "<=", bound, 3 * se, stderr=se)

    # Target equal to the base: the strategy must leave every sample alone.
    same = adaptive_simulates_oblivious(rho, base, base, m)
    res0 = run_easy_direction_mc(same, f, base, min(cfg.trials, 2000), cfg.seed + 1)
    rep.check("target = base: realised cost", res0.max_realised_cost, "==", 0.0)
    rep.check("target = base: reverted points", float(np.max(res0.removals.counts)), "==", 0.0)

    # Removal statistic for i.i.d. mean-one costs (exponential), budget = number of points.
    iid = removal_statistics(lambda rng, shape: rng.exponential(1.0, shape), m, min(cfg.trials, 10_000), cfg.seed + 2)
    rep.measure("iid_exponential_removals", {"mean": iid.mean, "stderr": iid.stderr})
    rep.check("i.i.d. mean-one costs: mean reverted <= 5 sqrt(m)", iid.mean, "<=", iid.bound, 3 * iid.stderr,
              stderr=iid.stderr)
    return rep.finish()
