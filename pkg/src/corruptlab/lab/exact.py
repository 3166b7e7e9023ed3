"""Experiments computed by exhaustive enumeration: the majority-flip counterexample,
model conversions, partially adaptive adversaries and the end-to-end certificate."""
from __future__ import annotations

import itertools
import math

import numpy as np

from ..adversary import (
    AdaptiveStrategy,
    TestFunction,
    adaptive_additive_max,
    adaptive_feasible,
    adaptive_max,
    all_equal_test,
    binomial_max,
    conversion_size,
    expected_clean_deviation,
    mal_max,
    malicious_run,
    native_subtractive_max,
    noniid_max,
    noniid_run,
    oblivious_add_max,
    oblivious_max,
    oblivious_sub_max,
    recommended_m,
    resample_coupling,
    sample_cost,
    subtractive_test,
)
from ..adversary.feasible import _lift, feasible_grid
from ..adversary.types import Sample
from ..costs import build_strong, build_subtractive, degree, identity_cost, loads
from ..probkit import NULL, Dist, Domain, compositions, min_cost_transport, product_power
from ..probkit.transport import FEASIBILITY_SLACK
from ..simulate import grouped, indistinguishability_gap, power_table, simulate_randomized_oblivious
from .config import ExperimentConfig
from .report import Report

EXACT_TOL = 1e-12


# --- shared helpers -------------------------------------------------------


def majority_flip_strategy(m: int) -> AdaptiveStrategy:
    """Flip the minority symbol of a binary sample; a tie goes either way with probability 1/2."""
    table = {}
    for s in itertools.product(range(2), repeat=m):
        ones = sum(s)
        if 2 * ones > m:
            table[s] = (1,) * m
        elif 2 * ones < m:
            table[s] = (0,) * m
        else:
            table[s] = [(0.5, (0,) * m), (0.5, (1,) * m)]
    return AdaptiveStrategy(Domain.range(2), m, table=table, name="majority-flip")


def _max_cost_ratio(strategy: AdaptiveStrategy, rho) -> float:
    worst = 0.0
    for clean in strategy.table:
        for _, out in strategy.outcomes(clean):
            c = sample_cost(rho, clean, out)
            worst = max(worst, math.inf if c is None else float(c) / strategy.m)
    return worst


def best_binary_product_tv(target: np.ndarray, rho, base: Dist, resolution: int) -> tuple[float, float]:
    """``min tv(Ber(p)^n, target)`` over feasible ``p``: grid, then golden-section refinement.

    Returns ``(tv, p)`` where ``p`` is the mass on the second symbol.
    """
    n = target.ndim

    def tv(p):
        return 0.5 * float(np.abs(power_table(np.array([1 - p, p]), n) - target).sum())

    grid = feasible_grid(rho, base, resolution)
    ps = grid[:, 1]
    vals = np.array([tv(p) for p in ps])
    i = int(np.argmin(vals))
    lo = ps[max(i - 1, 0)]
    hi = ps[min(i + 1, len(ps) - 1)]
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    for _ in range(80):
        c, d = b - g * (b - a), a + g * (b - a)
        if tv(c) <= tv(d):
            b = d
        else:
            a = c
    p = (a + b) / 2
    best = min(float(vals[i]), tv(p))
    return best, (p if tv(p) <= vals[i] else float(ps[i]))


def random_exchangeable_test(domain: Domain, n: int, rng: np.random.Generator, name: str = "random") -> TestFunction:
    """A 0/1 test whose value depends only on the multiset of its input."""
    table = {c: float(rng.integers(0, 2)) for c in compositions(n, domain.size)}

    def evaluator(labels, table=table):
        counts = [0] * domain.size
        for x in labels:
            counts[domain.index(x)] += 1
        return table[tuple(counts)]

    f = TestFunction(n, evaluator, exchangeable=True, name=name)
    f.table = table
    return f


def make_test(kind: str, domain: Domain, n: int) -> TestFunction:
    if kind == "all-equal":
        return all_equal_test(n)
    if kind == "no-null":
        return TestFunction(n, lambda s: float(all(x is not NULL for x in s)), exchangeable=True, name="no-null")
    if kind == "some-null":
        return TestFunction(n, lambda s: float(any(x is NULL for x in s)), exchangeable=True, name="some-null")
    if kind.startswith("random:"):
        seed = int(kind.split(":", 1)[1])
        return random_exchangeable_test(domain, n, np.random.default_rng(seed), name=kind)
    raise ValueError(f"unknown test {kind!r}; use all-equal, no-null, some-null or random:<seed>")


def realize_counts(rho, clean: tuple, counts: tuple) -> tuple:
    """First feasible corruption of ``clean`` (lexicographic search order) with the given counts."""
    for cand in adaptive_feasible(rho, Sample.from_indices(rho.domain, clean)):
        idx = cand.indices
        if tuple(np.bincount(idx, minlength=rho.domain.size)) == tuple(counts):
            return idx
    raise ValueError(f"no feasible corruption of {clean} has counts {counts}")


def best_response_strategy(f: TestFunction, rho, base: Dist, m: int) -> AdaptiveStrategy:
    """Deterministic table attaining the adaptive maximum of ``f`` after subsampling."""
    res = adaptive_max(f, rho, base, m)
    table = {}
    size = rho.domain.size
    for clean in itertools.product(range(size), repeat=m):
        key = tuple(np.bincount(clean, minlength=size))
        if key in res.best:
            table[clean] = realize_counts(rho, clean, res.best[key][1])
    return AdaptiveStrategy(rho.domain, m, table=table, name=f"best-response[{f.name}]")


def _three_point_base(size: int) -> Dist:
    masses = {1: [1.0], 2: [0.5, 0.5], 3: [0.5, 0.3, 0.2]}[size]
    return Dist(Domain.range(size), masses)


def _mc_se(x: np.ndarray) -> float:
    return float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0


# --- counterexample -------------------------------------------------------


def run_counterexample(cfg: ExperimentConfig) -> Report:
    cfg = cfg.resolved()
    rep = Report(cfg.experiment, cfg.as_dict())
    dom = Domain.range(2)
    base = Dist.uniform(dom)
    rho = build_strong(dom, cfg.eta)
    n = cfg.n
    target = np.zeros((2,) * n)
    target[(0,) * n] = target[(1,) * n] = 0.5
    components = [Dist.point_mass(dom, 0), Dist.point_mass(dom, 1)]
    for dist in components:
        rep.check(f"point mass at {dist.mass.argmax()} is a legal oblivious corruption",
                  min_cost_transport(base, dist, rho), "<=", 1.0, FEASIBILITY_SLACK)
    two_point_mix = 0.5 * power_table(components[0].mass, n) + 0.5 * power_table(components[1].mass, n)

    tv_best, p_best = best_binary_product_tv(target, rho, base, cfg.resolution)
    grid_radius = n / (2 * cfg.resolution)
    rep.measure("best_product", {"tv": tv_best, "p": p_best, "grid_bound": grid_radius})
    # TV(Ber(p)^2, Unif(00, 11)) is minimised at p = 1 - 1/sqrt(2), value sqrt(2) - 1; only the product of
    # the target's own marginals sits at exactly 1/2.
    rep.check("best single product: TV against the closed form sqrt(2) - 1", tv_best, "==", math.sqrt(2) - 1,
              grid_radius, note="grid plus golden-section")
    marg = power_table(np.full(2, 0.5), n)
    rep.check("product of the target marginals is at TV 1/2", 0.5 * float(np.abs(marg - target).sum()), "==", 0.5,
              EXACT_TOL)

    for m in cfg.m_values:
        strat = majority_flip_strategy(m)
        rep.check(f"m={m} budget: max per-point cost", _max_cost_ratio(strat, rho), "<=", 1.0)
        joint = strat.pushforward(base, cfg.cap)
        law = grouped(joint, n, 0).subsample_law()
        resid = 0.5 * float(np.abs(law - target).sum())
        rep.check(f"m={m} subsampled law equals Unif(00, 11)", resid, "<=", EXACT_TOL)
        rep.check(f"m={m} two-point-mass mixture reproduces it",
                  0.5 * float(np.abs(law - two_point_mix).sum()), "<=", 1e-9)
        k_max = min(cfg.k_max, m - n, m // 2)
        if k_max >= 1:
            sim = simulate_randomized_oblivious(joint, rho, base, n, k_max)
            rep.measure(f"m={m} simulation", {
                "k": sim.k, "grouping": sim.grouping, "rounding": sim.rounding, "total": sim.total,
                "mixture": [[w, list(d.mass)] for w, d in sim.mixture],
            })
            rep.check(f"m={m} core simulation total TV", sim.total, "<=", 1e-9)
            rep.check(f"m={m} triangle: total <= grouping + rounding",
                      sim.total, "<=", sim.grouping + sim.rounding, 1e-7)
            rep.check(f"m={m} mixture components feasible", float(sim.feasible), "==", 1.0)
        else:
            rep.measure(f"m={m} simulation", "not applicable: a core needs n + 1 <= m")
            rep.log(f"m={m}: no room for a core (n + k <= m forces k = 0)")
    return rep.finish()


# --- model conversions ----------------------------------------------------


def run_model_conversions(cfg: ExperimentConfig) -> Report:
    cfg = cfg.resolved()
    rep = Report(cfg.experiment, cfg.as_dict())
    base = Dist(Domain.range(cfg.domain_size), cfg.base) if cfg.base else _three_point_base(cfg.domain_size)
    dom = base.domain
    n, m, eta = cfg.n, cfg.m, cfg.eta
    aug, rho_sub = build_subtractive(dom, eta)
    rng = np.random.default_rng(cfg.seed)
    tests = [all_equal_test(n), random_exchangeable_test(dom, n, rng, "random-0"),
             random_exchangeable_test(dom, n, rng, "random-1")]

    for f in tests:
        native = native_subtractive_max(f, base, eta, m)
        framework = adaptive_max(subtractive_test(f, m, dom), rho_sub, base, m).value
        rep.measure(f"subtractive[{f.name}]", {"native": native, "framework": framework})
        rep.check(f"subtractive adaptive identity [{f.name}]", abs(native - framework), "<=", EXACT_TOL)

    m_conv = conversion_size(n, cfg.epsilon, eta)
    rep.measure("conversion_size", m_conv)
    f = tests[0]
    sub_sup, sub_arg = oblivious_sub_max(f, base, eta)
    fprime = subtractive_test(f, m_conv, dom)
    framework = oblivious_max(fprime, rho_sub, base, resolution=60)
    rep.measure("oblivious subtractive", {
        "conditioned_sup": sub_sup, "framework": framework.value, "grid_bound": framework.error_bound,
        "argmax": list(sub_arg.mass),
    })
    rep.check("oblivious conversion within epsilon", abs(sub_sup - framework.value), "<=",
              cfg.epsilon, note="the framework value comes from a grid search (its bound is recorded)")

    e_dev = expected_clean_deviation(eta, m)
    for f in tests:
        b = binomial_max(f, base, eta, m)
        a = adaptive_additive_max(f, base, eta, m)
        budget = n * e_dev / m
        rep.measure(f"additive[{f.name}]", {"binomial": b, "adaptive": a, "budget": budget})
        rep.check(f"|binomial - adaptive additive| [{f.name}]", abs(b - a), "<=", budget, EXACT_TOL)
    return rep.finish()


# --- partially adaptive adversaries ---------------------------------------


def run_partial_adaptive(cfg: ExperimentConfig) -> Report:
    cfg = cfg.resolved()
    rep = Report(cfg.experiment, cfg.as_dict())
    base = Dist(Domain.range(cfg.domain_size), cfg.base) if cfg.base else _three_point_base(cfg.domain_size)
    dom = base.domain
    n, m, eta = cfg.n, cfg.m, cfg.eta
    rng = np.random.default_rng(cfg.seed)
    tests = [all_equal_test(n), random_exchangeable_test(dom, n, rng, "random-0")]
    for f in tests:
        obl, outlier = oblivious_add_max(f, base, eta)
        mal = mal_max(f, base, eta, m)
        binom = binomial_max(f, base, eta, m)
        adapt = adaptive_additive_max(f, base, eta, m)
        nid, chosen = noniid_max(f, base, eta, m)
        rep.measure(f"values[{f.name}]", {
            "oblivious": obl, "malicious": mal, "binomial": binom, "adaptive": adapt, "non_iid": nid,
            "outlier": list(outlier.mass), "non_iid_choice": list(chosen),
        })
        tag = f"[{f.name}]"
        rep.check(f"malicious <= binomial {tag}", mal, "<=", binom, EXACT_TOL)
        rep.check(f"oblivious <= malicious {tag}", obl, "<=", mal, EXACT_TOL)
        rep.check(f"non-iid <= adaptive additive {tag}", nid, "<=", adapt, EXACT_TOL)
        rep.check(f"oblivious <= non-iid + 1/m + n^2/m {tag}", obl, "<=", nid + 1 / m + n**2 / m, EXACT_TOL)

        # Monte Carlo cross-checks of the exact values through the sample generators.
        trials = min(cfg.trials, 20_000)
        chosen_pts = [dom.label(j) for j, c in enumerate(chosen) for _ in range(c)]
        vals = np.empty(trials)
        g = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1]))
        for t in range(trials):
            s = noniid_run(base, eta, m, chosen_pts, g)
            vals[t] = f.subsample_value(dom, s.counts())
        se = _mc_se(vals)
        rep.check(f"non-iid generator matches exact value {tag}", abs(vals.mean() - nid), "<=", 0.0, 3 * se, stderr=se)

        omass = outlier.mass
        vals = np.empty(trials)
        g = np.random.default_rng(np.random.SeedSequence([cfg.seed, 2]))
        for t in range(trials):
            s = malicious_run(base, eta, m, lambda prefix: dom.label(int(g.choice(dom.size, p=omass))), g)
            vals[t] = f.subsample_value(dom, s.counts())
        se = _mc_se(vals)
        rep.check(f"malicious run drawing outliers reaches the oblivious value {tag}",
                  abs(vals.mean() - obl), "<=", 0.0, 3 * se, stderr=se)

    # Constant-point policy: adversarial count is Bin(m, eta).
    trials = cfg.trials
    dom_plus = Domain.range(dom.size + 1)
    base_plus = base.lift(dom_plus)
    g = np.random.default_rng(np.random.SeedSequence([cfg.seed, 3]))
    marker = dom_plus.label(dom.size)
    counts = np.array([malicious_run(base_plus, eta, m, lambda prefix: marker, g).counts()[-1]
                       for _ in range(min(trials, 20_000))])
    se = _mc_se(counts)
    rep.check("constant policy: mean adversarial count = m * eta", abs(counts.mean() - m * eta), "<=", 0.0, 3 * se,
              stderr=se)

    g = np.random.default_rng(np.random.SeedSequence([cfg.seed, 4]))
    a, b, dup = resample_coupling(n, m, eta, trials, g)
    p_dup = float(dup.mean())
    se = math.sqrt(max(p_dup * (1 - p_dup), 1e-300) / trials)
    rep.check("coupling resample frequency <= n^2/m", p_dup, "<=", n**2 / m, 3 * se, stderr=se)
    differ = np.any(a != b, axis=1)
    p_diff = float(differ.mean())
    se = math.sqrt(max(p_diff * (1 - p_diff), 1e-300) / trials)
    rep.check("coupled indicators differ with frequency <= 1/m + n^2/m", p_diff, "<=", 1 / m + n**2 / m, 3 * se,
              stderr=se)
    rep.measure("coupling", {"resample": p_dup, "differ": p_diff, "trials": trials})
    return rep.finish()


# --- end-to-end certificate ----------------------------------------------


def _certify_instance(cfg: ExperimentConfig):
    size = cfg.domain_size
    dom = Domain.range(size)
    base = Dist(dom, cfg.base) if cfg.base else Dist.uniform(dom)
    if cfg.cost == "subtractive":
        _, rho = build_subtractive(dom, cfg.eta)
    elif cfg.cost == "strong":
        rho = build_strong(dom, cfg.eta)
    elif cfg.cost == "identity":
        rho = identity_cost(dom)
    else:
        with open(cfg.cost_file) as fh:
            rho = loads(fh.read())
        if rho.domain.augmented:
            base = Dist(rho.domain.base, cfg.base) if cfg.base else Dist.uniform(rho.domain.base)
        else:
            base = Dist(rho.domain, cfg.base) if cfg.base else Dist.uniform(rho.domain)
    return rho, base


def certificate_gaps(f: TestFunction, rho, base: Dist, ms) -> tuple[float, list[float], float]:
    ob = oblivious_max(f, rho, base)
    gaps = [abs(ob.value - adaptive_max(f, rho, base, m).value) for m in ms]
    return ob.value, gaps, ob.error_bound


def run_certificate(cfg: ExperimentConfig) -> Report:
    cfg = cfg.resolved()
    rep = Report(cfg.experiment, cfg.as_dict())
    rho, base = _certify_instance(cfg)
    n = cfg.n
    ms = sorted(cfg.m_values)
    d = degree(rho)
    f = make_test(cfg.test, rho.domain, n)

    ob = oblivious_max(f, rho, base)
    rep.measure("oblivious_max", {"value": ob.value, "argmax": list(ob.dist.mass), "grid_bound": ob.error_bound})
    gaps = {}
    for m in ms:
        ad = adaptive_max(f, rho, base, m)
        gaps[m] = abs(ob.value - ad.value)
        rep.measure(f"m={m}", {"adaptive_max": ad.value, "clean": ad.clean_value, "gap": gaps[m]})
    if d >= 2:
        # Smallest constant for which recommended_m(n, d, gap(m), c) <= m at every m with a positive gap.
        const = max((gaps[m] ** 4 * m / (n**4 * math.log(d) ** 2) for m in ms if gaps[m] > 0), default=0.0)
        rep.measure("calibrated_constant", const)
        if const > 0:
            rep.measure("recommended_m_at_epsilon", recommended_m(n, d, min(cfg.epsilon, 1.0), const))

    # Simulation diagnostics on the best-response adaptive strategy where enumeration is cheap.
    for m in ms:
        if rho.domain.size**m > 1000 or m < n + 1:
            continue
        strat = best_response_strategy(f, rho, base, m)
        joint = strat.pushforward(_lift(base, rho), cfg.cap)
        k_max = min(m - n, m // 2)
        sim = simulate_randomized_oblivious(joint, rho, base, n, k_max)
        adaptive_value = adaptive_max(f, rho, base, m).value
        comps = [(w, product_power(dist, n)) for w, dist in sim.mixture]
        mix_gap = indistinguishability_gap(comps, adaptive_value, f)
        rep.measure(f"m={m} simulation", {
            "k": sim.k, "grouping": sim.grouping, "rounding": sim.rounding, "total": sim.total,
            "grouping_bound": sim.grouping_bound, "rounding_bound": sim.rounding_bound,
            "mixture_vs_adaptive_gap": mix_gap,
        })
        rep.check(f"m={m} mixture value within total TV of the adaptive value", mix_gap, "<=", sim.total, 1e-9)
        rep.check(f"m={m} simulation triangle", sim.total, "<=", sim.grouping + sim.rounding, 1e-7)
        rep.check(f"m={m} mixture components feasible", float(sim.feasible), "==", 1.0)

    # Sanity instances: no corruption at all, and the majority-flip counterexample.
    ident = identity_cost(Domain.range(2))
    fe = all_equal_test(2)
    ub = Dist.uniform(Domain.range(2))
    g_id = abs(oblivious_max(fe, ident, ub).value - adaptive_max(fe, ident, ub, ms[-1]).value)
    rep.check("identity cost: gap", g_id, "<=", 1e-9)
    strong = build_strong(Domain.range(2), 0.5)
    o_c, a_c = oblivious_max(fe, strong, ub).value, adaptive_max(fe, strong, ub, ms[-1]).value
    rep.measure("counterexample instance", {"oblivious": o_c, "adaptive": a_c})
    rep.check("counterexample instance: gap", abs(o_c - a_c), "<=", 1e-9)

    # Shrinkage on seeded random exchangeable tests.
    if cfg.functions:
        rows = []
        worst_last = 0.0
        increases = 0
        for i in range(cfg.functions):
            g = np.random.default_rng(np.random.SeedSequence([cfg.seed, i]))
            fr = random_exchangeable_test(rho.domain, n, g, name=f"random-{i}")
            ov, gs, eb = certificate_gaps(fr, rho, base, ms)
            mono = all(gs[j + 1] <= gs[j] + 1e-9 for j in range(len(gs) - 1))
            increases += not mono
            worst_last = max(worst_last, gs[-1])
            rows.append({"table": [int(fr.table[c]) for c in compositions(n, rho.domain.size)],
                         "oblivious": ov, "gaps": gs, "monotone": mono})
        rep.measure("random_tests", rows)
        rep.check("random tests: gap non-increasing in m (count of violations)", increases, "<=", 0)
        rep.check(f"random tests: largest gap at m={ms[-1]}", worst_last, "<=", 0.1)
    return rep.finish()
