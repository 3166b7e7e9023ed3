"""Acceptance criteria 1-11, each at its stated tolerance.

Every ``criterion_N`` returns ``(passed, detail)``.  Under pytest the results
are printed as one PASS/FAIL line per criterion in the terminal summary;
``python tests/test_acceptance.py`` prints the same lines directly.
"""
import itertools
import math
import time

import numpy as np
import pytest

from corruptlab.adversary import AdaptiveStrategy, adaptive_feasible, random_feasible_corruption, transfer_corruption
from corruptlab.adversary.types import Sample
from corruptlab.costs import build_strong, build_subtractive, zero_one_cost
from corruptlab.lab import ExperimentConfig, run
from corruptlab.lab.exact import majority_flip_strategy
from corruptlab.probkit import (
    Dist,
    Domain,
    JointDist,
    conditional_mutual_information,
    kl_divergence,
    min_cost_transport,
    mutual_information,
    product_power,
    total_correlation,
    tv_distance,
)
from corruptlab.simulate import (
    correlation_rounding_scan,
    few_groups_rounding_exact,
    low_degree_info_check,
    no_corruption_rounding_mc,
)

BIN = Domain.range(2)


def _run(experiment, **overrides):
    t0 = time.perf_counter()
    report = run(ExperimentConfig(experiment, **overrides).resolved())
    return report, time.perf_counter() - t0


def _check(report, prefix):
    hits = [c for c in report.checks if c.name.startswith(prefix)]
    if not hits:
        raise KeyError(f"{report.experiment} has no check starting with {prefix!r}")
    return hits


def _all(report, prefix):
    return all(c.passed for c in _check(report, prefix))


def _random_joint(rng, size, arity, alpha=0.5):
    return JointDist(Domain.range(size), rng.dirichlet(np.full(size**arity, alpha)).reshape((size,) * arity))


def _random_strategy(rho, m, rng):
    table = {}
    for clean in itertools.product(range(rho.domain.size), repeat=m):
        options = [s.indices for s in adaptive_feasible(rho, Sample.from_indices(rho.domain, clean))]
        table[clean] = options[rng.integers(len(options))]
    return AdaptiveStrategy(rho.domain, m, table=table, name="random")


def criterion_1():
    report, secs = _run("counterexample")
    exact = all(c.value <= 1e-12 for c in _check(report, "m=") if "equals Unif" in c.name)
    mixture = all(c.value <= 1e-9 for c in report.checks if "mixture reproduces" in c.name or "total TV" in c.name)
    best = _check(report, "best single product")[0].value
    product_ok = abs(best - 0.5) <= 0.02
    ok = exact and mixture and product_ok and secs < 1.0
    return ok, (f"law exact={exact}, mixture TV 0={mixture}, best product TV={best:.4f} "
                f"(required 0.5 +/- 0.02), {secs:.2f}s")


def criterion_2():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = math.inf
    for _ in range(100):
        scan = correlation_rounding_scan(_random_joint(rng, 3, 5, alpha=0.3), 2, 2)
        worst = min(worst, scan.residual)
    secs = time.perf_counter() - t0
    return worst >= -1e-9 and secs < 30, f"min residual {worst:.3g} over 100 joints, {secs:.1f}s"


def criterion_3():
    t0 = time.perf_counter()
    worst = -math.inf
    for seed in range(50):
        rng = np.random.default_rng([3, seed])
        if seed % 2:
            rho, base = build_strong(BIN, 0.5), Dist(BIN, rng.dirichlet([1, 1]))
        else:
            aug, rho = build_subtractive(BIN, 0.25)
            base = Dist(BIN, rng.dirichlet([1, 1])).lift(aug)
        strat = _random_strategy(rho, 6, rng)
        for r in (1, 2):
            check = low_degree_info_check(base, strat, r, rho=rho, d=2)
            worst = max(worst, check.lhs - check.rhs)
    secs = time.perf_counter() - t0
    return worst <= 1e-9 and secs < 60, f"max lhs - rhs {worst:.4f} over 50 strategies x r in (1, 2), {secs:.1f}s"


def _labelings(n_groups):
    def hashed(emp, rng):
        return rng.integers(0, n_groups, len(emp))

    def by_first_mass(emp, rng):
        # groups follow the sample's own fluctuation: the adversarial case
        ranks = np.argsort(np.argsort(emp[:, 0] + 1e-9 * rng.random(len(emp))))
        return (ranks * n_groups) // len(emp)

    def by_argmax(emp, rng):
        return np.argmax(emp + 1e-9 * rng.random(emp.shape), axis=1) % n_groups

    return {"hash": hashed, "first-mass quantile": by_first_mass, "argmax": by_argmax}


def criterion_4():
    t0 = time.perf_counter()
    base = Dist(Domain.range(4), [0.1, 0.2, 0.3, 0.4])
    bad = []
    for m in (50, 200):
        for groups in (2, 8, 32):
            for name, lab in _labelings(groups).items():
                res = no_corruption_rounding_mc(base, m, lab, groups, 10_000, seed=m * 100 + groups)
                if res.value > res.bound + 3 * res.stderr:
                    bad.append(f"m={m} |G|={groups} {name}: {res.value:.4f} > {res.bound:.4f}")
    rho = build_strong(BIN, 0.5)
    worst = math.inf
    for seed in range(5):
        rng = np.random.default_rng([4, seed])
        base2 = Dist(BIN, rng.dirichlet([1, 1]))
        for strat in (majority_flip_strategy(8), _random_strategy(rho, 8, rng)):
            for groups in (2, 8):
                for lab in (lambda s, g=groups: sum(s) % g, lambda s, g=groups: min(sum(s) * g // 9, g - 1)):
                    value, bound = few_groups_rounding_exact(base2, strat, rho, lab, groups)
                    worst = min(worst, bound - value)
    secs = time.perf_counter() - t0
    ok = not bad and worst >= -1e-7 and secs < 120
    return ok, f"MC violations {bad or 'none'}; exact min residual {worst:.4f}, {secs:.1f}s"


def criterion_5():
    rng = np.random.default_rng(5)
    dom = Domain.range(3)
    worst_cost, worst_tv = 0.0, -math.inf
    for i in range(100):
        if i % 2:
            rho = build_strong(dom, float(rng.choice([0.1, 0.25, 0.5])))
            lift = lambda d: d  # noqa: E731
        else:
            aug, rho = build_subtractive(dom, float(rng.choice([0.1, 0.25, 0.5])))
            lift = lambda d, aug=aug: d.lift(aug)  # noqa: E731
        d1 = lift(Dist(dom, rng.dirichlet(np.ones(3))))
        d2 = lift(Dist(dom, rng.dirichlet(np.ones(3))))
        d1c = random_feasible_corruption(rho, d1, rng)
        d2c, _ = transfer_corruption(rho, d1, d2, d1c)
        worst_cost = max(worst_cost, min_cost_transport(d2, d2c, rho))
        worst_tv = max(worst_tv, tv_distance(d1c, d2c) - tv_distance(d1, d2))
    ok = worst_cost <= 1 + 1e-7 and worst_tv <= 1e-7
    return ok, f"max transport cost {worst_cost:.9f}, max tv excess {worst_tv:.3g}"


def criterion_6():
    report, secs = _run("easy-direction", trials=100_000)
    gap = _check(report, "gap between")[0]
    ok = gap.passed and _all(report, "mean reverted") and _all(report, "Pr[reverted >= 1") \
        and _all(report, "Pr[reverted >= 2") and secs < 120
    return ok, f"gap {gap.value:.4f} <= 0.5, removal mean and tails within bounds, {secs:.1f}s"


def criterion_7():
    report, _ = _run("support-size")
    parts = ["oblivious side", "adaptive: accept-rate difference", "k=100"]
    ok = all(_all(report, p) for p in parts) and _all(report, "adaptive")
    acc = _check(report, "oblivious side")
    diff = _check(report, "adaptive: accept-rate difference")[0].value
    return ok, f"accept {acc[0].value:.4f} / {acc[-1].value:.4f}, adaptive difference {diff:.4f}, collision bound ok"


def criterion_8():
    report, _ = _run("degree-lb")
    adaptive = _check(report, "adaptive acceptance")[0]
    clean = _check(report, "clean acceptance")[0]
    sep = _check(report, "separation")[0]
    ok = adaptive.passed and clean.passed and sep.passed
    return ok, f"adaptive {adaptive.value:.4f}, clean {clean.value:.4f}, separation {sep.value:.4f}"


def criterion_9():
    conv, _ = _run("conversions")
    part, _ = _run("partial-adaptive", m=8)
    ok = conv.passed and part.passed
    ident = max(c.value for c in _check(conv, "subtractive adaptive identity"))
    return ok, f"subtractive identity residual {ident:.3g}, sandwiches hold at m=8: {part.passed}"


def criterion_10():
    report, _ = _run("certify")
    mono = _check(report, "random tests: gap non-increasing")[0]
    last = _check(report, "random tests: largest gap at m=8")[0]
    ok = mono.passed and last.passed
    return ok, f"monotonicity violations {int(mono.value)}, largest gap at m=8 {last.value:.4f} (required <= 0.1)"


def criterion_11():
    rng = np.random.default_rng(11)
    worst = {"chain rule": 0.0, "total correlation": 0.0, "pinsker": -math.inf, "product tv": -math.inf, "tv lp": 0.0}
    for _ in range(1000):
        size = int(rng.integers(2, 4))
        j = _random_joint(rng, size, 3)
        chain = mutual_information(j, [0], [1, 2]) - mutual_information(j, [0], [2]) \
            - conditional_mutual_information(j, [0], [1], [2])
        worst["chain rule"] = max(worst["chain rule"], abs(chain))
        tc = total_correlation(j, [0, 1, 2]) - mutual_information(j, [0], [1]) - mutual_information(j, [0, 1], [2])
        worst["total correlation"] = max(worst["total correlation"], abs(tc))
        p = Dist(Domain.range(size), rng.dirichlet(np.ones(size)))
        q = Dist(Domain.range(size), rng.dirichlet(np.ones(size)))
        tv = tv_distance(p, q)
        worst["pinsker"] = max(worst["pinsker"], tv - math.sqrt(kl_divergence(p, q) / 2))
        k = int(rng.integers(2, 4))
        big = 0.5 * float(np.abs(product_power(p, k).mass - product_power(q, k).mass).sum())
        worst["product tv"] = max(worst["product tv"], big - k * tv)
        worst["tv lp"] = max(worst["tv lp"], abs(min_cost_transport(p, q, zero_one_cost(p.domain)) - tv))
    ok = (worst["chain rule"] <= 1e-9 and worst["total correlation"] <= 1e-9 and worst["pinsker"] <= 1e-9
          and worst["product tv"] <= 1e-9 and worst["tv lp"] <= 1e-7)
    return ok, ", ".join(f"{k} {v:.2g}" for k, v in worst.items())


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 12)}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, criterion):
    criterion(number, *CRITERIA[number]())


if __name__ == "__main__":
    for number, fn in CRITERIA.items():
        passed, detail = fn()
        print(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}", flush=True)
