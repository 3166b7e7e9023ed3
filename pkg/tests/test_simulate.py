import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corruptlab.adversary import AdaptiveStrategy, TestFunction, adaptive_feasible, all_equal_test, constant_test
from corruptlab.adversary.types import Sample
from corruptlab.costs import build_strong, build_subtractive, degree
from corruptlab.lab.exact import majority_flip_strategy
from corruptlab.probkit import (
    Dist,
    Domain,
    JointDist,
    conditional_total_correlation,
    is_feasible,
    product_power,
)
from corruptlab.simulate import (
    Core,
    SimulationReport,
    cmi_average,
    cor_average,
    correlation_rounding_scan,
    few_groups_rounding_exact,
    goal_distribution,
    grouped,
    grouping_error,
    indistinguishability_gap,
    low_degree_info_check,
    mi_average,
    mixture_rounding_check,
    no_corruption_rounding_mc,
    rounding_error,
    simulate_randomized_oblivious,
)

from conftest import random_dist, random_joint

BIN = Domain.range(2)
UNIF2 = Dist.uniform(BIN)


def counterexample_joint(m):
    return majority_flip_strategy(m).pushforward(UNIF2)


def identical_bits(m):
    return JointDist.from_tuples(BIN, m, {(0,) * m: 0.5, (1,) * m: 0.5})


def brute_subsample_law(joint, n):
    m, size = joint.arity, joint.domain.size
    acc = np.zeros((size,) * n)
    perms = list(itertools.permutations(range(m), n))
    for pos in perms:
        acc += joint.marginal(list(pos))
    return acc / len(perms)


def brute_cor_average(joint, a, b):
    """Average over every ordered disjoint pair of blocks, no exchangeability shortcut."""
    vals = []
    for A in itertools.combinations(range(joint.arity), a):
        rest = [i for i in range(joint.arity) if i not in A]
        for B in itertools.combinations(rest, b):
            vals.append(conditional_total_correlation(joint, list(A), list(B)))
    return float(np.mean(vals))


def random_strategy(rho, m, rng):
    """Each clean sample goes to a uniformly random feasible corruption."""
    table = {}
    dom = rho.domain
    for clean in itertools.product(range(dom.size), repeat=m):
        options = [c.indices for c in adaptive_feasible(rho, Sample.from_indices(dom, clean))]
        table[clean] = options[rng.integers(len(options))]
    return AdaptiveStrategy(dom, m, table=table, name="random")


# --- grouping ---


def test_grouped_iid_is_independent():
    base = Dist(Domain.range(3), [0.2, 0.3, 0.5])
    g = grouped(product_power(base, 4), 2, 1)
    assert np.allclose(g.table, product_power(base, 3).mass)
    for core, p in g.cores():
        assert np.allclose(goal_distribution(g, core).mass, base.mass)


def test_grouped_k0_matches_subsample_law(rng):
    joint = random_joint(rng, 2, 4)
    g = grouped(joint, 2, 0)
    assert not g.exchangeable_path
    assert np.allclose(g.subsample_law(), brute_subsample_law(joint, 2), atol=1e-12)
    g2 = grouped(joint, 2, 2)
    assert np.allclose(g2.subsample_law(), brute_subsample_law(joint, 2), atol=1e-12)
    with pytest.raises(ValueError):
        grouped(joint, 3, 2)


def test_counterexample_grouping():
    joint = counterexample_joint(3)
    g = grouped(joint, 1, 1)
    assert g.group((0,))[0] == pytest.approx(1.0, abs=1e-15)
    assert goal_distribution(g, Core(BIN, (0,))).mass == pytest.approx([1.0, 0.0])
    assert goal_distribution(g, (1,)).mass == pytest.approx([0.0, 1.0])
    g4 = grouped(counterexample_joint(4), 2, 1)
    assert grouping_error(g4).value == pytest.approx(0, abs=1e-15)


def test_goal_mixture_identity(rng):
    joint = random_joint(rng, 3, 4)
    g = grouped(joint, 2, 1)
    avg = sum(p * goal_distribution(g, c).mass for c, p in g.cores())
    law = g.subsample_law()
    assert np.allclose(avg, 0.5 * (law.sum(axis=1) + law.sum(axis=0)), atol=1e-12)


def test_zero_probability_core_rejected():
    g = grouped(JointDist.from_tuples(BIN, 3, {(0, 0, 0): 1.0}), 1, 1)
    assert [c for c, _ in g.cores()] == [(0,)]
    with pytest.raises(ValueError):
        g.group((1,))


def test_grouping_error_product_and_bound():
    g = grouped(product_power(Dist(BIN, [0.3, 0.7]), 5), 2, 2)
    res = grouping_error(g, k_max=2, d=2)
    assert res.value == pytest.approx(0, abs=1e-14)
    assert res.bound == pytest.approx(math.sqrt(4 * math.log(2) / 4))


# --- correlation rounding ---


def test_scan_independent():
    scan = correlation_rounding_scan(product_power(Dist(BIN, [0.4, 0.6]), 4), 2, 2)
    assert max(scan.values) == pytest.approx(0, abs=1e-14) and scan.rhs >= 0 and scan.holds


def test_scan_identical_bits():
    scan = correlation_rounding_scan(identical_bits(3), 2, 1)
    assert scan.values[0] == pytest.approx(math.log(2), abs=1e-12)
    assert scan.values[1] == pytest.approx(0, abs=1e-12)
    assert scan.k_star == 1 and scan.holds


def test_scan_random_joints():
    rng = np.random.default_rng(11)
    for _ in range(100):
        joint = random_joint(rng, 3, 5, alpha=0.3)
        scan = correlation_rounding_scan(joint, 2, 2)
        assert scan.residual >= -1e-9
        assert scan.values[scan.k_star] == min(scan.values)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_block_averages_brute_force(seed):
    joint = random_joint(np.random.default_rng(seed), 2, 4)
    assert cor_average(joint, 2, 1) == pytest.approx(brute_cor_average(joint, 2, 1), abs=1e-12)
    # exchangeable joints may use the single-block shortcut
    sym = identical_bits(4)
    assert cor_average(sym, 2, 1, exchangeable=True) == pytest.approx(brute_cor_average(sym, 2, 1), abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), size=st.integers(2, 3))
def test_block_chain_rule_and_growth(seed, size):
    m = 5 if size == 2 else 4
    joint = random_joint(np.random.default_rng(seed), size, m)
    for a, b, c in [(1, 1, 1), (1, 2, 1), (2, 1, 1)]:
        if a + b + c > m:
            continue
        lhs = cmi_average(joint, a, b, c)
        assert lhs == pytest.approx(mi_average(joint, a, b + c) - mi_average(joint, a, c), abs=1e-9)
    for a, b in [(1, 2), (2, 1), (2, 2), (3, 1)]:
        if a + b <= m:
            assert mi_average(joint, a, b) <= a * mi_average(joint, 1, a + b - 1) + 1e-9


# --- low-degree mutual information ---


def test_low_degree_info_examples():
    ident = AdaptiveStrategy(BIN, 4, table={})
    check = low_degree_info_check(UNIF2, ident, 1, d=2)
    assert check.lhs == pytest.approx(0, abs=1e-14)
    maj = majority_flip_strategy(4)
    check = low_degree_info_check(UNIF2, maj, 1, d=2)
    assert check.rhs == pytest.approx(4 / 3 * math.log(2))
    assert check.holds
    const = AdaptiveStrategy(BIN, 3, table={t: (0, 0, 0) for t in itertools.product(range(2), repeat=3)})
    check = low_degree_info_check(UNIF2, const, 1, d=1)
    assert check.lhs == pytest.approx(0, abs=1e-14) and check.rhs == 0


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), r=st.integers(1, 3))
def test_low_degree_info_random_strategies(seed, r):
    rng = np.random.default_rng(seed)
    rho = build_strong(BIN, 0.5)
    strat = random_strategy(rho, 5, rng)
    check = low_degree_info_check(UNIF2, strat, r, rho=rho)
    assert check.holds


# --- rounding ---


def test_rounding_error_examples():
    rho = build_strong(BIN, 0.5)
    base = Dist(BIN, [0.3, 0.7])
    clean = rounding_error(grouped(product_power(base, 4), 2, 1), rho, base)
    assert clean.value == pytest.approx(0, abs=1e-9)
    cx = rounding_error(grouped(counterexample_joint(4), 2, 1), rho, UNIF2)
    assert cx.value == pytest.approx(0, abs=1e-9)
    with pytest.raises(ValueError):
        rounding_error(grouped(product_power(base, 4), 1, 3), rho, base)


def test_rounding_error_subtractive():
    aug, rho = build_subtractive(BIN, 0.25)
    m, n, k = 8, 2, 1
    table = {}
    for clean in itertools.product(range(2), repeat=m):
        out, left = list(clean), 2
        for i, x in enumerate(clean):
            if x == 1 and left:
                out[i], left = aug.null_index, left - 1
        table[clean] = tuple(out)
    strat = AdaptiveStrategy(aug, m, table=table)
    strat.verify(rho)
    joint = strat.pushforward(UNIF2.lift(aug))
    res = rounding_error(grouped(joint, n, k), rho, UNIF2, d=degree(rho))
    assert res.value <= res.bound + 1e-9
    for _, _, rounded, _, _ in res.components:
        assert is_feasible(UNIF2.lift(aug), rounded, rho)


def test_mixture_rounding_property():
    rng = np.random.default_rng(4)
    dom = Domain.range(3)
    for _ in range(100):
        rho = build_strong(dom, float(rng.choice([0.1, 0.25])))
        base = random_dist(rng, 3, dom)
        family = [random_dist(rng, 3, dom) for _ in range(3)]
        lhs, rhs = mixture_rounding_check(rho, base, family, rng.dirichlet(np.ones(3)))
        assert lhs <= rhs + 1e-7


def test_few_groups_rounding_bound():
    rho = build_strong(BIN, 0.5)
    base = Dist(BIN, [0.4, 0.6])
    strat = majority_flip_strategy(8)
    value, bound = few_groups_rounding_exact(base, strat, rho, lambda s: int(s[0]), 2)
    assert value <= bound + 1e-9
    ident = AdaptiveStrategy(BIN, 8, table={})
    value, bound = few_groups_rounding_exact(base, ident, rho, lambda s: sum(s) % 2, 2)
    assert value <= bound + 1e-9


def test_no_corruption_rounding_mc():
    base = Dist(Domain.range(4), [0.1, 0.2, 0.3, 0.4])
    res = no_corruption_rounding_mc(base, 50, lambda emp, rng: (emp[:, 0] > 0.1).astype(int), 2, 4000, seed=1)
    assert res.value <= res.bound + 3 * res.stderr
    assert res.trials == 4000


# --- end-to-end ---


def test_simulation_no_corruption():
    base = Dist(BIN, [0.3, 0.7])
    rep = simulate_randomized_oblivious(product_power(base, 4), build_strong(BIN, 0.5), base, 2, 2)
    assert rep.total == pytest.approx(0, abs=1e-9)
    assert rep.feasible and rep.triangle_holds
    for w, d in rep.mixture:
        assert d.mass == pytest.approx(base.mass, abs=1e-9)


def test_simulation_counterexample():
    rep = simulate_randomized_oblivious(counterexample_joint(4), build_strong(BIN, 0.5), UNIF2, 2, 2)
    assert rep.total == pytest.approx(0, abs=1e-9)
    comps = sorted((round(w, 12), tuple(np.round(d.mass, 9))) for w, d in rep.mixture)
    assert comps == [(0.5, (0.0, 1.0)), (0.5, (1.0, 0.0))]


@settings(max_examples=8, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_simulation_random_low_degree(seed):
    rng = np.random.default_rng(seed)
    rho = build_strong(BIN, 0.5)
    base = random_dist(rng, 2, BIN)
    joint = random_strategy(rho, 6, rng).pushforward(base)
    rep = simulate_randomized_oblivious(joint, rho, base, 2, 2)
    assert rep.triangle_holds and rep.feasible
    assert rep.total <= rep.grouping + rep.rounding + 1e-7


def test_report_text_round_trip():
    rep = simulate_randomized_oblivious(counterexample_joint(4), build_strong(BIN, 0.5), UNIF2, 2, 2)
    parsed = SimulationReport.parse_text(rep.to_text())
    assert int(parsed["k"]) == rep.k
    assert float(parsed["total_tv"]) == pytest.approx(rep.total, abs=1e-11)
    assert parsed["all_components_feasible"] == "true"
    assert len(parsed["mixture"]) == len(rep.mixture)
    for got, (w, d) in zip(parsed["mixture"], rep.mixture):
        assert got["weight"] == pytest.approx(w, abs=1e-11)
        assert got["mass"] == pytest.approx(list(d.mass), abs=1e-11)


def test_indistinguishability_examples():
    member = product_power(Dist(BIN, [0.2, 0.8]), 2)
    f = all_equal_test(2)
    assert indistinguishability_gap([(1.0, member)], f.iid_value(Dist(BIN, [0.2, 0.8])), f) == pytest.approx(0, abs=1e-12)
    mix = [(0.5, product_power(Dist.point_mass(BIN, 0), 2)), (0.5, product_power(Dist.point_mass(BIN, 1), 2))]
    assert indistinguishability_gap(mix, 1.0, f) == pytest.approx(0, abs=1e-12)
    assert indistinguishability_gap(mix, 0.3, constant_test(2, 0.3)) == pytest.approx(0, abs=1e-12)
    with pytest.raises(ValueError):
        indistinguishability_gap([(0.4, member)], 0.0, f)
    with pytest.raises(ValueError):
        indistinguishability_gap([(1.0, member)], 0.0, all_equal_test(3))
