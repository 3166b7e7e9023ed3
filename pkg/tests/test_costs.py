import math
import pickle
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corruptlab.costs import (
    INF,
    CostFunction,
    LabeledDomain,
    as_fraction,
    budget_degree,
    build_additive,
    build_agnostic,
    build_strong,
    build_subtractive,
    degree,
    dumps,
    identity_cost,
    loads,
    zero_one_cost,
)
from corruptlab.probkit import NULL, Domain, min_cost_transport, tv_distance

from conftest import random_dist


def scan_budget_degree(rho, b):
    return max(sum(1 for v in row if v is not INF and v <= b) for row in rho.table)


def test_invariants_enforced():
    dom = Domain.range(2)
    with pytest.raises(ValueError):
        CostFunction(dom, [[1, 1], [1, 0]])
    with pytest.raises(ValueError):
        CostFunction(dom, [[0, -1], [1, 0]])
    with pytest.raises(ValueError):
        CostFunction(dom, [[0, 1]])
    rho = CostFunction(dom, [[0, "inf"], [float("inf"), 0]])
    assert rho.entry(0, 1) is INF and rho.entry(1, 0) is INF
    with pytest.raises(AttributeError):
        rho.table = None


def test_inf_sentinel():
    assert INF > 10**9 and not INF < 5 and INF >= INF
    assert float(INF) == math.inf
    with pytest.raises(TypeError):
        INF + 1
    assert pickle.loads(pickle.dumps(INF)) is INF


def test_as_fraction_snaps():
    assert as_fraction(1 / 3) == Fraction(1, 3)
    assert 1 / as_fraction(0.1) == 10
    assert as_fraction("3/7") == Fraction(3, 7)
    with pytest.raises(ValueError):
        as_fraction(float("nan"))


def test_degree_examples():
    dom = Domain.range(3)
    _, sub = build_subtractive(dom, 0.5)
    assert degree(sub) == 2
    labeled = LabeledDomain(inputs=("a", "b", "c"), labels=(0, 1))
    assert degree(build_agnostic(labeled, 0.5)) == 2
    assert degree(identity_cost(dom)) == 1
    assert degree(build_strong(Domain.range(5), 0.2)) == 5


def test_budget_degree_examples():
    rho = build_strong(Domain.range(4), 0.5)
    assert budget_degree(rho, 1) == 1 == scan_budget_degree(rho, 1)
    assert budget_degree(rho, 2) == 4 == scan_budget_degree(rho, 2)
    assert budget_degree(rho, rho.max_finite()) == degree(rho)
    assert budget_degree(rho, INF) == degree(rho)
    with pytest.raises(ValueError):
        budget_degree(rho, -1)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), size=st.integers(1, 5))
def test_budget_degree_monotone_and_bounded(seed, size):
    rng = np.random.default_rng(seed)
    table = rng.integers(0, 5, (size, size)).astype(object)
    table[rng.random((size, size)) < 0.3] = INF
    np.fill_diagonal(table, 0)
    rho = CostFunction(Domain.range(size), table.tolist())
    prev = 0
    for b in range(0, 6):
        cur = budget_degree(rho, b)
        assert cur == scan_budget_degree(rho, b)
        assert prev <= cur <= degree(rho)
        prev = cur
    assert degree(rho) == int(rho.finite_mask.sum(axis=1).max())


def test_strong_builder():
    dom = Domain.range(3)
    rho = build_strong(dom, 0.5)
    assert rho.cost(0, 1) == 2 and rho.cost(2, 2) == 0
    assert degree(rho) == 3
    assert zero_one_cost(dom).cost(1, 0) == 1
    for bad in (0, -0.1, 1.5):
        with pytest.raises(ValueError):
            build_strong(dom, bad)
    assert build_strong(dom, 1).cost(0, 2) == 1


def test_agnostic_builder():
    labeled = LabeledDomain(inputs=(0, 1), labels=("-", "+"))
    rho = build_agnostic(labeled, 0.25)
    assert rho.cost((0, "-"), (0, "+")) == 4
    assert rho.cost((0, "-"), (1, "-")) is INF
    assert rho.cost((1, "+"), (1, "+")) == 0
    with pytest.raises(ValueError):
        LabeledDomain(inputs=(0, 0), labels=(1,))
    with pytest.raises(ValueError):
        build_agnostic(labeled, 0)


def test_subtractive_builder():
    aug, rho = build_subtractive(Domain.range(3), 0.5)
    assert aug.augmented and aug == rho.domain
    assert rho.cost(1, NULL) == 2
    assert rho.cost(1, 2) is INF
    assert rho.cost(NULL, 0) is INF
    assert degree(rho) == 2


def test_additive_builder():
    aug, rho = build_additive(Domain.range(3), 0.5)
    assert rho.cost(NULL, 2) == 2
    assert rho.cost(0, 1) is INF and rho.cost(0, NULL) is INF
    assert rho.cost(NULL, NULL) == 0
    assert degree(rho) == 4


def test_destinations_sorted():
    rho = CostFunction(Domain.range(3), [[0, 3, 1], [INF, 0, INF], [2, 2, 0]])
    assert rho.destinations(0) == [(0, 0), (2, 1), (1, 3)]
    assert rho.destinations(1) == [(1, 0)]


def test_serialization_examples():
    aug, rho = build_subtractive(Domain(("a", "b")), Fraction(1, 3))
    text = dumps(rho)
    assert text.splitlines()[0] == "'a'\t'b'\t⌀"
    assert "inf" in text and "3" in text
    back = loads(text)
    assert back == rho and back.domain.augmented
    tricky = CostFunction(Domain((0, (1, 2), "x y")), [[0, Fraction(1, 3), "0.125"], [INF, 0, 7], [1, 2, 0]])
    assert loads(dumps(tricky)) == tricky
    assert dumps(loads(dumps(tricky))) == dumps(tricky)
    # terminating decimals longer than the default Decimal precision
    deep = CostFunction(Domain.range(2), [[0, Fraction(1, 2**41)], [Fraction(3, 5**30), 0]])
    assert loads(dumps(deep)) == deep
    with pytest.raises(ValueError):
        loads("")


@settings(max_examples=60, deadline=None)
@given(entries=st.lists(st.one_of(st.fractions(min_value=0, max_value=50), st.just(INF)), min_size=9, max_size=9))
def test_serialization_round_trip(entries):
    table = [entries[3 * i:3 * i + 3] for i in range(3)]
    for i in range(3):
        table[i][i] = 0
    rho = CostFunction(Domain.range(3), table)
    assert loads(dumps(rho)) == rho


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), size=st.integers(2, 5), eta=st.sampled_from([0.1, 0.25, 0.5, 1.0]))
def test_strong_transport_is_scaled_tv(seed, size, eta):
    rng = np.random.default_rng(seed)
    p, q = random_dist(rng, size), random_dist(rng, size, sparse=True)
    cost = min_cost_transport(p, q, build_strong(p.domain, eta))
    assert abs(cost - tv_distance(p, q) / eta) <= 1e-7
