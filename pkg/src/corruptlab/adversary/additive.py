"""Additive, binomial, malicious, non-iid and subtractive adversaries.

All maxima are exact on small instances.  They rely on one observation: once
the subsampling filter is applied, a test's value depends only on the multiset
of the corrupted sample, so every supremum can range over count vectors.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from ..costs.function import as_fraction
from ..probkit.types import NULL, Dist, Domain, compositions
from .feasible import count_vector_prob
from .types import Sample, TestFunction


def _eta(eta) -> Fraction:
    e = as_fraction(eta)
    if not 0 <= e <= 1:
        raise ValueError("eta must lie in [0, 1]")
    return e


def added_points(eta, m: int) -> int:
    """``floor(eta * m)``, computed exactly."""
    return math.floor(_eta(eta) * m)


def clean_points(eta, m: int) -> int:
    """``ceil((1 - eta) * m)``, computed exactly."""
    return math.ceil((1 - _eta(eta)) * m)


def binomial_pmf(m: int, p: Fraction) -> list[float]:
    p = Fraction(p)
    return [float(math.comb(m, z) * p**z * (1 - p) ** (m - z)) for z in range(m + 1)]


def _best_completion(f: TestFunction, domain: Domain, counts: Sequence[int], extra: int) -> float:
    best = -1.0
    for add in compositions(extra, domain.size):
        v = f.subsample_value(domain, tuple(a + b for a, b in zip(counts, add)))
        if v > best:
            best = v
    return best


def _completion_value(f, base: Dist, z: int, extra: int) -> float:
    """``E_{S ~ D^z} max over added multisets of size extra``."""
    total = 0.0
    for counts in compositions(z, base.domain.size):
        p = count_vector_prob(base.mass, counts)
        if p:
            total += p * _best_completion(f, base.domain, counts, extra)
    return total


def binomial_max(f: TestFunction, base: Dist, eta, m: int) -> float:
    """Clean count ``z ~ Bin(m, 1 - eta)``; the adversary completes to ``m`` points."""
    e = _eta(eta)
    pmf = binomial_pmf(m, 1 - e)
    return sum(w * _completion_value(f, base, z, m - z) for z, w in enumerate(pmf) if w > 0)


def adaptive_additive_max(f: TestFunction, base: Dist, eta, m: int) -> float:
    """``ceil((1-eta) m)`` clean points plus ``floor(eta m)`` added after seeing them."""
    return _completion_value(f, base, clean_points(eta, m), added_points(eta, m))


def expected_clean_deviation(eta, m: int) -> float:
    """``E|Bin(m, 1-eta) - ceil((1-eta) m)|``."""
    e = _eta(eta)
    c = clean_points(e, m)
    return sum(w * abs(z - c) for z, w in enumerate(binomial_pmf(m, 1 - e)))


def mal_max(f: TestFunction, base: Dist, eta, m: int) -> float:
    """Exact malicious-noise maximum by backward induction over prefix multisets."""
    e = float(_eta(eta))
    size = base.domain.size
    p = base.mass

    @lru_cache(maxsize=None)
    def value(counts: tuple) -> float:
        if sum(counts) == m:
            return f.subsample_value(base.domain, counts)
        nxt = []
        for j in range(size):
            c = list(counts)
            c[j] += 1
            nxt.append(value(tuple(c)))
        clean = sum(p[j] * nxt[j] for j in range(size) if p[j] > 0)
        return (1 - e) * clean + e * max(nxt)

    return value((0,) * size)


def noniid_max(f: TestFunction, base: Dist, eta, m: int) -> tuple[float, tuple]:
    """Best fixed multiset of ``floor(eta m)`` insertions chosen before sampling."""
    k, z = added_points(eta, m), clean_points(eta, m)
    size = base.domain.size
    clean = [(count_vector_prob(base.mass, c), c) for c in compositions(z, size)]
    best, arg = -1.0, None
    for add in compositions(k, size):
        v = sum(p * f.subsample_value(base.domain, tuple(a + b for a, b in zip(c, add))) for p, c in clean if p)
        if v > best + 1e-15:
            best, arg = v, add
    return best, arg


def maximize_on_simplex(
    values: Callable[[np.ndarray], np.ndarray], size: int, resolution: int = 40, seeds=None
) -> tuple[float, np.ndarray]:
    """Maximise a smooth function of a probability vector: grid, then pairwise mass moves."""
    pts = np.array(list(compositions(resolution, size)), dtype=float) / resolution
    if seeds is not None:
        pts = np.vstack([pts, np.atleast_2d(seeds)])
    vals = values(pts)
    best = int(np.argmax(vals))
    mass, val = pts[best].copy(), float(vals[best])
    step = 1.0 / resolution
    while step > 1e-7:
        improved = False
        for i in range(size):
            for j in range(size):
                if i == j or mass[i] <= 0:
                    continue
                trial = mass.copy()
                d = min(step, mass[i])
                trial[i] -= d
                trial[j] += d
                v = float(values(trial[None, :])[0])
                if v > val + 1e-13:
                    mass, val, improved = trial, v, True
        if not improved:
            step /= 2
    return val, mass


def oblivious_add_max(f: TestFunction, base: Dist, eta, resolution: int = 40) -> tuple[float, Dist]:
    """``sup_E E_{S ~ ((1-eta) D + eta E)^n} f(S)`` over outlier distributions ``E``."""
    e = float(_eta(eta))
    dom = base.domain

    def values(outliers):
        return f.iid_values(dom, (1 - e) * base.mass[None, :] + e * outliers)

    val, outlier = maximize_on_simplex(values, dom.size, resolution)
    return val, Dist(dom, outlier / outlier.sum())


def malicious_run(base: Dist, eta, m: int, policy: Callable[[tuple], object], rng: np.random.Generator) -> Sample:
    """Sequential sample; on each eta-coin heads the policy picks the point seeing only the prefix."""
    e = float(_eta(eta))
    out: list = []
    for _ in range(m):
        if rng.random() < e:
            x = policy(tuple(out))
            if x not in base.domain:
                raise ValueError(f"policy produced {x!r}, outside the domain")
        else:
            x = base.domain.label(int(rng.choice(base.domain.size, p=base.mass)))
        out.append(x)
    return Sample(base.domain, tuple(out))


def noniid_run(base: Dist, eta, m: int, chosen: Sequence, rng: np.random.Generator) -> Sample:
    """Chosen points plus ``ceil((1-eta) m)`` clean points, uniformly permuted."""
    k = added_points(eta, m)
    if len(chosen) != k:
        raise ValueError(f"expected {k} chosen points, got {len(chosen)}")
    for x in chosen:
        if x not in base.domain:
            raise ValueError(f"chosen point {x!r} is outside the domain")
    z = clean_points(eta, m)
    clean = [base.domain.label(int(i)) for i in rng.choice(base.domain.size, size=z, p=base.mass)]
    pts = list(chosen) + clean
    perm = rng.permutation(m)
    return Sample(base.domain, tuple(pts[i] for i in perm))


def resample_coupling(n: int, m: int, eta, trials: int, rng: np.random.Generator):
    """Coupled indicator vectors: ``a`` i.i.d. Bernoulli(eta) and ``b`` from a
    without-replacement index draw.  Returns ``(a, b, resampled)`` arrays."""
    e = float(_eta(eta))
    k = added_points(eta, m)
    z = rng.random((trials, n))
    a = z <= e
    idx = np.floor(z * m).astype(np.int64) + 1
    srt = np.sort(idx, axis=1)
    dup = np.any(srt[:, 1:] == srt[:, :-1], axis=1) if n > 1 else np.zeros(trials, dtype=bool)
    for t in np.nonzero(dup)[0]:
        idx[t] = rng.choice(m, size=n, replace=False) + 1
    b = idx <= k
    return a, b, dup


def subtractive_test(f: TestFunction, m_inner: int, base_domain: Domain) -> TestFunction:
    """Test on ``m_inner`` augmented points: run ``f`` on a random ``n`` of the
    non-removed points, or reject when fewer than ``n`` remain."""
    aug = base_domain.augment()
    n = f.arity

    def evaluator(labels):
        counts = [0] * base_domain.size
        for x in labels:
            if x is not NULL:
                counts[base_domain.index(x)] += 1
        if sum(counts) < n:
            return 0.0
        return f.subsample_value(base_domain, tuple(counts))

    return TestFunction(m_inner, evaluator, exchangeable=True, name=f"{f.name}|non-null")


def native_subtractive_max(f: TestFunction, base: Dist, eta, M: int) -> float:
    """``E_{S ~ D^M} sup`` over deletions of at most ``floor(eta M)`` points of
    ``E f(Phi(S'))``, with the filter drawing ``n`` of the survivors."""
    k = added_points(eta, M)
    n = f.arity
    if M - k < n:
        raise ValueError("too few points survive the deletions to run the test")
    size = base.domain.size
    total = 0.0
    for counts in compositions(M, size):
        p = count_vector_prob(base.mass, counts)
        if not p:
            continue
        best = -1.0
        for r in range(k + 1):
            for rem in compositions(r, size):
                if any(a < b for a, b in zip(counts, rem)):
                    continue
                v = f.subsample_value(base.domain, tuple(a - b for a, b in zip(counts, rem)))
                best = max(best, v)
        total += p * best
    return total


def oblivious_sub_max(f: TestFunction, base: Dist, eta, resolution: int = 40) -> tuple[float, Dist]:
    """``sup`` over ``D`` conditioned on an event of probability at least ``1 - eta``.

    Such conditionals are exactly the ``D'`` with ``D'(x) <= D(x) / (1 - eta)``;
    the constraint is imposed by a large penalty inside the simplex search.
    """
    e = float(_eta(eta))
    cap = base.mass / (1 - e) if e < 1 else np.full(base.domain.size, np.inf)
    dom = base.domain

    def values(pts):
        excess = np.clip(pts - cap[None, :], 0.0, None).sum(axis=1)
        return f.iid_values(dom, pts) - np.where(excess > 1e-12, 10.0 + excess, 0.0)

    val, mass = maximize_on_simplex(values, dom.size, resolution, seeds=base.mass)
    return val, Dist(dom, mass / mass.sum())


def conversion_size(n: int, eps: float, eta) -> int:
    """``ceil(max(2n, 8 ln(1/eps)) / (1 - eta))``: enough draws that fewer than
    ``n`` survivors is an eps-rare event."""
    e = float(_eta(eta))
    return math.ceil(max(2 * n, 8 * math.log(1 / eps)) / (1 - e))
