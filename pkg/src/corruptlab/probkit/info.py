"""Information measures on explicit finite tables (natural logarithms)."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .types import Dist, JointDist, require_same_domain

INF = math.inf


def tv_distance(p: Dist, q: Dist) -> float:
    require_same_domain(p, q)
    return float(0.5 * np.abs(p.mass - q.mass).sum())


def _kl_arrays(p: np.ndarray, q: np.ndarray) -> float:
    p = p.ravel()
    q = q.ravel()
    pos = p > 0
    if np.any(q[pos] <= 0):
        return INF
    val = float(np.sum(p[pos] * (np.log(p[pos]) - np.log(q[pos]))))
    # rounding can push a true zero slightly negative
    return max(val, 0.0)


def kl_divergence(p: Dist, q: Dist) -> float:
    """KL(p || q); ``inf`` when p puts mass where q has none."""
    require_same_domain(p, q)
    return _kl_arrays(p.mass, q.mass)


def _check_blocks(joint: JointDist, *blocks: Sequence[int], allow_empty_last: bool = False) -> list[list[int]]:
    out = []
    seen: set[int] = set()
    for j, block in enumerate(blocks):
        block = [int(i) for i in block]
        if not block and not (allow_empty_last and j == len(blocks) - 1):
            raise ValueError("index blocks must be nonempty")
        for i in block:
            if not 0 <= i < joint.arity:
                raise IndexError(f"coordinate {i} out of range for arity {joint.arity}")
            if i in seen:
                raise ValueError("index blocks must be disjoint")
            seen.add(i)
        out.append(block)
    return out


def _flat_marginal(joint: JointDist, blocks: list[list[int]]) -> np.ndarray:
    """Marginal over the concatenated blocks, one flattened axis per block."""
    order = [i for b in blocks for i in b]
    if not order:
        return np.ones(())
    table = joint.marginal(order)
    size = joint.domain.size
    return table.reshape([size ** len(b) for b in blocks])


def mutual_information(joint: JointDist, block_a: Sequence[int], block_b: Sequence[int]) -> float:
    a, b = _check_blocks(joint, block_a, block_b)
    pab = _flat_marginal(joint, [a, b])
    prod = np.outer(pab.sum(axis=1), pab.sum(axis=0))
    return _kl_arrays(pab, prod)


def conditional_mutual_information(
    joint: JointDist, a: Sequence[int], b: Sequence[int], c: Sequence[int]
) -> float:
    """I(a; b | c).  An empty ``c`` reduces to plain mutual information."""
    a, b, c = _check_blocks(joint, a, b, c, allow_empty_last=True)
    if not c:
        return mutual_information(joint, a, b)
    pabc = _flat_marginal(joint, [a, b, c])
    pac = pabc.sum(axis=1)
    pbc = pabc.sum(axis=0)
    pc = pac.sum(axis=0)
    A, B, C = np.nonzero(pabc > 0)
    v = pabc[A, B, C]
    terms = np.log(v) + np.log(pc[C]) - np.log(pac[A, C]) - np.log(pbc[B, C])
    return max(float(np.sum(v * terms)), 0.0)


def total_correlation(joint: JointDist, block: Sequence[int]) -> float:
    """KL of the block marginal against the product of its coordinate marginals."""
    (block,) = _check_blocks(joint, block)
    table = joint.marginal(block)
    prod = np.ones(())
    for axis in range(len(block)):
        other = tuple(j for j in range(len(block)) if j != axis)
        prod = np.multiply.outer(prod, table.sum(axis=other) if other else table)
    return _kl_arrays(table, prod)


def conditional_total_correlation(joint: JointDist, block: Sequence[int], given: Sequence[int]) -> float:
    """Total correlation of ``block`` conditioned on ``given``, averaged over ``given``.

    Computed as sum p(a,b) [ln p(a,b) + (|A|-1) ln p(b) - sum_i ln p(a_i, b)].
    """
    block, given = _check_blocks(joint, block, given, allow_empty_last=True)
    if not given:
        return total_correlation(joint, block)
    size = joint.domain.size
    k = len(given)
    table = joint.marginal(block + given)
    n_a = len(block)
    flat = table.reshape((size,) * n_a + (size**k,))
    pb = flat.reshape(-1, size**k).sum(axis=0)
    idx = np.nonzero(flat > 0)
    v = flat[idx]
    acc = np.log(v) + (n_a - 1) * np.log(pb[idx[-1]])
    for axis in range(n_a):
        other = tuple(j for j in range(n_a) if j != axis)
        pab = flat.sum(axis=other) if other else flat
        acc = acc - np.log(pab[idx[axis], idx[-1]])
    return max(float(np.sum(v * acc)), 0.0)


def entropy(p: Dist | np.ndarray) -> float:
    mass = p.mass if isinstance(p, Dist) else np.asarray(p, dtype=float).ravel()
    pos = mass[mass > 0]
    return float(-np.sum(pos * np.log(pos)))
