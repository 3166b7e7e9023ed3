"""Finite domains and explicit probability tables."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Sequence

import numpy as np

MASS_TOL = 1e-9
DEFAULT_CELL_CAP = 10**7


class DomainError(ValueError):
    pass


class CapExceeded(RuntimeError):
    """An exact enumeration would exceed the configured cap."""


class _Null:
    """The removal/insertion sentinel appended to augmented domains."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "⌀"

    __str__ = __repr__

    def __reduce__(self):
        return (_Null, ())

    def __lt__(self, other):
        # sorts after every ordinary label
        return False

    def __gt__(self, other):
        return other is not self


NULL = _Null()


@dataclass(frozen=True)
class Domain:
    elements: tuple
    augmented: bool = False

    def __post_init__(self):
        elems = tuple(self.elements)
        object.__setattr__(self, "elements", elems)
        if not elems:
            raise DomainError("domain must contain at least one element")
        if len(set(elems)) != len(elems):
            raise DomainError("domain labels must be unique")
        nulls = sum(1 for e in elems if e is NULL)
        if self.augmented:
            if nulls != 1 or elems[-1] is not NULL:
                raise DomainError("augmented domain must end with exactly one ⌀")
        elif nulls:
            raise DomainError("⌀ may only appear in an augmented domain")
        object.__setattr__(self, "_index", {e: i for i, e in enumerate(elems)})

    @classmethod
    def range(cls, size: int) -> "Domain":
        return cls(tuple(range(size)))

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator:
        return iter(self.elements)

    def __contains__(self, label) -> bool:
        return label in self._index

    @property
    def size(self) -> int:
        return len(self.elements)

    def index(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise DomainError(f"{label!r} is not in the domain") from None

    def label(self, i: int):
        return self.elements[i]

    def augment(self) -> "Domain":
        if self.augmented:
            return self
        return Domain(self.elements + (NULL,), augmented=True)

    @property
    def base(self) -> "Domain":
        """The domain without the ⌀ sentinel."""
        if not self.augmented:
            return self
        return Domain(self.elements[:-1])

    @property
    def null_index(self) -> int | None:
        return self.size - 1 if self.augmented else None


def _check_mass(mass: np.ndarray) -> None:
    if not np.all(np.isfinite(mass)):
        raise ValueError("probabilities must be finite")
    if np.any(mass < -MASS_TOL):
        raise ValueError("probabilities must be nonnegative")
    total = float(mass.sum())
    if abs(total - 1.0) > MASS_TOL:
        raise ValueError(f"probabilities sum to {total!r}, not 1")


class Dist:
    """A probability vector over a finite :class:`Domain`."""

    __slots__ = ("domain", "mass", "_key")

    def __init__(self, domain: Domain, mass: Iterable[float]):
        arr = np.array(list(mass) if not isinstance(mass, np.ndarray) else mass, dtype=float)
        if arr.shape != (domain.size,):
            raise ValueError(f"expected {domain.size} probabilities, got shape {arr.shape}")
        _check_mass(arr)
        arr = np.clip(arr, 0.0, None)
        arr.setflags(write=False)
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "mass", arr)
        object.__setattr__(self, "_key", None)

    def __setattr__(self, name, value):
        raise AttributeError("Dist is immutable")

    @classmethod
    def uniform(cls, domain: Domain, support: Sequence | None = None) -> "Dist":
        mass = np.zeros(domain.size)
        idx = [domain.index(x) for x in support] if support is not None else range(domain.size)
        idx = list(idx)
        mass[idx] = 1.0 / len(idx)
        return cls(domain, mass)

    @classmethod
    def point_mass(cls, domain: Domain, label) -> "Dist":
        mass = np.zeros(domain.size)
        mass[domain.index(label)] = 1.0
        return cls(domain, mass)

    @classmethod
    def from_dict(cls, domain: Domain, probs: dict) -> "Dist":
        mass = np.zeros(domain.size)
        for label, p in probs.items():
            mass[domain.index(label)] = p
        return cls(domain, mass)

    def __getitem__(self, label) -> float:
        return float(self.mass[self.domain.index(label)])

    def __len__(self) -> int:
        return self.domain.size

    def support(self, tol: float = 0.0) -> list[int]:
        return [i for i, p in enumerate(self.mass) if p > tol]

    def lift(self, domain: Domain) -> "Dist":
        """Re-express on a superset domain (e.g. its augmentation)."""
        mass = np.zeros(domain.size)
        for i, label in enumerate(self.domain.elements):
            mass[domain.index(label)] = self.mass[i]
        return Dist(domain, mass)

    def mix(self, other: "Dist", weight: float) -> "Dist":
        """``weight * self + (1 - weight) * other``."""
        require_same_domain(self, other)
        return Dist(self.domain, weight * self.mass + (1 - weight) * other.mass)

    def _hash_key(self):
        if self._key is None:
            object.__setattr__(self, "_key", (self.domain, self.mass.tobytes()))
        return self._key

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dist):
            return NotImplemented
        return self._hash_key() == other._hash_key()

    def __hash__(self) -> int:
        return hash(self._hash_key())

    def __repr__(self) -> str:
        body = ", ".join(f"{lab!r}: {p:.6g}" for lab, p in zip(self.domain, self.mass))
        return f"Dist({{{body}}})"


def require_same_domain(p, q) -> None:
    if p.domain != q.domain:
        raise DomainError("distributions live on different domains")


def check_cap(domain_size: int, arity: int, cap: int = DEFAULT_CELL_CAP) -> None:
    cells = max(arity, 1) * domain_size**arity
    if cells > cap:
        raise CapExceeded(f"{arity}·{domain_size}^{arity} = {cells} cells exceeds cap {cap}")


class JointDist:
    """Dense probability table over ordered tuples in ``X^arity``.

    ``mass`` has shape ``(|X|,) * arity``; C order, so the last coordinate
    varies fastest when the table is flattened.
    """

    __slots__ = ("domain", "arity", "mass")

    def __init__(self, domain: Domain, mass: np.ndarray, cap: int = DEFAULT_CELL_CAP):
        arr = np.array(mass, dtype=float)
        arity = arr.ndim
        check_cap(domain.size, arity, cap)
        if arr.shape != (domain.size,) * arity:
            raise ValueError(f"table shape {arr.shape} does not match |X|={domain.size}")
        _check_mass(arr)
        arr = np.clip(arr, 0.0, None)
        arr.setflags(write=False)
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "arity", arity)
        object.__setattr__(self, "mass", arr)

    def __setattr__(self, name, value):
        raise AttributeError("JointDist is immutable")

    @classmethod
    def from_tuples(cls, domain: Domain, arity: int, probs: dict, cap: int = DEFAULT_CELL_CAP) -> "JointDist":
        """Build from ``{tuple_of_labels: probability}``."""
        check_cap(domain.size, arity, cap)
        arr = np.zeros((domain.size,) * arity)
        for tup, p in probs.items():
            if len(tup) != arity:
                raise ValueError("tuple length does not match arity")
            arr[tuple(domain.index(x) for x in tup)] += p
        return cls(domain, arr, cap)

    def prob(self, labels: Sequence) -> float:
        return float(self.mass[tuple(self.domain.index(x) for x in labels)])

    def marginal(self, block: Sequence[int]) -> np.ndarray:
        """Marginal table over ``block`` with axes in the given order."""
        block = list(block)
        if len(set(block)) != len(block):
            raise ValueError("block indices must be distinct")
        for i in block:
            if not 0 <= i < self.arity:
                raise IndexError(f"coordinate {i} out of range for arity {self.arity}")
        rest = tuple(i for i in range(self.arity) if i not in block)
        table = self.mass.sum(axis=rest) if rest else self.mass
        kept = sorted(block)
        return np.transpose(table, [kept.index(i) for i in block])

    def marginal_dist(self, i: int) -> Dist:
        return Dist(self.domain, self.marginal([i]))

    def average_marginal(self) -> Dist:
        """Average of the single-coordinate marginals."""
        acc = sum(self.marginal([i]) for i in range(self.arity))
        return Dist(self.domain, acc / self.arity)

    def is_exchangeable(self, tol: float = 1e-12) -> bool:
        for i in range(self.arity - 1):
            perm = list(range(self.arity))
            perm[i], perm[i + 1] = perm[i + 1], perm[i]
            if not np.allclose(self.mass, np.transpose(self.mass, perm), atol=tol, rtol=0):
                return False
        return True

    def items(self, tol: float = 0.0) -> Iterator[tuple[tuple[int, ...], float]]:
        """Yield ``(index_tuple, probability)`` for cells above ``tol``."""
        for idx in zip(*np.nonzero(self.mass > tol)):
            yield tuple(int(i) for i in idx), float(self.mass[idx])

    def __repr__(self) -> str:
        return f"JointDist(|X|={self.domain.size}, arity={self.arity})"


@dataclass(frozen=True)
class Coupling:
    row_dist: Dist
    col_dist: Dist
    table: Any

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        n_r, n_c = self.row_dist.domain.size, self.col_dist.domain.size
        if t.shape != (n_r, n_c):
            raise ValueError("coupling table has the wrong shape")
        if np.any(t < -MASS_TOL):
            raise ValueError("coupling entries must be nonnegative")
        if np.max(np.abs(t.sum(axis=1) - self.row_dist.mass)) > MASS_TOL:
            raise ValueError("row sums do not match the row distribution")
        if np.max(np.abs(t.sum(axis=0) - self.col_dist.mass)) > MASS_TOL:
            raise ValueError("column sums do not match the column distribution")
        t = np.clip(t, 0.0, None)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    def conditional(self, row: int) -> np.ndarray:
        """Distribution of the column variable given the row index."""
        p = self.table[row]
        s = p.sum()
        if s <= 0:
            out = np.zeros_like(p)
            out[row] = 1.0
            return out
        return p / s


def product_power(p: Dist, n: int, cap: int = DEFAULT_CELL_CAP) -> JointDist:
    """The i.i.d. joint ``p^n``."""
    if n < 1:
        raise ValueError("arity must be at least 1")
    check_cap(p.domain.size, n, cap)
    table = p.mass
    for _ in range(n - 1):
        table = np.multiply.outer(table, p.mass)
    return JointDist(p.domain, table, cap)


def mixture(components: Sequence[tuple[float, JointDist]]) -> JointDist:
    if not components:
        raise ValueError("empty mixture")
    weights = np.array([w for w, _ in components], dtype=float)
    if np.any(weights < -MASS_TOL) or abs(weights.sum() - 1.0) > MASS_TOL:
        raise ValueError("mixture weights must be a probability vector")
    first = components[0][1]
    acc = np.zeros_like(first.mass)
    for w, comp in components:
        if comp.domain != first.domain or comp.arity != first.arity:
            raise DomainError("mixture components must share domain and arity")
        acc = acc + w * comp.mass
    return JointDist(first.domain, acc)


def all_tuples(size: int, arity: int) -> Iterator[tuple[int, ...]]:
    return itertools.product(range(size), repeat=arity)


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Nonnegative integer vectors of length ``parts`` summing to ``total``, in lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def multinomial_coef(counts: Sequence[int]) -> int:
    out = math.factorial(sum(counts))
    for c in counts:
        out //= math.factorial(c)
    return out
