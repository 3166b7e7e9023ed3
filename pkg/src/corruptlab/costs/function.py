"""Corruption cost tables with an exact infinity sentinel."""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Real
from typing import Callable, Sequence

import numpy as np

from ..probkit.types import Domain


class _InfCost:
    """Cost of a forbidden change.  Comparable with numbers, never summed."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "inf"

    __str__ = __repr__

    def __reduce__(self):
        return (_InfCost, ())

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __float__(self) -> float:
        return math.inf

    def _forbidden(self, *_):
        raise TypeError("arithmetic on the infinite cost sentinel is not allowed")

    __add__ = __radd__ = __sub__ = __rsub__ = __mul__ = __rmul__ = _forbidden
    __truediv__ = __rtruediv__ = _forbidden


INF = _InfCost()


def as_fraction(value) -> Fraction:
    """Exact rational for a cost or a parameter such as eta.

    Floats that sit within 1e-12 of a small-denominator rational (1/3, 0.1)
    are snapped to it, so ``1 / (1/3)`` stays exactly 3.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if not isinstance(value, Real) or not math.isfinite(float(value)):
        raise ValueError(f"not a finite real number: {value!r}")
    exact = Fraction(float(value))
    snapped = exact.limit_denominator(10**6)
    return snapped if abs(float(snapped) - float(value)) <= 1e-12 * max(1.0, abs(float(value))) else exact


def _normalize_entry(v):
    if v is INF or (isinstance(v, float) and math.isinf(v) and v > 0):
        return INF
    if isinstance(v, str) and v.strip().lower() == "inf":
        return INF
    return as_fraction(v)


class CostFunction:
    """A table ``rho[x][y]`` of nonnegative costs with zero diagonal.

    Finite entries are stored as :class:`fractions.Fraction` so budget checks
    are exact; ``INF`` marks forbidden changes.
    """

    __slots__ = ("domain", "table", "_finite", "_floats")

    def __init__(self, domain: Domain, table: Sequence[Sequence]):
        rows = tuple(tuple(_normalize_entry(v) for v in row) for row in table)
        n = domain.size
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ValueError(f"cost table must be {n}x{n}")
        for i in range(n):
            if rows[i][i] is INF or rows[i][i] != 0:
                raise ValueError(f"rho(x, x) must be 0 (row {i})")
            for v in rows[i]:
                if v is not INF and v < 0:
                    raise ValueError("costs must be nonnegative")
        finite = np.array([[v is not INF for v in r] for r in rows], dtype=bool)
        floats = np.array([[float(v) if v is not INF else 0.0 for v in r] for r in rows])
        finite.setflags(write=False)
        floats.setflags(write=False)
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "table", rows)
        object.__setattr__(self, "_finite", finite)
        object.__setattr__(self, "_floats", floats)

    def __setattr__(self, name, value):
        raise AttributeError("CostFunction is immutable")

    @classmethod
    def from_callable(cls, domain: Domain, fn: Callable) -> "CostFunction":
        return cls(domain, [[fn(x, y) for y in domain] for x in domain])

    def entry(self, i: int, j: int):
        return self.table[i][j]

    def cost(self, x, y):
        return self.table[self.domain.index(x)][self.domain.index(y)]

    @property
    def finite_mask(self) -> np.ndarray:
        return self._finite

    @property
    def finite_values(self) -> np.ndarray:
        """Float costs on finite arcs; forbidden arcs hold 0 and must be masked."""
        return self._floats

    def destinations(self, i: int) -> list[tuple[int, Fraction]]:
        """Finite-cost targets of row ``i`` as ``(j, cost)``, cheapest first."""
        row = [(j, v) for j, v in enumerate(self.table[i]) if v is not INF]
        row.sort(key=lambda t: (t[1], t[0]))
        return row

    def max_finite(self) -> Fraction:
        return max(v for r in self.table for v in r if v is not INF)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CostFunction):
            return NotImplemented
        return self.domain == other.domain and self.table == other.table

    def __hash__(self) -> int:
        return hash((self.domain, self.table))

    def __repr__(self) -> str:
        return f"CostFunction(|X|={self.domain.size}, degree={degree(self)})"


def degree(rho: CostFunction) -> int:
    """Largest number of finite-cost destinations from any point."""
    return int(rho.finite_mask.sum(axis=1).max())


def budget_degree(rho: CostFunction, b) -> int:
    """Largest number of destinations reachable from one point at cost at most ``b``."""
    if b is INF or (isinstance(b, float) and math.isinf(b)):
        return degree(rho)
    b = as_fraction(b)
    if b < 0:
        raise ValueError("budget must be nonnegative")
    return max(sum(1 for v in row if v is not INF and v <= b) for row in rho.table)
