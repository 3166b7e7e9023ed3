"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Solves ``min c @ x`` subject to ``A_eq @ x = b_eq``, ``A_ub @ x <= b_ub``,
``x >= 0``.  Intended for the tiny transportation-style programs used in this
package (a few hundred variables at most), where robustness matters more than
speed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-11


class LPError(RuntimeError):
    """The solver could not certify an optimum."""


class Infeasible(LPError):
    pass


class Unbounded(LPError):
    pass


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    objective: float
    iterations: int


def _pivot(T: np.ndarray, basis: list[int], row: int, col: int) -> None:
    T[row] /= T[row, col]
    col_vals = T[:, col].copy()
    col_vals[row] = 0.0
    T -= np.outer(col_vals, T[row])
    basis[row] = col


def _run(T: np.ndarray, basis: list[int], n_cols: int, max_iter: int, allowed: np.ndarray) -> int:
    """Minimise the objective held in the last row of ``T`` (reduced costs).

    Bland's rule: entering column is the lowest-index column with negative
    reduced cost; leaving row breaks ratio ties by lowest basic index.
    """
    m = T.shape[0] - 1
    for it in range(max_iter):
        reduced = T[-1, :n_cols]
        candidates = np.nonzero((reduced < -FEAS_TOL) & allowed)[0]
        if candidates.size == 0:
            return it
        col = int(candidates[0])
        column = T[:m, col]
        rhs = T[:m, -1]
        best_row, best_ratio = -1, np.inf
        for r in range(m):
            if column[r] > PIVOT_TOL:
                ratio = rhs[r] / column[r]
                if ratio < best_ratio - 1e-12 or (
                    abs(ratio - best_ratio) <= 1e-12 and basis[r] < basis[best_row]
                ):
                    best_row, best_ratio = r, ratio
        if best_row < 0:
            raise Unbounded("objective is unbounded below")
        _pivot(T, basis, best_row, col)
    raise LPError(f"simplex did not converge in {max_iter} iterations")


def solve(
    c,
    A_eq=None,
    b_eq=None,
    A_ub=None,
    b_ub=None,
    max_iter: int = 50_000,
) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    n_eq, n_ub = A_eq.shape[0], A_ub.shape[0]
    m = n_eq + n_ub

    # Standard form: [A_eq 0; A_ub I] [x; s] = b, then flip rows with b < 0.
    A = np.zeros((m, n + n_ub))
    A[:n_eq, :n] = A_eq
    A[n_eq:, :n] = A_ub
    A[n_eq:, n:] = np.eye(n_ub)
    b = np.concatenate([b_eq, b_ub])
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    n_std = n + n_ub

    # Slack columns can seed the basis where their row was not flipped.
    basis: list[int] = []
    needs_art: list[int] = []
    for r in range(m):
        if r >= n_eq and not neg[r]:
            basis.append(n + (r - n_eq))
        else:
            basis.append(-1)
            needs_art.append(r)
    n_art = len(needs_art)
    n_cols = n_std + n_art
    T = np.zeros((m + 1, n_cols + 1))
    T[:m, :n_std] = A
    T[:m, -1] = b
    for j, r in enumerate(needs_art):
        T[r, n_std + j] = 1.0
        basis[r] = n_std + j

    iterations = 0
    if n_art:
        # Phase one: minimise the sum of artificials.
        T[-1, n_std:n_cols] = 1.0
        for r in needs_art:
            T[-1] -= T[r]
        allowed = np.ones(n_cols, dtype=bool)
        iterations += _run(T, basis, n_cols, max_iter, allowed)
        if T[-1, -1] < -FEAS_TOL * max(1.0, float(np.abs(b).max(initial=0.0))) * 10:
            raise Infeasible(f"phase one ended with infeasibility {-T[-1, -1]:.3e}")
        # Drive remaining artificials out of the basis where possible.
        for r in range(m):
            if basis[r] >= n_std:
                row = T[r, :n_std]
                nz = np.nonzero(np.abs(row) > 1e-9)[0]
                if nz.size:
                    _pivot(T, basis, r, int(nz[0]))
        # Redundant rows keep a zero-valued artificial; it must not re-enter.

    T[-1, :] = 0.0
    T[-1, :n] = c
    for r in range(m):
        if basis[r] < n_cols and T[-1, basis[r]] != 0.0:
            T[-1] -= T[-1, basis[r]] * T[r]
    allowed = np.zeros(n_cols, dtype=bool)
    allowed[:n_std] = True
    iterations += _run(T, basis, n_cols, max_iter, allowed)

    x_full = np.zeros(n_cols)
    for r in range(m):
        x_full[basis[r]] = T[r, -1]
    x = np.clip(x_full[:n], 0.0, None)
    if n_eq and np.max(np.abs(A_eq @ x - b_eq), initial=0.0) > 1e-7:
        raise LPError("equality residual too large after solve")
    if n_ub and np.max(A_ub @ x - b_ub, initial=0.0) > 1e-7:
        raise LPError("inequality residual too large after solve")
    return LPResult(x=x, objective=float(c @ x), iterations=iterations)
