"""Dense two-phase simplex for small linear programs.

Maximizes objective @ x subject to a_ub @ x <= b_ub and per-variable
bounds.  Variables are shifted by their (finite) lower bounds into
standard form, finite upper bounds become extra rows, and one slack is
added per row.  Phase one minimizes the sum of artificial variables on
rows whose shifted right-hand side is negative; phase two optimizes
the real objective with artificial columns barred from entering.

Pivoting uses Bland's smallest-index rule on entering columns and on
ratio-test ties, which prevents cycling on the degenerate vertices
these programs produce.  Everything is dense numpy; the intended scale
is tens of variables and rows, far below where sparsity or revised
factorizations would pay off.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_LP_TOL = 1e-9
_MAX_PIVOTS = 20000


@dataclass(frozen=True)
class LinearProgram:
    """maximize objective @ x  s.t.  a_ub @ x <= b_ub,  lb <= x <= ub."""

    objective: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray
    lb: np.ndarray  # finite
    ub: np.ndarray  # np.inf entries allowed

    def __post_init__(self):
        object.__setattr__(self, "objective", np.asarray(self.objective, dtype=float))
        object.__setattr__(self, "a_ub", np.asarray(self.a_ub, dtype=float))
        object.__setattr__(self, "b_ub", np.asarray(self.b_ub, dtype=float))
        object.__setattr__(self, "lb", np.asarray(self.lb, dtype=float))
        object.__setattr__(self, "ub", np.asarray(self.ub, dtype=float))
        n = self.objective.shape[0]
        if self.a_ub.ndim != 2 or self.a_ub.shape[1] != n:
            raise ValueError("a_ub must have one column per variable")
        if self.b_ub.shape[0] != self.a_ub.shape[0]:
            raise ValueError("b_ub length must match the number of rows")
        if self.lb.shape[0] != n or self.ub.shape[0] != n:
            raise ValueError("bounds must cover every variable")
        if not np.all(np.isfinite(self.lb)):
            raise ValueError("lower bounds must be finite")
        if np.any(self.ub < self.lb):
            raise ValueError("upper bounds must dominate lower bounds")


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded" | "numerical"
    x: np.ndarray | None
    value: float | None
    active_rows: tuple[int, ...]
    iterations: int


def _pivot(T: np.ndarray, basis: list[int], row: int, col: int) -> None:
    T[row] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row and abs(T[i, col]) > 0.0:
            T[i] -= T[i, col] * T[row]
    basis[row] = col


def _run_simplex(T: np.ndarray, basis: list[int], enter_limit: int, tol: float):
    """Optimize in place; the last tableau row holds reduced costs.

    Returns (status, pivots) where status is "optimal" or "unbounded".
    """
    m = T.shape[0] - 1
    pivots = 0
    while True:
        z = T[-1, :enter_limit]
        col = -1
        for j in range(enter_limit):  # Bland: smallest improving index
            if z[j] > tol:
                col = j
                break
        if col < 0:
            return "optimal", pivots
        best, row = np.inf, -1
        for i in range(m):
            if T[i, col] > tol:
                ratio = T[i, -1] / T[i, col]
                if ratio < best - tol or (ratio <= best + tol and (row < 0 or basis[i] < basis[row])):
                    if ratio < best:
                        best = ratio
                    row = i
        if row < 0:
            return "unbounded", pivots
        _pivot(T, basis, row, col)
        pivots += 1
        if pivots > _MAX_PIVOTS:
            return "numerical", pivots


def solve_lp(lp: LinearProgram, tol: float = DEFAULT_LP_TOL) -> LpSolution:
    n = lp.objective.shape[0]
    if n == 0:
        return LpSolution("optimal", np.zeros(0), 0.0, (), 0)

    # shift to y = x - lb >= 0; finite upper bounds become rows
    rows = [lp.a_ub]
    rhs = [lp.b_ub - lp.a_ub @ lp.lb]
    n_orig_rows = lp.a_ub.shape[0]
    for j in range(n):
        if np.isfinite(lp.ub[j]):
            r = np.zeros(n)
            r[j] = 1.0
            rows.append(r.reshape(1, -1))
            rhs.append(np.array([lp.ub[j] - lp.lb[j]]))
    A = np.vstack(rows)
    b = np.concatenate(rhs)
    m = A.shape[0]

    # equalities A y + s = b with slacks; negate rows to make b nonnegative
    full = np.hstack([A, np.eye(m)])
    neg = b < 0
    full[neg] *= -1.0
    b = np.where(neg, -b, b)
    art_rows = np.nonzero(neg)[0]
    n_art = art_rows.shape[0]
    art = np.zeros((m, n_art))
    for k, i in enumerate(art_rows):
        art[i, k] = 1.0
    ncols = n + m + n_art
    T = np.zeros((m + 1, ncols + 1))
    T[:m, : n + m] = full
    T[:m, n + m : ncols] = art
    T[:m, -1] = b
    basis = [0] * m
    for i in range(m):
        basis[i] = n + i  # slack, unless this row was negated
    for k, i in enumerate(art_rows):
        basis[i] = n + m + k

    pivots = 0
    if n_art:
        # phase one: maximize minus the sum of artificials
        z = np.zeros(ncols + 1)
        z[n + m : ncols] = -1.0
        for i, bi in enumerate(basis):
            if z[bi] != 0.0:
                z -= z[bi] * T[i]
        T[-1] = z
        status, p1 = _run_simplex(T, basis, ncols, tol)
        pivots += p1
        if status == "numerical":
            return LpSolution("numerical", None, None, (), pivots)
        if T[-1, -1] > 1e-7:  # leftover artificial mass, see row invariant
            return LpSolution("infeasible", None, None, (), pivots)
        for i in range(m):  # drive leftover zero-level artificials out
            if basis[i] >= n + m:
                for j in range(n + m):
                    if abs(T[i, j]) > 1e-7:
                        _pivot(T, basis, i, j)
                        pivots += 1
                        break

    # phase two over the real objective, artificials barred from entering
    c_full = np.zeros(ncols + 1)
    c_full[:n] = lp.objective
    z = c_full.copy()
    for i, bi in enumerate(basis):
        if z[bi] != 0.0:
            z -= z[bi] * T[i]
    T[-1] = z
    status, p2 = _run_simplex(T, basis, n + m, tol)
    pivots += p2
    if status != "optimal":
        return LpSolution(status, None, None, (), pivots)

    y = np.zeros(ncols)
    for i, bi in enumerate(basis):
        y[bi] = T[i, -1]
    x = lp.lb + y[:n]
    value = float(lp.objective @ x)
    resid = lp.a_ub @ x - lp.b_ub
    active = tuple(i for i in range(n_orig_rows) if resid[i] >= -1e-7)
    return LpSolution("optimal", x, value, active, pivots)
