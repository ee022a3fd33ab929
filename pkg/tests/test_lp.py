"""Two-phase simplex solver."""

import itertools
import random

import numpy as np
import pytest

from openride.lp import LinearProgram, LpSolution, solve_lp


def _lp(c, a, b, lb=None, ub=None):
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    lb = np.zeros(n) if lb is None else np.asarray(lb, dtype=float)
    ub = np.full(n, np.inf) if ub is None else np.asarray(ub, dtype=float)
    return LinearProgram(c, np.asarray(a, dtype=float), np.asarray(b, dtype=float), lb, ub)


def test_basic_2d():
    # max 3x + 2y s.t. x + y <= 4, x <= 2  ->  (2, 2), value 10
    sol = solve_lp(_lp([3, 2], [[1, 1], [1, 0]], [4, 2]))
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(10.0, abs=1e-9)
    assert np.allclose(sol.x, [2.0, 2.0], atol=1e-9)
    assert sol.active_rows == (0, 1)


def test_empty_program():
    sol = solve_lp(_lp([], np.zeros((0, 0)), []))
    assert sol.status == "optimal" and sol.value == 0.0


def test_unbounded():
    sol = solve_lp(_lp([1, 0], [[-1, 1]], [1]))
    assert sol.status == "unbounded"
    assert sol.x is None and sol.value is None


def test_infeasible_simple():
    # x <= -1 with x >= 0: phase one must keep artificial mass
    sol = solve_lp(_lp([1], [[1]], [-1]))
    assert sol.status == "infeasible"
    assert sol.x is None and sol.value is None


def test_infeasible_pair():
    # x + y <= 1 and -x - y <= -3 cannot both hold
    sol = solve_lp(_lp([0, 0], [[1, 1], [-1, -1]], [1, -3]))
    assert sol.status == "infeasible"


def test_negative_rhs_feasible():
    # -x <= -2 forces x >= 2; maximize -x  ->  x = 2
    sol = solve_lp(_lp([-1], [[-1]], [-2]))
    assert sol.status == "optimal"
    assert sol.x[0] == pytest.approx(2.0, abs=1e-9)
    assert sol.value == pytest.approx(-2.0, abs=1e-9)


def test_lower_bound_shift():
    # lb = (-5, 1); max x + y s.t. x + y <= 0 with y >= 1  ->  (-1, 1)
    sol = solve_lp(_lp([1, 1], [[1, 1]], [0], lb=[-5, 1], ub=[np.inf, np.inf]))
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(0.0, abs=1e-9)
    assert sol.x[1] >= 1.0 - 1e-9


def test_upper_bounds_become_rows():
    sol = solve_lp(_lp([1, 1], np.zeros((0, 2)), [], ub=[1.5, 2.5]))
    assert sol.status == "optimal"
    assert np.allclose(sol.x, [1.5, 2.5], atol=1e-9)
    assert sol.active_rows == ()  # bound rows are not reported as active


def test_degenerate_redundant_rows():
    sol = solve_lp(_lp([1, 1], [[1, 1], [1, 0], [0, 1], [2, 2]], [2, 1, 1, 4]))
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(2.0, abs=1e-9)


def test_active_rows_only_original_indices():
    # one original row (tight) plus a finite upper bound (also tight)
    sol = solve_lp(_lp([1, 2], [[1, 1]], [3], ub=[np.inf, 1.0]))
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(4.0, abs=1e-9)
    assert np.allclose(sol.x, [2.0, 1.0], atol=1e-9)
    assert sol.active_rows == (0,)


def test_validation_errors():
    with pytest.raises(ValueError):
        _lp([1, 2], [[1]], [1])
    with pytest.raises(ValueError):
        LinearProgram(
            np.ones(1), np.ones((1, 1)), np.ones(1), np.array([-np.inf]), np.array([1.0])
        )
    with pytest.raises(ValueError):
        _lp([1], [[1]], [1], lb=[2.0], ub=[1.0])


# ---------------------------------------------------------------------------
# randomized cross-check against brute-force vertex enumeration


def _oracle_best(c, a, b, box):
    """Maximize c @ x over {a x <= b, 0 <= x <= box} by trying every vertex."""
    n = c.shape[0]
    cons = [(a[i], b[i]) for i in range(a.shape[0])]
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        cons.append((e, box))
        cons.append((-e, 0.0))
    best = None
    for combo in itertools.combinations(range(len(cons)), n):
        m = np.array([cons[i][0] for i in combo])
        r = np.array([cons[i][1] for i in combo])
        try:
            x = np.linalg.solve(m, r)
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(x)):
            continue
        if all(g @ x <= h + 1e-7 for g, h in cons):
            v = float(c @ x)
            if best is None or v > best:
                best = v
    return best


@pytest.mark.parametrize("n,m,seed", [(2, 3, 11), (3, 4, 23), (3, 6, 57)])
def test_random_lps_match_vertex_enumeration(n, m, seed):
    rng = random.Random(seed)
    box = 5.0
    for case in range(80):
        c = np.array([rng.randint(-5, 5) for _ in range(n)], dtype=float)
        a = np.array([[rng.randint(-3, 3) for _ in range(n)] for _ in range(m)], dtype=float)
        x0 = np.array([rng.uniform(0, box) for _ in range(n)])
        b = a @ x0 + np.array([rng.uniform(-2, 4) for _ in range(m)])
        if case % 5 == 4:
            b = b - 20.0  # push some cases into infeasibility
        lp = _lp(c, a, b, ub=np.full(n, box))
        sol = solve_lp(lp)
        want = _oracle_best(c, a, b, box)
        if want is None:
            assert sol.status == "infeasible", f"case {case}: expected infeasible"
        else:
            assert sol.status == "optimal", f"case {case}: {sol.status}"
            assert sol.value == pytest.approx(want, abs=1e-6), f"case {case}"
            # reported point must itself be feasible
            assert np.all(a @ sol.x <= b + 1e-7)
            assert np.all(sol.x >= -1e-9) and np.all(sol.x <= box + 1e-9)
