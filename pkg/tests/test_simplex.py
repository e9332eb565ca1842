import numpy as np
import pytest
from scipy.optimize import linprog

from distsense import simplex
from distsense.errors import Infeasible


def reference_value(c, lb, ub, A_eq=None, b_eq=None, A_ub=None, b_ub=None):
    res = linprog(-np.asarray(c), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=list(zip(lb, ub)), method="highs")
    assert res.status == 0, res.message
    return -res.fun


def test_box_only():
    res = simplex.maximize([1.0, -2.0, 0.5], [-1, -1, -3], [1, 2, 3])
    np.testing.assert_allclose(res.x, [1, -1, 3])
    assert res.value == pytest.approx(4.5)


def test_equality_pins_coordinates():
    # noise rows e_2..e_4, signal e_1, n = 5
    A = np.eye(4)[1:]
    res = simplex.maximize(np.eye(4)[0], -5 * np.ones(4), 5 * np.ones(4), A_eq=A, b_eq=np.zeros(3))
    np.testing.assert_allclose(res.x, [5, 0, 0, 0], atol=1e-12)


def test_redundant_equalities():
    A = np.array([[1.0, 1.0, 0.0], [2.0, 2.0, 0.0], [1.0, 1.0, 0.0]])
    res = simplex.maximize([1.0, 0.0, 1.0], -np.ones(3), np.ones(3), A_eq=A, b_eq=np.zeros(3))
    assert res.value == pytest.approx(2.0)


def test_infeasible():
    with pytest.raises(Infeasible):
        simplex.maximize([1.0, 1.0], [0, 0], [1, 1], A_eq=[[1.0, 1.0]], b_eq=[5.0])


def test_inequalities_with_negative_rhs():
    res = simplex.maximize([1.0, 1.0], [-2, -2], [2, 2], A_ub=[[-1.0, 0.0]], b_ub=[-1.5])
    assert res.value == pytest.approx(4.0)
    res = simplex.maximize([-1.0, 0.0], [-2, -2], [2, 2], A_ub=[[-1.0, 0.0]], b_ub=[-1.5])
    assert res.x[0] == pytest.approx(1.5)


def test_matches_highs_on_random_programs(rng):
    for _ in range(200):
        J = int(rng.integers(1, 8))
        m = int(rng.integers(0, J))
        c = rng.normal(size=J)
        n = rng.integers(0, 4, size=J).astype(float)
        A = rng.normal(size=(m, J))
        b = np.zeros(m)
        res = simplex.maximize(c, -n, n, A_eq=A if m else None, b_eq=b if m else None)
        ref = reference_value(c, -n, n, A if m else None, b if m else None)
        assert res.value == pytest.approx(ref, abs=1e-9, rel=1e-9)
        assert np.all(np.abs(res.x) <= n + 1e-9)
        if m:
            assert np.abs(A @ res.x).max() < 1e-9 * max(1.0, np.abs(res.x).max())


def test_deterministic():
    c = np.array([1.0, 1.0, 0.0])
    a = simplex.maximize(c, -np.ones(3), np.ones(3))
    b = simplex.maximize(c, -np.ones(3), np.ones(3))
    np.testing.assert_array_equal(a.x, b.x)
    assert not a.unique  # third coordinate is free on the optimal face
