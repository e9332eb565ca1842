"""Small dense two-phase simplex for bounded linear programs.

Solves ``max c.x`` subject to ``A_eq x = b_eq``, ``A_ub x <= b_ub`` and
``lb <= x <= ub`` with finite bounds.  Pivoting follows Bland's rule so runs
are deterministic and cannot cycle.  Intended for the few-dozen-variable
problems of probe design, not for large sparse models.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Infeasible

PIVOT_TOL = 1e-11


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    value: float
    unique: bool  # every nonbasic reduced cost strictly nonzero


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    others = np.nonzero(T[:, col])[0]
    for r in others:
        if r != row:
            T[r] -= T[r, col] * T[row]


def _reduced_costs(T, basis, cost):
    return cost - cost[basis] @ T[:, :-1]


def _iterate(T, basis, cost, allowed, tol):
    """Minimize ``cost.x`` over the canonical tableau in place."""
    max_iter = 50 * T.shape[1] + 1000
    for _ in range(max_iter):
        red = _reduced_costs(T, basis, cost)
        candidates = np.nonzero((red < -tol) & allowed)[0]
        if len(candidates) == 0:
            return red
        col = candidates[0]
        column = T[:, col]
        rows = np.nonzero(column > PIVOT_TOL)[0]
        if len(rows) == 0:
            raise RuntimeError("unbounded direction in a bounded program")
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        row = min(ties, key=lambda r: basis[r])
        _pivot(T, row, col)
        basis[row] = col
    raise RuntimeError("simplex iteration limit reached")


def maximize(
    c,
    lb,
    ub,
    A_eq=None,
    b_eq=None,
    A_ub=None,
    b_ub=None,
    feas_tol: float = 1e-9,
) -> LPResult:
    """Maximize ``c.x`` over a bounded polyhedron.

    Raises ``Infeasible`` when phase one cannot drive the artificial
    variables below ``feas_tol`` (scaled by the right-hand side magnitude).
    """
    c = np.asarray(c, float)
    lb = np.asarray(lb, float)
    ub = np.asarray(ub, float)
    n = len(c)
    if np.any(ub < lb):
        raise Infeasible("empty box")
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, float)).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, float).reshape(-1)
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, float)).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, float).reshape(-1)
    m_e, m_u = len(A_eq), len(A_ub)

    # shift to y = x - lb in [0, width]
    width = ub - lb
    rhs_eq = b_eq - A_eq @ lb
    rhs_ub = b_ub - A_ub @ lb

    # columns: y (n) | ub slacks (m_u) | bound slacks (n) | artificials
    rows = [(A_eq[i], None) for i in range(m_e)]
    rows += [(A_ub[i], n + i) for i in range(m_u)]
    rows += [(np.eye(n)[j], n + m_u + j) for j in range(n)]
    rhs = np.concatenate([rhs_eq, rhs_ub, width])

    m = len(rows)
    n_struct = n + m_u + n
    T = np.zeros((m, n_struct + m + 1))
    basis = [-1] * m
    n_art = 0
    for r, (coef, slack) in enumerate(rows):
        T[r, :n] = coef
        if slack is not None:
            T[r, slack] = 1.0
        T[r, -1] = rhs[r]
        if T[r, -1] < 0:
            T[r] *= -1
        if slack is not None and T[r, slack] > 0:
            basis[r] = slack
        else:
            art = n_struct + n_art
            T[r, art] = 1.0
            basis[r] = art
            n_art += 1
    T = np.hstack([T[:, : n_struct + n_art], T[:, -1:]])
    ncols = n_struct + n_art
    scale = max(1.0, float(np.abs(T[:, -1]).max(initial=0.0)))

    if n_art:
        cost1 = np.zeros(ncols)
        cost1[n_struct:] = 1.0
        _iterate(T, basis, cost1, np.ones(ncols, bool), 1e-12)
        infeas = float(T[[r for r in range(m) if basis[r] >= n_struct], -1].sum())
        if infeas > feas_tol * scale:
            raise Infeasible(f"no feasible point (phase one residual {infeas:.3g})")
        # drive zero-level artificials out of the basis; drop redundant rows
        keep = []
        for r in range(m):
            if basis[r] >= n_struct:
                nz = np.nonzero(np.abs(T[r, :n_struct]) > 1e-9)[0]
                if len(nz):
                    _pivot(T, r, nz[0])
                    basis[r] = nz[0]
                    keep.append(r)
            else:
                keep.append(r)
        T = T[keep]
        basis = [basis[r] for r in keep]
        T = np.hstack([T[:, :n_struct], T[:, -1:]])
        ncols = n_struct

    cost = np.zeros(ncols)
    cost[:n] = -c
    ctol = 1e-12 * max(1.0, float(np.abs(c).max(initial=0.0)))
    red = _iterate(T, basis, cost, np.ones(ncols, bool), ctol)

    y = np.zeros(ncols)
    y[basis] = T[:, -1]
    x = lb + np.clip(y[:n], 0.0, width)
    nonbasic = np.setdiff1d(np.arange(ncols), basis)
    unique = bool(np.all(red[nonbasic] > 1e3 * ctol))
    return LPResult(x=x, value=float(c @ x), unique=unique)
