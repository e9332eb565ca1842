"""Optimal noise-insensitive probe configurations.

A probe is the equal superposition of two product eigenstates ``|s>`` and
``|r>`` with effective site eigenvalues inside the box ``|s_j| <= n_j``.  It
is blind to a noise generator ``G_k`` exactly when ``f_k . (s - r) = 0`` and
its quantum Fisher information for the signal is ``(f_sig . (s - r))^2``.
Because the feasible box is symmetric under inversion, the best pair always
has ``r = -s``; ``s`` then solves a linear program over the box.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import simplex
from .errors import Degenerate, Infeasible, SignalIndistinguishable, TooLarge

CONSTRAINT_TOL = 1e-9
INDEPENDENCE_TOL = 1e-9
ENUMERATION_LIMIT = 10**7


@dataclass(frozen=True)
class DesignProblem:
    """Which row of ``F`` to sense, which rows are noise, and the qubit budget."""

    F: np.ndarray
    signal_index: int
    noise_indices: tuple[int, ...]
    qubit_counts: np.ndarray
    integer_mode: bool = False
    constraint_tol: float = CONSTRAINT_TOL

    def __post_init__(self):
        F = np.atleast_2d(np.asarray(self.F, dtype=float))
        n = np.asarray(self.qubit_counts, dtype=float)
        K, J = F.shape
        noise = tuple(sorted(set(int(k) for k in self.noise_indices)))
        if not 0 <= self.signal_index < K:
            raise IndexError(f"signal index {self.signal_index} out of range for {K} rows")
        if any(k < 0 or k >= K for k in noise):
            raise IndexError(f"noise indices {noise} out of range for {K} rows")
        if self.signal_index in noise:
            raise ValueError("signal index cannot also be a noise index")
        if n.shape != (J,):
            raise ValueError(f"need {J} qubit counts, got {n.size}")
        if np.any(n < 0):
            raise ValueError("qubit counts must be nonnegative")
        F = F.copy()
        F.setflags(write=False)
        n = n.copy()
        n.setflags(write=False)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "qubit_counts", n)
        object.__setattr__(self, "noise_indices", noise)

    @property
    def signal(self) -> np.ndarray:
        return self.F[self.signal_index]

    @property
    def noise_rows(self) -> np.ndarray:
        return self.F[list(self.noise_indices)].reshape(-1, self.F.shape[1])

    def with_noise(self, noise_indices) -> "DesignProblem":
        return DesignProblem(
            self.F, self.signal_index, tuple(noise_indices), self.qubit_counts,
            self.integer_mode, self.constraint_tol,
        )


@dataclass(frozen=True)
class ProbePair:
    s: np.ndarray
    r: np.ndarray
    qfi: float

    @classmethod
    def from_vectors(cls, s, r, signal) -> "ProbePair":
        s = np.asarray(s, dtype=float) + 0.0  # no negative zeros
        r = np.asarray(r, dtype=float) + 0.0
        s.setflags(write=False)
        r.setflags(write=False)
        return cls(s, r, float(np.dot(signal, s - r) ** 2))

    @property
    def gap(self) -> np.ndarray:
        return self.s - self.r

    def residuals(self, noise_rows) -> np.ndarray:
        """Relative noise overlaps ``|f_k.(s-r)| / (||f_k|| ||s-r||)`` per noise row."""
        noise_rows = np.atleast_2d(noise_rows)
        if noise_rows.size == 0:
            return np.zeros(0)
        d = self.gap
        denom = np.linalg.norm(noise_rows, axis=1) * np.linalg.norm(d)
        num = np.abs(noise_rows @ d)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(denom > 0, num / np.where(denom > 0, denom, 1.0), 0.0)

    def in_box(self, qubit_counts, tol: float = 1e-9) -> bool:
        n = np.asarray(qubit_counts, float)
        return bool(np.all(np.abs(self.s) <= n + tol) and np.all(np.abs(self.r) <= n + tol))


@dataclass(frozen=True)
class PerpDecomposition:
    f_perp: np.ndarray
    f_par: np.ndarray
    dfs_basis: np.ndarray  # rows: orthonormal basis of {s : f_k.s = 0 for all noise k}
    noise_basis: np.ndarray = field(repr=False)  # rows: orthonormal basis of the noise span


def _gram_schmidt(vectors, tol, basis=()):
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    Extends ``basis`` by the normalized components of ``vectors`` that are
    not already (numerically) in its span.
    """
    basis = [np.asarray(q, float) for q in basis]
    for v in vectors:
        v = np.asarray(v, float)
        norm = np.linalg.norm(v)
        if norm == 0:
            continue
        w = v.copy()
        for _ in range(2):
            for q in basis:
                w -= (q @ w) * q
        wn = np.linalg.norm(w)
        if wn > tol * norm:
            basis.append(w / wn)
    return basis


def perp_decompose(problem: DesignProblem) -> PerpDecomposition:
    """Split the signal row into parts orthogonal to and inside the noise span."""
    J = problem.F.shape[1]
    f = problem.signal
    noise_q = _gram_schmidt(problem.noise_rows, INDEPENDENCE_TOL)
    f_par = np.zeros(J)
    for q in noise_q:
        f_par += (q @ f) * q
    f_perp = f - f_par
    fnorm = np.linalg.norm(f)
    if np.linalg.norm(f_perp) < 1e-9 * fnorm or fnorm == 0:
        raise SignalIndistinguishable(
            "signal row lies in the span of the noise rows: the signal is "
            "physically indistinguishable from the noise; rearrange or add sensors"
        )
    # complete the noise basis with unit vectors; the new directions span the DFS
    full = _gram_schmidt(np.eye(J), INDEPENDENCE_TOL, basis=noise_q)
    dfs = np.array(full[len(noise_q):]).reshape(-1, J)
    noise_basis = np.array(noise_q).reshape(-1, J)
    return PerpDecomposition(f_perp=f_perp, f_par=f_par, dfs_basis=dfs, noise_basis=noise_basis)


def noiseless_optimum(problem: DesignProblem) -> ProbePair:
    """Extremal eigenstates of the signal generator: ``s_j = n_j sign(f_j)``, ``r = -s``."""
    if problem.noise_indices:
        raise ValueError("noiseless_optimum ignores noise; pass a problem without noise rows")
    s = problem.qubit_counts * np.sign(problem.signal)
    return ProbePair.from_vectors(s, -s, problem.signal)


def _lex_min_on_face(c, lb, ub, A_eq, b_eq, value, tol):
    """Lexicographically smallest point of the optimal face ``{c.x = value}``."""
    A = np.vstack([A_eq, c[None, :]])
    b = np.concatenate([b_eq, [value]])
    x = None
    for j in range(len(c)):
        e = np.zeros(len(c))
        e[j] = -1.0
        res = simplex.maximize(e, lb, ub, A_eq=A, b_eq=b, feas_tol=tol)
        x = res.x
        if res.unique:
            break
        A = np.vstack([A, -e[None, :]])
        b = np.concatenate([b, [x[j]]])
    return x


def optimal_probe(problem: DesignProblem, decomposition: PerpDecomposition | None = None) -> ProbePair:
    """Continuous optimum: ``max f_sig.s`` s.t. ``f_k.s = 0`` (noise k), ``|s_j| <= n_j``.

    The equality rows are the orthonormal noise basis, so rescaled or
    redundant noise rows define the same program.  Among several optimal
    vertices the lexicographically smallest ``s`` is returned.
    """
    if problem.integer_mode:
        raise ValueError("integer-mode problems go through optimal_probe_integer")
    dec = decomposition or perp_decompose(problem)
    f = problem.signal
    n = problem.qubit_counts
    A = dec.noise_basis
    b = np.zeros(len(A))
    res = simplex.maximize(f, -n, n, A_eq=A, b_eq=b, feas_tol=problem.constraint_tol)
    scale = np.abs(f) @ n
    if res.value <= 1e-12 * max(scale, 1e-300):
        raise Degenerate("optimal signal overlap is zero; no qubits on the signal-sensitive sites")
    s = res.x
    if not res.unique:
        s = _lex_min_on_face(f, -n, n, A, b, res.value, problem.constraint_tol)
    s = np.where(np.abs(s) < 1e-13 * max(1.0, n.max()), 0.0, s)
    return ProbePair.from_vectors(s, -s, f)


def _lattice_chunks(n: np.ndarray, chunk: int = 1 << 16):
    """Yield integer points of the box in lexicographic order, in blocks."""
    ranges = [np.arange(-k, k + 1) for k in n.astype(int)]
    J = len(ranges)
    # vectorize the trailing coordinates, loop over the leading ones
    split = J
    inner = 1
    while split > 0 and inner * len(ranges[split - 1]) <= chunk:
        split -= 1
        inner *= len(ranges[split])
    if split == J:
        tail = np.zeros((1, 0))
    else:
        tail = np.stack(np.meshgrid(*ranges[split:], indexing="ij"), axis=-1).reshape(-1, J - split)
    for head in itertools.product(*ranges[:split]):
        pts = np.empty((len(tail), J))
        pts[:, :split] = head
        pts[:, split:] = tail
        yield pts


def optimal_probe_integer(problem: DesignProblem, limit: int = ENUMERATION_LIMIT) -> ProbePair:
    """Exhaustive search over the integer points of the box.

    A point is feasible when every normalized noise row has overlap at most
    ``constraint_tol * ||s||``.  Ties in ``f_sig.s`` go to the lexicographically
    smallest ``s``.
    """
    n = problem.qubit_counts
    if np.any(n != np.round(n)):
        raise ValueError("integer mode needs integer qubit counts")
    size = int(np.prod((2 * n + 1).astype(object)))
    if size > limit:
        raise TooLarge(f"{size} lattice points exceed the enumeration limit {limit}")
    perp_decompose(problem)
    f = problem.signal
    rows = problem.noise_rows
    norms = np.linalg.norm(rows, axis=1)
    rows = rows[norms > 0] / norms[norms > 0, None]
    tol = problem.constraint_tol

    def feasible_values(pts):
        ok = np.ones(len(pts), bool)
        if len(rows):
            lhs = np.abs(pts @ rows.T).max(axis=1)
            ok = lhs <= tol * np.linalg.norm(pts, axis=1)
        ok &= np.any(pts != 0, axis=1)
        return np.where(ok, pts @ f, -np.inf)

    best = -np.inf
    for pts in _lattice_chunks(n):
        vals = feasible_values(pts)
        best = max(best, float(vals.max(initial=-np.inf)))
    if not np.isfinite(best) or best <= 1e-12 * max(np.abs(f) @ n, 1e-300):
        raise Infeasible("no nonzero integer point is noise-insensitive and sees the signal")
    threshold = best - 1e-12 * abs(best)
    for pts in _lattice_chunks(n):
        hits = np.nonzero(feasible_values(pts) >= threshold)[0]
        if len(hits):
            s = pts[hits[0]]
            return ProbePair.from_vectors(s, -s, f)
    raise AssertionError("unreachable: maximum found in first pass")


def design(problem: DesignProblem) -> ProbePair:
    """Dispatch to the integer or continuous designer."""
    if problem.integer_mode:
        return optimal_probe_integer(problem)
    return optimal_probe(problem)
