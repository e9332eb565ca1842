"""Spatial generating functions and their sampling at sensor positions.

A field ``B(r) = sum_k alpha_k f_k(r)`` is described by a set of generating
functions ``f_k``.  Sampling them at the sensor positions ``r_j`` gives the
coefficient matrix ``F[k, j] = f_k(r_j)``; row ``k`` defines the collective
generator ``G_k = sum_j F[k, j] Z_j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, PositionOnSource

CoefficientMatrix = np.ndarray


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _as_points(positions) -> np.ndarray:
    """Coerce positions to a (J, d) float array; bare scalars mean d = 1."""
    arr = np.asarray(positions, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DimensionMismatch(f"positions must be a list of vectors, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class SensorArray:
    """J sensor sites with positions ``r_j`` and ``n_j`` qubits each."""

    positions: np.ndarray
    qubit_counts: np.ndarray

    def __post_init__(self):
        pos = _as_points(self.positions)
        counts = np.asarray(self.qubit_counts)
        if counts.ndim != 1 or len(counts) != len(pos):
            raise DimensionMismatch(
                f"{len(pos)} positions but {counts.size} qubit counts"
            )
        if len(pos) < 1:
            raise ValueError("need at least one sensor")
        if pos.shape[1] not in (1, 2, 3):
            raise DimensionMismatch(f"positions must be 1, 2 or 3 dimensional, got {pos.shape[1]}")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        if np.any(counts != np.round(counts)) or np.any(counts < 0):
            raise ValueError("qubit counts must be nonnegative integers")
        counts = counts.astype(int)
        if counts.sum() < 1:
            raise ValueError("need at least one qubit in total")
        for a in range(len(pos)):
            for b in range(a + 1, len(pos)):
                if np.array_equal(pos[a], pos[b]):
                    raise ValueError(f"sensors {a} and {b} share position {pos[a].tolist()}")
        object.__setattr__(self, "positions", _frozen(pos))
        object.__setattr__(self, "qubit_counts", _frozen(counts, int))

    @property
    def num_sites(self) -> int:
        return len(self.qubit_counts)

    @property
    def num_qubits(self) -> int:
        return int(self.qubit_counts.sum())

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def box(self) -> tuple[np.ndarray, np.ndarray]:
        """Lower and upper corners of the orthotope ``[-n_1, n_1] x ... x [-n_J, n_J]``."""
        n = self.qubit_counts.astype(float)
        return -n, n


@dataclass(frozen=True)
class Taylor:
    """``f_k(r) = (r / r_0)^k`` for ``k = 0 .. K-1`` (1D only)."""

    num_functions: int
    length_scale: float = 1.0

    def __post_init__(self):
        if self.length_scale <= 0:
            raise ValueError("length_scale must be positive")
        if self.num_functions < 1:
            raise ValueError("num_functions must be >= 1")

    def orders(self) -> np.ndarray:
        return np.arange(self.num_functions)

    def evaluate(self, positions) -> np.ndarray:
        pts = _as_points(positions)
        if pts.shape[1] != 1:
            raise DimensionMismatch("Taylor functions are one dimensional")
        x = pts[:, 0] / self.length_scale
        # 0**0 == 1 in numpy, which is what the zeroth order needs
        return x[None, :] ** self.orders()[:, None]


@dataclass(frozen=True)
class FourierSine:
    """``f_k(r) = sin(k pi r / r_0)`` for ``k = 1 .. K`` (1D only).

    Row ``i`` of the sampled matrix holds wave number ``k = i + 1``.
    """

    num_functions: int
    length_scale: float = 1.0

    def __post_init__(self):
        if self.length_scale <= 0:
            raise ValueError("length_scale must be positive")
        if self.num_functions < 1:
            raise ValueError("num_functions must be >= 1")

    def orders(self) -> np.ndarray:
        return np.arange(1, self.num_functions + 1)

    def evaluate(self, positions) -> np.ndarray:
        pts = _as_points(positions)
        if pts.shape[1] != 1:
            raise DimensionMismatch("Fourier sine functions are one dimensional")
        x = pts[:, 0] / self.length_scale
        return np.sin(np.pi * self.orders()[:, None] * x[None, :])


@dataclass(frozen=True)
class PointSources:
    """Inverse-power fields ``B_k |r - R_k|^(-beta)`` of point emitters.

    ``groups`` optionally bundles sources that are driven by one common
    process (e.g. two sources of opposite sign); each group yields a single
    row equal to the sum of its members' fields.  By default every source is
    its own row.
    """

    sources: np.ndarray
    exponent: float = 2.0
    strengths: np.ndarray | None = None
    groups: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        src = _as_points(self.sources)
        if self.exponent < 1:
            raise ValueError("exponent must be >= 1")
        strengths = np.ones(len(src)) if self.strengths is None else np.asarray(self.strengths, float)
        if strengths.shape != (len(src),):
            raise DimensionMismatch(f"{len(src)} sources but {strengths.size} strengths")
        for a in range(len(src)):
            for b in range(a + 1, len(src)):
                if np.array_equal(src[a], src[b]):
                    raise ValueError(f"sources {a} and {b} coincide")
        if self.groups is not None:
            groups = tuple(tuple(int(i) for i in g) for g in self.groups)
            for g in groups:
                if not g or any(i < 0 or i >= len(src) for i in g):
                    raise ValueError(f"bad source group {list(g)}")
            object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "sources", _frozen(src))
        object.__setattr__(self, "strengths", _frozen(strengths))

    @property
    def num_functions(self) -> int:
        return len(self.sources) if self.groups is None else len(self.groups)

    def source_fields(self, positions) -> np.ndarray:
        """Per-source field values, shape (num_sources, J)."""
        pts = _as_points(positions)
        if pts.shape[1] != self.sources.shape[1]:
            raise DimensionMismatch(
                f"sources are {self.sources.shape[1]}D but positions are {pts.shape[1]}D"
            )
        dist = np.linalg.norm(pts[None, :, :] - self.sources[:, None, :], axis=-1)
        hit = np.argwhere(dist == 0)
        if len(hit):
            k, j = hit[0]
            raise PositionOnSource(f"sensor {j} sits on source {k}")
        return self.strengths[:, None] * dist ** (-self.exponent)

    def evaluate(self, positions) -> np.ndarray:
        per_source = self.source_fields(positions)
        if self.groups is None:
            return per_source
        return np.array([per_source[list(g)].sum(axis=0) for g in self.groups])


@dataclass(frozen=True)
class Tabulated:
    """Explicit K x J coefficient values, independent of positions."""

    values: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.size == 0:
            raise ValueError("tabulated values must be a non-empty K x J matrix")
        if not np.all(np.isfinite(v)):
            raise ValueError("tabulated values must be finite")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def num_functions(self) -> int:
        return self.values.shape[0]

    def evaluate(self, positions) -> np.ndarray:
        if len(_as_points(positions)) != self.values.shape[1]:
            raise DimensionMismatch(
                f"table has {self.values.shape[1]} columns but there are "
                f"{len(_as_points(positions))} sensors"
            )
        return self.values.copy()


GeneratingFunctionSet = Union[Taylor, FourierSine, PointSources, Tabulated]


def sample_coefficients(fns: GeneratingFunctionSet, array: SensorArray) -> CoefficientMatrix:
    """Return the read-only matrix ``F[k, j] = f_k(r_j)``."""
    F = np.asarray(fns.evaluate(array.positions), dtype=float)
    if not np.all(np.isfinite(F)):
        raise ValueError("sampled coefficients are not finite")
    return _frozen(F)


def fourier_extremal_positions(k_star: int, r_0: float = 1.0) -> np.ndarray:
    """Antinodes of ``sin(k* pi r / r_0)`` on ``(0, r_0)``.

    At ``r_j = r_0 (j - 1/2) / k*`` the sampled signal row is ``(1, -1, 1, ...)``.
    """
    if k_star < 1:
        raise ValueError("k_star must be >= 1")
    if r_0 <= 0:
        raise ValueError("r_0 must be positive")
    j = np.arange(1, k_star + 1)
    return r_0 * (j - 0.5) / k_star


@dataclass(frozen=True)
class RankReport:
    rank: int
    dependent_rows: list[int]


def rank_report(F: CoefficientMatrix, tol: float = 1e-9) -> RankReport:
    """Numerical rank of ``F`` and the rows that add nothing new.

    The rank comes from a column-pivoted QR of ``F.T``.  Rows are then scanned
    in order and a row is flagged dependent when its residual after projection
    on the span of the earlier independent rows is below ``tol * ||row||``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    F = np.atleast_2d(np.asarray(F, dtype=float))
    if F.size == 0:
        return RankReport(0, [])
    _, R, _ = scipy.linalg.qr(F.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > tol * diag[0])) if diag[0] > 0 else 0

    basis: list[np.ndarray] = []
    dependent = []
    for k, row in enumerate(F):
        norm = np.linalg.norm(row)
        resid = row.copy()
        for _ in range(2):
            for q in basis:
                resid -= (q @ resid) * q
        rnorm = np.linalg.norm(resid)
        if norm == 0 or rnorm < tol * norm:
            dependent.append(k)
        else:
            basis.append(resid / rnorm)
    return RankReport(rank, dependent)
