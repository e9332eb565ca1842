"""Entangled versus product probes for an alternating signal with neighbour noise.

``J`` single-qubit sensors sit at ``r_j = j / J``.  The signal alternates,
``f(r_j) = (-1)^j``, and each of the ``J - 1`` noise processes acts on one pair
of neighbours.  Only ``+-(1, -1, ..., 1, -1)`` share all noise eigenvalues, so
after twirling a product state keeps signal information only in that one
two-dimensional block, reached with probability at most ``2^-(J-1)``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .branch_sim import product_state, qfi_mixed, twirl
from .errors import OddJ, TooLarge
from .probe_designer import DesignProblem, ProbePair, optimal_probe_integer

MAX_SWEEP_SITES = 12
MAX_CENSUS_STATES = 10**6


@dataclass(frozen=True)
class AlternatingScenario:
    J: int
    F: np.ndarray  # row 0 signal, rows 1..J-1 noise
    positions: np.ndarray
    qubit_counts: np.ndarray

    signal_index = 0

    @property
    def noise_indices(self) -> tuple[int, ...]:
        return tuple(range(1, self.J))

    def problem(self) -> DesignProblem:
        return DesignProblem(self.F, 0, self.noise_indices, self.qubit_counts, integer_mode=True)

    def site_eigenvalues(self) -> tuple[np.ndarray, np.ndarray]:
        """``up_j = (-1)^j`` and ``down_j = (-1)^(j+1)`` for ``j = 1 .. J``."""
        j = np.arange(1, self.J + 1)
        up = (-1.0) ** j
        return up, -up


def build_alternating(J: int) -> AlternatingScenario:
    if J < 2 or J % 2:
        raise OddJ(f"J must be even and >= 2, got {J}")
    j = np.arange(1, J + 1)
    F = np.zeros((J, J))
    F[0] = (-1.0) ** j
    for k in range(1, J):
        F[k, k - 1] = F[k, k] = 1.0  # sites k and k+1 (1-based)
    F.setflags(write=False)
    return AlternatingScenario(J=J, F=F, positions=j / J, qubit_counts=np.ones(J, dtype=int))


@dataclass(frozen=True)
class BlockCensus:
    dims: Counter  # block dimension -> number of blocks
    nontrivial: list  # member vectors of every block with more than one state

    @property
    def total_states(self) -> int:
        return sum(d * c for d, c in self.dims.items())


def enumerate_blocks(scenario: AlternatingScenario) -> BlockCensus:
    """Group all ``2^J`` vectors ``s in {+-1}^J`` by their noise eigenvalues."""
    J = scenario.J
    if 2**J > MAX_CENSUS_STATES:
        raise TooLarge(f"2^{J} states exceed the census limit")
    bits = (np.arange(2**J)[:, None] >> np.arange(J - 1, -1, -1)[None, :]) & 1
    vectors = 1.0 - 2.0 * bits
    lam = vectors @ scenario.F[list(scenario.noise_indices)].T
    # entries are integers, so exact grouping is safe
    _, labels, counts = np.unique(lam.astype(np.int64), axis=0, return_inverse=True, return_counts=True)
    labels = labels.reshape(-1)
    nontrivial = [vectors[labels == i] for i in np.nonzero(counts > 1)[0]]
    return BlockCensus(dims=Counter(counts.tolist()), nontrivial=nontrivial)


def product_sites(scenario: AlternatingScenario, angles) -> list[tuple]:
    """Site list for ``prod_j (cos t_j |(-1)^j> + sin t_j |(-1)^(j+1)>)``."""
    up, down = scenario.site_eigenvalues()
    return [(np.cos(t), np.sin(t), u, d) for t, u, d in zip(angles, up, down)]


def product_qfi_batch(scenario: AlternatingScenario, angles: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Twirled QFI of many product states at once.

    Only real nonnegative amplitudes are needed: block weights are sums of
    ``|c_b|^2`` and a diagonal generator's variance inside a block depends on
    ``|c_b|^2`` only, so amplitude phases never change the twirled QFI.

    The block structure depends on the branch vectors alone, so it is taken
    from one reference state and reused for every angle set.
    """
    angles = np.atleast_2d(np.asarray(angles, dtype=float))
    J = scenario.J
    ref = product_state(product_sites(scenario, np.full(J, np.pi / 4)))
    blocks = twirl(ref, scenario.F, scenario.noise_indices)
    g = scenario.F[scenario.signal_index]
    up, _ = scenario.site_eigenvalues()

    # for each block: which branches, as (is_down bit mask), and their signal eigenvalues
    members = []
    for blk in blocks.blocks:
        is_down = (blk.state.vectors != up[None, :]).astype(float)
        members.append((is_down, blk.state.vectors @ g))

    out = np.empty(len(angles))
    for start in range(0, len(angles), chunk):
        th = angles[start:start + chunk]
        log_a = np.log(np.clip(np.cos(th) ** 2, 1e-300, None))
        log_b = np.log(np.clip(np.sin(th) ** 2, 1e-300, None))
        total = np.zeros(len(th))
        for is_down, e in members:
            if len(e) < 2:
                continue  # a single branch carries no phase information
            p = np.exp(log_a @ (1 - is_down).T + log_b @ is_down.T)  # (S, branches)
            w = p.sum(axis=1)
            m1 = p @ e
            m2 = p @ e**2
            with np.errstate(invalid="ignore", divide="ignore"):
                var_w = np.where(w > 0, m2 - m1**2 / np.where(w > 0, w, 1.0), 0.0)
            total += 4.0 * var_w
        out[start:start + chunk] = total
    return out


@dataclass(frozen=True)
class SweepResult:
    optimal_qfi: float
    max_product_qfi: float
    ratio: float
    best_angles: np.ndarray
    num_samples: int
    optimal_pair: ProbePair

    @property
    def bound(self) -> float:
        return 2.0 ** (-(len(self.best_angles) - 1))


def sample_angles(J: int, num_samples: int = 4096, grid_points: int = 32, seed: int = 0) -> np.ndarray:
    """Per-site angles in ``[0, pi/2]``: a full grid for ``J <= 4``, seeded random beyond.

    The uniform state ``t_j = pi/4`` is always the first candidate.
    """
    uniform = np.full((1, J), np.pi / 4)
    if J <= 4:
        axis = np.linspace(0.0, np.pi / 2, grid_points)
        grid = np.stack(np.meshgrid(*([axis] * J), indexing="ij"), axis=-1).reshape(-1, J)
    else:
        rng = np.random.default_rng(seed)
        grid = rng.uniform(0.0, np.pi / 2, size=(num_samples, J))
    return np.vstack([uniform, grid])


def product_advantage_sweep(
    scenario: AlternatingScenario,
    num_samples: int = 4096,
    grid_points: int = 32,
    seed: int = 0,
) -> SweepResult:
    """Best sampled product-state QFI after twirling, relative to the entangled optimum."""
    if scenario.J > MAX_SWEEP_SITES:
        raise TooLarge(f"J = {scenario.J} exceeds the sweep limit {MAX_SWEEP_SITES}")
    pair = optimal_probe_integer(scenario.problem())
    angles = sample_angles(scenario.J, num_samples, grid_points, seed)
    values = product_qfi_batch(scenario, angles)
    best = values.max()
    # deterministic tie-break: first candidate in sampling order
    idx = int(np.nonzero(values >= best - 1e-12 * abs(best))[0][0])
    # re-evaluate the winner through the full branch pipeline
    state = product_state(product_sites(scenario, angles[idx]))
    g = scenario.F[scenario.signal_index]
    best_qfi = qfi_mixed(twirl(state, scenario.F, scenario.noise_indices), g)
    return SweepResult(
        optimal_qfi=pair.qfi,
        max_product_qfi=best_qfi,
        ratio=best_qfi / pair.qfi,
        best_angles=angles[idx],
        num_samples=len(angles),
        optimal_pair=pair,
    )
