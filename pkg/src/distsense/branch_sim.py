"""Branch-level simulation of probe states under diagonal evolution and twirling.

All generators are linear combinations of per-site ``Z_j`` operators, so they
are diagonal in the product eigenbasis.  A state is therefore stored as a
superposition of "branches": product eigenstates labelled by their site
eigenvalue vector ``s`` (``Z_j |s> = s_j |s>``).  Permutation degeneracy inside
a site is irrelevant for every quantity computed here, which shrinks the
problem from ``2^N`` amplitudes to the number of branches.  Fractional
``s_j`` stand for dynamically slowed sites and are allowed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import NotNormalized, NotTwoBranch, TooLarge
from .probe_designer import ProbePair

NORM_TOL = 1e-12
TWIRL_TOL = 1e-9
MAX_PRODUCT_SITES = 20


@dataclass(frozen=True)
class BranchState:
    """``sum_b amplitudes[b] |vectors[b]>`` with distinct branch vectors."""

    amplitudes: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        vecs = np.asarray(self.vectors, dtype=float)
        if vecs.ndim != 2 or len(vecs) != len(amps):
            raise ValueError(f"{len(amps)} amplitudes for vectors of shape {vecs.shape}")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise NotNormalized(f"branch weights sum to {norm!r}")
        amps = amps.copy()
        vecs = vecs.copy()
        amps.setflags(write=False)
        vecs.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "vectors", vecs)

    @classmethod
    def build(cls, amplitudes, vectors, normalize: bool = False) -> "BranchState":
        """Merge duplicate branches, drop zero amplitudes, optionally renormalize."""
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        vecs = np.atleast_2d(np.asarray(vectors, dtype=float)) + 0.0
        uniq, inverse = np.unique(vecs, axis=0, return_inverse=True)
        merged = np.zeros(len(uniq), dtype=complex)
        np.add.at(merged, inverse.reshape(-1), amps)
        keep = merged != 0
        merged, uniq = merged[keep], uniq[keep]
        if len(merged) == 0:
            raise NotNormalized("state has no nonzero branch")
        if normalize:
            merged = merged / np.sqrt(np.sum(np.abs(merged) ** 2))
        return cls(merged, uniq)

    @property
    def num_branches(self) -> int:
        return len(self.amplitudes)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def eigenvalues(self, g) -> np.ndarray:
        """Eigenvalue ``g.s_b`` of ``sum_j g_j Z_j`` on every branch."""
        return self.vectors @ np.asarray(g, dtype=float)


@dataclass(frozen=True)
class Block:
    lam: np.ndarray  # noise eigenvalues shared by the block's branches
    weight: float
    state: BranchState


@dataclass(frozen=True)
class BlockDecomposition:
    """Block-diagonal mixture ``sum_lambda w_lambda |psi_lambda><psi_lambda|``."""

    blocks: tuple[Block, ...]

    def __post_init__(self):
        total = sum(b.weight for b in self.blocks)
        if abs(total - 1.0) > NORM_TOL:
            raise NotNormalized(f"block weights sum to {total!r}")

    @property
    def weights(self) -> np.ndarray:
        return np.array([b.weight for b in self.blocks])

    @property
    def dims(self) -> list[int]:
        return [b.state.num_branches for b in self.blocks]

    def purity(self) -> float:
        # blocks have orthogonal supports and pure restrictions
        return float(np.sum(self.weights**2))


def probe_state(pair: ProbePair) -> BranchState:
    """``(|s> + |r>) / sqrt(2)``; collapses to ``|s>`` when ``s == r``."""
    return BranchState.build(np.full(2, 1 / np.sqrt(2)), [pair.s, pair.r], normalize=True)


def product_state(sites: Sequence[tuple]) -> BranchState:
    """Expand ``prod_j (a_j |up_j> + b_j |down_j>)`` into its ``2^J`` branches.

    ``sites`` holds ``(a_j, b_j, up_j, down_j)`` per site, where ``up_j`` and
    ``down_j`` are the two site eigenvalues being superposed.
    """
    J = len(sites)
    if J > MAX_PRODUCT_SITES:
        raise TooLarge(f"{J} sites would give 2^{J} branches (limit {MAX_PRODUCT_SITES} sites)")
    if J == 0:
        raise ValueError("need at least one site")
    a = np.array([s[0] for s in sites], dtype=complex)
    b = np.array([s[1] for s in sites], dtype=complex)
    up = np.array([s[2] for s in sites], dtype=float)
    down = np.array([s[3] for s in sites], dtype=float)
    if np.any(up == down):
        raise ValueError("each site must superpose two different eigenvalues")
    norms = np.abs(a) ** 2 + np.abs(b) ** 2
    if np.any(np.abs(norms - 1.0) > 1e-9):
        raise NotNormalized(f"site norms {norms.tolist()} are not 1")
    a, b = a / np.sqrt(norms), b / np.sqrt(norms)

    # bit j of the branch index selects down (1) or up (0) at site j
    bits = (np.arange(2**J)[:, None] >> np.arange(J - 1, -1, -1)[None, :]) & 1
    vectors = np.where(bits == 1, down[None, :], up[None, :])
    amps = np.prod(np.where(bits == 1, b[None, :], a[None, :]), axis=1)
    return BranchState.build(amps, vectors)


def evolve(state: BranchState, phases, F) -> BranchState:
    """Apply ``exp(i sum_k phases[k] G_k)``: branch ``b`` picks up ``sum_k phases[k] f_k.s_b``."""
    phases = np.asarray(phases, dtype=float)
    F = np.atleast_2d(np.asarray(F, dtype=float))
    if phases.shape != (F.shape[0],):
        raise ValueError(f"need {F.shape[0]} phases, got {phases.size}")
    if F.shape[1] != state.vectors.shape[1]:
        raise ValueError("coefficient matrix and state disagree on the number of sites")
    angle = state.vectors @ (F.T @ phases)
    return BranchState(state.amplitudes * np.exp(1j * angle), state.vectors)


def _cluster_ids(values: np.ndarray, tol: float) -> np.ndarray:
    """Single-linkage clusters of a 1D array: neighbours closer than ``tol`` merge."""
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    new_cluster = np.concatenate([[0], (np.diff(sorted_vals) > tol).astype(int)])
    ids = np.empty(len(values), dtype=int)
    ids[order] = np.cumsum(new_cluster)
    return ids


def _block_labels(vectors, noise_rows, tol):
    lam = vectors @ noise_rows.T
    if lam.shape[1] == 0:
        return np.zeros(len(vectors), dtype=int), lam
    ids = np.stack([_cluster_ids(lam[:, i], tol) for i in range(lam.shape[1])], axis=1)
    _, labels = np.unique(ids, axis=0, return_inverse=True)
    return labels.reshape(-1), lam


def twirl(
    state: Union[BranchState, BlockDecomposition],
    F,
    noise_indices,
    tol: float = TWIRL_TOL,
) -> BlockDecomposition:
    """Fully dephase between eigenspaces of the noise generators.

    Equivalent to ``rho -> sum_lambda P_lambda rho P_lambda`` where
    ``P_lambda`` projects onto the branches whose noise eigenvalues
    ``(f_k.s)_k`` equal ``lambda``.  Eigenvalues within ``tol`` (absolute,
    chained per coordinate) count as equal.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if isinstance(state, BlockDecomposition):
        parts = [(blk.weight, blk.state) for blk in state.blocks]
    else:
        parts = [(1.0, state)]
    F = np.atleast_2d(np.asarray(F, dtype=float))
    noise_rows = F[list(noise_indices)].reshape(-1, F.shape[1])

    # pool all branches so that blocks from different parts can be matched
    weights = np.concatenate([np.full(p.num_branches, w) for w, p in parts])
    part_of = np.concatenate([np.full(p.num_branches, i) for i, (_, p) in enumerate(parts)])
    amps = np.concatenate([p.amplitudes for _, p in parts])
    vecs = np.concatenate([p.vectors for _, p in parts])
    labels, lam = _block_labels(vecs, noise_rows, tol)

    blocks = []
    for label in range(labels.max() + 1):
        idx = np.nonzero(labels == label)[0]
        if len(set(part_of[idx])) > 1:
            raise ValueError("input blocks share noise eigenvalues; not a valid block decomposition")
        probs = weights[idx] * np.abs(amps[idx]) ** 2
        w = float(probs.sum())
        sub = BranchState.build(amps[idx], vecs[idx], normalize=True)
        blocks.append(Block(lam=lam[idx[0]].copy(), weight=w, state=sub))
    total = sum(b.weight for b in blocks)
    # absorb rounding so the weights sum to one
    blocks = [Block(b.lam, b.weight / total, b.state) for b in blocks]
    return BlockDecomposition(tuple(blocks))


def qfi_pure(state: BranchState, g) -> float:
    """``4 Var(G)`` for ``G = sum_j g_j Z_j`` on a pure branch state."""
    e = state.eigenvalues(g)
    p = state.probabilities
    mean = p @ e
    return float(4.0 * (p @ (e - mean) ** 2))


def qfi_mixed(blocks: BlockDecomposition, g) -> float:
    """QFI of a twirled state for ``G = sum_j g_j Z_j``.

    In general the QFI needs the eigendecomposition of ``rho``.  Here ``rho``
    is a direct sum of pure blocks and ``G`` maps each block to itself, so the
    eigenvectors with nonzero weight are the block states and all cross terms
    between blocks vanish; the formula reduces to ``sum_lambda w_lambda 4 Var_lambda(G)``.
    """
    return float(sum(b.weight * qfi_pure(b.state, g) for b in blocks.blocks))


def parity_fisher(pair: Union[ProbePair, BranchState], F, signal_index: int, phi: float) -> float:
    """Classical Fisher information of the two-outcome parity readout.

    The relative phase between the branches is ``Delta * phi`` with
    ``Delta = f_sig.(s - r)``, giving ``p(+-) = (1 +- cos(Delta phi)) / 2``.
    At the fringe extrema the continuous extension ``Delta^2`` is returned.
    """
    f = np.atleast_2d(np.asarray(F, dtype=float))[signal_index]
    if isinstance(pair, BranchState):
        if pair.num_branches != 2 or not np.allclose(pair.probabilities, 0.5, atol=1e-12):
            raise NotTwoBranch("parity readout needs an equal two-branch superposition")
        s, r = pair.vectors
    else:
        s, r = pair.s, pair.r
        if np.array_equal(s, r):
            raise NotTwoBranch("s == r is a single branch")
    delta = float(f @ (s - r))
    x = delta * phi
    sin2 = np.sin(x) ** 2
    if sin2 < 1e-12:
        return delta**2
    p_plus = (1 + np.cos(x)) / 2
    p_minus = (1 - np.cos(x)) / 2
    dp = delta * np.sin(x) / 2  # |dp(+-)/dphi|
    return float(dp**2 / p_plus + dp**2 / p_minus)
