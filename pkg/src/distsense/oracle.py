"""Qubit-level statevector cross-check for the branch simulator.

Everything here works on the full ``2^N`` Hilbert space with ``n_j`` physical
qubits at site ``j``.  It shares no code with ``branch_sim`` beyond the input
types, so agreement between the two is a meaningful check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .branch_sim import BranchState
from .errors import NonIntegerEigenvalue, TooLarge
from .probe_designer import ProbePair

MAX_QUBITS = 12


@dataclass(frozen=True)
class OracleResult:
    qfi: float
    twirled_qfi: float
    parity_fisher: float | None = None  # only for s / -s pairs


class QubitRegister:
    """Site layout of ``N = sum n_j`` qubits; qubit 0 is the most significant bit.

    Bit value 0 means ``sigma_z = +1``.
    """

    def __init__(self, qubit_counts):
        counts = np.asarray(qubit_counts)
        if np.any(counts != np.round(counts)) or np.any(counts < 0):
            raise ValueError("qubit counts must be nonnegative integers")
        self.counts = counts.astype(int)
        self.N = int(self.counts.sum())
        if self.N > MAX_QUBITS:
            raise TooLarge(f"{self.N} qubits exceed the statevector limit of {MAX_QUBITS}")
        self.site_of = np.repeat(np.arange(len(self.counts)), self.counts)
        idx = np.arange(2**self.N)
        bits = (idx[:, None] >> np.arange(self.N - 1, -1, -1)[None, :]) & 1
        z = 1 - 2 * bits  # (2^N, N)
        membership = np.zeros((self.N, len(self.counts)))
        membership[np.arange(self.N), self.site_of] = 1.0
        self.site_z = z @ membership  # (2^N, J) site eigenvalues of every basis state

    def generator(self, f) -> np.ndarray:
        """Diagonal of ``sum_j f_j Z_j`` with ``Z_j`` the sum of Pauli-z at site j."""
        return self.site_z @ np.asarray(f, dtype=float)

    def site_bits(self, j: int, value, flip: bool = False) -> list[int]:
        """A bit pattern of site ``j`` with ``sum sigma_z = value``."""
        n = int(self.counts[j])
        ups = (n + value) / 2
        if abs(ups - round(ups)) > 1e-9 or not -1e-9 <= ups <= n + 1e-9:
            raise NonIntegerEigenvalue(
                f"site {j}: eigenvalue {value} is not reachable with {n} qubits"
            )
        ups = int(round(ups))
        pattern = [0] * ups + [1] * (n - ups)
        return [1 - b for b in pattern] if flip else pattern

    def basis_index(self, s, flip: bool = False) -> int:
        """Basis index of a pattern realizing ``s``; ``flip`` gives its complement (eigenvalues ``-s``)."""
        bits = []
        for j, v in enumerate(np.asarray(s, dtype=float)):
            bits += self.site_bits(j, v, flip=flip)
        return int("".join(map(str, bits)) or "0", 2)

    def site_state(self, j: int, a, b, up, down) -> np.ndarray:
        n = int(self.counts[j])
        vec = np.zeros(2**n, dtype=complex)
        for amp, val in ((a, up), (b, down)):
            pattern = self.site_bits(j, val)
            vec[int("".join(map(str, pattern)) or "0", 2)] += amp
        return vec


def _qfi_eig(rho: np.ndarray, g: np.ndarray, cutoff: float = 1e-12) -> float:
    """``2 sum_{ij} (p_i - p_j)^2 / (p_i + p_j) |<i|G|j>|^2`` over pairs with ``p_i + p_j > 0``.

    ``rho`` is restricted to its support in the computational basis first;
    for diagonal ``G`` the discarded kernel vectors have no matrix elements
    with the support.
    """
    support = np.nonzero(np.abs(np.diag(rho)) > 0)[0]
    sub = rho[np.ix_(support, support)]
    p, V = np.linalg.eigh(sub)
    p = np.clip(p, 0.0, None)
    G = V.conj().T @ (g[support, None] * V)
    psum = p[:, None] + p[None, :]
    pdiff = p[:, None] - p[None, :]
    mask = psum > cutoff
    terms = np.zeros_like(psum)
    terms[mask] = pdiff[mask] ** 2 / psum[mask]
    return float(2.0 * np.sum(terms * np.abs(G) ** 2))


def _noise_labels(reg: QubitRegister, F, noise_indices) -> np.ndarray:
    if len(noise_indices) == 0:
        return np.zeros(2**reg.N, dtype=int)
    diag = np.stack([reg.generator(F[k]) for k in noise_indices], axis=1)
    keys = np.round(diag / 1e-9).astype(np.int64)
    _, labels = np.unique(keys, axis=0, return_inverse=True)
    return labels.reshape(-1)


def statevector_oracle(
    F,
    signal_index: int,
    noise_indices: Sequence[int],
    qubit_counts,
    state: Union[ProbePair, BranchState, Sequence[tuple]],
    phases=None,
) -> OracleResult:
    """QFI of the evolved state and of its twirled version, computed on qubits.

    ``state`` may be a probe pair (``|s>`` and ``|r>`` realized as complementary
    bit patterns when ``r = -s``), a branch state, or a product-state site list
    ``[(a_j, b_j, up_j, down_j), ...]`` that is built with Kronecker products.
    """
    F = np.atleast_2d(np.asarray(F, dtype=float))
    reg = QubitRegister(qubit_counts)
    dim = 2**reg.N
    psi = np.zeros(dim, dtype=complex)
    complementary = False

    if isinstance(state, ProbePair):
        complementary = np.array_equal(state.r, -state.s) and np.any(state.s != 0)
        i_s = reg.basis_index(state.s)
        i_r = reg.basis_index(state.s, flip=True) if complementary else reg.basis_index(state.r)
        psi[i_s] += 1 / np.sqrt(2)
        psi[i_r] += 1 / np.sqrt(2)
    elif isinstance(state, BranchState):
        for amp, vec in zip(state.amplitudes, state.vectors):
            psi[reg.basis_index(vec)] += amp
    else:
        psi = np.ones(1, dtype=complex)
        for j, (a, b, up, down) in enumerate(state):
            psi = np.kron(psi, reg.site_state(j, a, b, up, down))
        if len(psi) != dim:
            raise ValueError("product state has the wrong number of sites")
    psi /= np.linalg.norm(psi)

    if phases is not None:
        phases = np.asarray(phases, dtype=float)
        total = sum(phases[k] * reg.generator(F[k]) for k in range(F.shape[0]))
        psi = np.exp(1j * total) * psi

    g = reg.generator(F[signal_index])
    rho = np.outer(psi, psi.conj())
    qfi = _qfi_eig(rho, g)

    labels = _noise_labels(reg, F, list(noise_indices))
    twirled = np.where(labels[:, None] == labels[None, :], rho, 0.0)
    twirled_qfi = _qfi_eig(twirled, g)

    parity = _parity_fisher(psi, g) if complementary else None
    return OracleResult(qfi=qfi, twirled_qfi=twirled_qfi, parity_fisher=parity)


def _parity_fisher(psi: np.ndarray, g: np.ndarray) -> float:
    """Fisher information of the global X-parity outcome w.r.t. the signal phase.

    ``<X...X> = sum_x conj(psi[~x]) psi[x]``; its phase derivatives follow from
    ``d psi / d phi = i g psi``.  At a fringe extremum (``|<X...X>| = 1``) the
    limit ``-P'' / P`` is returned.
    """
    flipped = psi[::-1]  # index ~x == 2^N - 1 - x
    overlap = flipped.conj() * psi
    gap = g - g[::-1]
    parity = float(np.real(overlap.sum()))
    dparity = float(np.real(np.sum(1j * gap * overlap)))
    p_plus, p_minus = (1 + parity) / 2, (1 - parity) / 2
    if min(p_plus, p_minus) < 1e-9:
        d2parity = float(-np.real(np.sum(gap**2 * overlap)))
        return -d2parity / parity
    dp = dparity / 2
    return dp**2 / p_plus + dp**2 / p_minus
