import numpy as np
import pytest

from distsense.branch_sim import BranchState
from distsense.probe_designer import DesignProblem


def random_problem(rng, J=None, K=None, integer=False):
    """Generic continuous design problem with a unique LP optimum (almost surely)."""
    J = J or int(rng.integers(2, 7))
    K = K or int(rng.integers(2, J + 1))
    F = rng.normal(size=(K, J))
    signal = int(rng.integers(K))
    others = [k for k in range(K) if k != signal]
    m = int(rng.integers(0, min(len(others), J - 1) + 1))
    noise = tuple(sorted(rng.choice(others, size=m, replace=False).tolist())) if m else ()
    n = rng.integers(1, 4, size=J)
    return DesignProblem(F, signal, noise, n, integer_mode=integer)


def realizable_values(n):
    return np.arange(-n, n + 1, 2)


def random_integer_case(rng, max_qubits=10):
    """Small scenario with integer-realizable branches and an integer-valued F.

    Integer entries make coincident noise eigenvalues common, so twirling
    produces nontrivial blocks.
    """
    J = int(rng.integers(2, 6))
    while True:
        n = rng.integers(0, 4, size=J)
        if 1 <= n.sum() <= max_qubits:
            break
    K = int(rng.integers(2, 5))
    F = rng.integers(-2, 3, size=(K, J)).astype(float)
    signal = int(rng.integers(K))
    others = [k for k in range(K) if k != signal]
    m = int(rng.integers(0, len(others) + 1))
    noise = tuple(sorted(rng.choice(others, size=m, replace=False).tolist())) if m else ()
    num_branches = int(rng.integers(1, 7))
    vectors = np.array([[rng.choice(realizable_values(nj)) for nj in n] for _ in range(num_branches)])
    amps = rng.normal(size=num_branches) + 1j * rng.normal(size=num_branches)
    state = BranchState.build(amps, vectors, normalize=True)
    phases = rng.uniform(-np.pi, np.pi, size=K)
    return F, signal, noise, n, state, phases


def random_state(rng, J=None, branches=None):
    J = J or int(rng.integers(1, 6))
    B = branches or int(rng.integers(1, 9))
    vectors = rng.integers(-3, 4, size=(B, J)).astype(float)
    amps = rng.normal(size=B) + 1j * rng.normal(size=B)
    return BranchState.build(amps, vectors, normalize=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
