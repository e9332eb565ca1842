import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from distsense.advantage import (
    build_alternating,
    enumerate_blocks,
    product_advantage_sweep,
    product_qfi_batch,
    product_sites,
    sample_angles,
)
from distsense.branch_sim import product_state, qfi_mixed, twirl
from distsense.errors import OddJ, TooLarge
from distsense.oracle import statevector_oracle
from distsense.probe_designer import optimal_probe_integer


def test_build_alternating_rows():
    sc = build_alternating(4)
    np.testing.assert_array_equal(sc.F[0], [-1, 1, -1, 1])
    np.testing.assert_array_equal(sc.F[1:], [[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1]])
    np.testing.assert_allclose(sc.positions, [0.25, 0.5, 0.75, 1.0])
    assert sc.noise_indices == (1, 2, 3)


@pytest.mark.parametrize("J", [0, 1, 3, 7])
def test_odd_or_small_J_rejected(J):
    with pytest.raises(OddJ):
        build_alternating(J)


@pytest.mark.parametrize("J", [2, 4, 6, 8])
def test_block_census(J):
    census = enumerate_blocks(build_alternating(J))
    assert census.dims == {1: 2**J - 2, 2: 1}
    assert census.total_states == 2**J
    alt = np.array([(-1.0) ** (j + 1) for j in range(J)])
    assert {tuple(v) for v in census.nontrivial[0]} == {tuple(alt), tuple(-alt)}


@pytest.mark.parametrize("J", [2, 4, 6, 8])
def test_optimal_probe_is_the_alternating_pair(J):
    problem = build_alternating(J).problem()
    best = optimal_probe_integer(problem)
    assert best.qfi == pytest.approx((2 * J) ** 2)
    assert np.all(best.residuals(problem.noise_rows) == 0)


@pytest.mark.parametrize("J", [2, 4, 6, 8])
def test_sweep_meets_bound(J):
    res = product_advantage_sweep(build_alternating(J), num_samples=2048)
    assert res.optimal_qfi == pytest.approx((2 * J) ** 2)
    assert res.ratio <= res.bound + 1e-9
    assert res.ratio == pytest.approx(res.bound, rel=1e-6)
    np.testing.assert_allclose(res.best_angles, np.pi / 4)


def test_sweep_limit():
    with pytest.raises(TooLarge):
        product_advantage_sweep(build_alternating(14))


def test_sample_angles():
    a = sample_angles(2, grid_points=5)
    np.testing.assert_allclose(a[0], [np.pi / 4, np.pi / 4])
    assert a.shape == (26, 2)
    b = sample_angles(6, num_samples=10, seed=3)
    np.testing.assert_array_equal(b, sample_angles(6, num_samples=10, seed=3))
    assert np.all((b >= 0) & (b <= np.pi / 2))


PROPS = settings(max_examples=200, derandomize=True, deadline=None,
                 suppress_health_check=[HealthCheck.too_slow])


@PROPS
@given(st.sampled_from([2, 4, 6]), st.integers(min_value=0, max_value=2**32 - 1))
def test_batch_matches_pipeline_and_bound(J, seed):
    sc = build_alternating(J)
    t = np.random.default_rng(seed).uniform(0, np.pi / 2, size=J)
    batch = product_qfi_batch(sc, t[None, :])[0]
    state = product_state(product_sites(sc, t))
    full = qfi_mixed(twirl(state, sc.F, sc.noise_indices), sc.F[0])
    assert batch == pytest.approx(full, rel=1e-9, abs=1e-12)
    assert full <= 2.0 ** (-(J - 1)) * (2 * J) ** 2 + 1e-9


def test_batch_matches_statevector(rng):
    sc = build_alternating(4)
    for _ in range(10):
        t = rng.uniform(0, np.pi / 2, size=4)
        res = statevector_oracle(sc.F, 0, sc.noise_indices, sc.qubit_counts, product_sites(sc, t))
        assert res.twirled_qfi == pytest.approx(product_qfi_batch(sc, t[None, :])[0], rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("J", [2, 4, 6, 8, 10])
def test_optimal_pair_ignores_constant_field(J):
    pair = optimal_probe_integer(build_alternating(J).problem())
    assert np.ones(J) @ (pair.s - pair.r) == 0


def test_two_site_values():
    res = product_advantage_sweep(build_alternating(2))
    assert res.optimal_qfi == pytest.approx(16)
    assert res.max_product_qfi == pytest.approx(8)
    assert res.ratio == pytest.approx(0.5)


@pytest.mark.parametrize("J", [2, 4, 6, 8])
def test_uniform_state_attains_bound(J):
    sc = build_alternating(J)
    uniform = product_qfi_batch(sc, np.full((1, J), np.pi / 4))[0]
    assert uniform == pytest.approx(2.0 ** (1 - J) * (2 * J) ** 2, rel=1e-9)


def test_single_branch_product_state_has_no_information():
    sc = build_alternating(4)
    assert product_qfi_batch(sc, np.zeros((1, 4)))[0] == 0.0
