"""Acceptance criteria, one check per criterion.

Run with ``pytest tests/test_acceptance.py -s`` or ``python3 tests/test_acceptance.py``;
both print one PASS/FAIL line per criterion.
"""

import numpy as np
import pytest

from conftest import random_integer_case, random_problem, random_state
from distsense.advantage import build_alternating, enumerate_blocks, product_advantage_sweep
from distsense.branch_sim import evolve, parity_fisher, probe_state, qfi_mixed, qfi_pure, twirl
from distsense.field_model import FourierSine, SensorArray, Taylor, fourier_extremal_positions, sample_coefficients
from distsense.oracle import statevector_oracle
from distsense.probe_designer import DesignProblem, design, optimal_probe, perp_decompose
from distsense.scenario import example_scenarios

TAYLOR_POS = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])


def taylor_problem(n):
    arr = SensorArray(TAYLOR_POS, np.array([n, 2 * n, 0, 2 * n, n]))
    return DesignProblem(sample_coefficients(Taylor(5), arr), 3, (0, 1, 2, 4), arr.qubit_counts)


def criterion_1():
    f_perp = perp_decompose(taylor_problem(1)).f_perp
    u = np.array([-1.0, 2.0, 0.0, -2.0, 1.0])
    u /= np.linalg.norm(u)
    w = f_perp / np.linalg.norm(f_perp)
    residual = float(np.linalg.norm(w - (w @ u) * u))
    return residual < 1e-9, f"residual {residual:.2e}"


def criterion_2():
    details, ok = [], True
    for n in (1, 2, 3):
        p = taylor_problem(n)
        pair = optimal_probe(p)
        expected = np.array([-n, 2 * n, 0, -2 * n, n], float)
        dot = float(p.signal @ (pair.s - pair.r)) ** 2
        good = (np.array_equal(pair.s, expected) and abs(pair.qfi - (24 * n) ** 2) <= 1e-9 * (24 * n) ** 2
                and abs(dot - (24 * n) ** 2) <= 1e-9 * (24 * n) ** 2)
        details.append(f"n={n} qfi {pair.qfi:.12g}")
        if n == 1:
            res = statevector_oracle(p.F, 3, p.noise_indices, p.qubit_counts, pair)
            good &= abs(res.qfi - 576) <= 1e-9 * 576 and abs(res.twirled_qfi - 576) <= 1e-9 * 576
            details.append(f"oracle {res.qfi:.12g}")
        ok &= bool(good)
    return ok, ", ".join(details)


def criterion_3():
    worst = 0.0
    for k0 in range(1, 9):
        F = sample_coefficients(FourierSine(40), SensorArray(fourier_extremal_positions(k0, 1.0), np.ones(k0, int)))
        weights = F[k0 - 1]  # sampled signal row: alternating +-1
        for k in range(1, 41):
            total = weights @ F[k - 1] / k0
            q, rem = divmod(k, k0)
            expected = (-1.0) ** ((q - 1) // 2) if rem == 0 and q % 2 == 1 else 0.0
            worst = max(worst, abs(total - expected))
    return worst < 1e-9, f"max error {worst:.2e}"


def criterion_4():
    sc = example_scenarios()["pointsource"]
    p = sc.problem()
    noise = p.noise_rows[0]
    shape_ok = noise[0] == 0 and noise[1] == 0 and noise[2] != 0 and np.all(p.qubit_counts == 1)
    pair = design(p)
    return bool(shape_ok and p.integer_mode and np.array_equal(pair.s, [1, 1, 0])), f"s* = {pair.s.tolist()}"


def criterion_5():
    ok, parts = True, []
    for J in (2, 4, 6, 8):
        census = enumerate_blocks(build_alternating(J))
        alt = tuple((-1.0) ** (j + 1) for j in range(J))
        neg = tuple(-x for x in alt)
        good = (census.dims == {2: 1, 1: 2**J - 2} and len(census.nontrivial) == 1
                and {tuple(v) for v in census.nontrivial[0]} == {alt, neg})
        ok &= good
        parts.append(f"J={J} {dict(census.dims)}")
    return ok, "; ".join(parts)


def criterion_6():
    ok, parts = True, []
    for J in (2, 4, 6, 8):
        res = product_advantage_sweep(build_alternating(J))
        uniform_ok = np.allclose(res.best_angles, np.pi / 4) and abs(res.ratio - res.bound) <= 1e-6 * res.bound
        ok &= bool(res.ratio <= res.bound + 1e-9 and uniform_ok)
        parts.append(f"J={J} ratio {res.ratio:.6g} bound {res.bound:.6g}")
    return ok, "; ".join(parts)


def criterion_7():
    rng = np.random.default_rng(7)
    worst = 0.0
    for sc in example_scenarios().values():
        p = sc.problem()
        pair = design(p)
        base = qfi_pure(probe_state(pair), p.signal)
        for _ in range(100):
            phases = rng.uniform(-np.pi, np.pi, size=p.F.shape[0])
            blocks = twirl(evolve(probe_state(pair), phases, p.F), p.F, p.noise_indices)
            worst = max(worst, abs(blocks.purity() - 1.0), abs(qfi_mixed(blocks, p.signal) - base) / max(1.0, base))
    return worst <= 1e-9, f"max deviation {worst:.2e}"


def criterion_8():
    worst = 0.0
    for sc in example_scenarios().values():
        p = sc.problem()
        pair = design(p)
        for phi in (0.0, 0.05, 0.4, 1.3):
            val = parity_fisher(pair, p.F, p.signal_index, phi)
            worst = max(worst, abs(val - pair.qfi) / max(1.0, pair.qfi))
    return worst <= 1e-9, f"max relative deviation {worst:.2e}"


def criterion_9():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(50):
        F, signal, noise, n, state, phases = random_integer_case(rng, max_qubits=10)
        out = evolve(state, phases, F)
        pure = qfi_pure(out, F[signal])
        mixed = qfi_mixed(twirl(out, F, noise), F[signal])
        res = statevector_oracle(F, signal, noise, n, state, phases)
        worst = max(worst, abs(res.qfi - pure) / max(1.0, pure), abs(res.twirled_qfi - mixed) / max(1.0, mixed))
    return worst <= 1e-9, f"50 cases, max deviation {worst:.2e}"


def _twirl_setup(rng):
    state = random_state(rng)
    J = state.vectors.shape[1]
    K = int(rng.integers(1, 5))
    F = rng.integers(-2, 3, size=(K, J)).astype(float)
    noise = tuple(sorted(rng.choice(K, size=int(rng.integers(0, K + 1)), replace=False).tolist()))
    return state, F, noise, rng.uniform(-np.pi, np.pi, size=K)


def _prop_normalization(rng):
    state, F, noise, phases = _twirl_setup(rng)
    out = evolve(state, phases, F)
    dec = twirl(out, F, noise)
    return abs(out.probabilities.sum() - 1) <= 1e-12 and abs(dec.weights.sum() - 1) <= 1e-12


def _prop_idempotence(rng):
    state, F, noise, _ = _twirl_setup(rng)
    once = twirl(state, F, noise)
    twice = twirl(once, F, noise)
    key = lambda b: tuple(map(tuple, b.state.vectors))
    a = sorted(once.blocks, key=key)
    b = sorted(twice.blocks, key=key)
    return len(a) == len(b) and all(
        key(x) == key(y) and abs(x.weight - y.weight) <= 1e-14
        and np.allclose(x.state.amplitudes, y.state.amplitudes, atol=1e-14, rtol=0)
        for x, y in zip(a, b)
    )


def _prop_data_processing(rng):
    state, F, noise, _ = _twirl_setup(rng)
    g = F[int(rng.integers(len(F)))]
    pure = qfi_pure(state, g)
    return qfi_mixed(twirl(state, F, noise), g) <= pure + 1e-9 * max(1.0, pure)


def _prop_inversion(rng):
    p = random_problem(rng)
    F = p.F.copy()
    F[p.signal_index] *= -1
    a = optimal_probe(p)
    b = optimal_probe(DesignProblem(F, p.signal_index, p.noise_indices, p.qubit_counts))
    return np.allclose(b.s, -a.s, atol=1e-9) and abs(a.qfi - b.qfi) <= 1e-9 * max(1.0, a.qfi)


def _prop_rescaling(rng):
    p = random_problem(rng)
    F = p.F.copy()
    for k in p.noise_indices:
        F[k] *= rng.choice([-1.0, 1.0]) * 10 ** rng.uniform(-3, 3)
    a = optimal_probe(p)
    b = optimal_probe(DesignProblem(F, p.signal_index, p.noise_indices, p.qubit_counts))
    return np.allclose(b.s, a.s, atol=1e-9) and abs(a.qfi - b.qfi) <= 1e-9 * max(1.0, a.qfi)


PROPERTIES = {
    "normalization": _prop_normalization,
    "twirl idempotence": _prop_idempotence,
    "data processing": _prop_data_processing,
    "LP inversion symmetry": _prop_inversion,
    "noise-row rescaling": _prop_rescaling,
}


def criterion_10(instances=200):
    ok, parts = True, []
    for i, (name, prop) in enumerate(PROPERTIES.items()):
        rng = np.random.default_rng(1000 + i)
        failures = sum(not prop(rng) for _ in range(instances))
        ok &= failures == 0
        parts.append(f"{name} {instances - failures}/{instances}")
    return ok, "; ".join(parts)


CRITERIA = [
    (1, "Taylor f_perp direction", criterion_1),
    (2, "Taylor optimal probe and QFI", criterion_2),
    (3, "Fourier alternating-sum identity", criterion_3),
    (4, "point-source optimal probe", criterion_4),
    (5, "alternating block census", criterion_5),
    (6, "product-state advantage bound", criterion_6),
    (7, "noise insensitivity end to end", criterion_7),
    (8, "parity readout saturation", criterion_8),
    (9, "oracle equivalence", criterion_9),
    (10, "property suites", criterion_10),
]


def _line(num, name, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {name} ({detail})"


@pytest.mark.parametrize("num,name,check", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(num, name, check):
    ok, detail = check()
    print(_line(num, name, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    import sys

    results = []
    for num, name, check in CRITERIA:
        ok, detail = check()
        results.append(ok)
        print(_line(num, name, ok, detail))
    sys.exit(0 if all(results) else 1)
