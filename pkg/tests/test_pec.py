"""Cancellation of known Pauli noise: inversion, sampling, estimators.

The inversion fixture values are frozen from the closed form: a uniform
3% depolarizing channel has transfer eigenvalue 24/25 on every
non-identity class, so the inverse mixture is eta_I = 33/32,
eta_P = -1/96 and gamma = 17/16.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softqec._rng import rng_for
from softqec.channels import PauliChannel, character_matrix, class_labels
from softqec.errors import NonInvertibleChannelError
from softqec.pauli import CliffordGate, PauliString
from softqec.pec import (
    LogicalCircuit,
    analytic_expectation,
    exhaustive_pec_expectation,
    invert_pauli_channel,
    observable_flip_tables,
    pec_postselect_overhead,
    random_logical_circuit,
    run_pec,
    sample_insertion,
    shot_allocation_tradeoff,
    simulate_logical_shot,
    uniform_depolarizing,
)


def invertible_channels(k=1):
    size = 4**k
    return (
        st.lists(st.floats(0.001, 1.0), min_size=size, max_size=size)
        .map(lambda v: np.array(v) / np.sum(v))
        .filter(lambda p: np.all(np.abs(character_matrix(k) @ p) > 1e-6))
        .map(PauliChannel)
    )


def test_inversion_fixture_depolarizing_3pct():
    decomp = invert_pauli_channel(uniform_depolarizing(1, 0.03))
    assert decomp.eta["I"] == pytest.approx(33 / 32, abs=1e-12)
    for lab in ("X", "Y", "Z"):
        assert decomp.eta[lab] == pytest.approx(-1 / 96, abs=1e-12)
    assert decomp.gamma == pytest.approx(17 / 16, abs=1e-12)


def test_identity_channel_inverts_to_itself():
    decomp = invert_pauli_channel(PauliChannel.identity(1))
    assert decomp.eta["I"] == pytest.approx(1.0)
    assert decomp.gamma == pytest.approx(1.0)


def test_non_invertible_channel_rejected():
    with pytest.raises(NonInvertibleChannelError):
        invert_pauli_channel(PauliChannel.single_qubit(0.5, 0.0, 0.0))


@given(invertible_channels(1))
@settings(max_examples=40, deadline=None)
def test_inverse_cancels_channel_eigenvalues(ch):
    decomp = invert_pauli_channel(ch)
    chi = character_matrix(1)
    eta_vec = np.array([decomp.eta[lab] for lab in class_labels(1)])
    assert sum(decomp.eta.values()) == pytest.approx(1.0, abs=1e-9)
    assert decomp.gamma >= 1.0 - 1e-12
    # Signed-mixture eigenvalues are exactly the reciprocals.
    product = (chi @ eta_vec) * (chi @ ch.probs)
    assert np.allclose(product, 1.0, atol=1e-8)


def test_inversion_two_qubit_round_trip(rng):
    raw = rng.random(16) + 0.5
    ch = PauliChannel(raw / raw.sum())
    decomp = invert_pauli_channel(ch)
    chi = character_matrix(2)
    eta_vec = np.array([decomp.eta[lab] for lab in class_labels(2)])
    assert np.allclose((chi @ eta_vec) * (chi @ ch.probs), 1.0, atol=1e-9)


def test_sample_insertion_distribution():
    decomp = invert_pauli_channel(uniform_depolarizing(1, 0.1))
    rng = rng_for(51)
    draws = 20000
    identity_hits = 0
    for _ in range(draws):
        label, sign = sample_insertion(decomp, rng)
        lab = label.to_label()
        assert sign == (1 if decomp.eta[lab] >= 0 else -1)
        identity_hits += lab == "I"
    expect = abs(decomp.eta["I"]) / decomp.gamma
    sigma = math.sqrt(expect * (1 - expect) / draws)
    assert abs(identity_hits / draws - expect) < 5 * sigma


def test_uniform_depolarizing_layout():
    ch = uniform_depolarizing(2, 0.15)
    assert ch.prob("II") == pytest.approx(0.85)
    assert ch.prob("XZ") == pytest.approx(0.15 / 15)
    assert ch.probs.sum() == pytest.approx(1.0)


def test_random_circuit_structure_and_seeding():
    circ = random_logical_circuit(4, 30, rng_for(52), p_gate=0.01)
    assert circ.num_gates == 30
    assert circ.observable.n == 4
    for g, ch in zip(circ.gates, circ.gate_channels):
        assert ch.num_qubits == len(g.targets)
    again = random_logical_circuit(4, 30, rng_for(52), p_gate=0.01)
    assert circ.gates == again.gates
    assert circ.observable == again.observable


def test_flip_tables_agree_with_frame_simulation():
    # With noiseless gates the outcome is determined by the insertions
    # alone, so the XOR of table entries must reproduce the simulator.
    circ = random_logical_circuit(3, 12, rng_for(53), p_gate=0.0)
    tables = observable_flip_tables(circ)
    rng = rng_for(54)
    for _ in range(200):
        flips = 0
        insertions: list[PauliString | None] = []
        for g, gate in enumerate(circ.gates):
            labels = class_labels(len(gate.targets))
            idx = int(rng.integers(len(labels)))
            insertions.append(PauliString.from_label(labels[idx]))
            flips ^= int(tables[g][idx])
        outcome = simulate_logical_shot(circ, insertions, rng)
        assert outcome == 1 - 2 * flips


def test_analytic_expectation_matches_enumeration():
    # Two-gate single-qubit circuit, brute force over the 16 joint error
    # classes.
    gates = (CliffordGate("H", (0,)), CliffordGate("S", (0,)))
    ch1 = PauliChannel.single_qubit(0.05, 0.02, 0.01)
    ch2 = PauliChannel.single_qubit(0.03, 0.0, 0.07)
    obs = PauliString.from_label("Z")
    for g in gates:
        from softqec.pauli import conjugate

        obs = conjugate(obs, g)
    circ = LogicalCircuit(
        n_logical=1, gates=gates, gate_channels=(ch1, ch2), observable=obs
    )
    tables = observable_flip_tables(circ)
    mean = 0.0
    for i, p1 in enumerate(ch1.probs):
        for j, p2 in enumerate(ch2.probs):
            flip = int(tables[0][i]) ^ int(tables[1][j])
            mean += p1 * p2 * (1 - 2 * flip)
    assert analytic_expectation(circ) == pytest.approx(mean, abs=1e-14)


def test_simulated_mean_matches_analytic():
    circ = random_logical_circuit(2, 8, rng_for(55), p_gate=0.05)
    want = analytic_expectation(circ)
    rng = rng_for(56)
    shots = 20000
    vals = [simulate_logical_shot(circ, None, rng) for _ in range(shots)]
    se = np.std(vals, ddof=1) / math.sqrt(shots)
    assert abs(np.mean(vals) - want) < 5 * se


@pytest.mark.parametrize(
    "channel,obs",
    [
        (uniform_depolarizing(1, 0.08), "Z"),
        (uniform_depolarizing(1, 0.02), "X"),
        (PauliChannel.single_qubit(0.04, 0.01, 0.02), "Y"),
        (uniform_depolarizing(2, 0.06), "ZX"),
    ],
)
def test_exhaustive_single_gate_unbiasedness(channel, obs):
    value = exhaustive_pec_expectation(channel, PauliString.from_label(obs))
    assert value == pytest.approx(1.0, abs=1e-12)


def test_run_pec_type2_known_channels():
    circ = random_logical_circuit(3, 20, rng_for(57), p_gate=0.02)
    res = run_pec(circ, shots=40000, mode="type2", rng=rng_for(58))
    assert res.mode == "type2"
    assert res.shots_used == 40000
    assert abs(res.mitigated_mean - 1.0) < 5 * res.mitigated_stderr
    want_unmit = analytic_expectation(circ)
    se_unmit = math.sqrt((1 - want_unmit**2) / 40000) + 1e-9
    assert abs(res.unmitigated_mean - want_unmit) < 5 * se_unmit
    # Reported gamma is the product over per-gate inverses.
    log_gamma = sum(
        math.log(invert_pauli_channel(ch).gamma) for ch in circ.gate_channels
    )
    assert math.log(res.total_gamma) == pytest.approx(log_gamma, abs=1e-10)


def test_run_pec_type1_known_skips_warmup():
    circ = random_logical_circuit(2, 10, rng_for(59), p_gate=0.02)
    res = run_pec(circ, shots=6000, mode="type1", rng=rng_for(60))
    assert res.warmup_shots == 0
    assert math.isnan(res.unmitigated_mean)
    assert abs(res.mitigated_mean - 1.0) < 6 * res.mitigated_stderr


def test_run_pec_validation():
    circ = random_logical_circuit(2, 5, rng_for(61))
    with pytest.raises(ValueError):
        run_pec(circ, shots=100, mode="type3", rng=rng_for(62))
    with pytest.raises(ValueError):
        run_pec(circ, shots=100, mode="type2", rng=rng_for(62), channel_source="psychic")
    with pytest.raises(ValueError):
        run_pec(circ, shots=0, mode="type2", rng=rng_for(62))
    with pytest.raises(ValueError):
        run_pec(circ, shots=500, mode="type1", rng=rng_for(62), warmup_min=1000)


def test_shot_allocation_tradeoff_shapes():
    grid = [0.1, 0.2, 0.4, 0.8]
    rows = shot_allocation_tradeoff(10**6, grid, 100, 1e-3, 2.0, batch="first")
    assert [r["lambda"] for r in rows] == grid
    for r in rows:
        assert r["mse"] == pytest.approx(r["bias"] ** 2 + r["variance"])
    # More characterization shots: bias falls, variance rises.
    biases = [r["bias"] for r in rows]
    variances = [r["variance"] for r in rows]
    assert all(b > a for a, b in zip(biases[1:], biases))
    assert all(b > a for a, b in zip(variances, variances[1:]))
    # Accumulated mode: the whole budget characterizes and mitigates.
    later = shot_allocation_tradeoff(10**6, grid, 100, 1e-3, 2.0, batch="later")
    assert len({r["bias"] for r in later}) == 1
    assert len({r["variance"] for r in later}) == 1
    with pytest.raises(ValueError):
        shot_allocation_tradeoff(10**6, grid, 100, 1e-3, 2.0, batch="middle")
    with pytest.raises(ValueError):
        shot_allocation_tradeoff(10**6, [0.0], 100, 1e-3, 2.0)


def test_postselect_overhead_fixtures():
    assert pec_postselect_overhead(10000, 5e-5, 10, 1e-4) == pytest.approx(
        0.449, abs=1e-3
    )
    assert pec_postselect_overhead(1000, 1e-4, 1, 0.0) == 1.0
    assert pec_postselect_overhead(1000, 1e-4, 10, 1e-3) == pytest.approx(
        math.exp(-0.36) / 0.999**1000, rel=1e-6
    )
    with pytest.raises(ValueError):
        pec_postselect_overhead(1000, 1e-4, 0.5, 0.0)
    with pytest.raises(ValueError):
        pec_postselect_overhead(1000, 1e-4, 10, 1.0)
