"""Noise-scaled extrapolation: Richardson weights, amplification, runs."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softqec._rng import rng_for
from softqec.channels import PauliChannel
from softqec.pec import analytic_expectation, random_logical_circuit
from softqec.zne import (
    RichardsonWeights,
    ScaleSchedule,
    amplify_channel,
    analytic_scale_expectation,
    pea_insertion_channel,
    richardson_coefficients,
    run_zne,
)


def test_two_point_fixture():
    w = richardson_coefficients(ScaleSchedule((1, 2)))
    assert w.coefficients[0] == pytest.approx(2.0, abs=1e-10)
    assert w.coefficients[1] == pytest.approx(-1.0, abs=1e-10)
    assert w.overhead == pytest.approx(3.0, abs=1e-10)


def test_three_point_fixture():
    w = richardson_coefficients(ScaleSchedule((1, 2, 3)))
    assert np.allclose(w.coefficients, (3.0, -3.0, 1.0), atol=1e-10)


def test_schedule_validation():
    with pytest.raises(ValueError):
        ScaleSchedule(())
    with pytest.raises(ValueError):
        ScaleSchedule((2, 3))
    with pytest.raises(ValueError):
        ScaleSchedule((1, 2, 2))
    with pytest.raises(ValueError):
        ScaleSchedule((1, 3, 2))


def test_weights_validation():
    with pytest.raises(ValueError):
        RichardsonWeights(scales=(1.0, 2.0), coefficients=(1.0, 1.0))
    with pytest.raises(ValueError):
        richardson_coefficients([1.0, 1.0, 2.0])


scale_lists = st.lists(
    st.floats(1.05, 8.0), min_size=1, max_size=5, unique_by=lambda v: round(v, 3)
).map(lambda tail: tuple([1.0] + sorted(set(round(v, 3) for v in tail))))


@given(scale_lists)
@settings(max_examples=50, deadline=None)
def test_moment_conditions(scales):
    w = richardson_coefficients(scales)
    c = np.array(w.coefficients)
    s = np.array(scales)
    for k in range(len(scales)):
        want = 1.0 if k == 0 else 0.0
        assert float(np.sum(c * s**k)) == pytest.approx(want, abs=1e-7)


@given(scale_lists, st.lists(st.floats(-2, 2), min_size=1, max_size=5))
@settings(max_examples=50, deadline=None)
def test_polynomial_recovery(scales, poly):
    # Degree up to K-1 over K scales: the weighted combination returns the
    # constant term, the value at zero noise, exactly.
    poly = poly[: len(scales)]
    w = richardson_coefficients(scales)
    values = [sum(a * s**i for i, a in enumerate(poly)) for s in scales]
    got = sum(c * v for c, v in zip(w.coefficients, values))
    assert got == pytest.approx(poly[0], rel=1e-8, abs=1e-8)


def test_amplify_channel_scales_error_mass():
    ch = PauliChannel.single_qubit(0.02, 0.01, 0.03)
    amp = amplify_channel(ch, 2.5)
    assert amp.prob("X") == pytest.approx(0.05)
    assert amp.prob("I") == pytest.approx(1 - 2.5 * 0.06)
    assert np.allclose(amplify_channel(ch, 1.0).probs, ch.probs)
    with pytest.raises(ValueError):
        amplify_channel(ch, -1.0)
    with pytest.raises(ValueError):
        amplify_channel(ch, 20.0)


def test_pea_insertion_matches_amplified_to_second_order():
    ch = PauliChannel.single_qubit(0.004, 0.002, 0.003)
    s = 3.0
    direct = amplify_channel(ch, s)
    ins = pea_insertion_channel(ch, s)
    # Composing native noise with the insertion reproduces the scaled
    # channel up to O(p^2) cross terms.
    approx = ch.compose(ins)
    assert np.abs(approx.probs - direct.probs).max() < 2 * (s - 1) * 0.009**2
    with pytest.raises(ValueError):
        pea_insertion_channel(ch, 0.5)


def test_analytic_scale_expectation_interpolates():
    circ = random_logical_circuit(2, 10, rng_for(63), p_gate=0.01)
    assert analytic_scale_expectation(circ, 1.0) == pytest.approx(
        analytic_expectation(circ)
    )
    # Stronger noise cannot increase the expectation magnitude.
    e1 = analytic_scale_expectation(circ, 1.0)
    e3 = analytic_scale_expectation(circ, 3.0)
    assert abs(e3) <= abs(e1) + 1e-12


def test_three_point_extrapolation_beats_single_scales():
    # Fully analytic: extrapolate the exact means, compare residual bias
    # against each raw scale's own bias.
    circ = random_logical_circuit(3, 40, rng_for(64), p_gate=0.004)
    schedule = ScaleSchedule((1, 2, 3))
    w = richardson_coefficients(schedule)
    means = [analytic_scale_expectation(circ, s) for s in schedule]
    extrapolated = sum(c * m for c, m in zip(w.coefficients, means))
    bias_extrap = abs(extrapolated - 1.0)
    for m in means:
        assert bias_extrap < abs(m - 1.0)


def test_run_zne_end_to_end():
    circ = random_logical_circuit(2, 10, rng_for(65), p_gate=0.01)
    schedule = ScaleSchedule((1, 2, 3))
    res = run_zne(circ, schedule, shots_per_scale=4000, rng=rng_for(66))
    assert len(res.scale_rows) == 3
    assert [r["scale"] for r in res.scale_rows] == [1.0, 2.0, 3.0]
    assert res.coefficients == richardson_coefficients(schedule).coefficients
    # Propagated standard error matches the coefficient combination.
    want_se = math.sqrt(
        sum(
            c**2 * r["stderr"] ** 2
            for c, r in zip(res.coefficients, res.scale_rows)
        )
    )
    assert res.stderr == pytest.approx(want_se, rel=1e-12)
    assert abs(res.extrapolated - 1.0) < 6 * res.stderr


def test_run_zne_exact_amplification_mode():
    circ = random_logical_circuit(2, 6, rng_for(67), p_gate=0.02)
    res = run_zne(
        circ,
        ScaleSchedule((1, 2)),
        shots_per_scale=4000,
        rng=rng_for(68),
        amplification="exact",
    )
    assert abs(res.extrapolated - 1.0) < 6 * res.stderr
    with pytest.raises(ValueError):
        run_zne(
            circ,
            ScaleSchedule((1, 2)),
            shots_per_scale=4000,
            rng=rng_for(68),
            amplification="magic",
        )
    with pytest.raises(ValueError):
        run_zne(circ, ScaleSchedule((1, 2)), shots_per_scale=1, rng=rng_for(68))


def test_run_zne_seed_determinism():
    circ = random_logical_circuit(2, 10, rng_for(69), p_gate=0.01)
    a = run_zne(circ, ScaleSchedule((1, 2)), 2000, rng_for(70))
    b = run_zne(circ, ScaleSchedule((1, 2)), 2000, rng_for(70))
    assert a == b
