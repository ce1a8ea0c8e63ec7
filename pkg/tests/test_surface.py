"""Planar code geometry, syndrome extraction, and logical classification."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softqec._rng import rng_for
from softqec.pauli import PauliString, commutes, pauli_mul
from softqec.surface import (
    LOGICAL_CLASSES,
    NoiseModel,
    Syndrome,
    build_planar_code,
    class_components,
    class_from_components,
    class_product,
    extract_syndrome,
    logical_effect,
    logical_effect_batch,
    random_stabilizer,
    sample_error,
    sample_error_batch,
    syndrome_batch,
)


@pytest.mark.parametrize("d", [1, 3, 5, 7])
def test_counts_follow_distance(d):
    lay = build_planar_code(d)
    assert lay.n == d * d + (d - 1) * (d - 1)
    assert lay.num_x_checks == d * (d - 1)
    assert lay.num_z_checks == d * (d - 1)
    assert lay.logical_x.weight() == d
    assert lay.logical_z.weight() == d


def test_even_distance_rejected():
    with pytest.raises(ValueError):
        build_planar_code(4)
    with pytest.raises(ValueError):
        build_planar_code(0)


def test_degenerate_single_qubit_patch():
    lay = build_planar_code(1)
    assert lay.n == 1
    assert lay.num_x_checks == 0
    err = PauliString.from_label("Y")
    assert extract_syndrome(lay, err).is_trivial()
    assert logical_effect(lay, err) == "Y"


def test_checks_commute_with_each_other_and_logicals(layout3):
    lay = layout3
    x_checks = [
        PauliString(row, np.zeros(lay.n, dtype=np.uint8)) for row in lay.h_x
    ]
    z_checks = [
        PauliString(np.zeros(lay.n, dtype=np.uint8), row) for row in lay.h_z
    ]
    for a in x_checks:
        for b in z_checks:
            assert commutes(a, b)
        assert commutes(a, lay.logical_z)
    for b in z_checks:
        assert commutes(b, lay.logical_x)
    # The two logicals anticommute with each other only.
    assert not commutes(lay.logical_x, lay.logical_z)


def test_logicals_commute_with_all_checks(layout5):
    lay = layout5
    assert not (lay.h_z @ lay.logical_x.x_bits % 2).any()
    assert not (lay.h_x @ lay.logical_z.z_bits % 2).any()


def test_check_weights_interior_four_boundary_lower(layout5):
    weights = layout5.h_x.sum(axis=1)
    assert set(weights.tolist()) <= {3, 4}
    assert (layout5.h_z.sum(axis=1) <= 4).all()


def test_class_components_round_trip():
    for lab in LOGICAL_CLASSES:
        assert class_from_components(*class_components(lab)) == lab
    assert class_product("X", "Z") == "Y"
    assert class_product("Y", "Y") == "I"
    assert class_product("I", "Z") == "Z"


def test_syndrome_linearity(layout3, rng):
    lay = layout3
    noise = NoiseModel.depolarizing(0.2)
    for _ in range(30):
        e1 = sample_error(lay, noise, rng)
        e2 = sample_error(lay, noise, rng)
        s1 = extract_syndrome(lay, e1)
        s2 = extract_syndrome(lay, e2)
        s12 = extract_syndrome(lay, pauli_mul(e1, e2))
        assert np.array_equal(s12.x_defects, s1.x_defects ^ s2.x_defects)
        assert np.array_equal(s12.z_defects, s1.z_defects ^ s2.z_defects)


def test_stabilizers_are_invisible(layout3, rng):
    lay = layout3
    for _ in range(25):
        s = random_stabilizer(lay, rng)
        assert extract_syndrome(lay, s).is_trivial()
        assert logical_effect(lay, s) == "I"


def test_logical_representatives_classify_correctly(layout3):
    lay = layout3
    assert logical_effect(lay, lay.logical_x) == "X"
    assert logical_effect(lay, lay.logical_z) == "Z"
    assert logical_effect(lay, pauli_mul(lay.logical_x, lay.logical_z)) == "Y"
    assert logical_effect(lay, PauliString.identity(lay.n)) == "I"


def test_logical_effect_is_a_homomorphism_on_cosets(layout3, rng):
    lay = layout3
    noise = NoiseModel.depolarizing(0.15)
    for _ in range(20):
        e = sample_error(lay, noise, rng)
        s = random_stabilizer(lay, rng)
        assert logical_effect(lay, e) == logical_effect(lay, pauli_mul(e, s))
        shifted = pauli_mul(e, lay.logical_x)
        assert logical_effect(lay, shifted) == class_product(
            logical_effect(lay, e), "X"
        )


def test_canonical_correction_reproduces_syndrome(layout3, rng):
    lay = layout3
    noise = NoiseModel.depolarizing(0.2)
    for _ in range(40):
        err = sample_error(lay, noise, rng)
        syn = extract_syndrome(lay, err)
        corr = lay.canonical_correction(syn)
        assert extract_syndrome(lay, corr) == syn
        # err * corr is then syndrome-free: a stabilizer or logical.
        resid = pauli_mul(err, corr)
        assert extract_syndrome(lay, resid).is_trivial()


def test_batch_paths_match_scalar_paths(layout3):
    lay = layout3
    noise = NoiseModel.depolarizing(0.1)
    rng1 = rng_for(77)
    x_bits, z_bits = sample_error_batch(lay, noise, rng1, 50)
    x_def, z_def = syndrome_batch(lay, x_bits, z_bits)
    classes = logical_effect_batch(lay, x_bits, z_bits)
    for i in range(50):
        err = PauliString(x_bits[i], z_bits[i])
        syn = extract_syndrome(lay, err)
        assert np.array_equal(x_def[i], syn.x_defects)
        assert np.array_equal(z_def[i], syn.z_defects)
        assert LOGICAL_CLASSES[classes[i]] == logical_effect(lay, err)


def test_sampled_marginals_match_noise_model(layout3):
    noise = NoiseModel(q_x=0.05, q_y=0.02, q_z=0.08)
    rng1 = rng_for(88)
    x_bits, z_bits = sample_error_batch(layout3, noise, rng1, 4000)
    # X content appears with probability q_x + q_y, Z with q_z + q_y.
    x_rate = x_bits.mean()
    z_rate = z_bits.mean()
    n_draws = 4000 * layout3.n
    for rate, expect in ((x_rate, 0.07), (z_rate, 0.10)):
        sigma = np.sqrt(expect * (1 - expect) / n_draws)
        assert abs(rate - expect) < 5 * sigma


def test_noise_model_validation_and_helpers():
    depol = NoiseModel.depolarizing(0.03)
    assert depol.q_x == pytest.approx(0.01)
    assert depol.q_i == pytest.approx(0.97)
    assert depol.probs.sum() == pytest.approx(1.0)
    ind = NoiseModel.independent_xz(0.02, 0.05)
    assert ind.is_independent_xz
    assert ind.q_y == pytest.approx(0.02 * 0.05)
    assert not depol.is_independent_xz
    assert depol.marginal_x_flip == pytest.approx(0.02)
    with pytest.raises(ValueError):
        NoiseModel(q_x=0.6, q_y=0.5, q_z=0.2)
    with pytest.raises(ValueError):
        NoiseModel(q_x=-0.1, q_y=0.0, q_z=0.0)


def test_syndrome_key_and_equality(layout3):
    a = Syndrome(
        x_defects=np.array([1, 0, 0, 0, 0, 0]),
        z_defects=np.array([0, 0, 0, 0, 0, 1]),
    )
    b = Syndrome(
        x_defects=np.array([1, 0, 0, 0, 0, 0]),
        z_defects=np.array([0, 0, 0, 0, 0, 1]),
    )
    c = Syndrome(
        x_defects=np.array([0, 1, 0, 0, 0, 0]),
        z_defects=np.array([0, 0, 0, 0, 0, 1]),
    )
    assert a == b and hash(a) == hash(b)
    assert a != c
    assert not a.is_trivial()


def test_layout_json_export_is_stable(layout3):
    import json

    payload = json.loads(layout3.to_json())
    assert payload["distance"] == 3
    assert payload["n"] == 13
    assert len(payload["x_checks"]) == 6
    assert payload["logical_x"].count("X") == 3
