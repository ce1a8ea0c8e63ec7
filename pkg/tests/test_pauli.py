"""Pauli algebra: labels, products, symplectic form, Clifford conjugation.

The conjugation oracle is the textbook truth table per gate, written out
literally so a tableau bug cannot hide behind its own arithmetic.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softqec.pauli import (
    CliffordGate,
    PauliString,
    commutes,
    conjugate,
    conjugate_through,
    pauli_mul,
    symplectic_product,
)

# Single-qubit conjugation truth tables (phase-free): gate -> {in: out}.
H_TABLE = {"I": "I", "X": "Z", "Y": "Y", "Z": "X"}
S_TABLE = {"I": "I", "X": "Y", "Y": "X", "Z": "Z"}
# Two-qubit CNOT table on (control, target) labels.
CNOT_TABLE = {
    "II": "II", "IX": "IX", "IY": "ZY", "IZ": "ZZ",
    "XI": "XX", "XX": "XI", "XY": "YZ", "XZ": "YY",
    "YI": "YX", "YX": "YI", "YY": "XZ", "YZ": "XY",
    "ZI": "ZI", "ZX": "ZX", "ZY": "IY", "ZZ": "IZ",
}

LABELS = "IXYZ"


def labels_strategy(n):
    return st.text(alphabet=LABELS, min_size=n, max_size=n)


def test_label_round_trip():
    for lab in ("I", "X", "Y", "Z", "XIZY", "IIII", "YZXI"):
        assert PauliString.from_label(lab).to_label() == lab


def test_single_and_identity():
    p = PauliString.single(4, 2, "Y")
    assert p.to_label() == "IIYI"
    assert p.weight() == 1
    assert PauliString.identity(3).is_identity()
    assert not p.is_identity()


def test_bad_inputs_raise():
    with pytest.raises(ValueError):
        PauliString.from_label("XQ")
    with pytest.raises(ValueError):
        PauliString.single(3, 5, "X")
    with pytest.raises(ValueError):
        pauli_mul(PauliString.from_label("X"), PauliString.from_label("XX"))


def test_bits_are_frozen():
    p = PauliString.from_label("XZ")
    with pytest.raises((ValueError, AttributeError)):
        p.x_bits[0] = 0


@given(labels_strategy(5), labels_strategy(5))
def test_product_matches_single_qubit_group(a, b):
    # Phase-free product per qubit: XOR in the (x, z) encoding.
    prod = pauli_mul(PauliString.from_label(a), PauliString.from_label(b))
    table = {
        ("I", "I"): "I", ("I", "X"): "X", ("I", "Y"): "Y", ("I", "Z"): "Z",
        ("X", "I"): "X", ("X", "X"): "I", ("X", "Y"): "Z", ("X", "Z"): "Y",
        ("Y", "I"): "Y", ("Y", "X"): "Z", ("Y", "Y"): "I", ("Y", "Z"): "X",
        ("Z", "I"): "Z", ("Z", "X"): "Y", ("Z", "Y"): "X", ("Z", "Z"): "I",
    }
    expected = "".join(table[(ca, cb)] for ca, cb in zip(a, b))
    assert prod.to_label() == expected


@given(labels_strategy(4))
def test_self_product_is_identity(a):
    p = PauliString.from_label(a)
    assert pauli_mul(p, p).is_identity()


@given(labels_strategy(4), labels_strategy(4))
def test_symplectic_product_counts_anticommuting_sites(a, b):
    clash = sum(
        1 for ca, cb in zip(a, b) if "I" not in (ca, cb) and ca != cb
    )
    pa, pb = PauliString.from_label(a), PauliString.from_label(b)
    assert symplectic_product(pa, pb) == clash % 2
    assert commutes(pa, pb) == (clash % 2 == 0)
    assert symplectic_product(pa, pb) == symplectic_product(pb, pa)


@pytest.mark.parametrize("lab_in,lab_out", sorted(H_TABLE.items()))
def test_hadamard_table(lab_in, lab_out):
    g = CliffordGate("H", (0,))
    assert conjugate(PauliString.from_label(lab_in), g).to_label() == lab_out


@pytest.mark.parametrize("lab_in,lab_out", sorted(S_TABLE.items()))
def test_phase_gate_table(lab_in, lab_out):
    g = CliffordGate("S", (0,))
    assert conjugate(PauliString.from_label(lab_in), g).to_label() == lab_out


@pytest.mark.parametrize("lab_in,lab_out", sorted(CNOT_TABLE.items()))
def test_cnot_table(lab_in, lab_out):
    g = CliffordGate("CNOT", (0, 1))
    assert conjugate(PauliString.from_label(lab_in), g).to_label() == lab_out


def test_cnot_reversed_targets():
    # Control on qubit 1: swap the table's roles.
    g = CliffordGate("CNOT", (1, 0))
    got = conjugate(PauliString.from_label("IX"), g)
    assert got.to_label() == "XX"


@given(labels_strategy(3), st.lists(st.integers(0, 2), min_size=1, max_size=6))
def test_conjugation_is_invertible_for_involutions(lab, qubits):
    # H and CNOT are their own inverses; applying twice restores the input.
    p = PauliString.from_label(lab)
    gates = [CliffordGate("H", (q,)) for q in qubits]
    doubled = [g for g in gates for _ in range(2)]
    assert conjugate_through(p, doubled) == p
    cnot = CliffordGate("CNOT", (0, 1))
    assert conjugate(conjugate(p, cnot), cnot) == p


@given(labels_strategy(2), labels_strategy(2))
def test_conjugation_is_a_group_automorphism(a, b):
    # g(ab)g^-1 = (gag^-1)(gbg^-1), and the symplectic form is preserved.
    gates = [
        CliffordGate("H", (0,)),
        CliffordGate("S", (1,)),
        CliffordGate("CNOT", (0, 1)),
    ]
    pa, pb = PauliString.from_label(a), PauliString.from_label(b)
    for g in gates:
        lhs = conjugate(pauli_mul(pa, pb), g)
        rhs = pauli_mul(conjugate(pa, g), conjugate(pb, g))
        assert lhs == rhs
        assert symplectic_product(pa, pb) == symplectic_product(
            conjugate(pa, g), conjugate(pb, g)
        )


def test_pauli_frame_gate_is_identity_map():
    g = CliffordGate("PAULI", (0,))
    for lab in ("XZ", "YI", "IY"):
        assert conjugate(PauliString.from_label(lab), g).to_label() == lab


def test_gate_validation():
    with pytest.raises(ValueError):
        CliffordGate("CNOT", (1, 1))
    with pytest.raises(ValueError):
        CliffordGate("H", (0, 1))
    with pytest.raises(ValueError):
        CliffordGate("T", (0,))
    with pytest.raises(ValueError):
        conjugate(PauliString.from_label("X"), CliffordGate("H", (3,)))
