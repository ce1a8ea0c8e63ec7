"""Phase-free Pauli operators on bit-vector (symplectic) form.

An n-qubit Pauli string is stored as two length-n bit-vectors: qubit i
carries X iff ``x_bits[i]``, Z iff ``z_bits[i]``, and Y iff both. Global
phases are discarded everywhere; products, commutation, and Clifford
conjugation only ever depend on the bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_LABEL_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LABEL = {bits: label for label, bits in _LABEL_BITS.items()}


def _as_bits(v, n: int | None = None) -> np.ndarray:
    arr = np.asarray(v, dtype=np.uint8) % 2
    if arr.ndim != 1:
        raise ValueError("bit-vector must be one-dimensional")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"expected length {n}, got {arr.shape[0]}")
    arr.setflags(write=False)
    return arr


class PauliString:
    """An n-qubit Pauli operator modulo phase.

    Parameters
    ----------
    x_bits, z_bits : array_like
        Equal-length binary vectors. ``x_bits[i]`` marks an X component on
        qubit i, ``z_bits[i]`` a Z component; both set means Y.
    """

    __slots__ = ("x_bits", "z_bits")

    def __init__(self, x_bits, z_bits):
        x = _as_bits(x_bits)
        z = _as_bits(z_bits, n=x.shape[0])
        object.__setattr__(self, "x_bits", x)
        object.__setattr__(self, "z_bits", z)

    def __setattr__(self, name, value):
        raise AttributeError("PauliString is immutable")

    @property
    def n(self) -> int:
        return self.x_bits.shape[0]

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8))

    @classmethod
    def single(cls, n: int, qubit: int, kind: str) -> "PauliString":
        """Pauli ``kind`` on one qubit of an otherwise-identity string."""
        if not 0 <= qubit < n:
            raise ValueError(f"qubit {qubit} out of range for n={n}")
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        x[qubit], z[qubit] = _LABEL_BITS[kind]
        return cls(x, z)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse a string over {I, X, Y, Z}, e.g. ``"IXZY"``."""
        try:
            pairs = [_LABEL_BITS[ch] for ch in label]
        except KeyError as exc:
            raise ValueError(f"invalid Pauli symbol {exc.args[0]!r}") from None
        x = np.array([p[0] for p in pairs], dtype=np.uint8)
        z = np.array([p[1] for p in pairs], dtype=np.uint8)
        return cls(x, z)

    def to_label(self) -> str:
        return "".join(
            _BITS_LABEL[(int(x), int(z))] for x, z in zip(self.x_bits, self.z_bits)
        )

    def weight(self) -> int:
        """Number of non-identity tensor factors."""
        return int(np.count_nonzero(self.x_bits | self.z_bits))

    def is_identity(self) -> bool:
        return not (self.x_bits.any() or self.z_bits.any())

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliString):
            return NotImplemented
        return np.array_equal(self.x_bits, other.x_bits) and np.array_equal(
            self.z_bits, other.z_bits
        )

    def __hash__(self) -> int:
        return hash((self.x_bits.tobytes(), self.z_bits.tobytes()))

    def __repr__(self) -> str:
        return f"PauliString({self.to_label()!r})"


def pauli_mul(a: PauliString, b: PauliString) -> PauliString:
    """Phase-free product: component-wise XOR of the bit-vectors."""
    if a.n != b.n:
        raise ValueError(f"length mismatch: {a.n} vs {b.n}")
    return PauliString(a.x_bits ^ b.x_bits, a.z_bits ^ b.z_bits)


def symplectic_product(a: PauliString, b: PauliString) -> int:
    """Binary symplectic form; 1 means the operators anticommute."""
    if a.n != b.n:
        raise ValueError(f"length mismatch: {a.n} vs {b.n}")
    return int((np.dot(a.x_bits, b.z_bits) + np.dot(a.z_bits, b.x_bits)) % 2)


def commutes(a: PauliString, b: PauliString) -> bool:
    return symplectic_product(a, b) == 0


@dataclass(frozen=True)
class CliffordGate:
    """A gate from the generating set {H, S, CNOT} plus Pauli gates.

    ``kind`` is one of ``"H"``, ``"S"``, ``"CNOT"``, ``"PAULI"``; ``targets``
    holds one qubit index (two for CNOT: control then target). Pauli gates
    conjugate every Pauli string to itself once phases are dropped.
    """

    kind: str
    targets: tuple[int, ...]

    def __post_init__(self):
        expected = 2 if self.kind == "CNOT" else 1
        if self.kind not in ("H", "S", "CNOT", "PAULI"):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.targets) != expected:
            raise ValueError(f"{self.kind} takes {expected} target(s)")
        if self.kind == "CNOT" and self.targets[0] == self.targets[1]:
            raise ValueError("CNOT control and target must differ")


def conjugate(p: PauliString, g: CliffordGate) -> PauliString:
    """Return ``g p g†`` with the phase discarded.

    CNOT copies X from control to target and Z from target to control;
    H swaps X and Z; S maps X to Y and fixes Z.
    """
    n = p.n
    if any(t < 0 or t >= n for t in g.targets):
        raise ValueError(f"gate targets {g.targets} out of range for n={n}")
    x = p.x_bits.copy()
    z = p.z_bits.copy()
    if g.kind == "H":
        (q,) = g.targets
        x[q], z[q] = z[q], x[q]
    elif g.kind == "S":
        (q,) = g.targets
        z[q] ^= x[q]
    elif g.kind == "CNOT":
        c, t = g.targets
        x[t] ^= x[c]
        z[c] ^= z[t]
    return PauliString(x, z)


def conjugate_through(p: PauliString, gates) -> PauliString:
    """Conjugate ``p`` through a gate sequence applied left to right."""
    for g in gates:
        p = conjugate(p, g)
    return p
