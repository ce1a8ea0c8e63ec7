"""Pauli channels over logical classes: group structure and transforms.

A channel on k logical qubits is a probability vector over the 4**k
phase-free Pauli classes, ordered as the k-fold product of (I, X, Y, Z)
with the leftmost qubit most significant ("II", "IX", ..., "ZZ" for k=2).
The classes form the abelian group (Z_2)^(2k) under multiplication, so
channel composition is group convolution and the character (Walsh-type)
transform diagonalizes every such channel.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

_CHAR_XZ = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


@lru_cache(maxsize=None)
def class_labels(k: int) -> tuple[str, ...]:
    """All 4**k class labels in canonical product order."""
    if k < 1:
        raise ValueError("need at least one qubit")
    return tuple("".join(t) for t in itertools.product("IXYZ", repeat=k))


@lru_cache(maxsize=None)
def _label_positions(k: int) -> dict[str, int]:
    return {lab: i for i, lab in enumerate(class_labels(k))}


def label_index(label: str) -> int:
    return _label_positions(len(label))[label]


def _label_xz(label: str) -> tuple[tuple[int, ...], tuple[int, ...]]:
    pairs = [_CHAR_XZ[ch] for ch in label]
    return tuple(p[0] for p in pairs), tuple(p[1] for p in pairs)


@lru_cache(maxsize=None)
def product_table(k: int) -> np.ndarray:
    """index_of(P*Q) for all class pairs, shape (4**k, 4**k)."""
    labels = class_labels(k)
    pos = _label_positions(k)
    table = np.empty((len(labels), len(labels)), dtype=np.int64)
    for i, a in enumerate(labels):
        ax, az = _label_xz(a)
        for j, b in enumerate(labels):
            bx, bz = _label_xz(b)
            prod = "".join(
                next(
                    lab
                    for lab, (x, z) in _CHAR_XZ.items()
                    if x == (ax[q] ^ bx[q]) and z == (az[q] ^ bz[q])
                )
                for q in range(k)
            )
            table[i, j] = pos[prod]
    return table


@lru_cache(maxsize=None)
def character_matrix(k: int) -> np.ndarray:
    """chi[i, j] = +1 if classes i and j commute, -1 otherwise.

    Rows are the characters of (Z_2)^(2k); chi is symmetric and
    chi @ chi = 4**k * identity.
    """
    labels = class_labels(k)
    m = len(labels)
    chi = np.empty((m, m), dtype=np.float64)
    for i, a in enumerate(labels):
        ax, az = _label_xz(a)
        for j, b in enumerate(labels):
            bx, bz = _label_xz(b)
            s = sum(ax[q] * bz[q] + az[q] * bx[q] for q in range(k)) % 2
            chi[i, j] = -1.0 if s else 1.0
    chi.setflags(write=False)
    return chi


@dataclass(frozen=True)
class PauliChannel:
    """Probability vector over the 4**k logical classes of k qubits."""

    probs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.probs, dtype=np.float64)
        m = arr.shape[0]
        k = 1
        while 4**k < m:
            k += 1
        if arr.ndim != 1 or 4**k != m:
            raise ValueError(f"length {m} is not a power of 4")
        if (arr < -1e-12).any():
            raise ValueError("negative class probability")
        if abs(arr.sum() - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {arr.sum()}, not 1")
        arr = np.clip(arr, 0.0, None)
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def num_qubits(self) -> int:
        return int(round(np.log2(len(self.probs)) / 2))

    @property
    def labels(self) -> tuple[str, ...]:
        return class_labels(self.num_qubits)

    @classmethod
    def from_dict(cls, d: dict[str, float], k: int | None = None) -> "PauliChannel":
        """Build from a label -> probability map; missing labels are 0."""
        if k is None:
            k = len(next(iter(d)))
        probs = np.zeros(4**k)
        for lab, p in d.items():
            probs[label_index(lab)] = p
        return cls(probs)

    def to_dict(self) -> dict[str, float]:
        return {lab: float(p) for lab, p in zip(self.labels, self.probs)}

    def prob(self, label: str) -> float:
        return float(self.probs[label_index(label)])

    @classmethod
    def identity(cls, k: int) -> "PauliChannel":
        probs = np.zeros(4**k)
        probs[0] = 1.0
        return cls(probs)

    @classmethod
    def single_qubit(cls, p_x: float, p_y: float, p_z: float) -> "PauliChannel":
        return cls(np.array([1.0 - p_x - p_y - p_z, p_x, p_y, p_z]))

    def compose(self, other: "PauliChannel") -> "PauliChannel":
        """Group convolution: the channel of applying both in sequence."""
        k = self.num_qubits
        if other.num_qubits != k:
            raise ValueError("qubit counts differ")
        a, b = self.probs, other.probs
        # The class group is abelian, so the convolution itself commutes;
        # ordering the operands canonically makes both call directions run
        # the identical accumulation and agree bit for bit.
        if a.tobytes() > b.tobytes():
            a, b = b, a
        table = product_table(k)
        out = np.zeros(4**k)
        np.add.at(out, table, np.outer(a, b))
        return PauliChannel(out)

    def tensor(self, other: "PauliChannel") -> "PauliChannel":
        """Independent product channel on the concatenated qubits."""
        return PauliChannel(np.kron(self.probs, other.probs))

    def eigenvalues(self) -> np.ndarray:
        """Pauli-basis transfer eigenvalues: chi @ probs, one per class."""
        return character_matrix(self.num_qubits) @ self.probs

    def fidelity(self) -> float:
        """Probability of the identity class."""
        return float(self.probs[0])

    def marginal(self, qubit: int) -> "PauliChannel":
        """Single-qubit class marginal (exact only for product channels)."""
        k = self.num_qubits
        if not 0 <= qubit < k:
            raise ValueError(f"qubit {qubit} out of range")
        shaped = self.probs.reshape((4,) * k)
        axes = tuple(i for i in range(k) if i != qubit)
        return PauliChannel(shaped.sum(axis=axes))
