"""Planar surface-code construction, noise sampling, and logical classification.

The distance-d unrotated planar code lives on a (2d-1) x (2d-1) grid of
sites. Data qubits sit on sites with even coordinate sum, X-checks on
(even row, odd column) sites, Z-checks on (odd row, even column) sites;
each check acts on its grid neighbours. A logical X is an X-chain down the
left column (spanning the north and south boundaries); a logical Z is a
Z-chain along the top row (spanning west and east).

Two deterministic maps make logical classes well defined: ``synd`` (here
:func:`extract_syndrome`) sends errors to check outcomes, and ``corr``
(precomputed in :class:`CodeLayout`) sends each syndrome to a fixed
canonical correction built from straight chains to a reference boundary.
The class of an error is read off the residual after that correction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .pauli import PauliString

LOGICAL_CLASSES = ("I", "X", "Y", "Z")

# (x component, z component) bit pairs per class label, in LOGICAL_CLASSES order.
_CLASS_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_CLASS = {bits: label for label, bits in _CLASS_BITS.items()}


def class_from_components(x_part: int, z_part: int) -> str:
    """Logical class label from its X-type and Z-type components."""
    return _BITS_CLASS[(int(x_part) & 1, int(z_part) & 1)]


def class_components(label: str) -> tuple[int, int]:
    return _CLASS_BITS[label]


def class_product(a: str, b: str) -> str:
    """Phase-free product of logical class labels."""
    ax, az = _CLASS_BITS[a]
    bx, bz = _CLASS_BITS[b]
    return _BITS_CLASS[((ax + bx) % 2, (az + bz) % 2)]


@dataclass(frozen=True)
class NoiseModel:
    """Uniform i.i.d. per-qubit Pauli channel (q_I, q_X, q_Y, q_Z).

    ``q_X + q_Y + q_Z`` must stay below 0.5 so decoder edge weights
    ln((1-p)/p) remain non-negative.
    """

    q_x: float
    q_y: float
    q_z: float

    def __post_init__(self):
        for name, q in (("q_x", self.q_x), ("q_y", self.q_y), ("q_z", self.q_z)):
            if not 0.0 <= q < 1.0:
                raise ValueError(f"{name}={q} outside [0, 1)")
        if self.q_x + self.q_y + self.q_z >= 0.5:
            raise ValueError("total error probability must be < 0.5")

    @property
    def q_i(self) -> float:
        return 1.0 - self.q_x - self.q_y - self.q_z

    @property
    def probs(self) -> np.ndarray:
        """Channel vector in LOGICAL_CLASSES order (I, X, Y, Z)."""
        return np.array([self.q_i, self.q_x, self.q_y, self.q_z])

    @classmethod
    def depolarizing(cls, p_total: float) -> "NoiseModel":
        return cls(p_total / 3.0, p_total / 3.0, p_total / 3.0)

    @classmethod
    def independent_xz(cls, p_x: float, p_z: float) -> "NoiseModel":
        """Channel of independent X (prob ``p_x``) and Z (prob ``p_z``) flips.

        The joint draw (X with p_x) x (Z with p_z) is itself a Pauli channel
        with q_Y = p_x * p_z; under it the X and Z error contents are exactly
        independent, which the decoupled enumeration and sector tensor
        networks rely on.
        """
        return cls(p_x * (1.0 - p_z), p_x * p_z, (1.0 - p_x) * p_z)

    @property
    def is_independent_xz(self) -> bool:
        """True when the X and Z error contents are statistically independent."""
        return abs(self.q_y * self.q_i - self.q_x * self.q_z) < 1e-15

    @property
    def marginal_x_flip(self) -> float:
        """Probability of an X component on a qubit (flips Z-checks)."""
        return self.q_x + self.q_y

    @property
    def marginal_z_flip(self) -> float:
        """Probability of a Z component on a qubit (flips X-checks)."""
        return self.q_z + self.q_y


@dataclass(frozen=True)
class Syndrome:
    """Check outcomes: ``x_defects`` over X-checks, ``z_defects`` over Z-checks."""

    x_defects: np.ndarray
    z_defects: np.ndarray

    def __post_init__(self):
        for name in ("x_defects", "z_defects"):
            arr = np.asarray(getattr(self, name), dtype=np.uint8) % 2
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def key(self) -> bytes:
        """Hashable packed form, used for decode caching."""
        return np.packbits(self.x_defects).tobytes() + b"|" + np.packbits(
            self.z_defects
        ).tobytes()

    def is_trivial(self) -> bool:
        return not (self.x_defects.any() or self.z_defects.any())

    def __eq__(self, other):
        if not isinstance(other, Syndrome):
            return NotImplemented
        return np.array_equal(self.x_defects, other.x_defects) and np.array_equal(
            self.z_defects, other.z_defects
        )

    def __hash__(self):
        return hash(self.key())


class CodeLayout:
    """Geometry and operators of one unrotated planar surface-code patch.

    Attributes
    ----------
    distance : int
        Odd code distance d; n = d**2 + (d-1)**2 data qubits.
    h_x, h_z : ndarray
        Binary check matrices, shape (d(d-1), n) each.
    logical_x, logical_z : PauliString
        Weight-d representatives; logical_x spans north-south, logical_z
        west-east.
    qubit_coords, x_check_coords, z_check_coords : list of (row, col)
        Site coordinates on the (2d-1) x (2d-1) grid, row-major order.
    boundary_tags : dict
        For each of "north", "south" (X-error chain endings) and "west",
        "east" (Z-error chain endings): the list of (qubit, check) pairs
        forming boundary edges, check index -1 for the open side.
    """

    def __init__(self, distance: int):
        if distance < 1 or distance % 2 == 0:
            raise ValueError(f"distance must be odd and >= 1, got {distance}")
        d = distance
        span = 2 * d - 1

        qubit_coords = []
        x_check_coords = []
        z_check_coords = []
        for r in range(span):
            for c in range(span):
                if (r + c) % 2 == 0:
                    qubit_coords.append((r, c))
                elif r % 2 == 0:
                    x_check_coords.append((r, c))
                else:
                    z_check_coords.append((r, c))

        qubit_index = {rc: i for i, rc in enumerate(qubit_coords)}
        n = len(qubit_coords)
        mx = len(x_check_coords)
        mz = len(z_check_coords)

        h_x = np.zeros((mx, n), dtype=np.uint8)
        h_z = np.zeros((mz, n), dtype=np.uint8)
        for j, (r, c) in enumerate(x_check_coords):
            for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if (rr, cc) in qubit_index:
                    h_x[j, qubit_index[(rr, cc)]] = 1
        for j, (r, c) in enumerate(z_check_coords):
            for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if (rr, cc) in qubit_index:
                    h_z[j, qubit_index[(rr, cc)]] = 1

        lx = np.zeros(n, dtype=np.uint8)
        lz = np.zeros(n, dtype=np.uint8)
        for r in range(0, span, 2):
            lx[qubit_index[(r, 0)]] = 1
        for c in range(0, span, 2):
            lz[qubit_index[(0, c)]] = 1

        self.distance = d
        self.n = n
        self.h_x = h_x
        self.h_z = h_z
        self.h_x.setflags(write=False)
        self.h_z.setflags(write=False)
        self.qubit_coords = qubit_coords
        self.x_check_coords = x_check_coords
        self.z_check_coords = z_check_coords
        self.qubit_index = qubit_index
        self.logical_x = PauliString(lx, np.zeros(n, dtype=np.uint8))
        self.logical_z = PauliString(np.zeros(n, dtype=np.uint8), lz)

        zc_index = {rc: j for j, rc in enumerate(z_check_coords)}
        xc_index = {rc: j for j, rc in enumerate(x_check_coords)}
        self.z_check_index = zc_index
        self.x_check_index = xc_index

        boundary = {"north": [], "south": [], "west": [], "east": []}
        for (r, c), i in qubit_index.items():
            if r % 2 == 0:  # even-even sites touch north/south Z-checks
                if r == 0:
                    boundary["north"].append((i, zc_index.get((r + 1, c), -1)))
                if r == span - 1:
                    boundary["south"].append((i, zc_index.get((r - 1, c), -1)))
                if c == 0:
                    boundary["west"].append((i, xc_index.get((r, c + 1), -1)))
                if c == span - 1:
                    boundary["east"].append((i, xc_index.get((r, c - 1), -1)))
        self.boundary_tags = boundary

        # Canonical corrections: per Z-defect a straight X-chain north, per
        # X-defect a straight Z-chain west. Stored as bit-vectors per check.
        corr_x = np.zeros((mz, n), dtype=np.uint8)
        for j, (r, c) in enumerate(z_check_coords):
            for rr in range(0, r, 2):
                corr_x[j, qubit_index[(rr, c)]] = 1
        corr_z = np.zeros((mx, n), dtype=np.uint8)
        for j, (r, c) in enumerate(x_check_coords):
            for cc in range(0, c, 2):
                corr_z[j, qubit_index[(r, cc)]] = 1
        corr_x.setflags(write=False)
        corr_z.setflags(write=False)
        self._corr_x_chains = corr_x
        self._corr_z_chains = corr_z

    @property
    def num_x_checks(self) -> int:
        return self.h_x.shape[0]

    @property
    def num_z_checks(self) -> int:
        return self.h_z.shape[0]

    def correction_x_bits(self, z_defects: np.ndarray) -> np.ndarray:
        """X-content of the canonical correction for the given Z-defects."""
        if self.num_z_checks == 0:
            return np.zeros(self.n, dtype=np.uint8)
        return (np.asarray(z_defects, dtype=np.uint8) @ self._corr_x_chains) % 2

    def correction_z_bits(self, x_defects: np.ndarray) -> np.ndarray:
        """Z-content of the canonical correction for the given X-defects."""
        if self.num_x_checks == 0:
            return np.zeros(self.n, dtype=np.uint8)
        return (np.asarray(x_defects, dtype=np.uint8) @ self._corr_z_chains) % 2

    def canonical_correction(self, syndrome: Syndrome) -> PauliString:
        """The fixed deterministic correction with the given syndrome."""
        return PauliString(
            self.correction_x_bits(syndrome.z_defects),
            self.correction_z_bits(syndrome.x_defects),
        )

    def to_json(self) -> str:
        """Layout export for debugging and cross-implementation fixtures."""
        payload = {
            "distance": self.distance,
            "n": self.n,
            "qubit_coords": [list(rc) for rc in self.qubit_coords],
            "x_checks": [sorted(np.flatnonzero(row).tolist()) for row in self.h_x],
            "z_checks": [sorted(np.flatnonzero(row).tolist()) for row in self.h_z],
            "logical_x": self.logical_x.to_label(),
            "logical_z": self.logical_z.to_label(),
            "boundaries": {k: [list(p) for p in v] for k, v in self.boundary_tags.items()},
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def build_planar_code(distance: int) -> CodeLayout:
    """Construct the unrotated planar code of odd distance ``distance``."""
    return CodeLayout(distance)


def sample_error(layout: CodeLayout, noise: NoiseModel, rng: np.random.Generator) -> PauliString:
    """One i.i.d. draw of a physical error across the patch."""
    x, z = sample_error_batch(layout, noise, rng, 1)
    return PauliString(x[0], z[0])


def sample_error_batch(
    layout: CodeLayout, noise: NoiseModel, rng: np.random.Generator, shots: int
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized error sampling; returns (x_bits, z_bits) of shape (shots, n)."""
    u = rng.random((shots, layout.n))
    c1 = noise.q_x
    c2 = noise.q_x + noise.q_y
    c3 = noise.q_x + noise.q_y + noise.q_z
    x = (u < c2).astype(np.uint8)
    z = ((u >= c1) & (u < c3)).astype(np.uint8)
    return x, z


def extract_syndrome(layout: CodeLayout, error: PauliString) -> Syndrome:
    """Check outcomes of ``error``: X-checks flag Z components and vice versa."""
    if error.n != layout.n:
        raise ValueError(f"error length {error.n} does not match n={layout.n}")
    return Syndrome(
        x_defects=(layout.h_x @ error.z_bits) % 2,
        z_defects=(layout.h_z @ error.x_bits) % 2,
    )


def syndrome_batch(
    layout: CodeLayout, x_bits: np.ndarray, z_bits: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized syndromes for batched errors of shape (shots, n)."""
    x_defects = (z_bits.astype(np.uint8) @ layout.h_x.T) % 2
    z_defects = (x_bits.astype(np.uint8) @ layout.h_z.T) % 2
    return x_defects, z_defects


def logical_effect(layout: CodeLayout, error: PauliString) -> str:
    """Class in {I, X, Y, Z} of the residual after the canonical correction."""
    if error.n != layout.n:
        raise ValueError(f"error length {error.n} does not match n={layout.n}")
    syndrome = extract_syndrome(layout, error)
    res_x = error.x_bits ^ layout.correction_x_bits(syndrome.z_defects)
    res_z = error.z_bits ^ layout.correction_z_bits(syndrome.x_defects)
    x_part = int(np.dot(res_x, layout.logical_z.z_bits) % 2)
    z_part = int(np.dot(res_z, layout.logical_x.x_bits) % 2)
    return class_from_components(x_part, z_part)


def logical_effect_batch(
    layout: CodeLayout, x_bits: np.ndarray, z_bits: np.ndarray
) -> np.ndarray:
    """Vectorized :func:`logical_effect`; returns class indices into LOGICAL_CLASSES."""
    x_def, z_def = syndrome_batch(layout, x_bits, z_bits)
    res_x = x_bits ^ layout.correction_x_bits(z_def)
    res_z = z_bits ^ layout.correction_z_bits(x_def)
    x_part = (res_x @ layout.logical_z.z_bits) % 2
    z_part = (res_z @ layout.logical_x.x_bits) % 2
    # Class index: I=0, X=1, Y=2, Z=3 per LOGICAL_CLASSES ordering.
    return np.where(x_part == 1, np.where(z_part == 1, 2, 1), np.where(z_part == 1, 3, 0))


def random_stabilizer(layout: CodeLayout, rng: np.random.Generator) -> PauliString:
    """A uniformly random element of the stabilizer group."""
    u = rng.integers(0, 2, size=layout.num_x_checks, dtype=np.uint8)
    v = rng.integers(0, 2, size=layout.num_z_checks, dtype=np.uint8)
    x = (u @ layout.h_x) % 2 if layout.num_x_checks else np.zeros(layout.n, np.uint8)
    z = (v @ layout.h_z) % 2 if layout.num_z_checks else np.zeros(layout.n, np.uint8)
    return PauliString(x, z)
