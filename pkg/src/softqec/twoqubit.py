"""Soft information for two-qubit logical gates.

Two constructions are covered. A transversal CNOT between equal-distance
patches copies X errors control-to-target and Z errors target-to-control,
which correlates the two patches' syndromes; sequential transfer decoding
peels the problem into four single-patch sector decodes by subtracting
the propagated part of the syndrome once the uncorrelated sectors are
decoded. A lattice-surgery CNOT instead accumulates one decoding error
channel per protocol step plus a gate-induced channel from wrongly
applied measurement-conditioned corrections; both parts are Pauli, so
the total channel is their convolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import PauliChannel, class_labels
from .matching import (
    DecodingGraph,
    PosteriorVector,
    _sector_candidates,
    mwpm_posteriors,
)
from .pauli import PauliString
from .surface import (
    LOGICAL_CLASSES,
    CodeLayout,
    NoiseModel,
    Syndrome,
    class_from_components,
    class_product,
    logical_effect,
    sample_error,
)

# Which patch each lattice-surgery step's decoding errors land on. The
# three measurement steps touch (control+ancilla, ancilla+target,
# ancilla); errors surviving into the data patches are booked on the
# named patch, and the two idle-period decodes cover the patch that sits
# idle during the far measurement.
LS_STEP_SUPPORT = {
    "step1": "control",
    "step2": "target",
    "step3": "target",
    "idle1": "control",
    "idle2": "target",
}


@dataclass(frozen=True)
class TwoPatchError:
    """Physical error on a control/target patch pair, split by Pauli part."""

    control_x: np.ndarray
    control_z: np.ndarray
    target_x: np.ndarray
    target_z: np.ndarray

    def __post_init__(self):
        arrays = {}
        length = None
        for name in ("control_x", "control_z", "target_x", "target_z"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.uint8) % 2
            arr.flags.writeable = False
            arrays[name] = arr
            if length is None:
                length = arr.shape[0]
            elif arr.shape[0] != length:
                raise ValueError("all four bit-vectors must have equal length")
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return int(self.control_x.shape[0])

    @classmethod
    def sample(
        cls, layout: CodeLayout, noise: NoiseModel, rng: np.random.Generator
    ) -> "TwoPatchError":
        e1 = sample_error(layout, noise, rng)
        e2 = sample_error(layout, noise, rng)
        return cls(
            control_x=e1.x_bits,
            control_z=e1.z_bits,
            target_x=e2.x_bits,
            target_z=e2.z_bits,
        )


def propagate_tcnot(e: TwoPatchError) -> TwoPatchError:
    """Push a pre-gate error through the transversal CNOT.

    X on the control copies onto the target; Z on the target copies onto
    the control; the other two parts stay put. Applying this twice is the
    identity.
    """
    return TwoPatchError(
        control_x=e.control_x,
        control_z=e.control_z ^ e.target_z,
        target_x=e.target_x ^ e.control_x,
        target_z=e.target_z,
    )


def _bits_from_solution(n: int, fault_qubits) -> np.ndarray:
    bits = np.zeros(n, dtype=np.uint8)
    for q in fault_qubits:
        bits[q] ^= 1
    return bits


def _sector_decode(
    graph: DecodingGraph,
    layout: CodeLayout,
    defects: np.ndarray,
    content: str,
) -> tuple[np.ndarray, np.ndarray]:
    """Decode one defect vector; return (hard fault bits, 2-class posterior).

    ``content`` names which error part the graph's faults represent:
    "x" faults are classified against the logical Z support, "z" faults
    against the logical X support. The posterior entry [1] is the mass on
    the logically nontrivial coset.
    """
    if content == "x":
        syn = Syndrome(
            x_defects=np.zeros(layout.num_x_checks, dtype=np.uint8),
            z_defects=defects,
        )
        overlap = layout.logical_z.z_bits
    else:
        syn = Syndrome(
            x_defects=defects,
            z_defects=np.zeros(layout.num_z_checks, dtype=np.uint8),
        )
        overlap = layout.logical_x.x_bits
    candidates = _sector_candidates(graph, syn)
    log_w: dict[int, float] = {}
    hard = None
    for flip in (False, True):
        sol = candidates[flip]
        if sol is None:
            continue
        bits = _bits_from_solution(layout.n, sol.fault_qubits)
        bit = int(bits @ overlap) % 2
        if bit in log_w:
            raise RuntimeError("both sector candidates landed in one coset")
        log_w[bit] = sol.logp
        if not flip:
            hard = bits
    if hard is None or not log_w:
        raise RuntimeError("sector decode produced no feasible candidate")
    arr = np.full(2, -np.inf)
    for bit, lw in log_w.items():
        arr[bit] = lw
    arr -= arr.max()
    probs = np.exp(arr)
    return hard, probs / probs.sum()


_CLASS_IDX = {(0, 0): 0, (1, 0): 1, (1, 1): 2, (0, 1): 3}


@dataclass(frozen=True)
class TcnotDecodeResult:
    """Joint soft output and ground-truth outcome of one decoded shot."""

    joint_posterior: np.ndarray
    residual_class: str
    residual_identity_ok: bool
    sector_nontrivial: dict[str, float] = field(default_factory=dict)

    @property
    def labels(self) -> tuple[str, ...]:
        return class_labels(2)

    @property
    def decoded_class(self) -> str:
        return self.labels[int(np.argmax(self.joint_posterior))]


def sequential_decode_tcnot(
    layout: CodeLayout,
    noise: NoiseModel,
    error: TwoPatchError,
    errors_before_gate: bool = True,
    graphs: tuple[DecodingGraph, DecodingGraph] | None = None,
) -> TcnotDecodeResult:
    """Decode one transversal-CNOT shot with syndrome transfer.

    For pre-gate errors: the control X part and target Z part keep clean
    syndromes and are decoded first; their hard estimates are subtracted
    from the two contaminated syndromes, whose decodes supply the
    remaining sectors. The 16-class posterior is the product of the four
    sector posteriors pushed through the gate's action on logical
    classes. Post-gate errors need no transfer and reduce to independent
    per-patch decoding.
    """
    if error.n != layout.n:
        raise ValueError("error vectors do not match the patch size")
    if graphs is None:
        graphs = (
            DecodingGraph(layout, noise, "Z-defect"),
            DecodingGraph(layout, noise, "X-defect"),
        )
    graph_z, graph_x = graphs
    h_x = layout.h_x
    h_z = layout.h_z

    if not errors_before_gate:
        syn_c = Syndrome(
            x_defects=h_x @ error.control_z % 2, z_defects=h_z @ error.control_x % 2
        )
        syn_t = Syndrome(
            x_defects=h_x @ error.target_z % 2, z_defects=h_z @ error.target_x % 2
        )
        post_c = mwpm_posteriors(layout, noise, syn_c, graphs)
        post_t = mwpm_posteriors(layout, noise, syn_t, graphs)
        joint = np.outer(
            post_c.as_array(LOGICAL_CLASSES), post_t.as_array(LOGICAL_CLASSES)
        ).reshape(-1)
        true_c = logical_effect(layout, PauliString(error.control_x, error.control_z))
        true_t = logical_effect(layout, PauliString(error.target_x, error.target_z))
        residual = class_product(true_c, post_c.best_class) + class_product(
            true_t, post_t.best_class
        )
        return TcnotDecodeResult(
            joint_posterior=joint,
            residual_class=residual,
            residual_identity_ok=True,
        )

    after = propagate_tcnot(error)
    z_def_c = h_z @ after.control_x % 2
    x_def_c = h_x @ after.control_z % 2
    z_def_t = h_z @ after.target_x % 2
    x_def_t = h_x @ after.target_z % 2

    # Clean sectors first: control X content, target Z content.
    est_cx, p_cx = _sector_decode(graph_z, layout, z_def_c, "x")
    est_tz, p_tz = _sector_decode(graph_x, layout, x_def_t, "z")

    # Transfer: subtract the propagated estimates from the mixed syndromes.
    x_def_c_res = (x_def_c + h_x @ est_tz) % 2
    z_def_t_res = (z_def_t + h_z @ est_cx) % 2
    identity_ok = bool(
        np.array_equal(
            x_def_c_res, h_x @ (error.control_z ^ error.target_z ^ est_tz) % 2
        )
        and np.array_equal(
            z_def_t_res, h_z @ (error.target_x ^ error.control_x ^ est_cx) % 2
        )
    )

    est_cz, p_cz = _sector_decode(graph_x, layout, x_def_c_res, "z")
    est_tx, p_tx = _sector_decode(graph_z, layout, z_def_t_res, "x")

    # Product of sector posteriors over pre-gate class bits, pushed
    # through the CNOT's class action.
    joint = np.zeros(16)
    for cb in (0, 1):
        for ca in (0, 1):
            for tb in (0, 1):
                for ta in (0, 1):
                    prob = p_cx[cb] * p_cz[ca] * p_tx[tb] * p_tz[ta]
                    ctrl = _CLASS_IDX[(cb, ca ^ ta)]
                    tgt = _CLASS_IDX[(cb ^ tb, ta)]
                    joint[ctrl * 4 + tgt] += prob

    est_after = propagate_tcnot(
        TwoPatchError(
            control_x=est_cx, control_z=est_cz, target_x=est_tx, target_z=est_tz
        )
    )
    res_c = PauliString(
        after.control_x ^ est_after.control_x, after.control_z ^ est_after.control_z
    )
    res_t = PauliString(
        after.target_x ^ est_after.target_x, after.target_z ^ est_after.target_z
    )
    residual = logical_effect(layout, res_c) + logical_effect(layout, res_t)
    return TcnotDecodeResult(
        joint_posterior=joint,
        residual_class=residual,
        residual_identity_ok=identity_ok,
        sector_nontrivial={
            "control_x": float(p_cx[1]),
            "control_z": float(p_cz[1]),
            "target_x": float(p_tx[1]),
            "target_z": float(p_tz[1]),
        },
    )


def tcnot_experiment(
    layout: CodeLayout,
    noise: NoiseModel,
    shots: int,
    rng: np.random.Generator,
    errors_before_gate: bool = True,
) -> dict:
    """Monte Carlo over sampled shots: failure rate and mean soft output.

    Results for repeated syndrome 4-tuples are cached, which keeps small
    distances fast at low error rates.
    """
    graphs = (
        DecodingGraph(layout, noise, "Z-defect"),
        DecodingGraph(layout, noise, "X-defect"),
    )
    cache: dict[bytes, TcnotDecodeResult] = {}
    mean_post = np.zeros(16)
    failures = 0
    identity_failures = 0
    for _ in range(shots):
        err = TwoPatchError.sample(layout, noise, rng)
        key = (
            err.control_x.tobytes()
            + err.control_z.tobytes()
            + err.target_x.tobytes()
            + err.target_z.tobytes()
        )
        hit = cache.get(key)
        if hit is None:
            hit = sequential_decode_tcnot(
                layout, noise, err, errors_before_gate, graphs
            )
            cache[key] = hit
        mean_post += hit.joint_posterior
        if hit.residual_class != "II":
            failures += 1
        if not hit.residual_identity_ok:
            identity_failures += 1
    return {
        "shots": shots,
        "failure_rate": failures / shots,
        "mean_joint_posterior": mean_post / shots,
        "residual_identity_failures": identity_failures,
    }


@dataclass(frozen=True)
class LatticeSurgerySoftInputs:
    """Per-step decoding posteriors feeding the surgery channel model."""

    step1: PosteriorVector
    step2: PosteriorVector
    step3: PosteriorVector
    idle1: PosteriorVector
    idle2: PosteriorVector

    @classmethod
    def from_error_probs(cls, table: dict[str, dict[str, float]]):
        """Build from {step: {"X": .., "Y": .., "Z": ..}} error masses."""
        vecs = {}
        for step in ("step1", "step2", "step3", "idle1", "idle2"):
            masses = table.get(step, {})
            x = float(masses.get("X", 0.0))
            y = float(masses.get("Y", 0.0))
            z = float(masses.get("Z", 0.0))
            vecs[step] = PosteriorVector(
                {"I": 1.0 - x - y - z, "X": x, "Y": y, "Z": z}
            )
        return cls(**vecs)


def measurement_error_probs(
    inputs: LatticeSurgerySoftInputs,
) -> tuple[float, float, float]:
    """Flip probability of each logical measurement outcome.

    A ZZ (XX, Z) measurement outcome flips under logical errors that
    anticommute with it: X or Y for the first step, Z or Y for the other
    two.
    """
    p_m1 = inputs.step1.p["X"] + inputs.step1.p["Y"]
    p_m2 = inputs.step2.p["Z"] + inputs.step2.p["Y"]
    p_m3 = inputs.step3.p["Z"] + inputs.step3.p["Y"]
    return (p_m1, p_m2, p_m3)


def gate_induced_channel(p_m1: float, p_m2: float, p_m3: float) -> PauliChannel:
    """Two-qubit channel from wrongly conditioned Pauli corrections.

    The Z correction on the control follows the second outcome, so it is
    wrong exactly when that outcome flipped; the X correction on the
    target follows the parity of the first and third, so it is wrong when
    exactly one of them flipped. Support is {II, ZI, IX, ZX}.
    """
    for name, p in (("p_m1", p_m1), ("p_m2", p_m2), ("p_m3", p_m3)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name}={p} outside [0, 1]")
    p_zi = p_m2 * (1 - p_m1) * (1 - p_m3) + (1 - p_m2) * p_m1 * p_m3
    p_ix = (1 - p_m2) * (1 - p_m1) * p_m3 + (1 - p_m2) * p_m1 * (1 - p_m3)
    p_zx = p_m2 * (1 - p_m1) * p_m3 + p_m2 * p_m1 * (1 - p_m3)
    probs = np.zeros(16)
    labels = class_labels(2)
    probs[labels.index("ZI")] = p_zi
    probs[labels.index("IX")] = p_ix
    probs[labels.index("ZX")] = p_zx
    probs[0] = 1.0 - p_zi - p_ix - p_zx
    return PauliChannel(probs)


def _single_qubit_channel(vec: PosteriorVector) -> PauliChannel:
    return PauliChannel(vec.as_array(LOGICAL_CLASSES))


def decoding_channel(inputs: LatticeSurgerySoftInputs) -> PauliChannel:
    """Convolve the five per-step channels onto (control, target)."""
    control = PauliChannel.identity(1)
    target = PauliChannel.identity(1)
    for step, patch in LS_STEP_SUPPORT.items():
        ch = _single_qubit_channel(getattr(inputs, step))
        if patch == "control":
            control = control.compose(ch)
        else:
            target = target.compose(ch)
    return control.tensor(target)


def compose_ls_channel(inputs: LatticeSurgerySoftInputs) -> PauliChannel:
    """Full lattice-surgery CNOT channel: decoding then gate-induced part."""
    gate = gate_induced_channel(*measurement_error_probs(inputs))
    return decoding_channel(inputs).compose(gate)


def ls_channel_report(inputs: LatticeSurgerySoftInputs) -> dict:
    """JSON-ready breakdown of the surgery channel and its inputs."""
    p_m = measurement_error_probs(inputs)
    gate = gate_induced_channel(*p_m)
    dec = decoding_channel(inputs)
    total = dec.compose(gate)
    return {
        "measurement_error_probs": list(p_m),
        "step_support": dict(LS_STEP_SUPPORT),
        "gate_induced": gate.to_dict(),
        "decoding": dec.to_dict(),
        "total": total.to_dict(),
    }
