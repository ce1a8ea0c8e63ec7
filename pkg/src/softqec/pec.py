"""Probabilistic error cancellation on logical Clifford circuits.

A logical circuit here is a Clifford gate list over logical qubits, a
Pauli observable, and one Pauli error channel per gate. Because noise is
Pauli and gates are Clifford, a shot is fully described by the Pauli
frame accumulated through the circuit, and the measured outcome is +1
exactly when the final frame commutes with the observable (outcomes are
reported relative to the ideal value).

Mitigation inverts each gate's channel over the Pauli class group: the
character transform diagonalizes the channel, the reciprocal eigenvalues
transform back to a signed quasi-probability mixture, and sampling that
mixture with sign bookkeeping yields an unbiased estimator at sampling
cost gamma**2 per gate. Both pipeline variants are provided: live
insertion after a warm-up that builds channel estimates on the fly
(type 1), and purely retroactive reweighting of bare shots (type 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import PauliChannel, character_matrix, class_labels
from .errors import NonInvertibleChannelError
from .estimator import ChannelEstimate, update_batch
from .experiments import run_memory_batch
from .pauli import CliffordGate, PauliString, conjugate, symplectic_product
from .surface import LOGICAL_CLASSES, CodeLayout, NoiseModel, class_product

_CLASS_BIT_PATTERNS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


@dataclass(frozen=True)
class QuasiProbDecomposition:
    """Signed mixture implementing a channel inverse; gamma is its 1-norm."""

    eta: dict[str, float]
    gamma: float

    def __post_init__(self):
        total = sum(self.eta.values())
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"quasi-probabilities sum to {total}, not 1")
        if self.gamma < 1.0 - 1e-12:
            raise ValueError("gamma cannot be below 1")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.eta)

    def probabilities(self) -> np.ndarray:
        """Sampling distribution |eta| / gamma."""
        vals = np.abs(np.array(list(self.eta.values())))
        return vals / vals.sum()

    def signs(self) -> np.ndarray:
        return np.array([1.0 if v >= 0 else -1.0 for v in self.eta.values()])


def invert_pauli_channel(ch: PauliChannel) -> QuasiProbDecomposition:
    """Quasi-probability inverse via the character transform.

    Eigenvalues are chi @ probs; the inverse mixture is the backward
    transform of their reciprocals. Any vanishing eigenvalue means the
    channel has no Pauli inverse.
    """
    k = ch.num_qubits
    chi = character_matrix(k)
    lam = chi @ ch.probs
    if np.any(np.abs(lam) < 1e-12):
        dead = [lab for lab, v in zip(ch.labels, lam) if abs(v) < 1e-12]
        raise NonInvertibleChannelError(
            f"channel transfer eigenvalues vanish at {dead}; no Pauli inverse exists"
        )
    eta_vec = chi @ (1.0 / lam) / len(lam)
    eta = {lab: float(v) for lab, v in zip(ch.labels, eta_vec)}
    return QuasiProbDecomposition(eta=eta, gamma=float(np.abs(eta_vec).sum()))


def sample_insertion(
    q: QuasiProbDecomposition, rng: np.random.Generator
) -> tuple[PauliString, int]:
    """Draw one insertion: class with probability |eta|/gamma, its sign."""
    probs = q.probabilities()
    idx = int(rng.choice(len(probs), p=probs))
    label = list(q.eta)[idx]
    sign = 1 if q.eta[label] >= 0 else -1
    return PauliString.from_label(label), sign


def uniform_depolarizing(k: int, p_total: float) -> PauliChannel:
    """Equal mass p_total/(4**k - 1) on every non-identity class."""
    size = 4**k
    probs = np.full(size, p_total / (size - 1))
    probs[0] = 1.0 - p_total
    return PauliChannel(probs)


@dataclass(frozen=True)
class LogicalCircuit:
    """Clifford gate list with per-gate Pauli noise and a Pauli observable."""

    n_logical: int
    gates: tuple[CliffordGate, ...]
    gate_channels: tuple[PauliChannel, ...]
    observable: PauliString

    def __post_init__(self):
        if self.observable.n != self.n_logical:
            raise ValueError("observable length must equal the logical qubit count")
        if len(self.gates) != len(self.gate_channels):
            raise ValueError("need exactly one channel per gate")
        for g, ch in zip(self.gates, self.gate_channels):
            if any(t >= self.n_logical for t in g.targets):
                raise ValueError(f"gate {g} targets outside the register")
            if ch.num_qubits != len(g.targets):
                raise ValueError(
                    f"{g.kind} gate on {len(g.targets)} qubits needs a "
                    f"{len(g.targets)}-qubit channel"
                )

    @property
    def num_gates(self) -> int:
        return len(self.gates)


def random_logical_circuit(
    n_logical: int,
    num_gates: int,
    rng: np.random.Generator,
    p_gate: float = 1e-3,
) -> LogicalCircuit:
    """Random circuit over {H, S, CNOT} whose observable is ideally +1.

    The observable is a fixed starting Pauli pushed forward through the
    whole gate list, so the noiseless frame simulation always reports +1.
    Every gate carries a uniform depolarizing channel of total weight
    p_gate on its support.
    """
    if n_logical < 1:
        raise ValueError("need at least one logical qubit")
    gates = []
    channels = []
    kinds = ("H", "S", "CNOT") if n_logical >= 2 else ("H", "S")
    for _ in range(num_gates):
        kind = kinds[int(rng.integers(len(kinds)))]
        if kind == "CNOT":
            c, t = rng.choice(n_logical, size=2, replace=False)
            gates.append(CliffordGate("CNOT", (int(c), int(t))))
            channels.append(uniform_depolarizing(2, p_gate))
        else:
            t = int(rng.integers(n_logical))
            gates.append(CliffordGate(kind, (t,)))
            channels.append(uniform_depolarizing(1, p_gate))
    obs = PauliString.single(n_logical, 0, "Z")
    for g in gates:
        obs = conjugate(obs, g)
    return LogicalCircuit(
        n_logical=n_logical,
        gates=tuple(gates),
        gate_channels=tuple(channels),
        observable=obs,
    )


def _embed_class(label: str, targets: tuple[int, ...], n: int) -> PauliString:
    x = np.zeros(n, dtype=np.uint8)
    z = np.zeros(n, dtype=np.uint8)
    for ch, t in zip(label, targets):
        bx, bz = _CLASS_BIT_PATTERNS[ch]
        x[t] = bx
        z[t] = bz
    return PauliString(x, z)


def observable_flip_tables(circ: LogicalCircuit) -> list[np.ndarray]:
    """Per gate: does inserting each Pauli class there flip the outcome.

    Entry [g][c] is 1 when class c, placed right after gate g and pushed
    through the rest of the circuit, anticommutes with the observable.
    Both noise draws and mitigation insertions act at those points, so
    these tables turn outcome simulation into XOR bookkeeping.
    """
    tables: list[np.ndarray] = [None] * circ.num_gates  # type: ignore[list-item]
    obs = circ.observable
    for g in range(circ.num_gates - 1, -1, -1):
        gate = circ.gates[g]
        labels = class_labels(len(gate.targets))
        table = np.zeros(len(labels), dtype=np.uint8)
        for i, lab in enumerate(labels):
            table[i] = symplectic_product(
                _embed_class(lab, gate.targets, circ.n_logical), obs
            )
        tables[g] = table
        obs = conjugate(obs, gate)
    return tables


def _sample_class_indices(
    probs: np.ndarray, shots: int, rng: np.random.Generator
) -> np.ndarray:
    cum = np.cumsum(probs)
    cum[-1] = 1.0
    return np.searchsorted(cum, rng.random(shots), side="right")


def simulate_logical_shot(
    circ: LogicalCircuit,
    insertions: list[PauliString | None] | None,
    rng: np.random.Generator,
) -> int:
    """One shot of explicit Pauli-frame simulation.

    Per gate: the frame is conjugated through the gate, one error is drawn
    from the gate's channel, and any provided insertion is multiplied in
    at the same point. The outcome is +1 iff the final frame commutes
    with the observable.
    """
    n = circ.n_logical
    x = np.zeros(n, dtype=np.uint8)
    z = np.zeros(n, dtype=np.uint8)
    for g, (gate, channel) in enumerate(zip(circ.gates, circ.gate_channels)):
        if gate.kind == "H":
            (q,) = gate.targets
            x[q], z[q] = z[q], x[q]
        elif gate.kind == "S":
            (q,) = gate.targets
            z[q] ^= x[q]
        elif gate.kind == "CNOT":
            c, t = gate.targets
            x[t] ^= x[c]
            z[c] ^= z[t]
        idx = int(_sample_class_indices(channel.probs, 1, rng)[0])
        err = _embed_class(channel.labels[idx], gate.targets, n)
        x ^= err.x_bits
        z ^= err.z_bits
        if insertions is not None and insertions[g] is not None:
            ins = insertions[g]
            if ins.n == len(gate.targets):
                ins = _embed_class(ins.to_label(), gate.targets, n)
            x ^= ins.x_bits
            z ^= ins.z_bits
    anti = (
        int(x @ circ.observable.z_bits) + int(z @ circ.observable.x_bits)
    ) % 2
    return 1 - 2 * anti


def analytic_expectation(circ: LogicalCircuit) -> float:
    """Exact observable mean: product over gates of (1 - 2 p_flip)."""
    tables = observable_flip_tables(circ)
    value = 1.0
    for table, channel in zip(tables, circ.gate_channels):
        p_flip = float(channel.probs[table == 1].sum())
        value *= 1.0 - 2.0 * p_flip
    return value


def _clip_channel(vec: np.ndarray, floor: float) -> PauliChannel:
    clipped = np.clip(np.asarray(vec, dtype=np.float64), floor, None)
    return PauliChannel(clipped / clipped.sum())


@dataclass(frozen=True)
class PecResult:
    mitigated_mean: float
    mitigated_stderr: float
    unmitigated_mean: float
    total_gamma: float
    shots_used: int
    mode: str
    warmup_shots: int = 0


class _GateErrorSource:
    """Per-gate error class draws, either synthetic or from patch decoding."""

    def __init__(
        self,
        circ: LogicalCircuit,
        channel_source: str,
        rng: np.random.Generator,
        patch_distance: int,
        patch_noise: NoiseModel | None,
    ):
        self.circ = circ
        self.channel_source = channel_source
        self.rng = rng
        if channel_source == "soft":
            self.layout = CodeLayout(patch_distance)
            self.noise = patch_noise or NoiseModel.depolarizing(0.01)

    def draw(self, shots: int) -> tuple[list[np.ndarray], list[np.ndarray] | None]:
        """(per-gate error class indices, per-gate posterior matrices or None).

        Synthetic mode samples classes straight from the declared gate
        channels. Soft mode simulates one patch memory step per gate
        target: the hard-corrected residual becomes the actual error, and
        the post-correction posterior feeds the channel estimate.
        """
        if self.channel_source == "known":
            idx = [
                _sample_class_indices(ch.probs, shots, self.rng)
                for ch in self.circ.gate_channels
            ]
            return idx, None
        indices = []
        posteriors = []
        prod = _class_product_table()
        for gate in self.circ.gates:
            k = len(gate.targets)
            gate_idx = np.zeros(shots, dtype=np.int64)
            gate_post = np.ones((shots, 1))
            for _ in range(k):
                batch = run_memory_batch(self.layout, self.noise, shots, self.rng)
                post = batch.posteriors("matching")
                decoded = post.argmax(axis=1)
                residual = batch.post_correction_class_idx("matching")
                # Post-correction posterior: winning class mass moves to identity.
                relabeled = np.empty_like(post)
                for c in range(4):
                    sel = decoded == c
                    relabeled[sel] = post[np.ix_(sel.nonzero()[0], prod[c])]
                gate_idx = gate_idx * 4 + residual
                gate_post = np.einsum("si,sj->sij", gate_post, relabeled).reshape(
                    shots, -1
                )
            indices.append(gate_idx)
            posteriors.append(gate_post)
        return indices, posteriors


def _class_product_table() -> np.ndarray:
    return np.array(
        [
            [LOGICAL_CLASSES.index(class_product(a, b)) for b in LOGICAL_CLASSES]
            for a in LOGICAL_CLASSES
        ]
    )


def _flip_counts(
    tables: list[np.ndarray], class_indices: list[np.ndarray]
) -> np.ndarray:
    flips = np.zeros(len(class_indices[0]), dtype=np.uint8)
    for table, idx in zip(tables, class_indices):
        flips ^= table[idx]
    return flips


def _decomposition_arrays(
    decomp: QuasiProbDecomposition,
) -> tuple[np.ndarray, np.ndarray]:
    return decomp.probabilities(), decomp.signs()


def run_pec(
    circ: LogicalCircuit,
    shots: int,
    mode: str,
    rng: np.random.Generator,
    channel_source: str = "known",
    patch_distance: int = 3,
    patch_noise: NoiseModel | None = None,
    batch_size: int = 500,
    warmup_min: int = 1000,
    warmup_cap: int = 10000,
    clip_floor: float = 1e-12,
) -> PecResult:
    """Run one PEC experiment and return the mitigated estimate.

    type1 runs a bare warm-up while channel estimates accumulate, then
    switches to live sampled insertions with continuing updates; type2
    executes every shot bare and applies insertions and signs
    retroactively to the recorded outcomes. With channel_source "known"
    the declared gate channels are inverted directly and (for type2) no
    warm-up is needed; "soft" drives everything from simulated patch
    decoding, including the estimates that get inverted.

    Warm-up ends at the first of: estimates settling (after at least
    warmup_min shots), warmup_cap, or half the shot budget, so live
    insertion sampling always keeps a share of the shots.
    """
    if mode not in ("type1", "type2"):
        raise ValueError("mode must be type1 or type2")
    if channel_source not in ("known", "soft"):
        raise ValueError("channel_source must be known or soft")
    if shots < 1:
        raise ValueError("need at least one shot")
    tables = observable_flip_tables(circ)
    source = _GateErrorSource(circ, channel_source, rng, patch_distance, patch_noise)

    if mode == "type2":
        err_idx, posteriors = source.draw(shots)
        bare = 1.0 - 2.0 * _flip_counts(tables, err_idx).astype(np.float64)
        if channel_source == "known":
            channels = list(circ.gate_channels)
        else:
            channels = [
                _clip_channel(post.mean(axis=0), clip_floor) for post in posteriors
            ]
        decomps = [invert_pauli_channel(ch) for ch in channels]
        total_gamma = float(np.prod([d.gamma for d in decomps]))
        sign = np.ones(shots)
        flips = np.zeros(shots, dtype=np.uint8)
        for table, decomp in zip(tables, decomps):
            probs, signs = _decomposition_arrays(decomp)
            ins = _sample_class_indices(probs, shots, rng)
            sign *= signs[ins]
            flips ^= table[ins]
        samples = total_gamma * sign * bare * (1.0 - 2.0 * flips.astype(np.float64))
        return PecResult(
            mitigated_mean=float(samples.mean()),
            mitigated_stderr=float(samples.std(ddof=1) / math.sqrt(shots))
            if shots > 1
            else float("nan"),
            unmitigated_mean=float(bare.mean()),
            total_gamma=total_gamma,
            shots_used=shots,
            mode=mode,
        )

    # type1: warm-up, then live insertions from the running estimates.
    if shots <= warmup_min:
        raise ValueError(f"type1 needs more than warmup_min={warmup_min} shots")
    warmup_limit = min(warmup_cap, max(warmup_min, shots // 2))
    estimates = [
        ChannelEstimate.empty(len(g.targets)) for g in circ.gates
    ]
    history: list[tuple[int, list[np.ndarray]]] = []
    warm_outcomes: list[np.ndarray] = []
    mitigated: list[np.ndarray] = []
    done_warmup = channel_source == "known"
    warmup_used = 0
    executed = 0
    total_gamma = float("nan")
    while executed < shots:
        b = min(batch_size, shots - executed)
        err_idx, posteriors = source.draw(b)
        if not done_warmup:
            bare = 1.0 - 2.0 * _flip_counts(tables, err_idx).astype(np.float64)
            warm_outcomes.append(bare)
            if posteriors is not None:
                estimates = [
                    update_batch(est, post)
                    for est, post in zip(estimates, posteriors)
                ]
            executed += b
            warmup_used += b
            history.append((warmup_used, [e.mean_vec.copy() for e in estimates]))
            if warmup_used >= warmup_min and _estimates_stable(history):
                done_warmup = True
            if warmup_used >= warmup_limit:
                done_warmup = True
            continue
        if channel_source == "known":
            channels = list(circ.gate_channels)
        else:
            channels = [
                _clip_channel(e.mean_vec, clip_floor) for e in estimates
            ]
        decomps = [invert_pauli_channel(ch) for ch in channels]
        batch_gamma = float(np.prod([d.gamma for d in decomps]))
        total_gamma = batch_gamma
        bare = 1.0 - 2.0 * _flip_counts(tables, err_idx).astype(np.float64)
        sign = np.ones(b)
        flips = np.zeros(b, dtype=np.uint8)
        for table, decomp in zip(tables, decomps):
            probs, signs = _decomposition_arrays(decomp)
            ins = _sample_class_indices(probs, b, rng)
            sign *= signs[ins]
            flips ^= table[ins]
        mitigated.append(
            batch_gamma * sign * bare * (1.0 - 2.0 * flips.astype(np.float64))
        )
        if posteriors is not None:
            estimates = [
                update_batch(est, post) for est, post in zip(estimates, posteriors)
            ]
        executed += b
    if not mitigated:
        raise ValueError(
            f"warm-up consumed every shot (warmup={warmup_used}); increase shots"
        )
    samples = np.concatenate(mitigated)
    warm = np.concatenate(warm_outcomes) if warm_outcomes else np.array([])
    return PecResult(
        mitigated_mean=float(samples.mean()),
        mitigated_stderr=float(samples.std(ddof=1) / math.sqrt(len(samples)))
        if len(samples) > 1
        else float("nan"),
        unmitigated_mean=float(warm.mean()) if warm.size else float("nan"),
        total_gamma=total_gamma,
        shots_used=shots,
        mode=mode,
        warmup_shots=warmup_used,
    )


def _estimates_stable(
    history: list[tuple[int, list[np.ndarray]]],
    rel_change: float = 0.01,
    mass_floor: float = 1e-4,
) -> bool:
    """Settled when every sizable class moved < 1% since half the shots ago."""
    n_now, now = history[-1]
    target = n_now // 2
    then = None
    for n, vecs in history:
        if n >= target:
            then = vecs
            break
    if then is None:
        return False
    for a, b in zip(then, now):
        mask = np.abs(b) >= mass_floor
        if not mask.any():
            continue
        rel = np.abs(b[mask] - a[mask]) / np.abs(b[mask])
        if rel.max() >= rel_change:
            return False
    return True


def exhaustive_pec_expectation(channel: PauliChannel, observable: PauliString) -> float:
    """Closed-sum PEC mean for a single noisy identity gate.

    Sums gamma * sgn(eta_c) * outcome over the full joint distribution of
    (error class, insertion class); with exact channel knowledge this is
    identically the ideal value 1.
    """
    decomp = invert_pauli_channel(channel)
    labels = channel.labels
    k = channel.num_qubits
    targets = tuple(range(k))
    total = 0.0
    for e_lab, q_e in zip(labels, channel.probs):
        e_flip = symplectic_product(
            _embed_class(e_lab, targets, k), observable
        )
        for c_lab in labels:
            eta = decomp.eta[c_lab]
            c_flip = symplectic_product(
                _embed_class(c_lab, targets, k), observable
            )
            prob = q_e * abs(eta) / decomp.gamma
            value = decomp.gamma * math.copysign(1.0, eta) * (
                1.0 - 2.0 * ((e_flip + c_flip) % 2)
            )
            total += prob * value
    return total


def shot_allocation_tradeoff(
    total_shots: int,
    lambda_grid,
    num_gates: int,
    p_avg: float,
    gamma_total: float,
    batch: str = "first",
) -> list[dict]:
    """Documented bias/variance model for splitting shots.

    A fraction lam of the budget characterizes channels, the rest runs
    mitigation. Residual bias grows with per-gate estimate error
    (num_gates * stderr of a p_avg estimate from lam*N shots); variance is
    gamma_total**2 over the mitigation shots. In "later" batch mode the
    characterization pool is the full accumulated budget (a bias floor)
    and every new shot mitigates.
    """
    if batch not in ("first", "later"):
        raise ValueError("batch must be 'first' or 'later'")
    grid = [float(v) for v in lambda_grid]
    if not grid or any(not 0.0 < v < 1.0 for v in grid):
        raise ValueError("lambda grid must be non-empty with values in (0, 1)")
    rows = []
    for lam in grid:
        if batch == "first":
            char_shots = lam * total_shots
            mit_shots = (1.0 - lam) * total_shots
        else:
            char_shots = float(total_shots)
            mit_shots = float(total_shots)
        bias = num_gates * math.sqrt(p_avg * (1.0 - p_avg) / char_shots)
        variance = gamma_total**2 / mit_shots
        rows.append(
            {
                "lambda": lam,
                "bias": bias,
                "variance": variance,
                "mse": bias**2 + variance,
            }
        )
    return rows


def pec_postselect_overhead(num_gates: int, p_l: float, r: float, d: float) -> float:
    """Sampling-overhead factor of running PEC on post-selected shots.

    r is the error-rate improvement factor of selection, d its discard
    rate; values below 1 mean selection pays for itself despite discards.
    """
    if r < 1.0:
        raise ValueError("improvement factor must be >= 1")
    if not 0.0 <= d < 1.0:
        raise ValueError("discard rate must lie in [0, 1)")
    exponent = -4.0 * num_gates * p_l * (1.0 - 1.0 / r) - num_gates * math.log1p(-d)
    return math.exp(exponent)
