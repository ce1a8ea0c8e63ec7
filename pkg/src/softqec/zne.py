"""Zero-noise extrapolation over Pauli-amplified logical circuits.

Each gate's error channel can be amplified by a scale factor: identity
mass drops to 1 - s * p_total while every error class is multiplied by
s. Running the circuit at several scales and combining the means with
Richardson weights cancels the leading error orders; the weights are the
Lagrange interpolation basis evaluated at zero noise.

Amplification can be exact (sample straight from the scaled channel) or
realized the way hardware would do it, by sampling an extra insertion
channel of mass (s - 1) * p_P after each gate; the two agree to second
order in the per-gate error mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import PauliChannel
from .pec import (
    LogicalCircuit,
    _flip_counts,
    _sample_class_indices,
    observable_flip_tables,
)


@dataclass(frozen=True)
class ScaleSchedule:
    """Strictly increasing noise scales starting at the native scale 1."""

    scales: tuple[float, ...]

    def __post_init__(self):
        scales = tuple(float(s) for s in self.scales)
        object.__setattr__(self, "scales", scales)
        if not scales:
            raise ValueError("schedule needs at least one scale")
        if abs(scales[0] - 1.0) > 1e-12:
            raise ValueError("the first scale must be 1 (native noise)")
        if any(b <= a for a, b in zip(scales, scales[1:])):
            raise ValueError("scales must be strictly increasing")

    def __len__(self) -> int:
        return len(self.scales)

    def __iter__(self):
        return iter(self.scales)


@dataclass(frozen=True)
class RichardsonWeights:
    """Extrapolation coefficients; their moments against the scales vanish.

    sum_j c_j s_j**k equals 1 for k = 0 and 0 for k = 1..K, which is what
    kills every polynomial noise term up to the schedule's order.
    """

    scales: tuple[float, ...]
    coefficients: tuple[float, ...]
    overhead: float = field(init=False)

    def __post_init__(self):
        if len(self.scales) != len(self.coefficients):
            raise ValueError("one coefficient per scale required")
        s = np.array(self.scales)
        c = np.array(self.coefficients)
        for k in range(len(s)):
            moment = float(np.sum(c * s**k))
            want = 1.0 if k == 0 else 0.0
            if abs(moment - want) > 1e-8:
                raise ValueError(
                    f"moment condition broken at order {k}: {moment} != {want}"
                )
        object.__setattr__(self, "overhead", float(np.abs(c).sum()))


def richardson_coefficients(schedule) -> RichardsonWeights:
    """Lagrange basis at zero: c_j = prod_{k != j} s_k / (s_k - s_j)."""
    scales = tuple(float(s) for s in schedule)
    if len(set(scales)) != len(scales):
        raise ValueError("repeated scales make the extrapolation system singular")
    coeffs = []
    for j, sj in enumerate(scales):
        c = 1.0
        for k, sk in enumerate(scales):
            if k != j:
                c *= sk / (sk - sj)
        coeffs.append(c)
    return RichardsonWeights(scales=scales, coefficients=tuple(coeffs))


def amplify_channel(ch: PauliChannel, s: float) -> PauliChannel:
    """Scale every error class by s, shrinking identity to compensate."""
    if s < 0:
        raise ValueError("scale must be non-negative")
    p_total = float(ch.probs[1:].sum())
    if s * p_total > 1.0 + 1e-12:
        raise ValueError(
            f"scale {s} pushes total error mass {s * p_total} past 1"
        )
    probs = ch.probs * s
    probs[0] = 1.0 - s * p_total
    return PauliChannel(probs)


def pea_insertion_channel(ch: PauliChannel, s: float) -> PauliChannel:
    """Extra channel to sample after each gate to approximate scale s."""
    if s < 1.0:
        raise ValueError("insertion amplification needs scale >= 1")
    p_total = float(ch.probs[1:].sum())
    if (s - 1.0) * p_total > 1.0 + 1e-12:
        raise ValueError(
            f"scale {s} needs insertion mass {(s - 1.0) * p_total} past 1"
        )
    probs = ch.probs * (s - 1.0)
    probs[0] = 1.0 - (s - 1.0) * p_total
    return PauliChannel(probs)


def analytic_scale_expectation(circ: LogicalCircuit, s: float) -> float:
    """Exact observable mean with every gate channel amplified to scale s."""
    tables = observable_flip_tables(circ)
    value = 1.0
    for table, ch in zip(tables, circ.gate_channels):
        amplified = amplify_channel(ch, s)
        p_flip = float(amplified.probs[table == 1].sum())
        value *= 1.0 - 2.0 * p_flip
    return value


@dataclass(frozen=True)
class ZneResult:
    scale_rows: tuple[dict, ...]
    extrapolated: float
    stderr: float
    coefficients: tuple[float, ...]


def run_zne(
    circ: LogicalCircuit,
    schedule: ScaleSchedule,
    shots_per_scale: int,
    rng: np.random.Generator,
    amplification: str = "pea-insert",
) -> ZneResult:
    """Estimate the observable at each scale and extrapolate to zero noise.

    Shots are split equally across scales. The extrapolated standard
    error propagates the per-scale errors through the weights:
    sqrt(sum c_j**2 se_j**2).
    """
    if amplification not in ("pea-insert", "exact"):
        raise ValueError("amplification must be 'pea-insert' or 'exact'")
    if shots_per_scale < 2:
        raise ValueError("need at least two shots per scale for a stderr")
    weights = richardson_coefficients(schedule)
    tables = observable_flip_tables(circ)
    rows = []
    for s in schedule:
        if amplification == "exact":
            idx = [
                _sample_class_indices(
                    amplify_channel(ch, s).probs, shots_per_scale, rng
                )
                for ch in circ.gate_channels
            ]
            flips = _flip_counts(tables, idx)
        else:
            flips = np.zeros(shots_per_scale, dtype=np.uint8)
            for table, ch in zip(tables, circ.gate_channels):
                native = _sample_class_indices(ch.probs, shots_per_scale, rng)
                extra = _sample_class_indices(
                    pea_insertion_channel(ch, s).probs, shots_per_scale, rng
                )
                flips ^= table[native]
                flips ^= table[extra]
        outcomes = 1.0 - 2.0 * flips.astype(np.float64)
        rows.append(
            {
                "scale": float(s),
                "mean": float(outcomes.mean()),
                "stderr": float(outcomes.std(ddof=1) / math.sqrt(shots_per_scale)),
            }
        )
    coeffs = weights.coefficients
    extrapolated = float(sum(c * r["mean"] for c, r in zip(coeffs, rows)))
    stderr = math.sqrt(sum(c**2 * r["stderr"] ** 2 for c, r in zip(coeffs, rows)))
    return ZneResult(
        scale_rows=tuple(rows),
        extrapolated=extrapolated,
        stderr=stderr,
        coefficients=coeffs,
    )
