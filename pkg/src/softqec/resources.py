"""Spacetime-volume accounting for mitigation-assisted architectures.

Three ways of running the same algorithm are compared: plain error
correction at the distance needed to hit the target failure budget;
error correction at a reduced distance with probabilistic error
cancellation absorbing the residual logical noise, characterized by
gate-set tomography; and the same reduced-distance scheme characterized
for free from decoder soft information. Mitigation trades qubits and
rounds for extra shots, so the right common currency is qubit-count
times duration times shot count.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class AlgorithmProfile:
    """Logical footprint of one benchmark algorithm."""

    name: str
    n_logical: int
    gate_count: int
    depth: int
    shots_required: int

    def __post_init__(self):
        for fieldname in ("n_logical", "gate_count", "depth", "shots_required"):
            if getattr(self, fieldname) <= 0:
                raise ValueError(f"{fieldname} must be positive")


@dataclass(frozen=True)
class ArchitectureParams:
    """Scaling constants shared by all three architectures.

    Per-gate logical failure follows c1 * (c2 * p_over_pth)**(d/2); the
    mitigation shot overhead is exp(4 * gate_count * p_logical); GST
    characterization costs a flat extra shot count per run, while the
    soft-information variant characterizes in situ for free.
    """

    c1: float = 0.03
    c2: float = 1.0
    p_over_pth: float = 0.85
    epsilon_target: float = 1e-8
    gst_shot_overhead: float = 1e5
    pec_exponent_guard: float = 50.0

    def __post_init__(self):
        if not 0.0 < self.c2 * self.p_over_pth < 1.0:
            raise ValueError("c2 * p_over_pth must lie in (0, 1)")
        if not 0.0 < self.epsilon_target < 1.0:
            raise ValueError("epsilon_target must lie in (0, 1)")
        if self.gst_shot_overhead < 0:
            raise ValueError("gst_shot_overhead cannot be negative")


@dataclass(frozen=True)
class VolumeReport:
    """Volumes and savings for one profile (A: QEC, B: +GST QEM, C: +soft QEM)."""

    profile: AlgorithmProfile
    v_a: float
    v_b: float
    v_c: float
    d_a: int
    d_b: int
    d_c: int

    @property
    def savings_vs_a(self) -> float:
        return 1.0 - self.v_c / self.v_a

    @property
    def savings_vs_b(self) -> float:
        return 1.0 - self.v_c / self.v_b


def required_distance(
    epsilon: float, gate_count: int, params: ArchitectureParams
) -> int:
    """Distance meeting the failure budget, rounded up to odd.

    Solves c1 * base**(d/2) = (epsilon/2) / gate_count for d, where base
    is c2 * p_over_pth.
    """
    ratio = (epsilon / 2.0) / (gate_count * params.c1)
    if not 0.0 < ratio < 1.0:
        raise ValueError(
            f"failure budget per gate {ratio} outside (0, 1); the scaling "
            "formula does not apply"
        )
    base = params.c2 * params.p_over_pth
    raw = 2.0 * math.log(ratio) / math.log(base)
    d = math.ceil(raw)
    if d % 2 == 0:
        d += 1
    return d


def logical_error_rate_at(d: int, params: ArchitectureParams) -> float:
    """Per-gate logical failure rate at distance d under the scaling law."""
    return params.c1 * (params.c2 * params.p_over_pth) ** (d / 2.0)


def physical_qubits_per_patch(d: int) -> int:
    """Data plus ancilla qubits of one distance-d planar patch."""
    return d * d + (d - 1) * (d - 1) + 2 * d * (d - 1)


def spacetime_volume(
    profile: AlgorithmProfile, d: int, shots: float, shot_overhead_factor: float = 1.0
) -> float:
    """Qubits x rounds x shots x overhead; each depth layer costs d rounds."""
    if d < 1 or shots <= 0 or shot_overhead_factor <= 0:
        raise ValueError("volume factors must be positive")
    qubits = profile.n_logical * physical_qubits_per_patch(d)
    rounds = profile.depth * d
    return float(qubits) * float(rounds) * float(shots) * float(shot_overhead_factor)


def pec_shot_factor(
    gate_count: int, p_logical: float, params: ArchitectureParams
) -> float | None:
    """Mitigation sampling overhead, or None past the overflow guard."""
    arg = 4.0 * gate_count * p_logical
    if arg > params.pec_exponent_guard:
        return None
    return math.exp(arg)


def _best_mitigated_volume(
    profile: AlgorithmProfile,
    params: ArchitectureParams,
    d_max: int,
    extra_shots: float,
) -> tuple[float, int]:
    """Minimum volume over odd reduced distances, with flat extra shots."""
    best = None
    best_d = None
    for d in range(3, d_max + 1, 2):
        factor = pec_shot_factor(
            profile.gate_count, logical_error_rate_at(d, params), params
        )
        if factor is None:
            continue
        shots = profile.shots_required * factor + extra_shots
        vol = spacetime_volume(profile, d, shots)
        if best is None or vol < best:
            best = vol
            best_d = d
    if best is None:
        raise ValueError(
            "no reduced distance stays under the mitigation overhead guard"
        )
    return best, best_d


def compare_architectures(
    profile: AlgorithmProfile, params: ArchitectureParams | None = None
) -> VolumeReport:
    """Volume of each architecture at its own best distance."""
    params = params or ArchitectureParams()
    d_a = required_distance(params.epsilon_target, profile.gate_count, params)
    v_a = spacetime_volume(profile, d_a, profile.shots_required)
    v_b, d_b = _best_mitigated_volume(
        profile, params, d_a, params.gst_shot_overhead
    )
    v_c, d_c = _best_mitigated_volume(profile, params, d_a, 0.0)
    return VolumeReport(
        profile=profile, v_a=v_a, v_b=v_b, v_c=v_c, d_a=d_a, d_b=d_b, d_c=d_c
    )


def load_profiles(path) -> list[AlgorithmProfile]:
    """Read benchmark profiles from CSV (name, n_logical, gates, depth, shots)."""
    profiles = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            profiles.append(
                AlgorithmProfile(
                    name=row["name"],
                    n_logical=int(row["n_logical"]),
                    gate_count=int(row["gate_count"]),
                    depth=int(row["depth"]),
                    shots_required=int(row["shots_required"]),
                )
            )
    if not profiles:
        raise ValueError(f"no profiles found in {path}")
    return profiles


def default_profiles_path() -> Path:
    """Shipped illustrative benchmark table (not calibrated measurements)."""
    return Path(__file__).parent / "data" / "profiles.csv"
