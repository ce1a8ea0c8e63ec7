"""Soft-information post-selection and the runtime abort policy.

Every decoded gate leaves a confidence record: the posterior mass on "some
residual logical error" at that gate. Post-selection discards shots whose
records breach a threshold (largest single-gate value, or the sum across
gates); aborting applies the accumulated-sum rule mid-run to stop paying
for shots already known to be bad. All threshold comparisons are strict
(discard or abort only when the statistic exceeds tau).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matching import PosteriorVector

_POLICY_MODES = ("max-per-gate", "accumulated-sum")


@dataclass(frozen=True)
class ShotRecord:
    """One executed shot: per-gate post-correction posteriors plus outcome.

    outcome is the measured observable value (+1/-1). true_failure, when
    known (simulation), marks whether the shot ended with a residual
    logical error.
    """

    per_gate_posteriors: tuple[PosteriorVector, ...]
    outcome: int
    aborted_at: int | None = None
    true_failure: bool | None = None

    def __post_init__(self):
        if self.outcome not in (-1, 1):
            raise ValueError("outcome must be +1 or -1")
        if self.aborted_at is not None and not (
            0 <= self.aborted_at <= len(self.per_gate_posteriors)
        ):
            raise ValueError("aborted_at out of range")

    def error_confidences(self) -> np.ndarray:
        """Per-gate 1 - p(identity)."""
        return np.array([1.0 - pv.p["I"] for pv in self.per_gate_posteriors])

    def accumulated_error(self) -> float:
        return float(self.error_confidences().sum())


@dataclass(frozen=True)
class SelectionPolicy:
    mode: str
    tau: float

    def __post_init__(self):
        if self.mode not in _POLICY_MODES:
            raise ValueError(f"mode must be one of {_POLICY_MODES}")
        if self.tau < 0:
            raise ValueError("tau must be >= 0")


def keep_mask(err_matrix: np.ndarray, policy: SelectionPolicy) -> np.ndarray:
    """Boolean keep mask for an (shots x gates) error-confidence matrix."""
    mat = np.asarray(err_matrix, dtype=np.float64)
    if mat.ndim == 1:
        mat = mat[:, None]
    stat = mat.max(axis=1) if policy.mode == "max-per-gate" else mat.sum(axis=1)
    return ~(stat > policy.tau)


def postselect(
    shots: list[ShotRecord], policy: SelectionPolicy
) -> tuple[list[int], float, float]:
    """Filter shots; returns (kept indices, discard rate, kept mean accumulated error)."""
    if not shots:
        raise ValueError("no shots to filter")
    mat = np.array([s.error_confidences() for s in shots])
    mask = keep_mask(mat, policy)
    kept = [i for i in range(len(shots)) if mask[i]]
    discard_rate = 1.0 - len(kept) / len(shots)
    if kept:
        kept_mean = float(mat[mask].sum(axis=1).mean())
    else:
        kept_mean = float("nan")
    return kept, discard_rate, kept_mean


def improvement_curve(
    shots: list[ShotRecord],
    thresholds,
    mode: str = "accumulated-sum",
) -> list[dict]:
    """Error-rate improvement versus discard rate across thresholds.

    Requires simulation shots carrying true_failure. Each row holds the
    threshold, the discard rate, the ratio of unfiltered to kept error
    rate, and the kept-rate standard error propagated into the ratio.
    """
    if not shots:
        raise ValueError("no shots to filter")
    if any(s.true_failure is None for s in shots):
        raise ValueError("improvement_curve needs shots with known true_failure")
    mat = np.array([s.error_confidences() for s in shots])
    failed = np.array([bool(s.true_failure) for s in shots])
    return improvement_curve_arrays(mat, failed, thresholds, mode)


def improvement_curve_arrays(
    err_matrix: np.ndarray,
    failed: np.ndarray,
    thresholds,
    mode: str = "accumulated-sum",
) -> list[dict]:
    """Columnar improvement_curve over precomputed confidences and outcomes."""
    mat = np.asarray(err_matrix, dtype=np.float64)
    failed = np.asarray(failed, dtype=bool)
    total = len(failed)
    base_rate = float(failed.mean())
    rows = []
    for tau in thresholds:
        mask = keep_mask(mat, SelectionPolicy(mode, float(tau)))
        n_kept = int(mask.sum())
        discard_rate = 1.0 - n_kept / total
        if n_kept == 0:
            rows.append(
                {
                    "threshold": float(tau),
                    "discard_rate": discard_rate,
                    "ratio": float("nan"),
                    "stderr": float("nan"),
                }
            )
            continue
        kept_rate = float(failed[mask].mean())
        if kept_rate > 0.0:
            ratio = base_rate / kept_rate
            se_kept = math.sqrt(kept_rate * (1.0 - kept_rate) / n_kept)
            stderr = base_rate * se_kept / kept_rate**2
        else:
            ratio = math.inf
            stderr = float("nan")
        rows.append(
            {
                "threshold": float(tau),
                "discard_rate": discard_rate,
                "ratio": ratio,
                "stderr": stderr,
            }
        )
    return rows


def abort_decision(accumulated: float, tau_abort: float) -> bool:
    """Stop the run iff the accumulated error confidence exceeds the threshold."""
    if accumulated < 0:
        raise ValueError("accumulated error must be >= 0")
    return accumulated > tau_abort


def expected_saved_steps(n_steps: int, p: float) -> tuple[float, float]:
    """Mean steps saved by aborting at the first per-step trigger.

    The trigger fires independently with probability p per step; aborting
    at step K saves n_steps - K. Returns (E[saved | aborted], Pr(abort)),
    in a cancellation-free closed form. With one step nothing can be
    saved, and for p << 1/n the conditional mean approaches n/2, while
    for p >> 1/n it approaches n - 1/p.
    """
    if n_steps < 1:
        raise ValueError("need at least one step")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    x = n_steps * math.log1p(-p)
    q_pow = math.exp(x)  # (1-p)**n
    p_abort = -math.expm1(x)  # 1 - (1-p)**n
    numer = p_abort - n_steps * q_pow * p
    saved = n_steps - numer / (p * p_abort)
    return saved, p_abort


def simulate_abort_savings(
    n_steps: int, p: float, shots: int, rng: np.random.Generator
) -> tuple[float, float, float]:
    """Monte Carlo check of expected_saved_steps.

    Draws first-trigger steps geometrically; returns (mean saved among
    aborted runs, standard error, empirical abort fraction).
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    first = rng.geometric(p, size=shots)
    aborted = first <= n_steps
    count = int(aborted.sum())
    if count == 0:
        return float("nan"), float("nan"), 0.0
    saved = (n_steps - first[aborted]).astype(np.float64)
    se = float(saved.std(ddof=1) / math.sqrt(count)) if count > 1 else float("nan")
    return float(saved.mean()), se, count / shots
