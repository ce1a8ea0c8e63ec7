"""Unbiased logical-channel estimation from per-shot class posteriors.

Averaging the full posterior vector over shots (the soft estimator) has
expectation exactly equal to the channel's class distribution whenever
the posteriors are exact, and never higher variance than averaging hard
indicator outcomes, because each posterior is the conditional expectation
of the indicator given the syndrome. This module provides the running
estimate with stable second-moment tracking, mergeable partial estimates
for parallel workers, and the variance and convergence diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import PauliChannel, class_labels
from .experiments import run_memory_batch
from .matching import PosteriorVector
from .surface import LOGICAL_CLASSES, CodeLayout, NoiseModel


@dataclass(frozen=True)
class ChannelEstimate:
    """Running mean of posterior vectors with second-moment accounting."""

    mean_vec: np.ndarray
    n: int
    m2: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean_vec, dtype=np.float64)
        m2 = np.asarray(self.m2, dtype=np.float64)
        if mean.shape != m2.shape or mean.ndim != 1:
            raise ValueError("mean and m2 must be 1-D and matching")
        object.__setattr__(self, "mean_vec", mean)
        object.__setattr__(self, "m2", m2)

    @classmethod
    def empty(cls, num_qubits: int = 1) -> "ChannelEstimate":
        size = 4**num_qubits
        return cls(np.zeros(size), 0, np.zeros(size))

    @property
    def labels(self) -> tuple[str, ...]:
        k = 1
        while 4**k < len(self.mean_vec):
            k += 1
        return class_labels(k)

    @property
    def mean(self) -> PauliChannel:
        if self.n < 1:
            raise ValueError("no shots accumulated yet")
        return PauliChannel(self.mean_vec / self.mean_vec.sum())

    def variance_of_mean(self) -> np.ndarray:
        """Per-class variance of the running mean (sample variance / n)."""
        if self.n < 2:
            return np.full_like(self.mean_vec, np.nan)
        return self.m2 / (self.n - 1) / self.n

    def stderr(self) -> np.ndarray:
        return np.sqrt(self.variance_of_mean())


def _posterior_array(posterior, size: int) -> np.ndarray:
    if isinstance(posterior, PosteriorVector):
        k = 1
        while 4**k < size:
            k += 1
        vec = posterior.as_array(class_labels(k))
    else:
        vec = np.asarray(posterior, dtype=np.float64)
    if vec.shape != (size,):
        raise ValueError(f"posterior has {vec.shape} entries, estimate holds {size}")
    return vec


def update(est: ChannelEstimate, posterior) -> ChannelEstimate:
    """Fold one posterior vector into the running estimate."""
    vec = _posterior_array(posterior, len(est.mean_vec))
    n = est.n + 1
    delta = vec - est.mean_vec
    mean = est.mean_vec + delta / n
    m2 = est.m2 + delta * (vec - mean)
    return ChannelEstimate(mean, n, m2)


def update_batch(est: ChannelEstimate, posteriors: np.ndarray) -> ChannelEstimate:
    """Fold a (shots x classes) posterior matrix, same result as repeated update."""
    mat = np.asarray(posteriors, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[1] != len(est.mean_vec):
        raise ValueError("posterior matrix shape mismatch")
    b = mat.shape[0]
    if b == 0:
        return est
    bmean = mat.mean(axis=0)
    bm2 = ((mat - bmean) ** 2).sum(axis=0)
    return merge(est, ChannelEstimate(bmean, b, bm2))


def merge(a: ChannelEstimate, b: ChannelEstimate) -> ChannelEstimate:
    """Combine two partial estimates; associative up to rounding."""
    if len(a.mean_vec) != len(b.mean_vec):
        raise ValueError("estimates hold different class counts")
    if a.n == 0:
        return b
    if b.n == 0:
        return a
    n = a.n + b.n
    delta = b.mean_vec - a.mean_vec
    mean = a.mean_vec + delta * (b.n / n)
    m2 = a.m2 + b.m2 + delta**2 * (a.n * b.n / n)
    return ChannelEstimate(mean, n, m2)


def soft_vs_hard_variance(
    layout: CodeLayout,
    noise: NoiseModel,
    shots: int,
    rng: np.random.Generator,
    source: str = "exact",
) -> tuple[dict[str, float], dict[str, float]]:
    """Estimator variances over one shared sampled-syndrome stream.

    Soft: variance of the mean of posterior vectors. Hard: variance of
    the mean of true-class indicators. Both are per-class variances of
    the respective estimator at this shot count.
    """
    if shots < 2:
        raise ValueError("need at least 2 shots")
    batch = run_memory_batch(layout, noise, shots, rng)
    post = batch.posteriors(source)
    indicators = np.zeros_like(post)
    indicators[np.arange(shots), batch.true_class_idx] = 1.0
    var_soft = post.var(axis=0, ddof=1) / shots
    var_hard = indicators.var(axis=0, ddof=1) / shots
    return (
        {lab: float(var_soft[i]) for i, lab in enumerate(LOGICAL_CLASSES)},
        {lab: float(var_hard[i]) for i, lab in enumerate(LOGICAL_CLASSES)},
    )


def convergence_trace(
    layout: CodeLayout,
    noise: NoiseModel,
    shots: int,
    rng: np.random.Generator,
    source: str = "exact",
    checkpoints: int = 60,
) -> list[dict]:
    """Running per-class estimates at logarithmically thinned checkpoints.

    Rows carry (n, class, estimate, stderr); the last checkpoint is the
    full-stream mean, identical to folding every shot through update.
    """
    if shots < 1:
        raise ValueError("need at least 1 shot")
    batch = run_memory_batch(layout, noise, shots, rng)
    post = batch.posteriors(source)
    csum = np.cumsum(post, axis=0)
    csq = np.cumsum(post**2, axis=0)
    marks = np.unique(
        np.clip(
            np.round(np.geomspace(1, shots, num=min(checkpoints, shots))).astype(int),
            1,
            shots,
        )
    )
    rows = []
    for n in marks:
        mean = csum[n - 1] / n
        if n > 1:
            var = (csq[n - 1] - n * mean**2) / (n - 1)
            se = np.sqrt(np.clip(var, 0.0, None) / n)
        else:
            se = np.full(4, np.nan)
        for i, lab in enumerate(LOGICAL_CLASSES):
            rows.append(
                {
                    "n": int(n),
                    "class": lab,
                    "estimate": float(mean[i]),
                    "stderr": float(se[i]),
                }
            )
    return rows


def stabilization_point(
    estimates: np.ndarray,
    min_shots: int = 1000,
    rel_change: float = 0.01,
    floor: float = 1e-9,
) -> int | None:
    """First shot count where every class estimate has settled.

    estimates[i] is the running mean after shot i+1. Settled at n means
    each class moved by under rel_change (relatively, with a small
    absolute floor) between n//2 and n. Returns None if never settled.
    """
    total = estimates.shape[0]
    for n in range(max(min_shots, 2), total + 1):
        now = estimates[n - 1]
        then = estimates[n // 2 - 1]
        denom = np.maximum(np.abs(now), floor)
        if np.all(np.abs(now - then) / denom < rel_change):
            return n
    return None
