"""Vectorized memory-experiment runs shared by the estimator and QEM layers.

A memory run samples many i.i.d. physical errors on one patch, extracts
syndromes, and decodes them. Everything is columnar: syndromes are packed
into integer codes so each distinct syndrome is decoded exactly once, and
per-shot quantities (true residual class, decoder posterior, confidence)
come back as arrays.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .matching import MatchingDecoder, PosteriorVector
from .surface import (
    LOGICAL_CLASSES,
    CodeLayout,
    NoiseModel,
    Syndrome,
    class_product,
    logical_effect_batch,
    sample_error_batch,
    syndrome_batch,
)

_CLASS_INDEX = {lab: i for i, lab in enumerate(LOGICAL_CLASSES)}


def _pack_codes(x_def: np.ndarray, z_def: np.ndarray) -> np.ndarray:
    """Pack each shot's defect bits into one comparable code.

    Syndromes up to 62 bits become int64 scalars (fast unique); wider ones
    fall back to packed byte rows viewed as a single void dtype so np.unique
    still treats each row as one key.
    """
    mx = x_def.shape[1]
    mz = z_def.shape[1]
    if mx + mz <= 62:
        code = np.zeros(x_def.shape[0], dtype=np.int64)
        if mx:
            code = x_def.astype(np.int64) @ (1 << np.arange(mx, dtype=np.int64))
        code <<= mz
        if mz:
            code |= z_def.astype(np.int64) @ (1 << np.arange(mz, dtype=np.int64))
        return code
    both = np.concatenate([x_def, z_def], axis=1).astype(np.uint8)
    rows = np.packbits(both, axis=1)
    rows = np.ascontiguousarray(rows)
    return rows.view(np.dtype((np.void, rows.shape[1]))).reshape(-1)


@dataclass
class MemoryBatch:
    """Columnar record of one memory run on a single patch."""

    layout: CodeLayout
    noise: NoiseModel
    x_def: np.ndarray
    z_def: np.ndarray
    true_class_idx: np.ndarray
    _posterior_cache: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        codes = _pack_codes(self.x_def, self.z_def)
        self.codes = codes
        self.unique_codes, self.first_idx, self.inverse = np.unique(
            codes, return_index=True, return_inverse=True
        )

    @property
    def shots(self) -> int:
        return len(self.codes)

    def _unique_syndromes(self) -> list[Syndrome]:
        return [
            Syndrome(x_defects=self.x_def[i], z_defects=self.z_def[i])
            for i in self.first_idx
        ]

    def posteriors(self, source: str = "matching", workers: int = 1) -> np.ndarray:
        """Per-shot class posterior matrix (shots x 4), decoded per distinct syndrome.

        source "matching" uses the approximate matching decoder; "exact"
        uses coset enumeration (feasible small patches only).
        """
        cached = self._posterior_cache.get(source)
        if cached is not None:
            return cached
        syndromes = self._unique_syndromes()
        if source == "matching":
            decoder = MatchingDecoder(self.layout, self.noise)

            def solve(syn: Syndrome) -> np.ndarray:
                return decoder.posteriors(syn).as_array()

        elif source == "exact":
            from .exact import coupled_coset_table

            table = coupled_coset_table(
                self.layout.distance, self.noise.q_x, self.noise.q_y, self.noise.q_z
            )

            def solve(syn: Syndrome) -> np.ndarray:
                return table.posterior(syn).as_array()

        else:
            raise ValueError(f"unknown posterior source {source!r}")
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(solve, syndromes))
        else:
            rows = [solve(syn) for syn in syndromes]
        unique_matrix = np.array(rows)
        full = unique_matrix[self.inverse]
        self._posterior_cache[source] = full
        return full

    def decoded_class_idx(self, source: str = "matching") -> np.ndarray:
        return self.posteriors(source).argmax(axis=1)

    def confidence_error(self, source: str = "matching") -> np.ndarray:
        """Per-shot 1 - p(identity) of the post-correction posterior.

        After applying the most-likely-class correction, the posterior mass
        on "no residual error" is the decoded class's own mass, so the
        error confidence is one minus the winning entry.
        """
        post = self.posteriors(source)
        return 1.0 - post.max(axis=1)

    def failed(self, source: str = "matching") -> np.ndarray:
        """True where the hard decision missed the actual residual class."""
        return self.decoded_class_idx(source) != self.true_class_idx

    def post_correction_class_idx(self, source: str = "matching") -> np.ndarray:
        """Residual class after the hard correction, per shot."""
        decoded = self.decoded_class_idx(source)
        out = np.empty(self.shots, dtype=np.int64)
        prod = np.array(
            [
                [_CLASS_INDEX[class_product(a, b)] for b in LOGICAL_CLASSES]
                for a in LOGICAL_CLASSES
            ]
        )
        out[:] = prod[self.true_class_idx, decoded]
        return out


def run_memory_batch(
    layout: CodeLayout, noise: NoiseModel, shots: int, rng: np.random.Generator
) -> MemoryBatch:
    """Sample a memory run: errors, syndromes, and true residual classes."""
    x_bits, z_bits = sample_error_batch(layout, noise, rng, shots)
    x_def, z_def = syndrome_batch(layout, x_bits, z_bits)
    true_idx = logical_effect_batch(layout, x_bits, z_bits)
    return MemoryBatch(
        layout=layout,
        noise=noise,
        x_def=x_def,
        z_def=z_def,
        true_class_idx=true_idx,
    )


def posterior_rows_to_vectors(matrix: np.ndarray) -> list[PosteriorVector]:
    """Wrap posterior matrix rows as PosteriorVector objects."""
    return [
        PosteriorVector({lab: float(row[i]) for i, lab in enumerate(LOGICAL_CLASSES)})
        for row in matrix
    ]


def logical_error_rate(
    layout: CodeLayout,
    noise: NoiseModel,
    shots: int,
    rng: np.random.Generator,
    source: str = "matching",
) -> float:
    """Empirical hard-decision failure rate of a memory run."""
    batch = run_memory_batch(layout, noise, shots, rng)
    return float(batch.failed(source).mean())
