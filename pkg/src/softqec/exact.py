"""Exact logical-class posteriors: coset enumeration and tensor networks.

The posterior of logical class L given syndrome s is the total probability
of every physical error consistent with s whose residual (after the fixed
canonical correction) lies in class L, normalized over the four classes.
Two evaluation strategies are provided.

Enumeration sums the coset masses outright: a fully coupled sweep over
all 4**n Pauli strings (feasible through d=3, computed for every syndrome
at once), or a per-sector sweep over stabilizer cosets when the X and Z
error contents are independent (feasible through d=5).

The tensor-network path contracts a 2D network, one contraction per
class: qubit sites carry the per-qubit channel weights evaluated on a
reference pattern XORed with adjacent check spins, check sites are copy
tensors enumerating the stabilizer group. Contraction sweeps column by
column with a boundary matrix-product state truncated to a bond-dimension
cap, so accuracy degrades gracefully as the cap shrinks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityError
from .matching import MatchingDecoder, PosteriorVector
from .surface import (
    LOGICAL_CLASSES,
    CodeLayout,
    NoiseModel,
    Syndrome,
    class_from_components,
    class_product,
)

_COUPLED_MAX_QUBITS = 13  # 4**n <= 2**26
_SECTOR_MAX_RANK = 26  # 2**rank coset elements per sector sweep
_CLASS_INDEX = {lab: i for i, lab in enumerate(LOGICAL_CLASSES)}


@dataclass(frozen=True)
class CosetSums:
    """Unnormalized coset probability masses, one entry per logical class."""

    z_sums: dict[str, float]

    def total(self) -> float:
        return sum(self.z_sums.values())

    def posterior(self) -> PosteriorVector:
        total = self.total()
        if total <= 0.0:
            raise ValueError("all coset masses vanish")
        return PosteriorVector({lab: self.z_sums[lab] / total for lab in LOGICAL_CLASSES})


@dataclass(frozen=True)
class MpsConfig:
    """Bond-dimension cap and relative singular-value cutoff for the sweep."""

    chi: int
    truncation_tol: float = 0.0

    def __post_init__(self):
        if self.chi < 1:
            raise ValueError(f"chi must be >= 1, got {self.chi}")
        if self.truncation_tol < 0.0:
            raise ValueError("truncation_tol must be >= 0")


def _check_enumeration_capacity(layout: CodeLayout, noise: NoiseModel) -> str:
    """Pick the feasible enumeration strategy or raise CapacityError."""
    if layout.n <= _COUPLED_MAX_QUBITS:
        return "coupled"
    if noise.is_independent_xz or noise.q_y == 0.0:
        rank = layout.distance * (layout.distance - 1)
        if rank <= _SECTOR_MAX_RANK:
            return "sector"
        raise CapacityError(
            f"sector enumeration needs d(d-1) <= {_SECTOR_MAX_RANK} "
            f"(largest feasible distance is 5); got d={layout.distance}"
        )
    raise CapacityError(
        f"coupled enumeration needs n <= {_COUPLED_MAX_QUBITS} qubits "
        f"(largest feasible distance is 3); got n={layout.n}. "
        "X/Z-independent noise admits the per-sector sweep up to d=5."
    )


class CoupledCosetTable:
    """All coset masses of a small patch, every syndrome and class at once.

    masses[x_syndrome, z_syndrome, cx, cz] is the total probability of
    errors with that syndrome whose residual has X-component cx and
    Z-component cz. Total over the whole table is 1.
    """

    def __init__(self, layout: CodeLayout, noise: NoiseModel, chunk: int = 1024):
        n = layout.n
        if n > _COUPLED_MAX_QUBITS:
            raise CapacityError(
                f"coupled table needs n <= {_COUPLED_MAX_QUBITS}, got n={n}"
            )
        self.layout = layout
        self.noise = noise
        mx = layout.num_x_checks
        mz = layout.num_z_checks

        count = 1 << n
        all_bits = (
            (np.arange(count, dtype=np.uint64)[:, None] >> np.arange(n, dtype=np.uint64))
            & 1
        ).astype(np.uint8)
        pop = all_bits.sum(axis=1).astype(np.int16)

        pow_z = (1 << np.arange(mz, dtype=np.int64)) if mz else np.zeros(0, np.int64)
        pow_x = (1 << np.arange(mx, dtype=np.int64)) if mx else np.zeros(0, np.int64)

        # b axis: X-content. Flips Z-checks; residual X-component bit.
        zdef_bits = (all_bits @ layout.h_z.T) % 2 if mz else np.zeros((count, 0), np.uint8)
        zdef_int = zdef_bits.astype(np.int64) @ pow_z if mz else np.zeros(count, np.int64)
        res_b = all_bits ^ (
            (zdef_bits @ layout._corr_x_chains) % 2 if mz else 0
        )
        cx_bit = (res_b @ layout.logical_z.z_bits) % 2

        # a axis: Z-content. Flips X-checks; residual Z-component bit.
        xdef_bits = (all_bits @ layout.h_x.T) % 2 if mx else np.zeros((count, 0), np.uint8)
        xdef_int = xdef_bits.astype(np.int64) @ pow_x if mx else np.zeros(count, np.int64)
        res_a = all_bits ^ (
            (xdef_bits @ layout._corr_z_chains) % 2 if mx else 0
        )
        cz_bit = (res_a @ layout.logical_x.x_bits) % 2

        t_i = noise.q_i ** np.arange(n + 1)
        t_x = noise.q_x ** np.arange(n + 1)
        t_y = noise.q_y ** np.arange(n + 1)
        t_z = noise.q_z ** np.arange(n + 1)
        t_i[0] = t_x[0] = t_y[0] = t_z[0] = 1.0

        b_group = (zdef_int << 1) | cx_bit
        a_group = (xdef_int << 1) | cz_bit
        k_b = 1 << (mz + 1)
        bins = (1 << (mx + 1)) * k_b
        packed = np.arange(count, dtype=np.uint64)
        acc = np.zeros(bins)
        for lo in range(0, count, chunk):
            hi = min(lo + chunk, count)
            both = np.bitwise_count(packed[lo:hi, None] & packed[None, :]).astype(
                np.int16
            )
            n_x = pop[lo:hi, None] - both
            n_z = pop[None, :] - both
            n_i = (n - pop[lo:hi, None] - pop[None, :]) + both
            w = t_i[n_i] * t_x[n_x] * t_z[n_z] * t_y[both]
            idx = a_group[None, :] * k_b + b_group[lo:hi, None]
            acc += np.bincount(idx.ravel(), weights=w.ravel(), minlength=bins)
        self.masses = acc.reshape(1 << mx, 2, 1 << mz, 2).transpose(0, 2, 3, 1)
        self._pow_x = pow_x
        self._pow_z = pow_z

    def _syndrome_ints(self, syndrome: Syndrome) -> tuple[int, int]:
        sx = int(syndrome.x_defects.astype(np.int64) @ self._pow_x) if self._pow_x.size else 0
        sz = int(syndrome.z_defects.astype(np.int64) @ self._pow_z) if self._pow_z.size else 0
        return sx, sz

    def coset_sums(self, syndrome: Syndrome) -> CosetSums:
        sx, sz = self._syndrome_ints(syndrome)
        block = self.masses[sx, sz]
        return CosetSums(
            {
                class_from_components(cx, cz): float(block[cx, cz])
                for cx in (0, 1)
                for cz in (0, 1)
            }
        )

    def posterior(self, syndrome: Syndrome) -> PosteriorVector:
        return self.coset_sums(syndrome).posterior()

    def posterior_block(self, sx: int, sz: int) -> np.ndarray:
        """Posterior over LOGICAL_CLASSES for integer-coded syndromes."""
        block = self.masses[sx, sz]
        vec = np.array([block[0, 0], block[1, 0], block[1, 1], block[0, 1]])
        return vec / vec.sum()

    def syndrome_probability(self, syndrome: Syndrome) -> float:
        sx, sz = self._syndrome_ints(syndrome)
        return float(self.masses[sx, sz].sum())

    def class_totals(self) -> dict[str, float]:
        """Exact channel-level class distribution (sum over all syndromes)."""
        tot = self.masses.sum(axis=(0, 1))
        return {
            class_from_components(cx, cz): float(tot[cx, cz])
            for cx in (0, 1)
            for cz in (0, 1)
        }


@lru_cache(maxsize=8)
def coupled_coset_table(
    distance: int, q_x: float, q_y: float, q_z: float
) -> CoupledCosetTable:
    layout = CodeLayout(distance)
    return CoupledCosetTable(layout, NoiseModel(q_x, q_y, q_z))


def _subset_xors(masks: np.ndarray) -> np.ndarray:
    """All XOR combinations of the given uint64 masks (2**len array)."""
    out = np.zeros(1, dtype=np.uint64)
    for m in masks:
        out = np.concatenate([out, out ^ m])
    return out


def _pack_rows(rows: np.ndarray) -> np.ndarray:
    n = rows.shape[1]
    if n > 64:
        raise CapacityError("sector sweep supports at most 64 qubits per word")
    weights = (np.uint64(1) << np.arange(n, dtype=np.uint64))
    return (rows.astype(np.uint64) @ weights).astype(np.uint64)


class SectorEnumerator:
    """Per-sector coset masses for X/Z-independent noise.

    Each sector's coset is a base pattern XOR the span of that sector's
    stabilizer generators; masses follow from Hamming-weight counts of the
    span, collected with a meet-in-the-middle split.
    """

    def __init__(self, layout: CodeLayout, noise: NoiseModel):
        rank = layout.distance * (layout.distance - 1)
        if rank > _SECTOR_MAX_RANK:
            raise CapacityError(
                f"sector sweep needs d(d-1) <= {_SECTOR_MAX_RANK}, got d={layout.distance}"
            )
        self.layout = layout
        self.noise = noise
        n = layout.n
        gens_x = _pack_rows(layout.h_x) if layout.num_x_checks else np.zeros(0, np.uint64)
        gens_z = _pack_rows(layout.h_z) if layout.num_z_checks else np.zeros(0, np.uint64)
        self._span_x = self._split_spans(gens_x)
        self._span_z = self._split_spans(gens_z)
        ks = np.arange(n + 1)
        px = noise.marginal_x_flip
        pz = noise.marginal_z_flip
        self._wx = self._weight_table(px, n, ks)
        self._wz = self._weight_table(pz, n, ks)
        self._lx_mask = int(_pack_rows(layout.logical_x.x_bits[None, :])[0])
        self._lz_mask = int(_pack_rows(layout.logical_z.z_bits[None, :])[0])

    @staticmethod
    def _weight_table(p: float, n: int, ks: np.ndarray) -> np.ndarray:
        t1 = p ** ks.astype(float)
        t0 = (1.0 - p) ** (n - ks).astype(float)
        t1[0] = 1.0
        if n in ks:
            t0[n] = 1.0
        return t1 * t0

    @staticmethod
    def _split_spans(gens: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        half = len(gens) // 2
        return _subset_xors(gens[:half]), _subset_xors(gens[half:])

    def _coset_mass(
        self, base: int, spans: tuple[np.ndarray, np.ndarray], weights: np.ndarray
    ) -> float:
        s1, s2 = spans
        pops = np.bitwise_count(np.uint64(base) ^ s1[:, None] ^ s2[None, :])
        counts = np.bincount(pops.ravel(), minlength=len(weights))
        return float(counts[: len(weights)] @ weights)

    def x_sector_masses(self, z_defects: np.ndarray) -> dict[int, float]:
        """Masses of the X-content cosets, keyed by residual X-component."""
        base0 = int(_pack_rows(self.layout.correction_x_bits(z_defects)[None, :])[0])
        return {
            cx: self._coset_mass(base0 ^ (self._lx_mask if cx else 0), self._span_x, self._wx)
            for cx in (0, 1)
        }

    def z_sector_masses(self, x_defects: np.ndarray) -> dict[int, float]:
        """Masses of the Z-content cosets, keyed by residual Z-component."""
        base0 = int(_pack_rows(self.layout.correction_z_bits(x_defects)[None, :])[0])
        return {
            cz: self._coset_mass(base0 ^ (self._lz_mask if cz else 0), self._span_z, self._wz)
            for cz in (0, 1)
        }

    def coset_sums(self, syndrome: Syndrome) -> CosetSums:
        mx = self.x_sector_masses(syndrome.z_defects)
        mz = self.z_sector_masses(syndrome.x_defects)
        return CosetSums(
            {
                class_from_components(cx, cz): mx[cx] * mz[cz]
                for cx in (0, 1)
                for cz in (0, 1)
            }
        )


def enumerate_coset_sums(
    layout: CodeLayout, noise: NoiseModel, syndrome: Syndrome
) -> CosetSums:
    """Unnormalized exact coset masses for one syndrome.

    Routes to the coupled sweep when 4**n fits the capacity bound, else to
    the per-sector sweep for X/Z-independent noise. A channel with exactly
    zero Y probability but nonzero X and Z rates is accepted on the sector
    path as well; there the product form is the standard decoupling
    approximation rather than an identity.
    """
    strategy = _check_enumeration_capacity(layout, noise)
    if strategy == "coupled":
        table = coupled_coset_table(layout.distance, noise.q_x, noise.q_y, noise.q_z)
        return table.coset_sums(syndrome)
    return SectorEnumerator(layout, noise).coset_sums(syndrome)


def enumerate_posteriors(
    layout: CodeLayout, noise: NoiseModel, syndrome: Syndrome
) -> PosteriorVector:
    """Exact class posteriors by coset enumeration; see enumerate_coset_sums."""
    return enumerate_coset_sums(layout, noise, syndrome).posterior()


def _compress_mps(mps: list[np.ndarray], chi: int, tol: float) -> float:
    """Canonicalize, truncate to chi, and pull out an overall log-scale."""
    rows = len(mps)
    for r in range(rows - 1):
        a, p, b = mps[r].shape
        q, rm = np.linalg.qr(mps[r].reshape(a * p, b))
        mps[r] = q.reshape(a, p, q.shape[1])
        mps[r + 1] = np.einsum("ab,bpc->apc", rm, mps[r + 1])
    for r in range(rows - 1, 0, -1):
        a, p, b = mps[r].shape
        u, s, vt = np.linalg.svd(mps[r].reshape(a, p * b), full_matrices=False)
        keep = min(chi, len(s))
        if tol > 0.0 and s[0] > 0.0:
            keep = min(keep, max(1, int(np.count_nonzero(s >= tol * s[0]))))
        keep = max(keep, 1)
        mps[r] = vt[:keep].reshape(keep, p, b)
        mps[r - 1] = np.einsum("apb,bk->apk", mps[r - 1], u[:, :keep] * s[:keep])
    norm = float(np.linalg.norm(mps[0]))
    if norm == 0.0:
        return -math.inf
    mps[0] = mps[0] / norm
    return math.log(norm)


def _contract_columns(columns: list[list[np.ndarray]], chi: int, tol: float) -> float:
    """Contract a grid of (up, left, down, right) tensors to a scalar."""
    rows = len(columns[0])
    mps = [np.ones((1, 1, 1)) for _ in range(rows)]
    log_scale = 0.0
    for col in columns:
        for r in range(rows):
            a, p, b = mps[r].shape
            t = col[r]
            merged = np.einsum("apb,upds->ausbd", mps[r], t)
            du, ds, dd = t.shape[0], t.shape[3], t.shape[2]
            mps[r] = merged.reshape(a * du, ds, b * dd)
        shift = _compress_mps(mps, chi, tol)
        if shift == -math.inf:
            return 0.0
        log_scale += shift
    vec = mps[0].reshape(mps[0].shape[0] * mps[0].shape[1], mps[0].shape[2])
    acc = vec[0] if vec.shape[0] == 1 else vec.sum(axis=0)
    for r in range(1, rows):
        mat = mps[r][:, 0, :]
        acc = acc @ mat
    value = float(acc[0])
    return max(value, 0.0) * math.exp(log_scale)


def _check_kind(r: int, c: int) -> str | None:
    if (r + c) % 2 == 0:
        return None
    return "X" if r % 2 == 0 else "Z"


class _GridNetwork:
    """Tensor factory for one patch network in coupled or sector mode."""

    def __init__(self, layout: CodeLayout, mode: str, noise: NoiseModel):
        self.layout = layout
        self.mode = mode
        self.span = 2 * layout.distance - 1
        if mode == "coupled":
            self.weights = np.array(
                [[noise.q_i, noise.q_z], [noise.q_x, noise.q_y]]
            )
        elif mode == "xsector":
            p = noise.marginal_x_flip
            self.weights = np.array([1.0 - p, p])
        elif mode == "zsector":
            p = noise.marginal_z_flip
            self.weights = np.array([1.0 - p, p])
        else:
            raise ValueError(f"unknown mode {mode}")

    def _edge_active(self, r: int, c: int, r2: int, c2: int) -> bool:
        if not (0 <= r2 < self.span and 0 <= c2 < self.span):
            return False
        kind = _check_kind(r, c) or _check_kind(r2, c2)
        if self.mode == "coupled":
            return True
        return kind == ("X" if self.mode == "xsector" else "Z")

    def _leg_dims(self, r: int, c: int) -> tuple[int, int, int, int]:
        nbrs = ((r - 1, c), (r, c - 1), (r + 1, c), (r, c + 1))  # up,left,down,right
        return tuple(2 if self._edge_active(r, c, *n) else 1 for n in nbrs)

    def tensor(self, r: int, c: int, ref_x: np.ndarray, ref_z: np.ndarray) -> np.ndarray:
        dims = self._leg_dims(r, c)
        t = np.zeros(dims)
        kind = _check_kind(r, c)
        if kind is None:
            q = self.layout.qubit_index[(r, c)]
            vertical_is_x = r % 2 == 1  # odd-odd qubits meet X-checks vertically
            for iu in range(dims[0]):
                for il in range(dims[1]):
                    for idn in range(dims[2]):
                        for ir in range(dims[3]):
                            vert = iu ^ idn
                            horiz = il ^ ir
                            if self.mode == "coupled":
                                b_spin = vert if vertical_is_x else horiz
                                a_spin = horiz if vertical_is_x else vert
                                b = int(ref_x[q]) ^ b_spin
                                a = int(ref_z[q]) ^ a_spin
                                t[iu, il, idn, ir] = self.weights[b, a]
                            elif self.mode == "xsector":
                                spin = vert ^ horiz
                                b = int(ref_x[q]) ^ spin
                                t[iu, il, idn, ir] = self.weights[b]
                            else:
                                spin = vert ^ horiz
                                a = int(ref_z[q]) ^ spin
                                t[iu, il, idn, ir] = self.weights[a]
            return t
        active = [i for i, d in enumerate(dims) if d == 2]
        if self.mode != "coupled" and kind != (
            "X" if self.mode == "xsector" else "Z"
        ):
            return np.ones(dims)
        for iu in range(dims[0]):
            for il in range(dims[1]):
                for idn in range(dims[2]):
                    for ir in range(dims[3]):
                        vals = [(iu, il, idn, ir)[i] for i in active]
                        if len(set(vals)) <= 1:
                            t[iu, il, idn, ir] = 1.0
        return t

    def contract(
        self, ref_x: np.ndarray, ref_z: np.ndarray, cfg: MpsConfig
    ) -> float:
        columns = [
            [self.tensor(r, c, ref_x, ref_z) for r in range(self.span)]
            for c in range(self.span)
        ]
        return _contract_columns(columns, cfg.chi, cfg.truncation_tol)


def _class_reference(
    layout: CodeLayout, syndrome: Syndrome, label: str
) -> tuple[np.ndarray, np.ndarray]:
    ref_x = layout.correction_x_bits(syndrome.z_defects).copy()
    ref_z = layout.correction_z_bits(syndrome.x_defects).copy()
    if label in ("X", "Y"):
        ref_x ^= layout.logical_x.x_bits
    if label in ("Z", "Y"):
        ref_z ^= layout.logical_z.z_bits
    return ref_x, ref_z


def mps_coset_sums(
    layout: CodeLayout, noise: NoiseModel, syndrome: Syndrome, cfg: MpsConfig
) -> CosetSums:
    """Tensor-network estimates of the coset masses at bond cap cfg.chi."""
    zeros = np.zeros(layout.n, dtype=np.uint8)
    if noise.is_independent_xz:
        net_x = _GridNetwork(layout, "xsector", noise)
        net_z = _GridNetwork(layout, "zsector", noise)
        mass_x = {}
        mass_z = {}
        for cx in (0, 1):
            ref = layout.correction_x_bits(syndrome.z_defects) ^ (
                layout.logical_x.x_bits if cx else 0
            )
            mass_x[cx] = net_x.contract(ref, zeros, cfg)
        for cz in (0, 1):
            ref = layout.correction_z_bits(syndrome.x_defects) ^ (
                layout.logical_z.z_bits if cz else 0
            )
            mass_z[cz] = net_z.contract(zeros, ref, cfg)
        return CosetSums(
            {
                class_from_components(cx, cz): mass_x[cx] * mass_z[cz]
                for cx in (0, 1)
                for cz in (0, 1)
            }
        )
    net = _GridNetwork(layout, "coupled", noise)
    sums = {}
    for label in LOGICAL_CLASSES:
        ref_x, ref_z = _class_reference(layout, syndrome, label)
        sums[label] = net.contract(ref_x, ref_z, cfg)
    return CosetSums(sums)


def mps_posteriors(
    layout: CodeLayout, noise: NoiseModel, syndrome: Syndrome, cfg: MpsConfig
) -> PosteriorVector:
    """Class posteriors from the boundary-MPS contraction; always normalized."""
    return mps_coset_sums(layout, noise, syndrome, cfg).posterior()


def bias_table(
    d_list,
    p_list,
    shots: int,
    rng: np.random.Generator,
    chi: int = 64,
) -> list[dict]:
    """Monte Carlo mean signed gap (exact minus matching) per class.

    Syndromes are sampled as uniformly placed defect pairs (two lit
    checks anywhere on the patch): the elementary ambiguous events the
    matching step has to arbitrate. Both posteriors are evaluated per
    distinct syndrome and compared in the frame of the applied
    correction, relabeled so the matching decoder's chosen class reads
    as I. There a negative I entry means matching overrates its own
    correction (it ignores how many coset members back each class), and
    the gap shrinks with distance as the decoders agree on ever more of
    the syndrome space.

    Sampling by the noise channel instead would bury this structure:
    almost all drawn syndromes are ones where the decoders already agree
    to many digits, and the residue is dominated by rare ties with
    arbitrary sign.

    Rows carry the per-class mean of exact - matching with its standard
    error.
    """
    relabel = np.array(
        [
            [_CLASS_INDEX[class_product(a, b)] for b in LOGICAL_CLASSES]
            for a in LOGICAL_CLASSES
        ]
    )
    rows = []
    for d in d_list:
        layout = CodeLayout(d)
        num_checks = layout.num_x_checks + layout.num_z_checks
        for p in p_list:
            noise = NoiseModel.depolarizing(p)
            decoder = MatchingDecoder(layout, noise)
            if layout.n <= _COUPLED_MAX_QUBITS:
                table = coupled_coset_table(d, noise.q_x, noise.q_y, noise.q_z)
                exact_fn = table.posterior
            else:
                cfg = MpsConfig(chi=chi)

                def exact_fn(s, _layout=layout, _noise=noise, _cfg=cfg):
                    return mps_posteriors(_layout, _noise, s, _cfg)

            cache: dict[bytes, np.ndarray] = {}
            samples = np.empty((shots, 4))
            for i in range(shots):
                pos = rng.choice(num_checks, size=2, replace=False)
                bits = np.zeros(num_checks, dtype=np.uint8)
                bits[pos] = 1
                syn = Syndrome(
                    x_defects=bits[: layout.num_x_checks],
                    z_defects=bits[layout.num_x_checks :],
                )
                key = syn.key()
                gap = cache.get(key)
                if gap is None:
                    exact_vec = exact_fn(syn).as_array()
                    match_vec = decoder.posteriors(syn).as_array()
                    frame = relabel[int(match_vec.argmax())]
                    gap = exact_vec[frame] - match_vec[frame]
                    cache[key] = gap
                samples[i] = gap
            mean = samples.mean(axis=0)
            stderr = samples.std(axis=0, ddof=1) / math.sqrt(shots) if shots > 1 else np.zeros(4)
            for j, label in enumerate(LOGICAL_CLASSES):
                rows.append(
                    {
                        "d": d,
                        "p": p,
                        "class": label,
                        "mean_bias": float(mean[j]),
                        "stderr": float(stderr[j]),
                        "shots": shots,
                    }
                )
    return rows
