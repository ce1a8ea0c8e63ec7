"""Minimum-weight matching decoder with boundary-parity class control.

Each CSS sector gets its own decoding graph: check sites are vertices,
every data qubit contributes one fault edge (between the two checks its
error flips, or from a check to a virtual boundary supernode when it
flips only one), and edge weights are ln((1-p_e)/p_e). Decoding a defect
set is a minimum-weight T-join: defects, plus any supernode constrained
to odd fault parity, are paired through shortest paths and the fault set
is the XOR of those paths.

Fixing the supernode parities fixes the homology class of the candidate,
which is how per-class candidates (and from them approximate class
posteriors) are produced: flipping both boundary parities of a sector
graph toggles that sector's logical component.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MatchingInfeasibleError
from .pauli import PauliString
from .surface import LOGICAL_CLASSES, CodeLayout, NoiseModel, Syndrome, logical_effect

_DP_MAX_TERMINALS = 14
_INF = math.inf


@dataclass(frozen=True)
class GraphVertex:
    kind: str  # "defect-site" or "boundary-supernode"
    check_index: int | None = None
    boundary_tag: str | None = None
    required_parity: str = "even"  # "odd" | "even" | "free"


@dataclass(frozen=True)
class FaultEdge:
    u: int
    v: int
    qubit: int
    error_kind: str  # "X" for Z-defect-graph faults, "Z" for X-defect-graph
    probability: float
    weight: float


@dataclass(frozen=True)
class MatchingSolution:
    """A decoded fault set with its weight, probability, and boundary usage."""

    selected_edges: tuple[int, ...]
    total_weight: float
    boundary_parities: dict[str, int]
    fault_qubits: tuple[int, ...]
    logp: float
    pairs: tuple[tuple[int, int], ...]
    graph_type: str


@dataclass(frozen=True)
class PosteriorVector:
    """Normalized probabilities over logical classes."""

    p: dict[str, float]

    def __post_init__(self):
        total = sum(self.p.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"posterior sums to {total}")

    @property
    def best_class(self) -> str:
        ordered = [lab for lab in LOGICAL_CLASSES if lab in self.p]
        ordered += [lab for lab in self.p if lab not in LOGICAL_CLASSES]
        return max(ordered, key=lambda lab: self.p[lab])

    def as_array(self, labels=LOGICAL_CLASSES) -> np.ndarray:
        return np.array([self.p[lab] for lab in labels])

    @classmethod
    def from_log_weights(
        cls, log_weights: dict[str, float], labels=LOGICAL_CLASSES
    ) -> "PosteriorVector":
        vals = np.array([log_weights.get(lab, -_INF) for lab in labels])
        finite = vals[np.isfinite(vals)]
        if finite.size == 0:
            raise MatchingInfeasibleError("no class has nonzero probability")
        shifted = np.exp(vals - finite.max())
        shifted /= shifted.sum()
        return cls({lab: float(w) for lab, w in zip(labels, shifted)})


class DecodingGraph:
    """One sector's fault graph plus shortest-path machinery for decoding.

    graph_type "Z-defect" detects X-type errors (p_e = q_X) between
    Z-checks with north/south boundaries; "X-defect" detects Z-type errors
    (p_e = q_Z) between X-checks with west/east boundaries. Y errors flip
    both graphs at once; pricing each graph by its pure single-Pauli
    probability (rather than the marginal flip rate q_X + q_Y or
    q_Z + q_Y) keeps a chain's candidate weight aligned with the
    probability of the actual minimum-weight coset member, which is what
    the matching posterior approximates. With uniform i.i.d. noise every
    edge in a graph carries the same weight, so hard matching decisions
    reduce to minimum cardinality and do not depend on this choice; only
    the posterior masses do.
    """

    def __init__(self, layout: CodeLayout, noise: NoiseModel, graph_type: str):
        gt = graph_type.strip().lower().replace(" graph", "").replace("-defect", "")
        if gt not in ("z", "x"):
            raise ValueError(f"unknown graph_type {graph_type!r}")
        self.graph_type = "Z-defect" if gt == "z" else "X-defect"
        self.layout = layout
        self.noise = noise

        if self.graph_type == "Z-defect":
            p_e = noise.q_x
            check_index = layout.z_check_index
            tags = ("north", "south")
            kind = "X"
            num_checks = layout.num_z_checks
        else:
            p_e = noise.q_z
            check_index = layout.x_check_index
            tags = ("west", "east")
            kind = "Z"
            num_checks = layout.num_x_checks
        if p_e >= 0.5:
            raise ValueError(f"edge probability {p_e} >= 0.5")

        self.num_checks = num_checks
        self.b1 = num_checks
        self.b2 = num_checks + 1
        self.num_nodes = num_checks + 2
        self.boundary_tags = tags
        self.fault_kind = kind

        edges: list[FaultEdge] = []
        if p_e > 0.0:
            w = math.log((1.0 - p_e) / p_e)
            for q, (r, c) in enumerate(layout.qubit_coords):
                sites = [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]
                nbrs = [check_index[s] for s in sites if s in check_index]
                if len(nbrs) == 2:
                    u, v = sorted(nbrs)
                elif len(nbrs) == 1:
                    near_first = (r == 0) if kind == "X" else (c == 0)
                    u, v = nbrs[0], (self.b1 if near_first else self.b2)
                else:
                    u, v = self.b1, self.b2  # distance-1 patch: one free qubit
                edges.append(FaultEdge(u, v, q, kind, p_e, w))
        self.edges = tuple(edges)
        self.total_lognoerr = sum(math.log1p(-e.probability) for e in self.edges)

        self.vertices = tuple(
            [
                GraphVertex("defect-site", check_index=j, required_parity="even")
                for j in range(num_checks)
            ]
            + [
                GraphVertex("boundary-supernode", boundary_tag=t, required_parity="free")
                for t in tags
            ]
        )

        adj: list[list[tuple[int, float, int]]] = [[] for _ in range(self.num_nodes)]
        for i, e in enumerate(self.edges):
            adj[e.u].append((e.v, e.weight, i))
            adj[e.v].append((e.u, e.weight, i))
        self._adj = adj
        self._dist = np.full((self.num_nodes, self.num_nodes), _INF)
        self._parent_edge = np.full((self.num_nodes, self.num_nodes), -1, dtype=np.int64)
        for src in range(self.num_nodes):
            self._dijkstra(src)
        self._path_cache: dict[tuple[int, int], int] = {}

    def _dijkstra(self, src: int) -> None:
        dist = self._dist[src]
        parent = self._parent_edge[src]
        dist[src] = 0.0
        heap = [(0.0, src)]
        done = np.zeros(self.num_nodes, dtype=bool)
        while heap:
            d, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            for v, w, ei in self._adj[u]:
                nd = d + w
                if nd < dist[v] - 1e-15:
                    dist[v] = nd
                    parent[v] = ei
                    heapq.heappush(heap, (nd, v))

    def distance_between(self, u: int, v: int) -> float:
        return float(self._dist[u, v])

    def path_edge_mask(self, src: int, dst: int) -> int:
        """Bitmask over edge indices of the shortest src-dst path."""
        key = (src, dst) if src <= dst else (dst, src)
        cached = self._path_cache.get(key)
        if cached is not None:
            return cached
        if not math.isfinite(self._dist[src, dst]):
            raise MatchingInfeasibleError(
                f"nodes {src} and {dst} are disconnected in the {self.graph_type} graph"
            )
        mask = 0
        node = dst
        while node != src:
            ei = int(self._parent_edge[src, node])
            mask |= 1 << ei
            e = self.edges[ei]
            node = e.u if e.v == node else e.v
        self._path_cache[key] = mask
        return mask

    def mask_weight(self, mask: int) -> float:
        total = 0.0
        while mask:
            ei = (mask & -mask).bit_length() - 1
            total += self.edges[ei].weight
            mask &= mask - 1
        return total

    def mask_boundary_parities(self, mask: int) -> dict[str, int]:
        deg1 = deg2 = 0
        m = mask
        while m:
            ei = (m & -m).bit_length() - 1
            e = self.edges[ei]
            deg1 += (e.u == self.b1) + (e.v == self.b1)
            deg2 += (e.u == self.b2) + (e.v == self.b2)
            m &= m - 1
        return {self.boundary_tags[0]: deg1 % 2, self.boundary_tags[1]: deg2 % 2}

    def defect_nodes(self, syndrome: Syndrome) -> list[int]:
        bits = (
            syndrome.z_defects if self.graph_type == "Z-defect" else syndrome.x_defects
        )
        if len(bits) != self.num_checks:
            raise ValueError(
                f"syndrome has {len(bits)} defect bits, graph has {self.num_checks} checks"
            )
        return [int(j) for j in np.flatnonzero(bits)]

    def to_json(self) -> str:
        payload = {
            "graph_type": self.graph_type,
            "vertices": [
                {
                    "kind": v.kind,
                    "check_index": v.check_index,
                    "boundary_tag": v.boundary_tag,
                    "required_parity": v.required_parity,
                }
                for v in self.vertices
            ],
            "edges": [
                {
                    "endpoints": [e.u, e.v],
                    "qubit": e.qubit,
                    "error_kind": e.error_kind,
                    "probability": e.probability,
                    "weight": e.weight,
                }
                for e in self.edges
            ],
        }
        return json.dumps(payload, indent=2)


def build_decoding_graph(
    layout: CodeLayout, noise: NoiseModel, graph_type: str
) -> DecodingGraph:
    """Fault graph for one CSS sector; see :class:`DecodingGraph`."""
    return DecodingGraph(layout, noise, graph_type)


def _min_weight_pairing(dist: np.ndarray) -> tuple[float, list[tuple[int, int]]]:
    """Exact minimum-weight perfect matching on a complete metric graph.

    Bitmask dynamic program for small instances, blossom algorithm
    (networkx, integer-scaled weights) beyond that. Entries may be inf;
    a matching forced through an inf pair is reported infeasible.
    """
    t = dist.shape[0]
    if t == 0:
        return 0.0, []
    if t % 2:
        raise MatchingInfeasibleError("odd number of terminals cannot be paired")
    if t <= _DP_MAX_TERMINALS:
        full = (1 << t) - 1
        f = [_INF] * (full + 1)
        f[0] = 0.0
        for mask in range(1, full + 1):
            if bin(mask).count("1") % 2:
                continue
            i = (mask & -mask).bit_length() - 1
            rest = mask ^ (1 << i)
            best = _INF
            m = rest
            while m:
                j = (m & -m).bit_length() - 1
                m &= m - 1
                prev = f[rest ^ (1 << j)]
                if prev + dist[i, j] < best:
                    best = prev + dist[i, j]
            f[mask] = best
        if not math.isfinite(f[full]):
            raise MatchingInfeasibleError("terminals cannot all be paired")
        pairs = []
        mask = full
        while mask:
            i = (mask & -mask).bit_length() - 1
            rest = mask ^ (1 << i)
            m = rest
            while m:
                j = (m & -m).bit_length() - 1
                m &= m - 1
                if abs(f[rest ^ (1 << j)] + dist[i, j] - f[mask]) < 1e-12:
                    pairs.append((i, j))
                    mask = rest ^ (1 << j)
                    break
            else:
                raise RuntimeError("pairing reconstruction failed")
        return float(f[full]), pairs

    import networkx as nx

    scale = 2**32
    finite = dist[np.isfinite(dist)]
    maxw = float(finite.max()) if finite.size else 1.0
    g = nx.Graph()
    g.add_nodes_from(range(t))
    for i in range(t):
        for j in range(i + 1, t):
            if math.isfinite(dist[i, j]):
                g.add_edge(i, j, weight=int(round((maxw - dist[i, j]) * scale)) + 1)
    mate = nx.max_weight_matching(g, maxcardinality=True)
    if 2 * len(mate) < t:
        raise MatchingInfeasibleError("terminals cannot all be paired")
    pairs = sorted((min(i, j), max(i, j)) for i, j in mate)
    total = float(sum(dist[i, j] for i, j in pairs))
    return total, pairs


def _solve_with_parities(
    graph: DecodingGraph, defects: list[int], parities: tuple[int, int]
) -> MatchingSolution:
    terminals = list(defects)
    if parities[0]:
        terminals.append(graph.b1)
    if parities[1]:
        terminals.append(graph.b2)
    if len(terminals) % 2:
        raise MatchingInfeasibleError(
            f"parity assignment {parities} incompatible with {len(defects)} defects"
        )
    sub = np.array(
        [[graph.distance_between(a, b) for b in terminals] for a in terminals]
    ).reshape(len(terminals), len(terminals))
    np.fill_diagonal(sub, _INF)
    total, pairing = _min_weight_pairing(sub)
    mask = 0
    node_pairs = []
    for i, j in pairing:
        mask ^= graph.path_edge_mask(terminals[i], terminals[j])
        node_pairs.append((terminals[i], terminals[j]))
    weight = graph.mask_weight(mask)
    selected = []
    m = mask
    while m:
        ei = (m & -m).bit_length() - 1
        selected.append(ei)
        m &= m - 1
    bparities = graph.mask_boundary_parities(mask)
    return MatchingSolution(
        selected_edges=tuple(selected),
        total_weight=weight,
        boundary_parities=bparities,
        fault_qubits=tuple(sorted(graph.edges[ei].qubit for ei in selected)),
        logp=graph.total_lognoerr - weight,
        pairs=tuple(node_pairs),
        graph_type=graph.graph_type,
    )


def mwpm(graph: DecodingGraph, syndrome: Syndrome) -> MatchingSolution:
    """Minimum-weight fault set with free boundary parities.

    Solves both boundary-parity assignments consistent with the defect
    count and keeps the lighter one (ties prefer the lexicographically
    smaller assignment).
    """
    defects = graph.defect_nodes(syndrome)
    par = len(defects) % 2
    best = None
    for b2 in (0, 1):
        assignment = ((par + b2) % 2, b2)
        try:
            sol = _solve_with_parities(graph, defects, assignment)
        except MatchingInfeasibleError:
            continue
        if best is None or sol.total_weight < best.total_weight - 1e-12:
            best = sol
    if best is None:
        raise MatchingInfeasibleError(
            f"syndrome has no feasible fault set in the {graph.graph_type} graph"
        )
    return best


def class_candidate(
    graph: DecodingGraph, syndrome: Syndrome, flip: bool
) -> MatchingSolution:
    """Best fault set in the default homology class, or its complement.

    The default boundary parities are read off the unconstrained solve;
    ``flip=True`` toggles both, forcing a candidate whose residual differs
    from the default one by a boundary-spanning logical chain.
    """
    base = mwpm(graph, syndrome)
    if not flip:
        return base
    defects = graph.defect_nodes(syndrome)
    t1, t2 = graph.boundary_tags
    flipped = (base.boundary_parities[t1] ^ 1, base.boundary_parities[t2] ^ 1)
    return _solve_with_parities(graph, defects, flipped)


def _sector_candidates(
    graph: DecodingGraph, syndrome: Syndrome
) -> dict[bool, MatchingSolution | None]:
    out: dict[bool, MatchingSolution | None] = {}
    for flip in (False, True):
        try:
            out[flip] = class_candidate(graph, syndrome, flip)
        except MatchingInfeasibleError:
            out[flip] = None
    return out


def _combo_pattern(
    layout: CodeLayout,
    sol_z: MatchingSolution | None,
    sol_x: MatchingSolution | None,
) -> PauliString | None:
    if sol_z is None or sol_x is None:
        return None
    x_bits = np.zeros(layout.n, dtype=np.uint8)
    z_bits = np.zeros(layout.n, dtype=np.uint8)
    for q in sol_z.fault_qubits:
        x_bits[q] ^= 1
    for q in sol_x.fault_qubits:
        z_bits[q] ^= 1
    return PauliString(x_bits, z_bits)


def mwpm_posteriors(
    layout: CodeLayout,
    noise: NoiseModel,
    syndrome: Syndrome,
    graphs: tuple[DecodingGraph, DecodingGraph] | None = None,
) -> PosteriorVector:
    """Approximate class posteriors from the four per-class candidates.

    Each class's candidate combines one Z-defect-graph fault set and one
    X-defect-graph fault set (default or boundary-flipped); its
    unnormalized probability is the product of p_e over selected edges and
    (1-p_e) over the rest, across both graphs. Labels are assigned from
    the combined pattern's actual residual class, so the default candidate
    need not sit in the identity class.
    """
    if graphs is None:
        gz = DecodingGraph(layout, noise, "Z-defect")
        gx = DecodingGraph(layout, noise, "X-defect")
    else:
        gz, gx = graphs
    cand_z = _sector_candidates(gz, syndrome)
    cand_x = _sector_candidates(gx, syndrome)
    log_weights: dict[str, float] = {}
    for fz in (False, True):
        for fx in (False, True):
            pattern = _combo_pattern(layout, cand_z[fz], cand_x[fx])
            if pattern is None:
                continue
            label = logical_effect(layout, pattern)
            lw = cand_z[fz].logp + cand_x[fx].logp
            if label in log_weights:
                raise RuntimeError(f"duplicate class label {label} among candidates")
            log_weights[label] = lw
    return PosteriorVector.from_log_weights(log_weights)


class MatchingDecoder:
    """Reusable decoder: graphs built once, per-syndrome results cached."""

    def __init__(self, layout: CodeLayout, noise: NoiseModel):
        self.layout = layout
        self.noise = noise
        self.graph_z = DecodingGraph(layout, noise, "Z-defect")
        self.graph_x = DecodingGraph(layout, noise, "X-defect")
        self._cache: dict[bytes, PosteriorVector] = {}

    def posteriors(self, syndrome: Syndrome) -> PosteriorVector:
        key = syndrome.key()
        hit = self._cache.get(key)
        if hit is None:
            hit = mwpm_posteriors(
                self.layout, self.noise, syndrome, (self.graph_z, self.graph_x)
            )
            self._cache[key] = hit
        return hit

    def decode_class(self, syndrome: Syndrome) -> str:
        return self.posteriors(syndrome).best_class
