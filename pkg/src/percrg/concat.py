"""Gadget expansion and block coarse-graining of interaction graphs.

Concatenating a code replaces every location of a circuit by a gadget: a
fixed working period of A locations, a recovery stage followed by the gate
procedure proper.  On interaction graphs this is a uniform expansion: each
vertex becomes a fresh copy of an A-vertex template, and each edge becomes
one wire between an output port of the earlier gadget and an input port of
the later one.  Contracting the copies back to points recovers the original
graph exactly, which is the self-similarity that powers renormalization:
declaring a block occupied when more than k of its locations are occupied
maps fine Bernoulli(eta) site percolation to coarse Bernoulli(R(eta)) site
percolation on the same graph shape.
"""

from __future__ import annotations

import json
import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from percrg.graph import GraphVertex, InteractionGraph
from percrg.percolation import Configuration
from percrg.rgmap import RGParams, r_exact
from percrg.rng import stream_key, uniform_matrix

RECOVERY_KIND = "R"

_CHUNK = 8192


class RoutingError(RuntimeError):
    """The template has no ports on a side that must carry wires."""


@dataclass(frozen=True)
class GadgetTemplate:
    """An A-vertex working period: recovery stage then gate procedure.

    Local vertices are numbered 0..size-1 in temporal order; the first
    recovery_size of them form the recovery stage.  internal_edges is the
    gadget's own interaction structure (must be connected); input_ports and
    output_ports name the local vertices where incoming and outgoing wires
    attach, cyclically reused when a gadget has more wires than ports.
    """

    size: int
    recovery_size: int
    internal_edges: tuple[tuple[int, int], ...]
    input_ports: tuple[int, ...]
    output_ports: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.size < 2:
            raise ValueError(f"template needs at least 2 vertices, got {self.size}")
        if not 1 <= self.recovery_size < self.size:
            raise ValueError("recovery stage and gate stage must both be nonempty")
        adj: list[list[int]] = [[] for _ in range(self.size)]
        for a, b in self.internal_edges:
            if a == b or not (0 <= a < self.size and 0 <= b < self.size):
                raise ValueError(f"bad internal edge ({a}, {b})")
            adj[a].append(b)
            adj[b].append(a)
        seen = {0}
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        if len(seen) != self.size:
            raise ValueError("template interior must be connected")
        for p in self.input_ports + self.output_ports:
            if not 0 <= p < self.size:
                raise ValueError(f"port {p} is not a template vertex")

    @classmethod
    def path(cls, size: int) -> "GadgetTemplate":
        """Default template: a path, recovery stage of ceil(size/2) vertices,
        one input port at the recovery head, one output port at the tail."""
        if size < 2:
            raise ValueError(f"template needs at least 2 vertices, got {size}")
        return cls(size=size,
                   recovery_size=math.ceil(size / 2),
                   internal_edges=tuple((i, i + 1) for i in range(size - 1)),
                   input_ports=(0,),
                   output_ports=(size - 1,))

    def to_json_dict(self) -> dict:
        return {
            "A": self.size,
            "recovery_size": self.recovery_size,
            "internal_edges": [list(e) for e in self.internal_edges],
            "input_ports": list(self.input_ports),
            "output_ports": list(self.output_ports),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "GadgetTemplate":
        return cls(size=data["A"], recovery_size=data["recovery_size"],
                   internal_edges=tuple((e[0], e[1]) for e in data["internal_edges"]),
                   input_ports=tuple(data["input_ports"]),
                   output_ports=tuple(data["output_ports"]))


def dump_template(template: GadgetTemplate) -> str:
    return json.dumps(template.to_json_dict(), sort_keys=True, separators=(",", ":")) + "\n"


def load_template(text: str) -> GadgetTemplate:
    return GadgetTemplate.from_json_dict(json.loads(text))


# ── expansion ───────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ExpandedGraph:
    """Result of expanding a base graph through ``level`` rounds.

    graph is the finest level; partition[fine id] is the id of the block
    (level-1 vertex) owning that fine vertex; parent is the graph one level
    up, i.e. contracting graph by partition reproduces parent exactly.
    """

    graph: InteractionGraph
    partition: tuple[int, ...]
    level: int
    parent: InteractionGraph


def _expand_once(base: InteractionGraph, template: GadgetTemplate) -> InteractionGraph:
    if base.n_edges > 0 and (not template.input_ports or not template.output_ports):
        raise RoutingError("cannot route wires: template lacks input or output ports")
    A = template.size
    vertices: list[GraphVertex] = []
    for v in base.vertices:
        for j in range(A):
            kind = RECOVERY_KIND if j < template.recovery_size else v.kind
            vertices.append(GraphVertex(
                id=v.id * A + j,
                kind=kind,
                time=(v.time - 1) * A + j + 1,
                qubits=v.qubits,
            ))
    edges: list[tuple[int, int]] = []
    for v in base.vertices:
        root = v.id * A
        edges.extend((root + a, root + b) for a, b in template.internal_edges)
    out_used = [0] * base.n_vertices
    in_used = [0] * base.n_vertices
    vtime = [v.time for v in base.vertices]
    for a, b in base.edges:  # edges are in lexicographic order: routing is deterministic
        src, dst = (a, b) if (vtime[a], a) <= (vtime[b], b) else (b, a)
        out_port = template.output_ports[out_used[src] % len(template.output_ports)]
        in_port = template.input_ports[in_used[dst] % len(template.input_ports)]
        out_used[src] += 1
        in_used[dst] += 1
        edges.append((src * A + out_port, dst * A + in_port))
    return InteractionGraph(vertices, edges)


def expand_graph(base: InteractionGraph, template: GadgetTemplate, levels: int) -> ExpandedGraph:
    """Replace every vertex by a template copy, ``levels`` times.

    The returned partition maps the finest vertices to the level just above
    (fine id // A), which is the parent graph.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    parent = base
    graph = base
    for _ in range(levels):
        parent = graph
        graph = _expand_once(graph, template)
    partition = tuple(i // template.size for i in range(graph.n_vertices))
    return ExpandedGraph(graph=graph, partition=partition, level=levels, parent=parent)


# ── contraction and self-similarity ─────────────────────────────────────────


def contract_graph(expanded: ExpandedGraph) -> InteractionGraph:
    """Contract each partition block to a point and deduplicate edges.

    Block metadata is taken from the parent graph, so a round trip through
    expand_graph/contract_graph is the identity on graphs.
    """
    part = expanded.partition
    edges = {(part[a], part[b]) for a, b in expanded.graph.edges if part[a] != part[b]}
    return InteractionGraph(expanded.parent.vertices, edges)


@dataclass(frozen=True)
class SelfSimilarityResult:
    ok: bool
    mapping: dict[int, int] | None  # block id -> base vertex id
    detail: str


def verify_self_similarity(base: InteractionGraph, expanded: ExpandedGraph) -> SelfSimilarityResult:
    """Check that contracting ``expanded`` reproduces ``base`` edge for edge."""
    part = expanded.partition
    blocks = sorted(set(part))
    if len(blocks) != base.n_vertices:
        return SelfSimilarityResult(
            ok=False, mapping=None,
            detail=f"block count {len(blocks)} != base order {base.n_vertices}")
    contracted = {(part[a], part[b]) for a, b in expanded.graph.edges if part[a] != part[b]}
    contracted = {(min(e), max(e)) for e in contracted}
    base_edges = set(base.edges)
    missing = sorted(base_edges - contracted)
    extra = sorted(contracted - base_edges)
    if missing:
        return SelfSimilarityResult(ok=False, mapping=None,
                                    detail=f"missing coarse edge {missing[0]}")
    if extra:
        return SelfSimilarityResult(ok=False, mapping=None,
                                    detail=f"unexpected coarse edge {extra[0]}")
    return SelfSimilarityResult(ok=True, mapping={b: b for b in blocks}, detail="exact match")


# ── coarse-graining of configurations ───────────────────────────────────────


def coarse_grain(expanded: ExpandedGraph, config: Configuration,
                 k: int) -> tuple[InteractionGraph, Configuration]:
    """Declare each block occupied iff it holds more than k occupied vertices.

    Returns the contracted graph and the coarse configuration (which keeps
    the fine eta and seed for provenance).
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    n = expanded.graph.n_vertices
    if config.occupied.shape != (n,):
        raise ValueError("configuration length does not match expanded graph order")
    part = np.array(expanded.partition, dtype=np.int64)
    counts = np.bincount(part, weights=config.occupied.astype(np.float64),
                         minlength=expanded.parent.n_vertices)
    coarse_occ = counts >= k + 1
    coarse = contract_graph(expanded)
    return coarse, Configuration(occupied=coarse_occ, eta=config.eta, seed=config.seed)


# ── renormalization Monte Carlo ─────────────────────────────────────────────


@dataclass(frozen=True)
class RenormalizationMC:
    """Empirical block occupation density against the map's prediction.

    density pools all (trial, block) indicators; se is its binomial standard
    error; predicted is R(eta) for A = template size and the given k;
    max_abs_correlation is the largest |Pearson correlation| between any two
    blocks' occupancy across trials (0 for degenerate constant columns).
    """

    eta: float
    k: int
    trials: int
    n_blocks: int
    density: float
    se: float
    predicted: float
    max_abs_correlation: float


def empirical_renormalized_density(base: InteractionGraph, template: GadgetTemplate,
                                   eta: float, k: int, trials: int, seed: int,
                                   threads: int = 1) -> RenormalizationMC:
    """Sample fine configurations of the one-level expansion, coarse-grain
    each, and compare the block occupation density with R(eta).

    Trial t draws the fine occupancy from substream (seed, t), so results
    are independent of threading and chunking.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    if trials < 2:
        raise ValueError("trials must be >= 2")
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if not 1 <= k < template.size:
        raise ValueError(f"k must lie in 1..{template.size - 1}, got {k}")
    expanded = expand_graph(base, template, 1)
    n_fine = expanded.graph.n_vertices
    n_blocks = base.n_vertices
    part = np.array(expanded.partition, dtype=np.int64)
    indicator = np.zeros((n_fine, n_blocks), dtype=np.float64)
    indicator[np.arange(n_fine), part] = 1.0
    base_key = stream_key(seed)

    occupied_count = np.zeros(n_blocks, dtype=np.int64)   # per block, over trials
    pair_count = np.zeros((n_blocks, n_blocks), dtype=np.int64)

    def run_span(lo: int, hi: int, occ_out: np.ndarray, pair_out: np.ndarray) -> None:
        for c0 in range(lo, hi, _CHUNK):
            c1 = min(c0 + _CHUNK, hi)
            fine = uniform_matrix(base_key, c0, c1, n_fine) < eta
            counts = fine.astype(np.float64) @ indicator
            coarse = (counts >= k + 1).astype(np.float64)
            occ_out += coarse.sum(axis=0).astype(np.int64)
            pair_out += (coarse.T @ coarse).astype(np.int64)

    if threads == 1:
        run_span(0, trials, occupied_count, pair_count)
    else:
        bounds = np.linspace(0, trials, threads + 1).astype(int)
        occs = [np.zeros(n_blocks, dtype=np.int64) for _ in range(threads)]
        pairs = [np.zeros((n_blocks, n_blocks), dtype=np.int64) for _ in range(threads)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            spans = [pool.submit(run_span, bounds[i], bounds[i + 1], occs[i], pairs[i])
                     for i in range(threads)]
            for s in spans:
                s.result()
        for o, p in zip(occs, pairs):
            occupied_count += o
            pair_count += p

    density = float(occupied_count.sum()) / (trials * n_blocks)
    se = math.sqrt(density * (1.0 - density) / (trials * n_blocks))
    # Pearson correlations from the exact pair counts (integer sums, so the
    # result does not depend on trial order or chunking)
    mean = occupied_count / trials
    cov = pair_count / trials - np.outer(mean, mean)
    var = np.diag(cov).copy()
    max_corr = 0.0
    for i in range(n_blocks):
        for j in range(i + 1, n_blocks):
            if var[i] > 0.0 and var[j] > 0.0:
                c = abs(float(cov[i, j]) / math.sqrt(var[i] * var[j]))
                if c > max_corr:
                    max_corr = c
    predicted = r_exact(eta, RGParams(A=template.size, k=k))
    return RenormalizationMC(eta=eta, k=k, trials=trials, n_blocks=n_blocks,
                             density=density, se=se, predicted=predicted,
                             max_abs_correlation=max_corr)
