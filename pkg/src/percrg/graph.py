"""Interaction graphs of gate-grid circuits.

The interaction graph has one vertex per gate (identities included) and an
edge between two gates exactly when they sit at consecutive timesteps and
share at least one qubit.  Parallel wires between the same pair of gates are
collapsed, so the graph is simple.  Vertex ids equal gate ids and are dense
(0..n-1); edges are stored as (lo, hi) pairs in lexicographic order.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

from percrg.circuit import Circuit


@dataclass(frozen=True)
class GraphVertex:
    id: int
    kind: str
    time: int
    qubits: tuple[int, ...]


class InteractionGraph:
    """Simple undirected graph over dense vertex ids with gate metadata."""

    def __init__(self, vertices, edges) -> None:
        verts = tuple(sorted(vertices, key=lambda v: v.id))
        if [v.id for v in verts] != list(range(len(verts))):
            raise ValueError("vertex ids must be dense 0..n-1 without repeats")
        norm: set[tuple[int, int]] = set()
        for a, b in edges:
            if a == b:
                raise ValueError(f"self-loop on vertex {a}")
            if not (0 <= a < len(verts) and 0 <= b < len(verts)):
                raise ValueError(f"edge ({a}, {b}) references a missing vertex")
            norm.add((a, b) if a < b else (b, a))
        self._vertices = verts
        self._edges = tuple(sorted(norm))
        adj: list[list[int]] = [[] for _ in verts]
        for a, b in self._edges:
            adj[a].append(b)
            adj[b].append(a)
        self._adjacency = tuple(tuple(sorted(ns)) for ns in adj)

    # ── basic accessors ──────────────────────────────────────────────

    @property
    def vertices(self) -> tuple[GraphVertex, ...]:
        return self._vertices

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return self._edges

    @property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        return self._adjacency

    @property
    def n_vertices(self) -> int:
        return len(self._vertices)

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def degree(self, v: int) -> int:
        return len(self._adjacency[v])

    @property
    def max_degree(self) -> int:
        return max((len(ns) for ns in self._adjacency), default=0)

    def layer(self, time: int) -> tuple[int, ...]:
        """Ids of the vertices at the given timestep."""
        return tuple(v.id for v in self._vertices if v.time == time)

    @property
    def time_range(self) -> tuple[int, int]:
        times = [v.time for v in self._vertices]
        return (min(times), max(times))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, InteractionGraph):
            return NotImplemented
        return self._vertices == other._vertices and self._edges == other._edges

    def __repr__(self) -> str:
        return f"InteractionGraph(n_vertices={self.n_vertices}, n_edges={self.n_edges})"


def build_interaction_graph(circuit: Circuit) -> InteractionGraph:
    """Vertex per gate; edge iff gates at consecutive timesteps share a qubit."""
    vertices = [GraphVertex(id=g.id, kind=g.kind, time=g.time, qubits=g.qubits)
                for g in circuit.gates]
    on_site: dict[tuple[int, int], int] = {}
    for g in circuit.gates:
        for q in g.qubits:
            on_site[(q, g.time)] = g.id
    edges = set()
    for g in circuit.gates:
        if g.time == circuit.n_steps:
            continue
        for q in g.qubits:
            succ = on_site[(q, g.time + 1)]  # coverage is total, so always present
            edges.add((g.id, succ))
    return InteractionGraph(vertices, edges)


# ── statistics ──────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class GraphStats:
    n_vertices: int
    n_edges: int
    max_degree: int
    n_components: int
    root: int
    ball_sizes: tuple[int, ...]


def graph_stats(graph: InteractionGraph, root: int, n_max: int) -> GraphStats:
    """Component count plus ball sizes |B(root, 0..n_max)| by BFS.

    ``ball_sizes[n]`` counts vertices within graph distance n of the root;
    the sequence is nondecreasing and bounded by n_vertices.
    """
    if not 0 <= root < graph.n_vertices:
        raise ValueError(f"root {root} is not a vertex")
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    dist = {root: 0}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w in graph.adjacency[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    ball = [0] * (n_max + 1)
    for d in dist.values():
        if d <= n_max:
            ball[d] += 1
    for n in range(1, n_max + 1):
        ball[n] += ball[n - 1]
    seen: set[int] = set()
    components = 0
    for start in range(graph.n_vertices):
        if start in seen:
            continue
        components += 1
        queue = deque([start])
        seen.add(start)
        while queue:
            v = queue.popleft()
            for w in graph.adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
    return GraphStats(n_vertices=graph.n_vertices, n_edges=graph.n_edges,
                      max_degree=graph.max_degree, n_components=components,
                      root=root, ball_sizes=tuple(ball))


# ── JSON serialization ──────────────────────────────────────────────────────


def graph_to_json_dict(graph: InteractionGraph) -> dict:
    return {
        "vertices": [
            {"id": v.id, "kind": v.kind, "time": v.time, "qubits": list(v.qubits)}
            for v in graph.vertices
        ],
        "edges": [list(e) for e in graph.edges],
    }


def graph_from_json_dict(data: dict) -> InteractionGraph:
    vertices = [GraphVertex(id=v["id"], kind=v["kind"], time=v["time"],
                            qubits=tuple(v["qubits"])) for v in data["vertices"]]
    edges = [(e[0], e[1]) for e in data["edges"]]
    return InteractionGraph(vertices, edges)


def dump_graph(graph: InteractionGraph) -> str:
    """Canonical one-line JSON; byte-stable for equal graphs."""
    return json.dumps(graph_to_json_dict(graph), sort_keys=True, separators=(",", ":")) + "\n"


def load_graph(text: str) -> InteractionGraph:
    return graph_from_json_dict(json.loads(text))
