"""Bernoulli site percolation on interaction graphs.

Each vertex is occupied independently with probability eta.  Occupied
vertices joined by graph edges form clusters; the observables below and
their Monte Carlo estimators quantify how clusters grow with eta:

    mean_cluster_size   expected size of the cluster containing a uniformly
                        random *occupied* vertex (size-weighted average
                        sum(s^2)/sum(s) per configuration; 0 if all vacant)
    largest_fraction    expected size of the largest cluster / n_vertices
    crossing_prob       probability that one cluster touches both the first
                        and the last time layer of the graph

Sampling is counter-based: the configuration draw for vertex v uses the
substream (seed, v), and trial t of a Monte Carlo run uses substream
(seed, t).  Results are therefore bit-identical for any thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from percrg.circuit import Circuit
from percrg.graph import InteractionGraph, build_interaction_graph
from percrg.rng import stream_key, uniform_block, uniform_matrix
from percrg.unionfind import DisjointSet

_CHUNK = 4096  # trials per kernel batch, bounds occupancy-matrix memory


class ThresholdGridError(RuntimeError):
    """The eta grid does not bracket the requested crossing level."""


@dataclass(frozen=True)
class Configuration:
    """One sampled occupancy pattern (bool per vertex)."""

    occupied: np.ndarray
    eta: float
    seed: int

    @property
    def n_occupied(self) -> int:
        return int(self.occupied.sum())


@dataclass(frozen=True)
class ClusterDecomposition:
    """Per-vertex cluster labels and the cluster size table.

    labels[v] is the smallest vertex id in v's cluster, or -1 if v is vacant;
    sizes maps each canonical label to its cluster's vertex count.
    """

    labels: np.ndarray
    sizes: dict[int, int]

    @property
    def n_clusters(self) -> int:
        return len(self.sizes)

    @property
    def size_multiset(self) -> tuple[int, ...]:
        return tuple(sorted(self.sizes.values(), reverse=True))


def _check_eta(eta: float) -> None:
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")


def sample_configuration(graph: InteractionGraph, eta: float, seed: int) -> Configuration:
    """Occupy each vertex independently with probability eta.

    Vertex v's draw is variate v of the stream keyed by the seed alone, so
    the configuration does not depend on evaluation order.
    """
    _check_eta(eta)
    u = uniform_block(stream_key(seed), 0, graph.n_vertices)
    return Configuration(occupied=u < eta, eta=eta, seed=seed)


def find_clusters(graph: InteractionGraph, config: Configuration) -> ClusterDecomposition:
    """Union-find decomposition of the occupied subgraph."""
    n = graph.n_vertices
    if config.occupied.shape != (n,):
        raise ValueError("configuration length does not match graph order")
    occ = config.occupied
    ds = DisjointSet(n)
    for a, b in graph.edges:
        if occ[a] and occ[b]:
            ds.union(a, b)
    canonical: dict[int, int] = {}
    for v in range(n):
        if occ[v]:
            root = ds.find(v)
            if root not in canonical or v < canonical[root]:
                canonical[root] = v
    labels = np.full(n, -1, dtype=np.int64)
    sizes: dict[int, int] = {}
    for v in range(n):
        if occ[v]:
            label = canonical[ds.find(v)]
            labels[v] = label
            sizes[label] = sizes.get(label, 0) + 1
    return ClusterDecomposition(labels=labels, sizes=sizes)


# ── Monte Carlo observables ─────────────────────────────────────────────────


@dataclass(frozen=True)
class PercolationObservables:
    eta: float
    trials: int
    mean_cluster_size: float
    se_mcs: float
    largest_fraction: float
    se_lf: float
    crossing_prob: float
    se_cp: float


def _layer_arrays(graph: InteractionGraph) -> tuple[np.ndarray, np.ndarray]:
    t_lo, t_hi = graph.time_range
    top = np.array(graph.layer(t_lo), dtype=np.int64)
    bottom = np.array(graph.layer(t_hi), dtype=np.int64)
    return top, bottom


def _edge_arrays(graph: InteractionGraph) -> tuple[np.ndarray, np.ndarray]:
    if graph.n_edges == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    e = np.array(graph.edges, dtype=np.int64)
    return np.ascontiguousarray(e[:, 0]), np.ascontiguousarray(e[:, 1])


def _se(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1) / np.sqrt(values.size))


def percolation_observables(graph: InteractionGraph, eta: float, trials: int,
                            seed: int, threads: int = 1) -> PercolationObservables:
    """Monte Carlo estimates with standard errors over independent trials."""
    _check_eta(eta)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if threads < 1:
        raise ValueError("threads must be >= 1")
    from percrg import _kernels  # deferred: numba import is expensive

    n = graph.n_vertices
    edge_u, edge_v = _edge_arrays(graph)
    top, bottom = _layer_arrays(graph)
    base = stream_key(seed)
    mcs = np.empty(trials, np.float64)
    largest = np.empty(trials, np.float64)
    crossing = np.empty(trials, np.uint8)

    def run_span(lo: int, hi: int) -> None:
        for c0 in range(lo, hi, _CHUNK):
            c1 = min(c0 + _CHUNK, hi)
            occ = (uniform_matrix(base, c0, c1, n) < eta).astype(np.uint8)
            m, lf, cr = _kernels.batch_cluster_stats(occ, edge_u, edge_v, top, bottom)
            mcs[c0:c1] = m
            largest[c0:c1] = lf
            crossing[c0:c1] = cr

    if threads == 1:
        run_span(0, trials)
    else:
        bounds = np.linspace(0, trials, threads + 1).astype(int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            spans = [pool.submit(run_span, bounds[i], bounds[i + 1]) for i in range(threads)]
            for s in spans:
                s.result()

    cross_f = crossing.astype(np.float64)
    return PercolationObservables(
        eta=eta, trials=trials,
        mean_cluster_size=float(mcs.mean()), se_mcs=_se(mcs),
        largest_fraction=float(largest.mean()), se_lf=_se(largest),
        crossing_prob=float(cross_f.mean()), se_cp=_se(cross_f),
    )


# ── finite-size threshold estimation ────────────────────────────────────────


@dataclass(frozen=True)
class CurvePoint:
    size: int
    eta: float
    crossing_prob: float
    se: float


@dataclass(frozen=True)
class EtaStarEstimate:
    eta_star: float
    curve: tuple[CurvePoint, ...]
    note: str


def estimate_eta_star(family: Callable[[int], "Circuit | InteractionGraph"],
                      sizes: Sequence[int], etas: Sequence[float], trials: int,
                      seed: int, threads: int = 1) -> EtaStarEstimate:
    """Finite-size estimate of the percolation onset eta_star.

    Sweeps crossing probability over the eta grid for each size in the
    family and intercepts the monotone envelope of the largest size's curve
    at 0.5 by linear interpolation.  Size i, trial t draws from substream
    (seed, i, t); all etas share a trial's uniforms, so each curve is exactly
    nondecreasing in eta.
    """
    if not sizes:
        raise ValueError("need at least one size")
    etas = [float(e) for e in etas]
    if len(etas) < 2:
        raise ValueError("need at least two grid points")
    if any(not 0.0 < e < 1.0 for e in etas):
        raise ValueError("eta grid must lie inside (0, 1)")
    if any(b <= a for a, b in zip(etas, etas[1:])):
        raise ValueError("eta grid must be strictly increasing")
    if trials < 2:
        raise ValueError("trials must be >= 2")
    from percrg import _kernels

    curve: list[CurvePoint] = []
    last_probs: list[float] = []
    for i, size in enumerate(sizes):
        built = family(size)
        graph = build_interaction_graph(built) if isinstance(built, Circuit) else built
        n = graph.n_vertices
        edge_u, edge_v = _edge_arrays(graph)
        top, bottom = _layer_arrays(graph)
        base = stream_key(seed, i)
        counts = np.zeros(len(etas), dtype=np.int64)

        def run_span(lo: int, hi: int, out: np.ndarray) -> None:
            for c0 in range(lo, hi, _CHUNK):
                c1 = min(c0 + _CHUNK, hi)
                u = uniform_matrix(base, c0, c1, n)
                for j, eta in enumerate(etas):
                    occ = (u < eta).astype(np.uint8)
                    _, _, cr = _kernels.batch_cluster_stats(occ, edge_u, edge_v, top, bottom)
                    out[j] += int(cr.sum())

        if threads == 1:
            run_span(0, trials, counts)
        else:
            bounds = np.linspace(0, trials, threads + 1).astype(int)
            partials = [np.zeros(len(etas), dtype=np.int64) for _ in range(threads)]
            with ThreadPoolExecutor(max_workers=threads) as pool:
                spans = [pool.submit(run_span, bounds[k], bounds[k + 1], partials[k])
                         for k in range(threads)]
                for s in spans:
                    s.result()
            counts = sum(partials, counts)

        last_probs = []
        for j, eta in enumerate(etas):
            p = counts[j] / trials
            se = float(np.sqrt(p * (1.0 - p) / (trials - 1)))
            curve.append(CurvePoint(size=size, eta=eta, crossing_prob=p, se=se))
            last_probs.append(p)

    envelope = np.maximum.accumulate(np.array(last_probs))
    if envelope[0] > 0.5 or envelope[-1] < 0.5:
        raise ThresholdGridError(
            f"grid too narrow: crossing probability spans [{last_probs[0]:.6g}, "
            f"{max(last_probs):.6g}] around 0.5 intercept")
    j = int(np.argmax(envelope >= 0.5))
    if j == 0:
        eta_star = etas[0]
    else:
        p0, p1 = envelope[j - 1], envelope[j]
        frac = 0.5 if p1 == p0 else (0.5 - p0) / (p1 - p0)
        eta_star = etas[j - 1] + frac * (etas[j] - etas[j - 1])
    note = (f"0.5 intercept of the monotone envelope of the size-{sizes[-1]} "
            f"crossing curve, linear interpolation on a {len(etas)}-point grid, "
            f"{trials} trials per point")
    return EtaStarEstimate(eta_star=float(eta_star), curve=tuple(curve), note=note)
