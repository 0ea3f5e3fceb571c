"""Compiled per-trial cluster statistics.

Imported lazily by :mod:`percrg.percolation` so that code paths which never
run Monte Carlo do not pay the numba import/compile cost.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def batch_cluster_stats(occ, edge_u, edge_v, top, bottom):
    """Per-trial (size-weighted mean cluster size, largest fraction, crossing).

    occ: (trials, n) uint8 occupancy; edge_u/edge_v: int64 endpoints;
    top/bottom: int64 vertex ids of the first and last time layer.
    """
    trials, n = occ.shape
    mcs = np.zeros(trials, np.float64)
    largest = np.zeros(trials, np.float64)
    crossing = np.zeros(trials, np.uint8)
    parent = np.empty(n, np.int64)
    csize = np.empty(n, np.int64)
    for t in range(trials):
        row = occ[t]
        for i in range(n):
            parent[i] = i
        for e in range(edge_u.shape[0]):
            a = edge_u[e]
            b = edge_v[e]
            if row[a] and row[b]:
                ra = _find(parent, a)
                rb = _find(parent, b)
                if ra != rb:
                    parent[rb] = ra
        for i in range(n):
            csize[i] = 0
        occupied = 0
        for i in range(n):
            if row[i]:
                csize[_find(parent, i)] += 1
                occupied += 1
        if occupied > 0:
            s2 = 0
            smax = 0
            for i in range(n):
                s = csize[i]
                if s > 0:
                    s2 += s * s
                    if s > smax:
                        smax = s
            mcs[t] = s2 / occupied
            largest[t] = smax / n
            for j in range(top.shape[0]):
                v = top[j]
                if row[v]:
                    r = _find(parent, v)
                    if csize[r] > 0:  # mark at most once: sign is the flag
                        csize[r] = -csize[r]
            for j in range(bottom.shape[0]):
                v = bottom[j]
                if row[v] and csize[_find(parent, v)] < 0:
                    crossing[t] = 1
                    break
    return mcs, largest, crossing
