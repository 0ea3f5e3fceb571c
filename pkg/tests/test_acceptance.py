"""Acceptance gate: twelve numbered criteria, one printed line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.  Every
criterion states its tolerance inline; Monte Carlo criteria also enforce
their runtime budgets.
"""

from __future__ import annotations

import json
import math
import subprocess
import sys
import time
from collections import deque

import numpy as np

from percrg.circuit import generate_lattice_circuit, generate_random_circuit
from percrg.concat import GadgetTemplate, contract_graph, empirical_renormalized_density, \
    expand_graph, verify_self_similarity
from percrg.graph import build_interaction_graph
from percrg.percolation import estimate_eta_star, find_clusters, sample_configuration
from percrg.rgmap import RGParams, check_inequalities, find_threshold, iterate_bound, \
    iterate_map, levels_linearized, r_bound, r_derivative, r_exact, tradeoff

_GRID99 = [i / 100 for i in range(1, 100)]


def _sweep_params():
    return [RGParams(A=A, k=k) for A in range(3, 13) for k in range(1, 4) if A >= k + 2]


def _report(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num:02d} {'PASS' if ok else 'FAIL'}: {detail}")


def _cli(*args, cwd="."):
    return subprocess.run([sys.executable, "-m", "percrg", *args],
                          cwd=cwd, capture_output=True, text=True)


def test_criterion_01_majority_fixed_point():
    t0 = time.perf_counter()
    proc = _cli("rg", "analyze", "--A", "3", "--k", "1")
    elapsed = time.perf_counter() - t0
    report = json.loads(proc.stdout.splitlines()[-1])
    err_eta = abs(report["eta_c"] - 0.5)
    err_lam = abs(report["lambda"] - 1.5)
    ok = proc.returncode == 0 and err_eta <= 1e-9 and err_lam <= 1e-9 and elapsed < 1.0
    _report(1, ok, f"rg analyze A=3 k=1: |eta_c-0.5|={err_eta:.2e} <= 1e-9, "
                   f"|lambda-1.5|={err_lam:.2e} <= 1e-9, runtime {elapsed:.2f}s < 1s")
    assert ok


def test_criterion_02_threshold_bound_sweep():
    t0 = time.perf_counter()
    worst_gap = math.inf
    worst_res = 0.0
    min_lam = math.inf
    for params in _sweep_params():
        rep = find_threshold(params)
        worst_gap = min(worst_gap, rep.eta_c - params.bound_eta_c)
        worst_res = max(worst_res, rep.residual)
        min_lam = min(min_lam, rep.lam)
    elapsed = time.perf_counter() - t0
    ok = worst_gap >= 0.0 and worst_res <= 1e-10 and min_lam > 1.0 and elapsed < 5.0
    _report(2, ok, f"A in [3,12], k in [1,3]: min(eta_c - 2^(-A/k))={worst_gap:.3e} >= 0, "
                   f"max residual={worst_res:.1e} <= 1e-10, min lambda={min_lam:.4f} > 1, "
                   f"runtime {elapsed:.2f}s < 5s")
    assert ok


def test_criterion_03_bound_domination():
    ok = True
    for params in _sweep_params():
        for eta in _GRID99:
            if r_exact(eta, params) > r_bound(eta, params):
                ok = False
        for frac in (0.5, 0.9):
            eta = frac * params.bound_eta_c
            exact = iterate_map(eta, params, levels=6)
            for r in range(7):
                if exact[r] > iterate_bound(eta, params, r):
                    ok = False
    _report(3, ok, "r_exact <= r_bound on the 99-point grid and "
                   "iterate_map <= iterate_bound for r<=6 at eta in {0.5,0.9}*2^(-A/k), "
                   "exact inequality")
    assert ok


def test_criterion_04_differential_bounds():
    worst_low = worst_up = math.inf
    for params in _sweep_params():
        rep = check_inequalities(params, _GRID99)
        worst_low = min(worst_low, rep.lower_margin)
        worst_up = min(worst_up, rep.upper_margin)
    spot = RGParams(A=3, k=1)
    eta = 0.3
    r = r_exact(eta, spot)
    low = r * (1 - r) / (eta * (1 - eta))
    rp = r_derivative(eta, spot)
    up = math.sqrt(spot.alpha / (eta * (1 - eta)))
    spot_ok = (abs(low - 0.8064) <= 1e-4 and abs(rp - 1.26) <= 1e-4
               and abs(up - 3.7796) <= 1e-4 and low <= rp <= up)
    ok = worst_low >= 0.0 and worst_up >= 0.0 and spot_ok
    _report(4, ok, f"envelopes hold at all grid points (worst margins "
                   f"{worst_low:.3e}, {worst_up:.3e} >= 0); spot A=3 k=1 eta=0.3: "
                   f"{low:.4f} <= {rp:.4f} <= {up:.4f} within 1e-4 of (0.8064, 1.26, 3.7796)")
    assert ok


def test_criterion_05_fixed_point_slope_bound():
    worst = math.inf
    for params in _sweep_params():
        rep = find_threshold(params)
        bound = math.sqrt(params.alpha / (rep.eta_c * (1 - rep.eta_c)))
        worst = min(worst, bound - rep.lam)
    rep31 = find_threshold(RGParams(A=3, k=1))
    bound31 = math.sqrt(rep31.params.alpha / (rep31.eta_c * (1 - rep31.eta_c)))
    spot_ok = abs(rep31.lam - 1.5) <= 1e-4 and abs(bound31 - 3.4641) <= 1e-4
    ok = worst >= 0.0 and spot_ok
    _report(5, ok, f"lambda <= sqrt(alpha/(eta_c(1-eta_c))) for every threshold "
                   f"(worst margin {worst:.4f} >= 0); A=3 k=1: "
                   f"{rep31.lam:.4f} <= {bound31:.4f} within 1e-4 of (1.5, 3.4641)")
    assert ok


def test_criterion_06_level_count_and_tradeoff():
    rep = find_threshold(RGParams(A=3, k=1))
    r_lin = levels_linearized(rep, delta=0.05, epsilon=0.01)
    t = tradeoff(rep, delta=0.05, epsilon=0.01, r=5)
    ok = (r_lin == 5 and abs(t.lhs - 0.060025) <= 1e-4
          and abs(t.rhs - 0.9052) <= 1e-4 and t.lhs <= t.rhs and t.holds)
    _report(6, ok, f"eta_c=0.5 lambda=1.5 eps=0.01 delta=0.05: linearized r={r_lin} == 5; "
                   f"tradeoff lhs={t.lhs:.6f} <= rhs={t.rhs:.4f} within 1e-4 of "
                   f"(0.060025, 0.9052), holds={t.holds}")
    assert ok


def test_criterion_07_derivative_vs_central_difference():
    h = 1e-5
    worst = 0.0
    for params in _sweep_params():
        for eta in _GRID99:
            numeric = (r_exact(eta + h, params) - r_exact(eta - h, params)) / (2 * h)
            worst = max(worst, abs(r_derivative(eta, params) - numeric))
    ok = worst <= 1e-6
    _report(7, ok, f"analytic R' vs central difference (h=1e-5) over grid and "
                   f"(A,k) set: max |diff|={worst:.2e} <= 1e-6")
    assert ok


def _bfs_reference(graph, occupied):
    labels = [-1] * graph.n_vertices
    sizes = {}
    for start in range(graph.n_vertices):
        if not occupied[start] or labels[start] != -1:
            continue
        labels[start] = start
        count = 0
        queue = deque([start])
        while queue:
            v = queue.popleft()
            count += 1
            for w in graph.adjacency[v]:
                if occupied[w] and labels[w] == -1:
                    labels[w] = start
                    queue.append(w)
        sizes[start] = count
    return labels, sizes


def test_criterion_08_cluster_oracle():
    checked = 0
    ok = True
    for seed in range(100):
        q = 2 + seed % 7
        steps = 2 + (seed * 3) % 9
        graph = build_interaction_graph(generate_random_circuit(q, steps, min(3, q), seed))
        if graph.n_vertices > 200:
            ok = False
        eta = (0.2, 0.4, 0.6, 0.8)[seed % 4]
        config = sample_configuration(graph, eta, seed=seed + 1000)
        dec = find_clusters(graph, config)
        labels, sizes = _bfs_reference(graph, config.occupied)
        if list(dec.labels) != labels or dec.sizes != sizes:
            ok = False
        checked += 1
    _report(8, ok, f"disjoint-set decomposition == BFS reference on {checked} "
                   "random graphs (<= 200 vertices), exact equality")
    assert ok and checked == 100


def test_criterion_09_renormalization_mc():
    from percrg.circuit import parse_circuit

    t0 = time.perf_counter()
    base = build_interaction_graph(parse_circuit("qubits 1\n" + "step: H 0\n" * 10))
    assert base.n_vertices == 10
    trials = 100000
    mc = empirical_renormalized_density(base, GadgetTemplate.path(3),
                                        eta=0.1, k=1, trials=trials, seed=0)
    elapsed = time.perf_counter() - t0
    sigma = math.sqrt(0.028 * (1 - 0.028) / (trials * base.n_vertices))
    err = abs(mc.density - 0.028)
    corr_cap = 3 / math.sqrt(trials)
    ok = err <= 3 * sigma and mc.max_abs_correlation <= corr_cap and elapsed < 30.0
    _report(9, ok, f"A=3 k=1 gadget on a 10-vertex base, eta=0.1, 1e5 trials: "
                   f"|density-0.028|={err:.2e} <= 3*sigma={3 * sigma:.2e}, "
                   f"max corr={mc.max_abs_correlation:.4f} <= {corr_cap:.4f}, "
                   f"runtime {elapsed:.1f}s < 30s")
    assert ok


def test_criterion_10_self_similarity():
    template = GadgetTemplate.path(3)
    ok = True
    bases = []
    for seed in range(100):
        q = 2 + seed % 5          # up to 6 qubits
        steps = 2 + (seed * 7) % 5  # up to 6 steps
        base = build_interaction_graph(generate_random_circuit(q, steps, min(3, q), seed))
        bases.append(base)
        expanded = expand_graph(base, template, 1)
        if contract_graph(expanded) != base or not verify_self_similarity(base, expanded).ok:
            ok = False
    for base in bases[:10]:
        two = expand_graph(base, template, 2)
        if contract_graph(two) != expand_graph(base, template, 1).graph:
            ok = False
        if not verify_self_similarity(two.parent, two).ok:
            ok = False
    _report(10, ok, "contract(expand(G, template, 1)) == G for 100 random circuits "
                    "(<= 6 qubits x 6 steps) and for r=2 on 10 of them, exact equality")
    assert ok


def test_criterion_11_eta_c_below_eta_star():
    t0 = time.perf_counter()

    def family(L: int):
        return generate_lattice_circuit(L, L, 0)

    etas = [0.30 + 0.05 * i for i in range(14)]
    est = estimate_eta_star(family, sizes=[8, 16, 32], etas=etas, trials=10000, seed=0)
    eta_c = find_threshold(RGParams(A=10, k=1)).eta_c
    elapsed = time.perf_counter() - t0
    ok = est.eta_star > 10 * eta_c and elapsed < 120.0
    _report(11, ok, f"lattice family L in (8,16,32), 1e4 trials: eta_star="
                    f"{est.eta_star:.4f} > 10*eta_c(A=10,k=1)={10 * eta_c:.4f}, "
                    f"runtime {elapsed:.1f}s < 2min")
    assert ok


def test_criterion_12_thread_reproducibility(tmp_path):
    circuit = tmp_path / "circuit.txt"
    from percrg.circuit import serialize_circuit
    circuit.write_text(serialize_circuit(generate_lattice_circuit(6, 6, 0)))
    graph = tmp_path / "graph.json"
    assert _cli("graph", "build", "--circuit", str(circuit), "--out", str(graph),
                cwd=tmp_path).returncode == 0

    pairs = []
    run = ("perc", "run", "--graph", str(graph), "--etas", "0.3,0.6",
           "--trials", "2000", "--seed", "5")
    star = ("perc", "eta-star", "--family", "chain", "--sizes", "4,6",
            "--etas", "0.5,0.7,0.9,0.95", "--trials", "500", "--seed", "5")
    mc = ("concat", "mc", "--graph", str(graph), "--A", "3", "--k", "1",
          "--eta", "0.1", "--trials", "2000", "--seed", "5")
    for name, args in (("run", run), ("star", star), ("mc", mc)):
        outs = []
        for threads in ("1", "4"):
            out = tmp_path / f"{name}-{threads}.out"
            proc = _cli(*args, "--threads", threads, "--out", str(out), cwd=tmp_path)
            assert proc.returncode == 0, proc.stderr
            outs.append(out.read_bytes())
        pairs.append(outs[0] == outs[1])
    ok = all(pairs)
    _report(12, ok, "perc run, perc eta-star, concat mc: --threads 1 vs 4 "
                    "produce byte-identical output files")
    assert ok
