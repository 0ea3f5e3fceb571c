"""Gadget expansion, contraction, self-similarity, and coarse-graining."""

from __future__ import annotations

import math

import numpy as np
import pytest

from percrg.circuit import generate_lattice_circuit, generate_random_circuit, parse_circuit
from percrg.concat import (
    RECOVERY_KIND,
    ExpandedGraph,
    GadgetTemplate,
    RoutingError,
    coarse_grain,
    contract_graph,
    dump_template,
    empirical_renormalized_density,
    expand_graph,
    load_template,
    verify_self_similarity,
)
from percrg.graph import build_interaction_graph
from percrg.percolation import Configuration, sample_configuration
from percrg.rgmap import RGParams, r_exact


def _graph(text: str):
    return build_interaction_graph(parse_circuit(text))


_TWO_GATE = "qubits 1\nstep: H 0\nstep: H 0\n"


# ── templates ────────────────────────────────────────────────────────


def test_path_template_layout():
    t = GadgetTemplate.path(5)
    assert t.size == 5
    assert t.recovery_size == 3  # ceil(5/2)
    assert t.internal_edges == ((0, 1), (1, 2), (2, 3), (3, 4))
    assert t.input_ports == (0,)
    assert t.output_ports == (4,)


def test_template_validation():
    with pytest.raises(ValueError, match="at least 2"):
        GadgetTemplate.path(1)
    with pytest.raises(ValueError, match="nonempty"):
        GadgetTemplate(size=3, recovery_size=3, internal_edges=((0, 1), (1, 2)),
                       input_ports=(0,), output_ports=(2,))
    with pytest.raises(ValueError, match="connected"):
        GadgetTemplate(size=3, recovery_size=1, internal_edges=((0, 1),),
                       input_ports=(0,), output_ports=(2,))
    with pytest.raises(ValueError, match="bad internal edge"):
        GadgetTemplate(size=3, recovery_size=1, internal_edges=((0, 0), (0, 1), (1, 2)),
                       input_ports=(0,), output_ports=(2,))
    with pytest.raises(ValueError, match="port"):
        GadgetTemplate(size=3, recovery_size=1, internal_edges=((0, 1), (1, 2)),
                       input_ports=(0,), output_ports=(7,))


def test_template_json_round_trip():
    t = GadgetTemplate(size=4, recovery_size=2,
                       internal_edges=((0, 1), (1, 2), (2, 3), (0, 3)),
                       input_ports=(0, 1), output_ports=(3,))
    text = dump_template(t)
    assert load_template(text) == t
    assert dump_template(load_template(text)) == text
    assert '"A":4' in text


# ── expansion ────────────────────────────────────────────────────────


def test_expanding_one_edge_gives_a_path():
    # two gates joined by a wire, path template of 3: a 6-vertex path
    expanded = expand_graph(_graph(_TWO_GATE), GadgetTemplate.path(3), 1)
    g = expanded.graph
    assert g.n_vertices == 6
    assert g.edges == ((0, 1), (1, 2), (2, 3), (3, 4), (4, 5))
    assert expanded.partition == (0, 0, 0, 1, 1, 1)
    assert expanded.level == 1


def test_expansion_counts():
    # V_fine = V * A and E_fine = V * E_template + E_base for one-port paths
    for seed in range(4):
        base = build_interaction_graph(generate_random_circuit(4, 4, 2, seed))
        for A in (2, 3, 5):
            g = expand_graph(base, GadgetTemplate.path(A), 1).graph
            assert g.n_vertices == base.n_vertices * A
            assert g.n_edges == base.n_vertices * (A - 1) + base.n_edges


def test_expanded_vertex_metadata():
    base = _graph("qubits 2\nstep: CX 0 1\nstep: T 0\n")
    g = expand_graph(base, GadgetTemplate.path(4), 1).graph
    for v in g.vertices:
        parent = base.vertices[v.id // 4]
        j = v.id % 4
        assert v.kind == (RECOVERY_KIND if j < 2 else parent.kind)
        assert v.time == (parent.time - 1) * 4 + j + 1
        assert v.qubits == parent.qubits


def test_two_level_expansion():
    base = _graph(_TWO_GATE)
    t = GadgetTemplate.path(3)
    two = expand_graph(base, t, 2)
    assert two.graph.n_vertices == base.n_vertices * 9
    assert two.level == 2
    assert two.parent == expand_graph(base, t, 1).graph
    assert expand_graph(base, t, 2).graph == two.graph  # deterministic


def test_port_round_robin_is_balanced():
    # a hub with three outgoing wires and two output ports: usage 2/1
    base = _graph("qubits 3\nstep: CCZ 0 1 2\nstep: H 0; H 1; H 2\n")
    t = GadgetTemplate(size=3, recovery_size=1, internal_edges=((0, 1), (1, 2)),
                       input_ports=(0,), output_ports=(1, 2))
    g = expand_graph(base, t, 1).graph
    hub_out = [e for e in g.edges if e[0] in (1, 2) and e[1] >= 3]
    assert len(hub_out) == 3
    assert sorted(e[0] for e in hub_out) == [1, 1, 2]


def test_expansion_needs_ports_when_wires_exist():
    t = GadgetTemplate(size=2, recovery_size=1, internal_edges=((0, 1),),
                       input_ports=(), output_ports=())
    with pytest.raises(RoutingError, match="cannot route"):
        expand_graph(_graph(_TWO_GATE), t, 1)
    # edgeless base is fine without ports
    lone = _graph("qubits 1\nstep: H 0\n")
    assert expand_graph(lone, t, 1).graph.n_vertices == 2


def test_expand_argument_validation():
    with pytest.raises(ValueError, match="levels"):
        expand_graph(_graph(_TWO_GATE), GadgetTemplate.path(3), 0)


# ── contraction and self-similarity ──────────────────────────────────


def test_contract_inverts_expand():
    for seed in range(6):
        base = build_interaction_graph(generate_random_circuit(5, 4, 3, seed))
        for A in (2, 3, 4):
            expanded = expand_graph(base, GadgetTemplate.path(A), 1)
            assert contract_graph(expanded) == base


def test_contract_two_levels_returns_level_one():
    base = build_interaction_graph(generate_lattice_circuit(4, 4, 1))
    t = GadgetTemplate.path(3)
    two = expand_graph(base, t, 2)
    assert contract_graph(two) == expand_graph(base, t, 1).graph


def test_self_similarity_holds_for_honest_expansions():
    for seed in range(4):
        base = build_interaction_graph(generate_random_circuit(4, 5, 2, seed))
        for levels in (1, 2):
            expanded = expand_graph(base, GadgetTemplate.path(3), levels)
            result = verify_self_similarity(expanded.parent, expanded)
            assert result.ok
            assert result.detail == "exact match"
            assert result.mapping == {b: b for b in range(expanded.parent.n_vertices)}


def test_self_similarity_detects_a_dropped_wire():
    base = _graph(_TWO_GATE)
    honest = expand_graph(base, GadgetTemplate.path(3), 1)
    from percrg.graph import InteractionGraph
    doctored = InteractionGraph(honest.graph.vertices,
                                [e for e in honest.graph.edges if e != (2, 3)])
    result = verify_self_similarity(
        base, ExpandedGraph(graph=doctored, partition=honest.partition,
                            level=1, parent=base))
    assert not result.ok
    assert result.detail == "missing coarse edge (0, 1)"
    assert result.mapping is None


def test_self_similarity_detects_an_extra_wire():
    base = _graph("qubits 1\nstep: H 0\nstep: H 0\nstep: H 0\n")
    honest = expand_graph(base, GadgetTemplate.path(3), 1)
    from percrg.graph import InteractionGraph
    doctored = InteractionGraph(honest.graph.vertices,
                                list(honest.graph.edges) + [(2, 6)])
    result = verify_self_similarity(
        base, ExpandedGraph(graph=doctored, partition=honest.partition,
                            level=1, parent=base))
    assert not result.ok
    assert result.detail == "unexpected coarse edge (0, 2)"


def test_self_similarity_detects_block_count_mismatch():
    base = _graph(_TWO_GATE)
    honest = expand_graph(base, GadgetTemplate.path(3), 1)
    result = verify_self_similarity(
        base, ExpandedGraph(graph=honest.graph, partition=(0,) * 6,
                            level=1, parent=base))
    assert not result.ok
    assert "block count 1 != base order 2" in result.detail


# ── coarse-graining ──────────────────────────────────────────────────


def test_coarse_grain_threshold_boundary():
    # a single block of 4: exactly k occupied stays vacant, k+1 flips it
    base = _graph("qubits 1\nstep: H 0\n")
    expanded = expand_graph(base, GadgetTemplate.path(4), 1)
    two = Configuration(occupied=np.array([True, True, False, False]), eta=0.5, seed=0)
    three = Configuration(occupied=np.array([True, True, True, False]), eta=0.5, seed=0)
    _, coarse_two = coarse_grain(expanded, two, k=2)
    coarse, coarse_three = coarse_grain(expanded, three, k=2)
    assert not coarse_two.occupied[0]
    assert coarse_three.occupied[0]
    assert coarse == base
    assert coarse_three.eta == 0.5 and coarse_three.seed == 0


def test_coarse_grain_matches_direct_block_counts():
    base = build_interaction_graph(generate_lattice_circuit(4, 4, 2))
    expanded = expand_graph(base, GadgetTemplate.path(3), 1)
    config = sample_configuration(expanded.graph, 0.4, seed=6)
    coarse, coarse_config = coarse_grain(expanded, config, k=1)
    assert coarse == base
    for b in range(base.n_vertices):
        members = [v for v in range(expanded.graph.n_vertices)
                   if expanded.partition[v] == b]
        count = sum(bool(config.occupied[v]) for v in members)
        assert bool(coarse_config.occupied[b]) == (count >= 2)


def test_coarse_grain_validation():
    base = _graph(_TWO_GATE)
    expanded = expand_graph(base, GadgetTemplate.path(3), 1)
    bad = Configuration(occupied=np.array([True]), eta=0.5, seed=0)
    with pytest.raises(ValueError, match="length"):
        coarse_grain(expanded, bad, k=1)
    good = sample_configuration(expanded.graph, 0.5, seed=0)
    with pytest.raises(ValueError, match="k"):
        coarse_grain(expanded, good, k=-1)


# ── renormalization Monte Carlo ──────────────────────────────────────


def test_empirical_density_matches_the_map():
    base = build_interaction_graph(generate_lattice_circuit(4, 4, 2))
    mc = empirical_renormalized_density(base, GadgetTemplate.path(3),
                                        eta=0.1, k=1, trials=20000, seed=0)
    assert mc.predicted == r_exact(0.1, RGParams(A=3, k=1))
    assert abs(mc.density - mc.predicted) < 3 * mc.se
    # blocks own disjoint vertex sets, so occupancy is independent: pure noise
    assert mc.max_abs_correlation < 3 / math.sqrt(mc.trials)
    assert mc.n_blocks == base.n_vertices


def test_empirical_density_at_the_extremes():
    base = _graph(_TWO_GATE)
    zero = empirical_renormalized_density(base, GadgetTemplate.path(3),
                                          eta=0.0, k=1, trials=50, seed=1)
    assert zero.density == 0.0 and zero.max_abs_correlation == 0.0
    one = empirical_renormalized_density(base, GadgetTemplate.path(3),
                                         eta=1.0, k=1, trials=50, seed=1)
    assert one.density == 1.0 and one.se == 0.0
    assert one.predicted == 1.0
    assert one.max_abs_correlation == 0.0  # constant columns carry no signal


def test_empirical_density_thread_invariance():
    base = build_interaction_graph(generate_lattice_circuit(4, 4, 0))
    kw = dict(eta=0.15, k=1, trials=6000, seed=3)
    one = empirical_renormalized_density(base, GadgetTemplate.path(3), threads=1, **kw)
    four = empirical_renormalized_density(base, GadgetTemplate.path(3), threads=4, **kw)
    assert one == four


def test_empirical_density_validation():
    base = _graph(_TWO_GATE)
    t = GadgetTemplate.path(3)
    with pytest.raises(ValueError, match="trials"):
        empirical_renormalized_density(base, t, eta=0.1, k=1, trials=1, seed=0)
    with pytest.raises(ValueError, match="k must lie"):
        empirical_renormalized_density(base, t, eta=0.1, k=3, trials=10, seed=0)
    with pytest.raises(ValueError, match="eta"):
        empirical_renormalized_density(base, t, eta=-0.2, k=1, trials=10, seed=0)
    with pytest.raises(ValueError, match="threads"):
        empirical_renormalized_density(base, t, eta=0.1, k=1, trials=10, seed=0, threads=0)
