import itertools

import networkx as nx
import pytest

from ttforge.amd import (
    LoopBudget,
    admissible_structures,
    build_amd,
    build_chart,
    build_web,
    building_trace,
    find_representative_loop,
    format_trace,
    graph_building_trace,
    irreducibility_potential,
    passes_to_build,
    red_pairs,
)
from ttforge.freegroup import NielsenGen
from ttforge.ltt import LTTStructure, is_birecurrent, validate
from ttforge.moves import check_am_properties, enumerate_ingoing
from ttforge.traintrack import is_train_track, turn
from ttforge.whitehead import enumerate_catalog, epp_symmetries, resolve_graph, star_graph, unlabel

A, B, C = 1, 2, 3


def chart_orbit_count(g):
    """Type (*) structures with free vertex C over g, counted up to the 8 symmetries fixing the pair c."""
    labels = [A, -A, B, -B, C]
    labeled = {frozenset(turn(p[x], p[y]) for x, y in g.edges) for p in itertools.permutations(labels)}
    syms = epp_symmetries(3)
    orbits = set()
    for edges in labeled:
        deg = {v: sum(v in e for e in edges) for v in labels}
        leaf_pairs = [e for e in edges if e[0] == -e[1] and min(deg[e[0]], deg[e[1]]) == 1]
        if len(leaf_pairs) >= 2:
            continue
        for v in labels:
            s = LTTStructure.type_star(3, -C, v, edges)
            if validate(s):
                continue
            orbits.add(min(tuple(sorted(s.relabel(p).edges)) for p in syms))
    return len(orbits)


def test_graph_vii_chart_has_one_boxed_cell():
    chart = build_chart(resolve_graph("VII"))
    assert len(chart.boxed) == 1
    for c in chart.cells:
        assert c.boxed == is_birecurrent(c.structure)


def test_star_chart_has_two_crossed_cells():
    chart = build_chart(star_graph())
    assert len(chart.cells) == 2
    assert not chart.boxed


def test_chart_cell_counts_match_orbit_count():
    for g in enumerate_catalog():
        assert len(build_chart(g).cells) == chart_orbit_count(g)


def test_chart_json_is_stable():
    g = resolve_graph("VII")
    assert build_chart(g).to_json() == build_chart(g).to_json()


def test_graph_vii_web_is_one_node_with_two_loops():
    web = build_web(build_chart(resolve_graph("VII")))
    w = web.schematic()
    assert w.number_of_nodes() == 1
    assert sorted(d["kind"] for _, _, d in w.edges(data=True)) == ["extension", "switch"]


def test_star_diagram_is_empty():
    d = build_amd(star_graph())
    assert not d.nodes and not d.edges and not d.components


def test_graph_vii_diagram():
    d = build_amd(resolve_graph("VII"))
    assert len(d.component_classes()) == 1
    syms = epp_symmetries(3, 0)
    for comp in d.components:
        # one node and two loops once labels are forgotten
        first = comp[0]
        assert all(any(first.relabel(p) == s for p in syms) for s in comp)
        kinds = sorted(t.kind for t in d.component_edges(comp))
        assert kinds.count("extension") == kinds.count("switch")
        assert not irreducibility_potential(comp)
        assert len(red_pairs(comp)) == 2


def test_graph_v_diagram_lacks_potential():
    d = build_amd(resolve_graph("V"))
    assert d.components
    for comp in d.components:
        assert len(red_pairs(comp)) <= 2
        assert not irreducibility_potential(comp)


def test_potential_when_all_pairs_are_red():
    d = build_amd(resolve_graph("XX"))
    assert any(red_pairs(c) == {1, 2, 3} for c in d.components)
    assert all(irreducibility_potential(c) == (red_pairs(c) == {1, 2, 3}) for c in d.components)


def test_diagram_is_closed_and_maximal():
    g = resolve_graph("II")
    d = build_amd(g)
    nodes = set(d.nodes)
    everything = admissible_structures(g, 3)
    full = nx.DiGraph()
    full.add_nodes_from(everything)
    for s in everything:
        for t in enumerate_ingoing(s):
            full.add_edge(t.source, t.dest)
    members = {s: i for i, comp in enumerate(d.components) for s in comp}
    assert set(members) == nodes
    edge_set = {(t.source, t.dest, t.gen) for t in d.edges}
    for s in nodes:
        assert unlabel(s.purple_graph()) == g
        for t in enumerate_ingoing(s):
            if members.get(t.source) == members[s]:
                assert (t.source, t.dest, t.gen) in edge_set
    sccs = [c for c in nx.strongly_connected_components(full) if len(c) > 1 or full.has_edge(*(next(iter(c)),) * 2)]
    assert sorted(map(sorted, sccs)) == sorted(map(sorted, d.components))


def test_diagram_edges_are_admissible_triples():
    d = build_amd(resolve_graph("V"))
    for t in d.edges:
        assert t.admissible
        assert t.kind in ("extension", "switch")


def test_building_trace_worked_example():
    gens = [NielsenGen(C, -B), NielsenGen(-B, C), NielsenGen(-B, C), NielsenGen(A, -B)]
    assert [str(g) for g in gens] == ["c -> Bc", "b -> bC", "b -> bC", "a -> Ba"]
    trace = building_trace(gens, 3)
    assert trace[0] == {turn(C, B)}
    assert trace[1] == {turn(C, B), turn(-B, -C)}
    assert trace[2] == {turn(C, B), turn(-B, -C), turn(C, -C)}
    assert trace[3] == {turn(C, B), turn(-B, -C), turn(C, -C), turn(A, B)}
    assert format_trace(trace)[0] == "{b,c}"


def test_building_trace_single_generator():
    assert building_trace([NielsenGen(A, B)], 3) == [{turn(A, -B)}]


def test_graph_vii_unachievable():
    res = find_representative_loop(resolve_graph("VII"))
    assert res.status == "unachievable"
    assert "irreducibility" in res.reason


def test_star_unachievable():
    res = find_representative_loop(star_graph())
    assert res.status == "unachievable"
    assert res.reason == "no admissible structures"


@pytest.mark.parametrize("name", ["I", "IV", "XI", "XX"])
def test_found_loops_recheck(name):
    g = resolve_graph(name)
    res = find_representative_loop(g)
    assert res.status == "found"
    for cand in res.loops:
        comp = cand.composition
        assert is_train_track(cand.map)
        assert check_am_properties(comp, cyclic=True).failures() == []
        assert cand.pnp.kind == "none_found"
        k = passes_to_build(comp)
        assert k is not None
        assert comp.structures[-1].purple_edges <= graph_building_trace(comp, k)[-1]


def test_tiny_budget_is_inconclusive():
    res = find_representative_loop(resolve_graph("XX"), budget=LoopBudget(max_length=2))
    assert res.status == "inconclusive"
