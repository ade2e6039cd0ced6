"""LTT charts, admissible map diagrams, and the search for representative loops.

The diagram for a pIW graph has a node for every labeled admissible
Type (*) structure whose purple graph is a labeling of the graph, and an
edge for every admissible extension or switch between two such nodes.
Only the maximal strongly connected subgraphs are kept, since a
representative is a closed loop.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import networkx as nx

from .freegroup import RoseMap, directions, format_rosemap, power
from .ltt import LTTStructure, is_birecurrent, validate
from .moves import Composition, GeneratorTriple, admissible, enumerate_ingoing
from .pnp import Budget, NotApplicable, PNPVerdict, find_ipnps
from .traintrack import gates, is_primitive, is_train_track, rotationless_exponent, transition_matrix, turn, turn_str
from .whitehead import LabeledGraph, PIWGraph, _edge_key, _label_key, epp_canonical, epp_symmetries, stable_whitehead_graph, unlabel


def _check_graph(g: PIWGraph, rank: int) -> None:
    if not g.is_type_star(rank):
        raise ValueError(f"graph is not a connected loop-free graph on {2 * rank - 1} vertices")


def labelings(g: PIWGraph, labels) -> list[LabeledGraph]:
    """Distinct labeled copies of ``g`` with the given vertex labels, sorted."""
    seen = set()
    for perm in itertools.permutations(labels):
        seen.add(LabeledGraph(tuple(labels), frozenset((perm[a], perm[b]) for a, b in g.edges)))
    return sorted(seen, key=_graph_key)


def _graph_key(lg: LabeledGraph):
    return (tuple(_label_key(v) for v in lg.vertices), tuple(sorted(_edge_key(e) for e in lg.edges)))


def _pair_edges_at_leaves(lg: LabeledGraph) -> list:
    return [e for e in lg.edges if e[0] == -e[1] and (lg.degree(e[0]) == 1 or lg.degree(e[1]) == 1)]


# -- chart ------------------------------------------------------------------------


@dataclass(frozen=True)
class ChartCell:
    column: int
    row: int
    structure: LTTStructure
    boxed: bool

    @property
    def name(self) -> str:
        return f"{_roman(self.column + 1)}{chr(ord('a') + self.row)}"

    def to_json(self) -> dict:
        return {"name": self.name, "boxed": self.boxed, "structure": self.structure.to_json()}


@dataclass(frozen=True)
class LTTChart:
    graph: PIWGraph
    rank: int
    columns: tuple  # determining graphs, EPP canonical
    cells: tuple

    @property
    def boxed(self) -> list[ChartCell]:
        return [c for c in self.cells if c.boxed]

    def to_json(self) -> dict:
        return {
            "graph": self.graph.to_json(),
            "rank": self.rank,
            "columns": [
                {
                    "name": _roman(i + 1),
                    "determining_graph": col.to_json(),
                    "cells": [c.to_json() for c in self.cells if c.column == i],
                }
                for i, col in enumerate(self.columns)
            ],
        }


def _roman(n: int) -> str:
    out = ""
    for value, sym in ((10, "X"), (9, "IX"), (5, "V"), (4, "IV"), (1, "I")):
        while n >= value:
            out += sym
            n -= value
    return out


def build_chart(g: PIWGraph, rank: int = 3) -> LTTChart:
    """Chart of candidate structures with free vertex ``-rank``, one column per EPP class.

    Columns with two leaf edges joining an edge pair are left out; a row is
    every attachment of the red edge that does not create such an edge,
    one per EPP class.  Cells are boxed when the structure is birecurrent.
    """
    _check_graph(g, rank)
    red = -rank
    labels = [d for d in directions(rank) if d != red]
    cols = sorted({epp_canonical(lg, rank) for lg in labelings(g, labels)}, key=_graph_key)
    cols = [c for c in cols if len(_pair_edges_at_leaves(c)) < 2]
    cells = []
    epp = epp_symmetries(rank)
    for i, col in enumerate(cols):
        row = 0
        seen = set()
        for v in col.vertices:
            s = LTTStructure.type_star(rank, red, v, col.edges)
            if validate(s, "type_star"):
                continue
            k = min(s.relabel(p).key() for p in epp)
            if k in seen:
                continue
            seen.add(k)
            cells.append(ChartCell(i, row, s, is_birecurrent(s)))
            row += 1
    return LTTChart(g, rank, tuple(cols), tuple(cells))


# -- web ---------------------------------------------------------------------------


@dataclass
class Web:
    """Ingoing triples found by recursing backwards from the boxed chart cells.

    Structures are labeled; ``classes`` maps each structure to the chart cell
    EPP-equivalent to it.
    """

    chart: LTTChart
    triples: list = field(default_factory=list)
    classes: dict = field(default_factory=dict)

    def schematic(self) -> nx.MultiDiGraph:
        """Arrows between chart cell names."""
        w = nx.MultiDiGraph()
        w.add_nodes_from(c.name for c in self.chart.boxed)
        for t in self.triples:
            w.add_edge(self.classes[t.source], self.classes[t.dest], kind=t.kind)
        return w


def _structure_class(s: LTTStructure, rank: int) -> LTTStructure:
    """EPP representative of a structure after moving its red vertex to ``-rank``."""
    best = None
    for perm in _signed_perms(rank):
        if perm[s.red_vertex] != -rank:
            continue
        t = s.relabel(perm)
        if best is None or t.key() < best.key():
            best = t
    return best


def _signed_perms(rank: int) -> list[dict]:
    return epp_symmetries(rank, fixed_pairs=0)


def build_web(chart: LTTChart) -> Web:
    by_struct = {}
    for c in chart.cells:
        by_struct[_structure_class(c.structure, chart.rank)] = c
    web = Web(chart)
    seen = set()
    todo = [c.structure for c in chart.boxed]
    while todo:
        s = todo.pop(0)
        k = _structure_class(s, chart.rank)
        if k in seen:
            continue
        seen.add(k)
        web.classes[s] = by_struct[k].name
        for t in enumerate_ingoing(s):
            web.triples.append(t)
            web.classes.setdefault(t.source, by_struct[_structure_class(t.source, chart.rank)].name)
            # a branch ends at a structure already met, up to relabeling
            todo.append(t.source)
    return web


# -- diagram -----------------------------------------------------------------------


@dataclass
class AMDiagram:
    graph: PIWGraph
    rank: int
    nodes: list  # sorted LTTStructures
    edges: list  # GeneratorTriples, sorted
    components: list  # lists of structures, one per strongly connected piece

    def __len__(self):
        return len(self.nodes)

    def digraph(self) -> nx.MultiDiGraph:
        d = nx.MultiDiGraph()
        d.add_nodes_from(self.nodes)
        for t in self.edges:
            d.add_edge(t.source, t.dest, triple=t)
        return d

    def component_edges(self, comp) -> list[GeneratorTriple]:
        members = set(comp)
        return [t for t in self.edges if t.source in members and t.dest in members]

    def component_classes(self) -> list[list[int]]:
        """Indices of components grouped by signed relabeling."""
        keys = [_component_key(c, self.rank) for c in self.components]
        groups: dict = {}
        for i, k in enumerate(keys):
            groups.setdefault(k, []).append(i)
        return sorted(groups.values())

    def to_json(self) -> dict:
        idx = {s: i for i, s in enumerate(self.nodes)}
        return {
            "graph": self.graph.to_json(),
            "rank": self.rank,
            "nodes": [{"id": i, "structure": s.to_json()} for i, s in enumerate(self.nodes)],
            "edges": [
                {"source": idx[t.source], "dest": idx[t.dest], "generator": str(t.gen), "kind": t.kind}
                for t in self.edges
            ],
            "components": [sorted(idx[s] for s in c) for c in self.components],
            "component_classes": self.component_classes(),
        }

    def to_dot(self, name: str = "AMD") -> str:
        idx = {s: i for i, s in enumerate(self.nodes)}
        lines = [f"digraph {name} {{"]
        for s, i in idx.items():
            lines.append(f'  n{i} [label="{s}"];')
        for t in self.edges:
            style = "solid" if t.kind == "extension" else "dashed"
            lines.append(f'  n{idx[t.source]} -> n{idx[t.dest]} [label="{t.gen}", style={style}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _component_key(comp, rank: int):
    return min(tuple(sorted(s.relabel(p).key() for s in comp)) for p in _signed_perms(rank))


def admissible_structures(g: PIWGraph, rank: int = 3) -> list[LTTStructure]:
    """Every labeled admissible Type (*) structure whose purple graph is a copy of ``g``."""
    _check_graph(g, rank)
    out = []
    for red in directions(rank):
        labels = [d for d in directions(rank) if d != red]
        for lg in labelings(g, labels):
            for v in lg.vertices:
                s = LTTStructure.type_star(rank, red, v, lg.edges)
                if admissible(s):
                    out.append(s)
    return sorted(out, key=LTTStructure.key)


def build_amd(g: PIWGraph, rank: int = 3) -> AMDiagram:
    """Diagram on labeled admissible structures, trimmed to its strongly connected pieces."""
    nodes = admissible_structures(g, rank)
    d = nx.MultiDiGraph()
    d.add_nodes_from(nodes)
    triples = []
    for s in nodes:
        for t in enumerate_ingoing(s):
            triples.append(t)
            d.add_edge(t.source, t.dest)
    comps = []
    for c in nx.strongly_connected_components(d):
        if len(c) > 1 or d.has_edge(next(iter(c)), next(iter(c))):
            comps.append(sorted(c, key=LTTStructure.key))
    comps.sort(key=lambda c: c[0].key())
    keep = {s: i for i, c in enumerate(comps) for s in c}
    edges = [t for t in triples if t.source in keep and t.dest in keep and keep[t.source] == keep[t.dest]]
    edges.sort(key=_triple_key)
    return AMDiagram(g, rank, sorted(keep, key=LTTStructure.key), edges, comps)


def _triple_key(t: GeneratorTriple):
    return (t.dest.key(), t.source.key(), t.kind, _edge_key(t.determining_edge))


def red_pairs(component) -> set[int]:
    return {abs(s.red_vertex) for s in component}


def irreducibility_potential(component, rank: int | None = None) -> bool:
    """Every edge pair labels the red vertex of some node."""
    component = list(component)
    if not component:
        return False
    rank = rank or component[0].rank
    return red_pairs(component) == set(range(1, rank + 1))


# -- graph building -------------------------------------------------------------------


def building_trace(gens, rank: int, passes: int = 1) -> list[frozenset]:
    """Subgraphs H_1..H_n: created red turns pushed through later direction maps.

    H_k is the image of H_{k-1} under the k-th generator's direction map
    together with the red edge that generator creates.  With ``passes`` > 1
    the generators are run around again, starting from the last H.
    """
    out = []
    h: frozenset = frozenset()
    for _ in range(passes):
        for g in gens:
            tab = {d: d for d in directions(rank)}
            tab[g.folded] = g.prefix
            h = frozenset(turn(tab[a], tab[b]) for a, b in h) | {turn(g.folded, -g.prefix)}
            out.append(h)
    return out


def graph_building_trace(comp: Composition, passes: int = 1) -> list[frozenset]:
    """:func:`building_trace` for a chained composition."""
    if not comp.gens:
        return []
    if not comp.is_chained():
        raise ValueError("composition is not chained")
    return building_trace(comp.gens, comp.rank, passes)


def graph_built(comp: Composition, passes: int = 1) -> bool:
    trace = graph_building_trace(comp, passes)
    return bool(trace) and comp.structures[-1].purple_edges <= trace[-1]


def passes_to_build(comp: Composition, limit: int = 16) -> int | None:
    """Fewest trips around a loop after which the last H contains the purple graph."""
    for k in range(1, limit + 1):
        if graph_built(comp, k):
            return k
    return None


def format_trace(trace) -> list[str]:
    return [" ".join(turn_str(e) for e in sorted(h, key=_edge_key)) for h in trace]


# -- loop search --------------------------------------------------------------------

DEFAULT_MAX_LENGTH = 64
DEFAULT_MAX_CANDIDATES = 200_000


@dataclass(frozen=True)
class LoopBudget:
    max_length: int = DEFAULT_MAX_LENGTH
    max_candidates: int = DEFAULT_MAX_CANDIDATES


@dataclass
class LoopCandidate:
    """A closed walk in the diagram, generators in application order."""

    composition: Composition
    map: RoseMap
    power: int
    pnp: PNPVerdict
    trace: list

    @property
    def gens(self) -> tuple:
        return self.composition.gens

    def to_json(self, trace: bool = False) -> dict:
        out = {
            "generators": [str(g) for g in self.gens],
            "structures": [s.to_json() for s in self.composition.structures],
            "map": format_rosemap(self.map),
            "rotationless_power": self.power,
            "pnp": self.pnp.to_json(trace),
        }
        if trace:
            out["graph_building"] = format_trace(self.trace)
        return out


@dataclass
class SearchResult:
    status: str  # "found", "unachievable", "inconclusive"
    reason: str = ""
    loops: list = field(default_factory=list)
    candidates: int = 0
    rejections: dict = field(default_factory=dict)
    max_length_reached: int = 0

    def to_json(self, trace: bool = False) -> dict:
        return {
            "status": self.status,
            "reason": self.reason,
            "candidates_checked": self.candidates,
            "max_length_reached": self.max_length_reached,
            "rejections": dict(sorted(self.rejections.items())),
            "loops": [c.to_json(trace) for c in self.loops],
        }


def loop_rejection(comp: Composition, g: PIWGraph, pnp_budget: Budget | None = None):
    """First failed final check of a closed walk, or the accepted candidate.

    Checks run cheapest first: every edge pair folded and prefixed, train
    track, 2r-1 fixed directions after the rotationless power, primitive
    matrix, ideal Whitehead graph of the target class, no PNPs.
    """
    r = comp.rank
    idx = set(range(1, r + 1))
    if {abs(x.folded) for x in comp.gens} != idx or {abs(x.prefix) for x in comp.gens} != idx:
        return "edge_pairs"
    f = comp.to_map()
    if not is_train_track(f):
        return "train_track"
    p = rotationless_exponent(f)
    budget = pnp_budget or Budget()
    if p > budget.max_power:
        return "rotationless_power"
    h = power(f, p)
    if len(gates(h).fixed) != 2 * r - 1:
        return "fixed_directions"
    if not is_primitive(transition_matrix(f)):
        return "primitive"
    if unlabel(stable_whitehead_graph(h)) != g:
        return "whitehead_graph"
    try:
        v = find_ipnps([h], budget=budget)
    except NotApplicable:
        return "pnp_not_applicable"
    if v.kind == "found":
        return "pnp"
    if v.kind == "depth_exceeded":
        return "pnp_depth"
    k = passes_to_build(comp)
    if k is None:
        return "graph_building"
    return LoopCandidate(comp, f, p, v, graph_building_trace(comp, k))


def _backward_distance(nodes, edges, target) -> dict:
    """Steps needed to reach ``target`` along edges, for every node that can."""
    into: dict = {}
    for t in edges:
        into.setdefault(t.dest, []).append(t.source)
    dist = {target: 0}
    frontier = [target]
    while frontier:
        nxt = []
        for v in frontier:
            for u in into.get(v, ()):
                if u not in dist:
                    dist[u] = dist[v] + 1
                    nxt.append(u)
        frontier = nxt
    return dist


def find_representative_loop(
    g: PIWGraph,
    rank: int = 3,
    budget: LoopBudget | None = None,
    pnp_budget: Budget | None = None,
    amd: AMDiagram | None = None,
    want: int = 1,
) -> SearchResult:
    """Closed walks of the diagram whose composed map represents ``g``.

    Components without irreducibility potential are discarded, and of
    components equal up to relabeling only the first is searched.  Walks
    are enumerated by increasing length; each walk is listed once, from its
    smallest node, and must visit red vertices from every edge pair (the
    switch backbone) before the final checks are run.
    """
    budget = budget or LoopBudget()
    amd = amd or build_amd(g, rank)
    pot = [i for i, c in enumerate(amd.components) if irreducibility_potential(c, rank)]
    if not pot:
        reason = "no admissible structures" if not amd.nodes else "no component has irreducibility potential"
        return SearchResult("unachievable", reason)
    reps = [grp[0] for grp in amd.component_classes() if grp[0] in pot]
    res = SearchResult("inconclusive", "budget exhausted")
    rejections: dict = {}
    for length in range(1, budget.max_length + 1):
        res.max_length_reached = length
        for ci in reps:
            comp = amd.components[ci]
            order = {s: i for i, s in enumerate(comp)}
            edges = amd.component_edges(comp)
            for start in comp:
                allowed = [t for t in edges if order[t.source] >= order[start] and order[t.dest] >= order[start]]
                dist = _backward_distance(comp, allowed, start)
                out: dict = {}
                for t in allowed:
                    out.setdefault(t.source, []).append(t)
                found = _walks(start, length, out, dist, g, rank, pnp_budget, res, rejections, budget, want)
                if found is not None:
                    res.rejections = rejections
                    return found
    res.rejections = rejections
    if res.loops:
        res.status, res.reason = "found", ""
    return res


def _walks(start, length, out, dist, g, rank, pnp_budget, res, rejections, budget, want):
    path: list = []
    full = set(range(1, rank + 1))

    def go(node):
        left = length - len(path)
        if left == 0:
            if node != start:
                return None
            res.candidates += 1
            comp = Composition(tuple(t.gen for t in path), (start,) + tuple(t.dest for t in path))
            verdict = loop_rejection(comp, g, pnp_budget)
            if isinstance(verdict, str):
                rejections[verdict] = rejections.get(verdict, 0) + 1
            else:
                res.loops.append(verdict)
                if len(res.loops) >= want:
                    res.status, res.reason = "found", ""
                    return res
            if res.candidates >= budget.max_candidates:
                res.reason = "candidate budget exhausted"
                return res
            return None
        for t in out.get(node, ()):
            if dist.get(t.dest, left) > left - 1:
                continue
            path.append(t)
            # the red vertices of the remaining walk must still cover every edge pair
            if left - 1 < len(full - {abs(x.source.red_vertex) for x in path}):
                path.pop()
                continue
            r = go(t.dest)
            path.pop()
            if r is not None:
                return r
        return None

    return go(start)
