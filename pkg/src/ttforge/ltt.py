"""Lamination train track structures on the rose.

A structure is a graph on the 2r directions.  Colored edges are turns;
black edges join each direction to its inverse.  Vertices are purple
unless listed in ``red_vertices``; a colored edge is red iff it touches a
red vertex.  A Type (*) structure has one red vertex, one red edge, and
a purple part that is a connected loop-free graph on 2r - 1 vertices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx

from .freegroup import RoseMap, char_letter, directions, letter_char
from .traintrack import gates, is_train_track, taken_turn_closure, turn, turn_str
from .whitehead import LabeledGraph, _edge_key, _label_key


@dataclass(frozen=True)
class LTTStructure:
    rank: int
    red_vertices: frozenset
    edges: frozenset  # colored edges, as sorted turns
    green_turn: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "red_vertices", frozenset(self.red_vertices))
        object.__setattr__(self, "edges", frozenset(turn(*e) for e in self.edges))
        if self.green_turn is not None:
            object.__setattr__(self, "green_turn", turn(*self.green_turn))

    @classmethod
    def type_star(cls, rank: int, red_vertex: int, attach: int, purple_edges, green_turn=None) -> "LTTStructure":
        return cls(rank, frozenset([red_vertex]), frozenset(purple_edges) | {turn(red_vertex, attach)}, green_turn)

    @property
    def vertices(self) -> list[int]:
        return directions(self.rank)

    @property
    def purple_vertices(self) -> list[int]:
        return [d for d in self.vertices if d not in self.red_vertices]

    @property
    def purple_edges(self) -> frozenset:
        return frozenset(e for e in self.edges if e[0] not in self.red_vertices and e[1] not in self.red_vertices)

    @property
    def red_edges(self) -> frozenset:
        return self.edges - self.purple_edges

    @property
    def black_edges(self) -> list:
        return [(-i, i) for i in range(1, self.rank + 1)]

    # Type (*) accessors
    @property
    def red_vertex(self) -> int:
        (v,) = self.red_vertices
        return v

    @property
    def red_edge(self) -> tuple:
        (e,) = self.red_edges
        return e

    @property
    def attaching_vertex(self) -> int:
        """Purple endpoint of the red edge."""
        a, b = self.red_edge
        return b if a == self.red_vertex else a

    @property
    def unachieved(self) -> int:
        """Direction whose edge gets folded into this structure: the red vertex."""
        return self.red_vertex

    @property
    def prefix_direction(self) -> int:
        """Direction of the prepended edge for the generator creating the red edge."""
        return -self.attaching_vertex

    def purple_graph(self) -> LabeledGraph:
        return LabeledGraph(tuple(self.purple_vertices), self.purple_edges)

    def with_green(self, t) -> "LTTStructure":
        return LTTStructure(self.rank, self.red_vertices, self.edges, t)

    def relabel(self, perm: dict) -> "LTTStructure":
        g = None if self.green_turn is None else turn(perm[self.green_turn[0]], perm[self.green_turn[1]])
        return LTTStructure(
            self.rank,
            frozenset(perm[v] for v in self.red_vertices),
            frozenset(turn(perm[a], perm[b]) for a, b in self.edges),
            g,
        )

    def key(self) -> tuple:
        """Total order key; structures compare by this in sorted output."""
        return (
            tuple(sorted(_label_key(v) for v in self.red_vertices)),
            tuple(sorted(_edge_key(e) for e in self.red_edges)),
            tuple(sorted(_edge_key(e) for e in self.purple_edges)),
        )

    def __lt__(self, other):
        return self.key() < other.key()

    def __str__(self) -> str:
        red = ",".join(letter_char(v) for v in sorted(self.red_vertices, key=_label_key))
        re = " ".join(turn_str(e) for e in sorted(self.red_edges, key=_edge_key))
        pe = " ".join(turn_str(e) for e in sorted(self.purple_edges, key=_edge_key))
        return f"red {red} [{re}] purple {pe}"

    # -- serialization --------------------------------------------------
    def to_json(self) -> dict:
        out = {
            "rank": self.rank,
            "red_vertices": [letter_char(v) for v in sorted(self.red_vertices, key=_label_key)],
            "red_edges": [[letter_char(a), letter_char(b)] for a, b in sorted(self.red_edges, key=_edge_key)],
            "purple_edges": [[letter_char(a), letter_char(b)] for a, b in sorted(self.purple_edges, key=_edge_key)],
            "green_turn": None if self.green_turn is None else [letter_char(x) for x in self.green_turn],
        }
        if len(self.red_vertices) == 1 and len(self.red_edges) == 1:
            out["red_vertex"] = letter_char(self.red_vertex)
            out["red_edge"] = [letter_char(self.red_vertex), letter_char(self.attaching_vertex)]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "LTTStructure":
        red = data.get("red_vertices")
        if red is None:
            red = [data["red_vertex"]]
        reds = data.get("red_edges")
        if reds is None:
            reds = [data["red_edge"]]
        edges = [tuple(char_letter(x) for x in e) for e in list(reds) + list(data["purple_edges"])]
        g = data.get("green_turn")
        return cls(
            int(data["rank"]),
            frozenset(char_letter(v) for v in red),
            frozenset(edges),
            None if g is None else tuple(char_letter(x) for x in g),
        )


# -- construction from a map ------------------------------------------------


def build_ltt(f: RoseMap) -> LTTStructure:
    """The structure G(f): colored edges are LW turns, red vertices the nonperiodic directions."""
    if not is_train_track(f):
        raise ValueError("not a train track map")
    gs = gates(f)
    if gs.periodic != gs.fixed:
        raise ValueError("map is not rotationless: some periodic direction is not fixed")
    edges = frozenset(t for t in taken_turn_closure(f) if t[0] != t[1])
    red = frozenset(d for d in directions(f.rank) if d not in gs.periodic)
    s = LTTStructure(f.rank, red, edges)
    if not edges:
        raise ValueError("structure has no colored edges")
    return s


# -- axioms -------------------------------------------------------------------


def validate(s: LTTStructure, mode: str = "type_star") -> list[str]:
    """Names of the violated axioms; empty when the structure is valid.

    ``mode`` is ``abstract``, ``type_star`` or ``based`` (Type (*) with a
    green turn through the red vertex).
    """
    if mode not in ("abstract", "type_star", "based"):
        raise ValueError(f"unknown mode {mode!r}")
    bad = []
    dirs = set(s.vertices)
    if any(v not in dirs for v in s.red_vertices) or any(x not in dirs for e in s.edges for x in e):
        bad.append("LTT1")
    if any(a == b for a, b in s.edges):
        bad.append("STTG2")
    touched = {x for e in s.edges for x in e}
    if any(d not in touched for d in dirs):
        bad.append("STTG3")
    if mode == "abstract":
        return bad
    if len(s.red_vertices) != 1:
        bad.append("LTT(*)1")
    if len(s.red_edges) != 1:
        bad.append("LTT(*)2")
    if not bad:
        pi = s.purple_graph()
        if len(pi.vertices) != 2 * s.rank - 1 or not pi.is_connected() or any(
            not any(v in e for e in s.purple_edges) for v in pi.vertices
        ):
            bad.append("LTT(*)3")
        if not _valence_one_pair_free(s):
            bad.append("LTT(*)4")
    if mode == "based" and not bad:
        g = s.green_turn
        if g is None or g in s.edges or g[0] == g[1] or s.red_vertex not in g:
            bad.append("based")
    return bad


def _valence_one_pair_free(s: LTTStructure) -> bool:
    deg: dict[int, int] = {}
    for a, b in s.edges:
        deg[a] = deg.get(a, 0) + 1
        deg[b] = deg.get(b, 0) + 1
    for a, b in s.edges:
        if a == -b and (deg[a] == 1 or deg[b] == 1):
            return False
    return True


def is_type_star(s: LTTStructure) -> bool:
    return not validate(s, "type_star")


# -- smooth paths and birecurrency ----------------------------------------


def _transition_graph(s: LTTStructure):
    """Arcs between oriented edges that concatenate smoothly.

    An oriented edge is ``(x, y, colored)``.  After a colored edge comes the
    black edge at its head; after a black edge comes any colored edge there.
    """
    colored_at: dict[int, list[int]] = {d: [] for d in s.vertices}
    for a, b in s.edges:
        colored_at[a].append(b)
        colored_at[b].append(a)
    nodes = []
    for a, b in s.edges:
        nodes.append((a, b, True))
        nodes.append((b, a, True))
    for d in s.vertices:
        nodes.append((d, -d, False))
    succ = {}
    for x, y, col in nodes:
        if col:
            succ[(x, y, col)] = [(y, -y, False)]
        else:
            succ[(x, y, col)] = [(y, z, True) for z in sorted(colored_at[y], key=_label_key)]
    return nodes, succ


def _sccs(nodes, succ):
    g = nx.DiGraph()
    g.add_nodes_from(nodes)
    for u, vs in succ.items():
        for v in vs:
            g.add_edge(u, v)
    return g, list(nx.strongly_connected_components(g))


def _undirected(e):
    x, y, col = e
    return (min(x, y), max(x, y), col)


def _covering_scc(s: LTTStructure):
    nodes, succ = _transition_graph(s)
    g, comps = _sccs(nodes, succ)
    need = {_undirected(n) for n in nodes}
    for c in comps:
        if len(c) == 1:
            (n,) = c
            if not g.has_edge(n, n):
                continue
        if {_undirected(n) for n in c} == need:
            return g, c
    return g, None


def is_birecurrent(s: LTTStructure) -> bool:
    """Some smooth bi-infinite line crosses every edge infinitely often in both ends.

    Decided as: one strongly connected component of the smooth-transition
    digraph contains every edge in at least one orientation.  Pumping a
    closed walk through that component gives the line.
    """
    bad = validate(s, "abstract")
    if bad:
        raise ValueError(f"invalid structure: {', '.join(bad)}")
    return _covering_scc(s)[1] is not None


@dataclass(frozen=True)
class SmoothPath:
    """Vertex sequence v0, v1, ...; edge i joins v_i and v_{i+1}."""

    vertices: tuple
    colored: tuple  # colored[i] is True if edge i is colored

    def __len__(self):
        return len(self.colored)

    def __str__(self):
        return "-".join(letter_char(v) for v in self.vertices)


def is_smooth(s: LTTStructure, p: SmoothPath, closed: bool = False) -> bool:
    vs, cs = p.vertices, p.colored
    if len(vs) != len(cs) + 1:
        return False
    for i, col in enumerate(cs):
        a, b = vs[i], vs[i + 1]
        if col and turn(a, b) not in s.edges:
            return False
        if not col and a != -b:
            return False
        if i and cs[i - 1] == col:
            return False
    if closed and (vs[0] != vs[-1] or (cs and cs[0] == cs[-1])):
        return False
    return True


def smooth_line_witness(s: LTTStructure) -> SmoothPath | None:
    """A closed smooth walk crossing every edge; None if not birecurrent."""
    g, comp = _covering_scc(s)
    if comp is None:
        return None
    sub = g.subgraph(comp)
    targets = {}
    for n in sorted(comp):
        targets.setdefault(_undirected(n), n)
    order = [targets[k] for k in sorted(targets)]
    start = order[0]
    walk = [start]
    for t in order[1:] + [start]:
        if t == walk[-1] and len(walk) > 1:
            continue
        path = nx.shortest_path(sub, walk[-1], t)
        walk.extend(path[1:])
    if len(walk) == 1:
        walk.extend(nx.shortest_path(sub, start, next(iter(sub.successors(start))))[1:])
        walk.extend(nx.shortest_path(sub, walk[-1], start)[1:])
    # walk lists oriented edges, the last equal to the first; drop the repeat
    edges = walk[:-1]
    verts = [edges[0][0]] + [e[1] for e in edges]
    return SmoothPath(tuple(verts), tuple(e[2] for e in edges))


# -- DOT --------------------------------------------------------------------


def to_dot(s: LTTStructure, name: str = "LTT") -> str:
    lines = [f"graph {name} {{", "  node [shape=circle];"]
    for v in s.vertices:
        col = "red" if v in s.red_vertices else "purple"
        lines.append(f'  "{letter_char(v)}" [color={col}];')
    for a, b in sorted(s.edges, key=_edge_key):
        col = "red" if (a in s.red_vertices or b in s.red_vertices) else "purple"
        lines.append(f'  "{letter_char(a)}" -- "{letter_char(b)}" [color={col}];')
    for a, b in s.black_edges:
        lines.append(f'  "{letter_char(b)}" -- "{letter_char(a)}" [color=black];')
    if s.green_turn is not None:
        a, b = s.green_turn
        lines.append(f'  "{letter_char(a)}" -- "{letter_char(b)}" [color=green, style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"
