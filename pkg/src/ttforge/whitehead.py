"""Local, stable and ideal Whitehead graphs, and the 5-vertex catalog."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

from .freegroup import RoseMap, char_letter, directions, letter_char
from .traintrack import gates, is_train_track, taken_turn_closure, turn, turn_str


@dataclass(frozen=True)
class LabeledGraph:
    """Simple loop-free graph on direction labels."""

    vertices: tuple
    edges: frozenset

    def __post_init__(self):
        vs = tuple(sorted(set(self.vertices), key=_label_key))
        object.__setattr__(self, "vertices", vs)
        es = frozenset(turn(*e) for e in self.edges)
        for u, v in es:
            if u == v:
                raise ValueError(f"loop at {letter_char(u)}")
            if u not in vs or v not in vs:
                raise ValueError(f"edge {turn_str((u, v))} leaves the vertex set")
        object.__setattr__(self, "edges", es)

    def degree(self, v: int) -> int:
        return sum(v in e for e in self.edges)

    def neighbors(self, v: int) -> list[int]:
        return sorted((e[1] if e[0] == v else e[0] for e in self.edges if v in e), key=_label_key)

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            v = stack.pop()
            for w in self.neighbors(v):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    def relabel(self, perm: dict) -> "LabeledGraph":
        return LabeledGraph(tuple(perm[v] for v in self.vertices), frozenset((perm[a], perm[b]) for a, b in self.edges))

    def to_json(self) -> dict:
        return {
            "vertices": [letter_char(v) for v in self.vertices],
            "edges": [[letter_char(a), letter_char(b)] for a, b in sorted(self.edges, key=_edge_key)],
        }

    @classmethod
    def from_json(cls, data: dict) -> "LabeledGraph":
        return cls(tuple(char_letter(v) for v in data["vertices"]), frozenset((char_letter(a), char_letter(b)) for a, b in data["edges"]))


def _label_key(d: int):
    return (abs(d), d < 0)


def _edge_key(e):
    return (_label_key(e[0]), _label_key(e[1]))


# -- graphs of a map ------------------------------------------------------


def local_whitehead_graph(f: RoseMap) -> LabeledGraph:
    if not is_train_track(f):
        raise ValueError("not a train track map")
    es = frozenset(t for t in taken_turn_closure(f) if t[0] != t[1])
    return LabeledGraph(tuple(directions(f.rank)), es)


def stable_whitehead_graph(f: RoseMap) -> LabeledGraph:
    lw = local_whitehead_graph(f)
    per = gates(f).periodic
    return LabeledGraph(tuple(per), frozenset(e for e in lw.edges if e[0] in per and e[1] in per))


# -- unlabeled graphs -------------------------------------------------------


@dataclass(frozen=True, order=True)
class PIWGraph:
    """Unlabeled simple graph on vertices 0..n-1, stored in canonical form."""

    n: int
    edges: tuple

    @property
    def code(self) -> str:
        """Upper-triangle adjacency bits, the canonical id."""
        es = set(self.edges)
        return "".join("1" if (i, j) in es else "0" for i, j in itertools.combinations(range(self.n), 2))

    def degrees(self) -> list[int]:
        return sorted(sum(v in e for e in self.edges) for v in range(self.n))

    def is_type_star(self, rank: int) -> bool:
        return self.n == 2 * rank - 1 and _connected(self.n, self.edges)

    def to_json(self) -> dict:
        return {"vertices": self.n, "edges": [list(e) for e in self.edges], "code": self.code}


def _connected(n: int, edges) -> bool:
    if n == 0:
        return True
    adj: dict[int, set] = {i: set() for i in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in adj[v] - seen:
            seen.add(w)
            stack.append(w)
    return len(seen) == n


def _bits(n: int, edges, perm) -> str:
    es = {tuple(sorted((perm[a], perm[b]))) for a, b in edges}
    return "".join("1" if (i, j) in es else "0" for i, j in itertools.combinations(range(n), 2))


def canonical_form(n: int, edges) -> PIWGraph:
    """Canonical form: the permutation giving the largest adjacency bitstring.

    Taking the maximum puts high-degree vertices first, which reads better
    in reports; any fixed extremum gives a complete invariant.
    """
    best = max(_bits(n, edges, p) for p in itertools.permutations(range(n)))
    pairs = list(itertools.combinations(range(n), 2))
    return PIWGraph(n, tuple(pairs[i] for i, ch in enumerate(best) if ch == "1"))


def unlabel(g: LabeledGraph) -> PIWGraph:
    idx = {v: i for i, v in enumerate(g.vertices)}
    return canonical_form(len(g.vertices), [(idx[a], idx[b]) for a, b in g.edges])


def are_isomorphic(g1, g2) -> bool:
    a = unlabel(g1) if isinstance(g1, LabeledGraph) else canonical_form(g1.n, g1.edges)
    b = unlabel(g2) if isinstance(g2, LabeledGraph) else canonical_form(g2.n, g2.edges)
    return a == b


def ideal_whitehead_graph(f: RoseMap, pnp_verdict) -> PIWGraph:
    """Isomorphism class of SW(f); valid only for PNP-free rotationless maps.

    ``pnp_verdict`` is a certificate from :func:`ttforge.pnp.find_ipnps`;
    the search is not re-run here.
    """
    if pnp_verdict is None or getattr(pnp_verdict, "kind", None) != "none_found":
        raise ValueError("ideal Whitehead graph needs a certificate that the map has no PNPs")
    return unlabel(stable_whitehead_graph(f))


def singularity_index(k: int) -> Fraction:
    if k < 3:
        raise ValueError("a singular component has at least three vertices")
    return 1 - Fraction(k, 2)


# -- catalog ------------------------------------------------------------------


@lru_cache(maxsize=None)
def enumerate_catalog(n: int = 5) -> tuple:
    """All connected loop-free graphs on n vertices up to isomorphism.

    Built by augmenting one class at a time (add an edge, recanonicalize)
    starting from the empty graph, then keeping the connected classes.
    """
    frontier = {canonical_form(n, [])}
    all_classes = set(frontier)
    while frontier:
        nxt = set()
        for g in frontier:
            present = set(g.edges)
            for e in itertools.combinations(range(n), 2):
                if e not in present:
                    h = canonical_form(n, list(g.edges) + [e])
                    if h not in all_classes:
                        all_classes.add(h)
                        nxt.add(h)
        frontier = nxt
    connected = {g for g in all_classes if _connected(n, g.edges)}
    return tuple(sorted(connected, key=lambda g: (len(g.edges), g.code)))


def catalog_index(g) -> int:
    cf = unlabel(g) if isinstance(g, LabeledGraph) else canonical_form(g.n, g.edges)
    return enumerate_catalog(cf.n).index(cf)


def star_graph(n: int = 5) -> PIWGraph:
    return canonical_form(n, [(0, i) for i in range(1, n)])


def catalog_names() -> dict:
    """Roman-numeral names for catalog entries, from the shipped generated table."""
    text = resources.files("ttforge").joinpath("data/catalog_names.json").read_text()
    data = json.loads(text)
    return {int(k): v for k, v in data["names"].items()}


def resolve_graph(key: str) -> PIWGraph:
    """Catalog entry by index (``"7"``), name (``"XX"``, ``"graphXX"``), ``star``/``star4`` or code bits."""
    cat = enumerate_catalog()
    s = key.strip()
    if s.lower() in ("star", "star4"):
        return star_graph()
    if s.isdigit() and int(s) < len(cat):
        return cat[int(s)]
    for i, name in catalog_names().items():
        if name.lower() == s.lower() or f"graph{name}".lower() == s.lower():
            return cat[i]
    for g in cat:
        if g.code == s:
            return g
    raise KeyError(f"unknown graph {key!r}")


# -- edge pair permutations ---------------------------------------------------


def epp_symmetries(rank: int, fixed_pairs: int = 1) -> list[dict]:
    """Label maps permuting the first ``rank - fixed_pairs`` edge pairs and swapping within them.

    With ``fixed_pairs=1`` these are the edge pair permutations; with
    ``fixed_pairs=0`` the full signed permutation group on all pairs.
    """
    m = rank - fixed_pairs
    out = []
    for perm in itertools.permutations(range(1, m + 1)):
        for signs in itertools.product((1, -1), repeat=m):
            mp = {}
            for i in range(1, m + 1):
                j, s = perm[i - 1], signs[i - 1]
                mp[i] = s * j
                mp[-i] = -s * j
            for i in range(m + 1, rank + 1):
                mp[i], mp[-i] = i, -i
            out.append(mp)
    return out


def _labeled_key(g: LabeledGraph):
    return (tuple(_label_key(v) for v in g.vertices), tuple(sorted(_edge_key(e) for e in g.edges)))


def epp_canonical(g: LabeledGraph, rank: int):
    """Canonical representative of the EPP orbit of a labeled graph."""
    for v in g.vertices:
        if v == 0 or abs(v) > rank:
            raise ValueError(f"label {v} outside rank {rank}")
    return min((g.relabel(s) for s in epp_symmetries(rank)), key=_labeled_key)
