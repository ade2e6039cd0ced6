"""Generator triples between Type (*) structures and the compositions they form.

For a Type (*) structure G with red vertex ``d^u`` and red edge
``[d^u, v]`` the ingoing generator is ``NielsenGen(d^u, d^a)`` with
``d^a = -v``.  A purple edge ``[d^a, d]`` of G determines two candidate
predecessors: an extension (same purple graph, red edge ``[d^u, d]``) and
a switch (purple graph with ``d^a`` relabeled ``d^u``, red vertex ``d^a``,
red edge ``[d^a, d]``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

from .freegroup import NielsenGen, RoseMap, compose_all, directions, gen_to_rosemap, identity, is_reduced, letter_char, power
from .ltt import LTTStructure, SmoothPath, build_ltt, is_birecurrent, is_smooth, validate
from .traintrack import _cycle_len, direction_map, is_primitive, transition_matrix, turn, turn_str
from .whitehead import _edge_key


class MoveRejected(ValueError):
    """A requested move is excluded before any admissibility test."""


def ingoing_generator(dest: LTTStructure) -> NielsenGen:
    """The generator that creates ``dest``'s red edge."""
    return NielsenGen(dest.red_vertex, dest.prefix_direction)


def admissible(s: LTTStructure) -> bool:
    return not validate(s, "type_star") and is_birecurrent(s)


@dataclass(frozen=True)
class GeneratorTriple:
    gen: NielsenGen
    source: LTTStructure
    dest: LTTStructure
    kind: str  # "extension" or "switch"
    determining_edge: tuple

    @property
    def admissible(self) -> bool:
        return admissible(self.source) and admissible(self.dest)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "generator": str(self.gen),
            "determining_edge": [letter_char(x) for x in self.determining_edge],
            "source": self.source.to_json(),
            "dest": self.dest.to_json(),
        }


def _check_determining(dest: LTTStructure, edge) -> tuple[int, int]:
    bad = validate(dest, "type_star")
    if bad:
        raise MoveRejected(f"destination is not Type (*): {', '.join(bad)}")
    e = turn(*edge)
    da = dest.prefix_direction
    if e not in dest.purple_edges:
        raise MoveRejected(f"{turn_str(e)} is not a purple edge")
    if da not in e:
        raise MoveRejected(f"{turn_str(e)} does not contain d^a = {letter_char(da)}")
    far = e[1] if e[0] == da else e[0]
    return da, far


def potential_extension(dest: LTTStructure, determining_edge) -> GeneratorTriple:
    da, far = _check_determining(dest, determining_edge)
    du = dest.red_vertex
    if far == -du:
        raise MoveRejected("extension along an edge ending at the inverse of the red vertex")
    src = LTTStructure.type_star(dest.rank, du, far, dest.purple_edges)
    return GeneratorTriple(NielsenGen(du, da), src, dest, "extension", turn(da, far))


def potential_switch(dest: LTTStructure, determining_edge) -> GeneratorTriple:
    da, far = _check_determining(dest, determining_edge)
    du = dest.red_vertex
    if far == -da:
        raise MoveRejected("switch whose red edge would join a direction to its inverse")
    swap = {d: d for d in dest.vertices}
    swap[da] = du
    purple = frozenset(turn(swap[a], swap[b]) for a, b in dest.purple_edges)
    src = LTTStructure.type_star(dest.rank, da, far, purple)
    return GeneratorTriple(NielsenGen(du, da), src, dest, "switch", turn(da, far))


def candidate_edges(dest: LTTStructure) -> list[tuple]:
    da = dest.prefix_direction
    return sorted((e for e in dest.purple_edges if da in e), key=_edge_key)


def enumerate_ingoing(dest: LTTStructure) -> list[GeneratorTriple]:
    """All admissible triples ending at ``dest``, extensions before switches per edge."""
    out = []
    for e in candidate_edges(dest):
        for make in (potential_extension, potential_switch):
            try:
                t = make(dest, e)
            except MoveRejected:
                continue
            if admissible(t.source):
                out.append(t)
    return out


def classify_triple(gen: NielsenGen, source: LTTStructure, dest: LTTStructure) -> str | None:
    """``extension``, ``switch``, or None when the pair is neither."""
    if gen != ingoing_generator(dest):
        return None
    for e in candidate_edges(dest):
        for make in (potential_extension, potential_switch):
            try:
                t = make(dest, e)
            except MoveRejected:
                continue
            if t.source == source:
                return t.kind
    return None


# -- compositions ---------------------------------------------------------------


@dataclass(frozen=True)
class Composition:
    """Generators in application order; ``structures[k]`` is the source of ``gens[k]``."""

    gens: tuple
    structures: tuple

    def __post_init__(self):
        object.__setattr__(self, "gens", tuple(self.gens))
        object.__setattr__(self, "structures", tuple(self.structures))
        if len(self.structures) != len(self.gens) + 1:
            raise ValueError("a composition needs one more structure than generators")

    def __len__(self):
        return len(self.gens)

    @property
    def rank(self) -> int:
        return self.structures[0].rank

    def triples(self) -> list[GeneratorTriple]:
        out = []
        for k, g in enumerate(self.gens):
            s, d = self.structures[k], self.structures[k + 1]
            out.append(GeneratorTriple(g, s, d, classify_triple(g, s, d) or "unknown", (0, 0)))
        return out

    def is_chained(self) -> bool:
        return all(t.kind != "unknown" for t in self.triples())

    def to_map(self) -> RoseMap:
        if not self.gens:
            return identity(self.rank)
        return compose_all([gen_to_rosemap(g, self.rank) for g in self.gens])

    def is_loop(self) -> bool:
        return bool(self.gens) and self.structures[0] == self.structures[-1]

    def to_json(self) -> dict:
        return {
            "generators": [str(g) for g in self.gens],
            "structures": [s.to_json() for s in self.structures],
        }


def chain(triples) -> Composition:
    """Join triples given in application order into a composition."""
    triples = list(triples)
    if not triples:
        raise ValueError("empty chain")
    for a, b in zip(triples, triples[1:]):
        if a.dest != b.source:
            raise ValueError("triples do not chain")
    return Composition(tuple(t.gen for t in triples), (triples[0].source,) + tuple(t.dest for t in triples))


# -- construction compositions ----------------------------------------------------


@dataclass(frozen=True)
class Subgraph:
    """Part of an LTT structure: kept vertices, colored edges and black edge indices."""

    vertices: frozenset
    colored: frozenset
    black: frozenset  # positive edge indices whose black edge is kept

    def has_black(self, d: int) -> bool:
        return abs(d) in self.black

    def purple(self, s: LTTStructure) -> frozenset:
        return self.colored & s.purple_edges


def _prune(s: LTTStructure, purple_only: bool) -> Subgraph:
    du = s.red_vertex
    verts = frozenset(d for d in s.vertices if d != -du)
    colored = frozenset(e for e in s.edges if -du not in e)
    black = frozenset(i for i in range(1, s.rank + 1) if i != abs(du))
    while True:
        pool = colored & s.purple_edges if purple_only else colored
        lonely = {d for d in verts if not any(d in e for e in pool)}
        nb = frozenset(i for i in black if i not in {abs(a) for a in lonely})
        nc = frozenset(e for e in colored if not (e in s.purple_edges and any(-a in e for a in lonely)))
        if nb == black and nc == colored:
            return Subgraph(verts, colored, black)
        black, colored = nb, nc


def construction_subgraph(s: LTTStructure) -> Subgraph:
    """G_C: prune at the inverse of the red vertex, then at every vertex left without colored edges."""
    return _prune(s, purple_only=False)


def first_building_subgraph(s: LTTStructure) -> Subgraph:
    """Like the construction subgraph, but vertices count as isolated when they lack purple edges."""
    return _prune(s, purple_only=True)


@dataclass(frozen=True)
class ConstructionComposition:
    """A switch generator followed by the purified extension chain.

    The switch's source structure is not determined by the path, so only its
    generator is kept.
    """

    switch_gen: NielsenGen
    purified: Composition
    path: SmoothPath

    def generators(self) -> list[NielsenGen]:
        return [self.switch_gen] + list(self.purified.gens)

    def to_map(self) -> RoseMap:
        r = self.purified.rank
        return compose_all([gen_to_rosemap(g, r) for g in self.generators()])

    def purple_edges(self) -> frozenset:
        return construction_path_purple(self.path)


class ConstructionRejected(ValueError):
    def __init__(self, message: str, index: int | None = None):
        self.index = index
        super().__init__(message if index is None else f"{message} (structure {index})")


def construction_path_purple(path: SmoothPath) -> frozenset:
    return frozenset(turn(path.vertices[i], path.vertices[i + 1]) for i in range(2, len(path.colored), 2))


def construction_composition_from_path(dest: LTTStructure, path: SmoothPath) -> ConstructionComposition:
    """The construction composition whose construction path is ``path``.

    ``path`` starts at the red vertex, crosses the red edge, then alternates
    black and purple edges and ends on a black edge.
    """
    vs, cs = path.vertices, path.colored
    du = dest.red_vertex
    if len(cs) < 2 or len(cs) % 2:
        raise ConstructionRejected("a construction path has an even number of edges, at least two")
    if vs[0] != du or turn(vs[0], vs[1]) != dest.red_edge:
        raise ConstructionRejected("path must start with the red edge, from the red vertex")
    if not is_smooth(dest, path) or not cs[0]:
        raise ConstructionRejected("path is not smooth")
    sub = construction_subgraph(dest)
    for i in range(1, len(cs)):
        a, b = vs[i], vs[i + 1]
        if cs[i] and turn(a, b) not in sub.colored:
            raise ConstructionRejected(f"edge {turn_str(turn(a, b))} leaves the construction subgraph")
        if not cs[i] and not sub.has_black(a):
            raise ConstructionRejected(f"black edge at {letter_char(a)} leaves the construction subgraph")
    for i in range(2, len(cs), 2):
        if turn(vs[i], vs[i + 1]) not in dest.purple_edges:
            raise ConstructionRejected("construction path crosses a non-purple colored edge")
    m = len(cs) // 2 - 1
    # G_t has red edge [d^u, v_{2t+1}], t counted back from the destination
    structs = [dest]
    for t in range(1, m + 1):
        s = LTTStructure.type_star(dest.rank, du, vs[2 * t + 1], dest.purple_edges)
        if not admissible(s):
            raise ConstructionRejected("intermediate structure is not admissible", m - t)
        structs.append(s)
    structs.reverse()
    gens = tuple(NielsenGen(du, vs[2 * t]) for t in range(m, 0, -1))
    comp = Composition(gens, tuple(structs))
    return ConstructionComposition(NielsenGen(du, vs[-1]), comp, path)


def construction_path(comp: Composition) -> SmoothPath:
    """Inverse of :func:`construction_composition_from_path` for a purified chain."""
    dest = comp.structures[-1]
    du = dest.red_vertex
    vs = [du, dest.attaching_vertex]
    for s in reversed(comp.structures[:-1]):
        vs.extend([-vs[-1], s.attaching_vertex])
    vs.append(-vs[-1])
    cs = tuple(i % 2 == 0 for i in range(len(vs) - 1))
    return SmoothPath(tuple(vs), cs)


# -- switch sequences ----------------------------------------------------------------


class SwitchSequenceError(ValueError):
    pass


def switch_sequence_path(seq: Composition) -> SmoothPath:
    """Red edges of the switch destinations, newest first, joined by black edges."""
    ts = seq.triples()
    for k, t in enumerate(ts):
        if t.kind != "switch":
            raise SwitchSequenceError(f"SS1: step {k} is not a switch")
    dests = seq.structures[1:]
    for n in range(len(dests)):
        for l in range(n):
            if dests[n].red_vertex == dests[l].red_vertex:
                raise SwitchSequenceError(f"SS3: red vertices of steps {l} and {n} coincide")
            if -dests[l].prefix_direction == dests[n].red_vertex:
                raise SwitchSequenceError(f"SS3: inverse of d^a at step {l} is the red vertex at step {n}")
    last = dests[-1]
    vs = [last.red_vertex]
    for s in reversed(dests):
        vs.extend([s.attaching_vertex, s.prefix_direction])
    path = SmoothPath(tuple(vs), tuple(i % 2 == 0 for i in range(len(vs) - 1)))
    if not is_smooth(last, path):
        raise SwitchSequenceError("switch path is not smooth in the destination")
    return path


def preimage_subgraph(h, sw: GeneratorTriple) -> frozenset:
    """Edges of ``h`` pulled back across a switch: d^a is relabeled as the red vertex."""
    if sw.kind != "switch":
        raise ValueError("preimage subgraphs are taken across switches")
    h = frozenset(turn(*e) for e in h)
    if not h <= sw.dest.purple_edges:
        raise ValueError("not a subgraph of the destination's purple graph")
    da, du = sw.gen.prefix, sw.gen.folded
    mp = lambda d: du if d == da else d  # noqa: E731
    return frozenset(turn(mp(a), mp(b)) for a, b in h)


def image_subgraph(h, sw: GeneratorTriple) -> frozenset:
    table = {d: d for d in sw.source.vertices}
    table[sw.gen.folded] = sw.gen.prefix
    return frozenset(turn(table[a], table[b]) for a, b in h)


@dataclass
class BuiltTracker:
    """The running set G^a_n of purple edges already constructed.

    Construction paths add edges; stepping back across a switch replaces
    the set by its preimage.
    """

    built: frozenset = field(default_factory=frozenset)
    history: list = field(default_factory=list)

    def add_construction(self, cc: ConstructionComposition) -> None:
        self.built = self.built | cc.purple_edges()
        self.history.append(("construction", self.built))

    def pull_back(self, sw: GeneratorTriple) -> None:
        self.built = preimage_subgraph(self.built, sw)
        self.history.append(("switch", self.built))

    def missing(self, s: LTTStructure) -> frozenset:
        return s.purple_edges - self.built

    def complete(self, s: LTTStructure) -> bool:
        return not self.missing(s)


# -- AM properties -----------------------------------------------------------------------


@dataclass(frozen=True)
class AMReport:
    results: dict  # property name -> (ok, first failing location or None)

    def ok(self, names=None) -> bool:
        names = names or self.results.keys()
        return all(self.results[n][0] for n in names)

    def failures(self) -> list[str]:
        return [n for n, (ok, _) in self.results.items() if not ok]


AM_NAMES = ("I", "II", "III", "IV", "V", "VI", "VII", "VIII")


def _dir_table(g: NielsenGen, rank: int) -> dict:
    t = {d: d for d in directions(rank)}
    t[g.folded] = g.prefix
    return t


def check_am_properties(comp: Composition, cyclic: bool = False) -> AMReport:
    """Check AM Properties I-VIII on a chained composition.

    With ``cyclic`` the composition must close up and the junction from the
    last structure back to the first is checked as well.  VIII (a)/(b) are
    checked literally and (c) as primitivity of the composed map.
    """
    if not comp.is_chained():
        bad = next(k for k, t in enumerate(comp.triples()) if t.kind == "unknown")
        raise ValueError(f"composition is not chained at step {bad}")
    if cyclic and not comp.is_loop():
        raise ValueError("cyclic check needs a closed loop")
    r = comp.rank
    ss, gs = comp.structures, comp.gens
    n = len(gs)
    res: dict = {}

    def first(pred, idx):
        for i in idx:
            if not pred(i):
                return (False, i)
        return (True, None)

    def entering(j):
        if j > 0:
            return gs[j - 1]
        return gs[-1] if cyclic else None

    res["I"] = first(lambda j: admissible(ss[j]), range(len(ss)))

    def am2(j):
        g = gs[j] if j < n else (gs[0] if cyclic else None)
        if g is None:
            return True
        return ss[j].red_vertex in (g.folded, g.prefix)

    res["II"] = first(am2, range(len(ss)))

    def am3(j):
        g = entering(j)
        s = ss[j]
        if g is None:
            return len(s.red_vertices) == 1 and len(s.red_edges) == 1
        return g.folded in s.red_vertices and turn(g.folded, -g.prefix) in s.red_edges

    res["III"] = first(am3, range(len(ss)))

    tables = [_dir_table(g, r) for g in gs]

    def am4(j):
        colored = ss[j].edges
        tab = {d: d for d in directions(r)}
        for m in range(j + 1, len(ss)):
            tab = {d: tables[m - 1][tab[d]] for d in tab}
            for a, b in colored:
                if turn(tab[a], tab[b]) not in ss[m].purple_edges:
                    return False
        return True

    res["IV"] = first(am4, range(len(ss)))

    def am5(j):
        s = ss[j]
        at = [e for e in s.edges if s.red_vertex in e]
        return len(at) == 1 and at[0] == s.red_edge

    res["V"] = first(lambda j: len(ss[j].red_vertices) == 1 and am5(j), range(len(ss)))
    res["VI"] = first(lambda k: gs[k] == ingoing_generator(ss[k + 1]), range(n))

    def am7(j):
        src = ss[j].purple_graph()
        tab = {d: d for d in directions(r)}
        for m in range(j + 1, len(ss)):
            tab = {d: tables[m - 1][tab[d]] for d in tab}
            dst = ss[m].purple_graph()
            img = {tab[v] for v in src.vertices}
            if img != set(dst.vertices) or len(img) != len(src.vertices):
                return False
            if {turn(tab[a], tab[b]) for a, b in src.edges} != set(dst.edges):
                return False
        return True

    res["VII"] = first(am7, range(len(ss)))
    folded = {abs(g.folded) for g in gs}
    prefix = {abs(g.prefix) for g in gs}
    idx = range(1, r + 1)
    if not all(i in folded for i in idx):
        res["VIII"] = (False, "a")
    elif not all(i in prefix for i in idx):
        res["VIII"] = (False, "b")
    elif not is_primitive(transition_matrix(comp.to_map())):
        res["VIII"] = (False, "c")
    else:
        res["VIII"] = (True, None)
    return AMReport(res)


# -- decompositions of a given map -----------------------------------------------------


def _peel_options(f: RoseMap) -> list[tuple[NielsenGen, RoseMap]]:
    """Generators g with f = g o h for a map h whose images are shorter words."""
    out = []
    for u in directions(f.rank):
        for a in directions(f.rank):
            if abs(a) == abs(u):
                continue
            ok, found = True, False
            for w in f.images:
                for i, x in enumerate(w):
                    if x == u:
                        found = True
                        if i == 0 or w[i - 1] != a:
                            ok = False
                            break
                    elif x == -u:
                        found = True
                        if i == len(w) - 1 or w[i + 1] != -a:
                            ok = False
                            break
                if not ok:
                    break
            if not (ok and found):
                continue
            imgs = []
            for w in f.images:
                nw = []
                for i, x in enumerate(w):
                    if x == a and i + 1 < len(w) and w[i + 1] == u:
                        continue
                    if x == -a and i > 0 and w[i - 1] == -u:
                        continue
                    nw.append(x)
                imgs.append(tuple(nw))
            if all(w and is_reduced(w) for w in imgs):
                out.append((NielsenGen(u, a), RoseMap(tuple(imgs))))
    return out


def peel_decomposition(f: RoseMap) -> list[NielsenGen] | None:
    """Nielsen generators composing to ``f`` (application order), found by peeling; None if stuck."""
    memo: dict = {}

    def go(h: RoseMap):
        if all(len(w) == 1 and w[0] == i + 1 for i, w in enumerate(h.images)):
            return []
        if h in memo:
            return memo[h]
        memo[h] = None
        for g, rest in _peel_options(h):
            sub = go(rest)
            if sub is not None:
                memo[h] = sub + [g]
                return memo[h]
        return None

    return go(f)


def stage_structures(gens, rank: int) -> list[LTTStructure]:
    """G(f_j) for each rotation f_j of a cyclic generator list, after a rotationless power.

    Entry j belongs to the rose between generators j-1 and j, so entry 0
    is the structure of the full composite in its given order.
    """
    gens = list(gens)
    maps = [gen_to_rosemap(g, rank) for g in gens]
    out = []
    n = len(gens)
    for j in range(n):
        f = compose_all(maps[j:] + maps[:j])
        table = direction_map(f)
        p = reduce(math.lcm, [k for k in (_cycle_len(table, d) for d in table) if k], 1)
        out.append(build_ltt(power(f, p)))
    return out


def decomposition_composition(gens, rank: int) -> Composition:
    """The closed composition of a cyclic generator list, structures taken from the stages."""
    ss = stage_structures(gens, rank)
    return Composition(tuple(gens), tuple(ss) + (ss[0],))
