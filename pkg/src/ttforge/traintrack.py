"""Direction maps, gates, train track certification and the transition matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

import networkx as nx
import numpy as np

from .freegroup import RoseMap, directions, letter_char, power

Turn = tuple  # (d1, d2) with d1 <= d2


def turn(d1: int, d2: int) -> Turn:
    return (d1, d2) if d1 <= d2 else (d2, d1)


def turn_str(t: Turn) -> str:
    return "{" + letter_char(t[0]) + "," + letter_char(t[1]) + "}"


def turns_of_word(w) -> list[Turn]:
    """Turns crossed by a path: consecutive letters x, y cross {X, y}."""
    return [turn(-w[i], w[i + 1]) for i in range(len(w) - 1)]


def direction_map(f: RoseMap) -> dict[int, int]:
    return {d: f.image(d)[0] for d in directions(f.rank)}


def iterate_map(table: dict[int, int], d: int, k: int) -> int:
    for _ in range(k):
        d = table[d]
    return d


@dataclass(frozen=True)
class GateStructure:
    gates: tuple  # tuple of sorted tuples of directions
    periodic: frozenset
    fixed: frozenset
    gate_of: dict = field(compare=False, hash=False, repr=False)

    def same_gate(self, d1: int, d2: int) -> bool:
        return self.gate_of[d1] == self.gate_of[d2]

    def is_legal(self, t: Turn) -> bool:
        return not self.same_gate(*t)

    @property
    def illegal_turns(self) -> list[Turn]:
        out = []
        for g in self.gates:
            for i in range(len(g)):
                for j in range(i + 1, len(g)):
                    out.append(turn(g[i], g[j]))
        return sorted(out)


def gates_from_table(table: dict[int, int]) -> GateStructure:
    n = len(table)
    limit = {d: iterate_map(table, d, n) for d in table}
    groups: dict[int, list[int]] = {}
    for d in sorted(table, key=lambda x: (abs(x), -x)):
        groups.setdefault(limit[d], []).append(d)
    gates = tuple(sorted(tuple(sorted(g)) for g in groups.values()))
    gate_of = {d: limit[d] for d in table}
    periodic = frozenset(d for d in table if _cycle_len(table, d))
    fixed = frozenset(d for d in table if table[d] == d)
    return GateStructure(gates, periodic, fixed, gate_of)


def _cycle_len(table: dict[int, int], d: int) -> int:
    """Length of the cycle through d, or 0 if d is not periodic."""
    x = table[d]
    for k in range(1, len(table) + 1):
        if x == d:
            return k
        x = table[x]
    return 0


def gates(f: RoseMap) -> GateStructure:
    return gates_from_table(direction_map(f))


def taken_turn_closure(f: RoseMap) -> set[Turn]:
    """Turns crossed by some iterate image of an edge.

    Seeded with the turns inside each g(E_i) and closed under the induced
    turn map; degenerate images are kept so callers can spot them.
    """
    table = direction_map(f)
    seen: set[Turn] = set()
    stack = [t for w in f.images for t in turns_of_word(w)]
    while stack:
        t = stack.pop()
        if t in seen:
            continue
        seen.add(t)
        if t[0] != t[1]:
            stack.append(turn(table[t[0]], table[t[1]]))
    return seen


@dataclass(frozen=True)
class TTVerdict:
    is_tt: bool
    bad_turn: Turn | None = None

    def __bool__(self):
        return self.is_tt


def is_train_track(f: RoseMap) -> TTVerdict:
    gs = gates(f)
    for t in sorted(taken_turn_closure(f)):
        if gs.same_gate(*t):
            return TTVerdict(False, t)
    return TTVerdict(True)


def transition_matrix(f: RoseMap) -> np.ndarray:
    r = f.rank
    m = np.zeros((r, r), dtype=np.int64)
    for j, w in enumerate(f.images):
        for x in w:
            m[abs(x) - 1, j] += 1
    return m


def _strongly_connected(support: np.ndarray) -> bool:
    n = support.shape[0]
    reach = support.astype(bool) | np.eye(n, dtype=bool)
    for _ in range(n):
        nxt = (reach.astype(np.int64) @ reach.astype(np.int64)) > 0
        if (nxt == reach).all():
            break
        reach = nxt
    return bool(reach.all())


def primitivity_exponent(m: np.ndarray) -> int | None:
    """Smallest k with M^k entrywise positive, or None if M is not primitive."""
    s = (np.asarray(m) > 0).astype(np.int64)
    n = s.shape[0]
    if not _strongly_connected(s):
        return None
    p = s.copy()
    for k in range(1, (n - 1) ** 2 + 2):
        if (p > 0).all():
            return k
        p = ((p @ s) > 0).astype(np.int64)
    return None


def is_primitive(m: np.ndarray) -> bool:
    return primitivity_exponent(m) is not None


def rotationless_exponent(f: RoseMap) -> int:
    table = direction_map(f)
    lens = [_cycle_len(table, d) for d in table]
    return reduce(math.lcm, [k for k in lens if k], 1)


def minimal_rotationless_power(f: RoseMap) -> tuple[int, RoseMap]:
    p = rotationless_exponent(f)
    return p, power(f, p)


def lw_connected(f: RoseMap) -> bool:
    """Whether the local Whitehead graph at the rose vertex is connected."""
    g = nx.Graph()
    g.add_nodes_from(directions(f.rank))
    g.add_edges_from(t for t in taken_turn_closure(f) if t[0] != t[1])
    return nx.is_connected(g)


@dataclass(frozen=True)
class FICVerdict:
    status: str  # "satisfied", "fails", "inconclusive"
    failed: tuple = ()
    pnp: object = None

    @property
    def satisfied(self) -> bool:
        return self.status == "satisfied"


def check_fic(f: RoseMap, pnp_budget=None) -> FICVerdict:
    """Train track map criterion for full irreducibility.

    Satisfied when the map has no periodic Nielsen paths, a primitive
    transition matrix, and a connected local Whitehead graph.
    """
    from . import pnp

    if not is_train_track(f):
        raise ValueError("not a train track map")
    failed = []
    if not is_primitive(transition_matrix(f)):
        failed.append("primitive")
    if not lw_connected(f):
        failed.append("lw_connected")
    verdict = None
    if not failed:
        _, g = minimal_rotationless_power(f)
        try:
            verdict = pnp.find_ipnps([g], budget=pnp_budget)
        except pnp.NotApplicable:
            return FICVerdict("inconclusive", (), None)
        if verdict.kind == "found":
            failed.append("pnp_free")
        elif verdict.kind == "depth_exceeded":
            return FICVerdict("inconclusive", (), verdict)
    if failed:
        return FICVerdict("fails", tuple(failed), verdict)
    return FICVerdict("satisfied", (), verdict)
