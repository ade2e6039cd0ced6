"""Search for indivisible periodic Nielsen paths of a decomposed train track map.

A candidate iPNP is ``inv(rho1) . rho2`` with ``rho1``, ``rho2`` legal and
their first directions forming the unique illegal turn.  Both halves are
pushed through the stages of the decomposition one generator at a time.
While one image is a prefix of the other, the shorter half must grow, and
the possible next edges are read off the direction maps.  Once the images
diverge, the divergence turn is legal (the branch dies) or illegal (push
through the next stage).  After a full period of the rotationless power the
halves are compared with their images; a match, possibly with endpoints at
fixed points inside the last edges, is a PNP.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

from .freegroup import NielsenGen, RoseMap, apply, common_prefix_len, compose_all, concat, directions, gen_to_rosemap, invert, is_reduced, power, word_str
from .traintrack import _cycle_len, direction_map, gates, is_train_track, turn, turn_str

DEFAULT_MAX_EXTENSIONS = 64
DEFAULT_MAX_POWER = 8


class NotApplicable(ValueError):
    """The procedure needs a train track map with exactly one illegal turn."""


@dataclass(frozen=True)
class Budget:
    max_extensions: int = DEFAULT_MAX_EXTENSIONS
    max_power: int = DEFAULT_MAX_POWER

    @classmethod
    def parse(cls, text: str) -> "Budget":
        e, p = text.split(",")
        return cls(int(e), int(p))


@dataclass
class Node:
    rho1: tuple
    rho2: tuple
    stage: int
    event: str  # "extend1", "extend2", "legal_turn", "green_turn", "no_continuation", "mismatch", "found", "depth"
    detail: str = ""
    children: list = field(default_factory=list)

    def leaves(self):
        if not self.children:
            yield self
        for c in self.children:
            yield from c.leaves()

    def to_json(self) -> dict:
        out = {"rho1": word_str(self.rho1), "rho2": word_str(self.rho2), "stage": self.stage, "event": self.event}
        if self.detail:
            out["detail"] = self.detail
        if self.children:
            out["children"] = [c.to_json() for c in self.children]
        return out


@dataclass
class PNPVerdict:
    kind: str  # "none_found", "found", "depth_exceeded"
    tree: Node | None = None
    rho1: tuple = ()
    rho2: tuple = ()
    power: int = 0
    interior: tuple = (False, False)
    frontier: list = field(default_factory=list)
    budget: Budget = field(default_factory=Budget)
    period: int = 1  # rotationless exponent used

    def to_json(self, trace: bool = False) -> dict:
        out = {
            "kind": self.kind,
            "budget": {"max_extensions": self.budget.max_extensions, "max_power": self.budget.max_power},
            "rotationless_power": self.period,
        }
        if self.kind == "found":
            out["rho1"] = word_str(self.rho1)
            out["rho2"] = word_str(self.rho2)
            out["power"] = self.power
            out["interior_endpoints"] = list(self.interior)
        if self.kind == "depth_exceeded":
            out["frontier"] = [[word_str(a), word_str(b)] for a, b in self.frontier]
        if trace and self.tree is not None:
            out["tree"] = self.tree.to_json()
        return out


def _as_maps(decomp: Sequence, rank: int | None) -> list[RoseMap]:
    maps = []
    for x in decomp:
        if isinstance(x, NielsenGen):
            if rank is None:
                raise ValueError("rank is needed for a generator list")
            maps.append(gen_to_rosemap(x, rank))
        else:
            maps.append(x)
    if not maps:
        raise ValueError("empty decomposition")
    return maps


class _Engine:
    def __init__(self, stages: list[RoseMap], budget: Budget, gen_turns: list | None = None):
        self.stages = stages
        self.gen_turns = gen_turns
        self.n = len(stages)
        self.budget = budget
        self.rank = stages[0].rank
        g = compose_all(stages)
        self.g = g
        # cumulative images per stage, computed on demand
        self._img: list[dict] = [{d: (d,) for d in directions(self.rank)}]
        self._dir: list[dict] = [{d: d for d in directions(self.rank)}]
        self._gates: dict = {}
        self.g_gates = gates(g)

    def image(self, j: int, letter: int) -> tuple:
        while len(self._img) <= j:
            k = len(self._img)
            f = self.stages[(k - 1) % self.n]
            prev = self._img[-1]
            self._img.append({d: apply(f, prev[d]) for d in prev})
            self._dir.append({d: self._img[-1][d][0] for d in prev})
        return self._img[j][letter]

    def dmap(self, j: int, d: int) -> int:
        self.image(j, d)
        return self._dir[j][d]

    def illegal_at(self, j: int, d1: int, d2: int) -> bool:
        """Whether {d1, d2} is illegal in the structure after stage j.

        For a generator list this is the illegal turn of the next generator;
        for stage maps it is read off the gates of the rotated composite.
        """
        if self.gen_turns is not None:
            return turn(d1, d2) == self.gen_turns[j % self.n]
        return self.stage_gates(j).same_gate(d1, d2)

    def stage_gates(self, j: int):
        """Gates of f_j, the rotation of g that starts after stage j."""
        k = j % self.n
        if k not in self._gates:
            self._gates[k] = gates(compose_all(self.stages[k:] + self.stages[:k]))
        return self._gates[k]

    def image_word(self, j: int, w) -> tuple:
        out: tuple = ()
        for x in w:
            out = concat(out, self.image(j, x))
        return out


def find_ipnps(decomp: Sequence, budget: Budget | None = None, rank: int | None = None) -> PNPVerdict:
    """Run the identification procedure on a decomposition (generators or stage maps).

    The composed map is replaced by its rotationless power by cycling the
    stages.  Returns ``none_found`` only after every branch is killed.
    """
    budget = budget or Budget()
    stages = _as_maps(decomp, rank)
    g = compose_all(stages)
    gens = list(decomp) if all(isinstance(x, NielsenGen) for x in decomp) else None
    if gens is None and not is_train_track(g):
        raise NotApplicable("composed map is not a train track map")
    gs = gates(g)
    illegal = gs.illegal_turns
    if len(illegal) != 1:
        raise NotApplicable(f"composed map has {len(illegal)} illegal turns, need exactly one")
    table = direction_map(g)
    period = reduce(math.lcm, [k for k in (_cycle_len(table, d) for d in table) if k], 1)
    if period > budget.max_power:
        return PNPVerdict("depth_exceeded", None, budget=budget, period=period)
    turns = None if gens is None else [turn(x.folded, x.prefix) for x in gens] * period
    eng = _Engine(stages * period, budget, turns)
    t0 = illegal[0]
    if turns is not None and turns[0] != t0:
        raise NotApplicable("illegal turn of the composite is not the first generator's turn")
    root = Node((t0[0],), (t0[1],), 0, "root")
    verdict = PNPVerdict("none_found", root, budget=budget, period=period)
    stack = [(root, 0)]
    while stack:
        node, extensions = stack.pop()
        _run(eng, node, extensions, stack, verdict, t0)
        if verdict.kind == "found":
            return verdict
    if verdict.frontier:
        verdict.kind = "depth_exceeded"
    return verdict


def _legal_for_g(eng: _Engine, prev_letter: int, nxt: int) -> bool:
    return -prev_letter != nxt and not eng.g_gates.same_gate(-prev_letter, nxt)


def _extend(eng: _Engine, node: Node, side: int, j: int, t: int, candidates, extensions, stack, verdict, reason: str):
    rho = node.rho1 if side == 1 else node.rho2
    kept, green = [], []
    for d in candidates:
        (kept if _legal_for_g(eng, rho[-1], d) else green).append(d)
    node.event = f"extend{side}"
    node.detail = reason
    if not kept:
        node.children.append(Node(node.rho1, node.rho2, j, "green_turn" if green else "no_continuation"))
        return
    for d in sorted(kept, key=lambda x: (abs(x), x < 0), reverse=True):
        r1 = node.rho1 + (d,) if side == 1 else node.rho1
        r2 = node.rho2 + (d,) if side == 2 else node.rho2
        child = Node(r1, r2, j, "pending")
        node.children.append(child)
        if extensions + 1 > eng.budget.max_extensions:
            child.event = "depth"
            verdict.frontier.append((r1, r2))
        else:
            stack.append((child, extensions + 1))
    # explore in sorted order
    node.children.sort(key=lambda c: (c.rho1, c.rho2))


def _run(eng: _Engine, node: Node, extensions: int, stack, verdict: PNPVerdict, t0) -> None:
    rho1, rho2 = node.rho1, node.rho2
    full = eng.n
    j = max(node.stage, 1)
    while j <= full:
        i1 = eng.image_word(j, rho1)
        i2 = eng.image_word(j, rho2)
        c = common_prefix_len(i1, i2)
        if c == len(i1) or c == len(i2):
            side = 1 if c == len(i1) else 2
            longer = i2 if side == 1 else i1
            t = longer[c]
            cands = [d for d in directions(eng.rank) if eng.dmap(j, d) == t or eng.illegal_at(j, eng.dmap(j, d), t)]
            node.stage = j
            _extend(eng, node, side, j, t, cands, extensions, stack, verdict, f"image of rho{side} is a prefix at stage {j}")
            return
        tr = turn(i1[c], i2[c])
        if not eng.illegal_at(j, *tr):
            node.stage = j
            node.children.append(Node(rho1, rho2, j, "legal_turn", turn_str(tr)))
            node.event = "compare"
            return
        if j < full:
            j += 1
            continue
        # full period: compare halves with their images
        node.stage = j
        sides = []
        for rho, img in ((rho1, i1), (rho2, i2)):
            gam = img[c:]
            k = common_prefix_len(gam, rho)
            if gam == rho:
                sides.append(("equal", None))
            elif k == len(rho):
                prev = len(eng.image_word(j, rho[:-1]))
                q = c + len(rho) - 1
                sides.append(("longer_fixed" if q >= prev else "longer_unfixed", gam[len(rho)]))
            elif k == len(gam):
                sides.append(("shorter", rho[len(gam)]))
            else:
                sides.append(("mismatch", None))
        kinds = [s[0] for s in sides]
        node.event = "compare"
        if "mismatch" in kinds:
            node.children.append(Node(rho1, rho2, j, "mismatch"))
            return
        if "longer_unfixed" in kinds:
            node.children.append(Node(rho1, rho2, j, "no_continuation", "image overshoots without a fixed point"))
            return
        if all(k in ("equal", "longer_fixed") for k in kinds):
            node.children.append(Node(rho1, rho2, j, "found"))
            verdict.kind = "found"
            verdict.rho1, verdict.rho2 = rho1, rho2
            verdict.power = verdict.period
            verdict.interior = tuple(k == "longer_fixed" for k in kinds)
            return
        side = 1 if kinds[0] == "shorter" else 2
        want = sides[side - 1][1]
        cands = [d for d in directions(eng.rank) if eng.dmap(j, d) == want]
        _extend(eng, node, side, j, want, cands, extensions, stack, verdict, "half is longer than its image")
        return


def verify_pnp(f: RoseMap, rho1, rho2, p: int = 1, interior=(False, False)) -> bool:
    """Independent check that inv(rho1) rho2 is a Nielsen path of f^p.

    With ``interior`` set for a half, its endpoint is a fixed point inside
    its last edge: the half must be a proper prefix of its image with the
    matching copy of the last edge coming from the last edge's own image.
    """
    rho1, rho2 = tuple(rho1), tuple(rho2)
    if not rho1 or not rho2:
        raise ValueError("both halves must be nonempty")
    if rho1[0] == rho2[0] or not is_reduced(invert(rho1) + rho2):
        raise ValueError("inv(rho1) rho2 is not a reduced path")
    h = power(f, p)
    i1, i2 = apply(h, rho1), apply(h, rho2)
    c = common_prefix_len(i1, i2)
    if c >= len(i1) or c >= len(i2):
        return False
    for rho, img, inner in ((rho1, i1, interior[0]), (rho2, i2, interior[1])):
        gam = img[c:]
        if not inner:
            if gam != rho:
                return False
            continue
        if len(gam) <= len(rho) or gam[: len(rho)] != rho:
            return False
        if c + len(rho) - 1 < len(apply(h, rho[:-1])):
            return False
    return True
