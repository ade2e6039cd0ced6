"""Command line driver: corpus checks, classification, and thin wrappers.

Exit codes: 0 when a verdict is reached, 1 on errors and failed
verification, 2 when a budget ran out before a verdict.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from importlib import resources

from . import amd as amd_mod
from .freegroup import RoseMap, format_rosemap, letter_char, parse_decomposition, parse_rosemap, word_str
from .ltt import build_ltt, to_dot
from .pnp import Budget, NotApplicable, find_ipnps
from .traintrack import (
    gates,
    is_train_track,
    lw_connected,
    minimal_rotationless_power,
    primitivity_exponent,
    transition_matrix,
    turn_str,
)
from .whitehead import catalog_index, catalog_names, enumerate_catalog, resolve_graph, star_graph, stable_whitehead_graph, unlabel

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2


# -- corpus --------------------------------------------------------------------------


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    file: str
    claimed_graph: str
    rotationless_power: int
    repaired: bool

    def text(self) -> str:
        return _corpus_dir().joinpath(self.file).read_text()

    def map(self) -> RoseMap:
        return parse_rosemap(self.text())


def _corpus_dir():
    return resources.files("ttforge").joinpath("data/corpus")


def corpus_entries() -> list[CorpusEntry]:
    data = json.loads(_corpus_dir().joinpath("index.json").read_text())
    out = []
    for name, e in data["entries"].items():
        out.append(CorpusEntry(name, e["file"], e["claimed_graph"], int(e["rotationless_power"]), bool(e["repaired"])))
    return out


# -- verification ------------------------------------------------------------------------


@dataclass
class VerifyReport:
    """Stage results in pipeline order; ``failed`` names the first failing stage."""

    stages: dict = field(default_factory=dict)
    failed: str | None = None
    inconclusive: bool = False
    graph_index: int | None = None

    @property
    def ok(self) -> bool:
        return self.failed is None and not self.inconclusive

    def to_json(self) -> dict:
        out = {"ok": self.ok, "failed": self.failed, "inconclusive": self.inconclusive, "stages": self.stages}
        if self.graph_index is not None:
            out["ideal_whitehead_graph"] = _graph_json(self.graph_index)
        return out


def _graph_json(i: int) -> dict:
    g = enumerate_catalog()[i]
    return {"index": i, "name": catalog_names().get(i), "code": g.code, "degrees": g.degrees()}


def verify_map(f: RoseMap, pnp_budget: Budget | None = None) -> VerifyReport:
    """Train track, rotationless power, fixed directions, primitivity, LW, PNPs, IW class."""
    rep = VerifyReport()
    st = rep.stages
    tt = is_train_track(f)
    st["train_track"] = bool(tt)
    if not tt:
        st["train_track_witness"] = turn_str(tt.bad_turn)
        rep.failed = "train_track"
        return rep
    p, h = minimal_rotationless_power(f)
    gs = gates(h)
    st["rotationless_power"] = p
    st["gates"] = [[letter_char(d) for d in gate] for gate in gs.gates]
    st["fixed_directions"] = len(gs.fixed)
    if len(gs.fixed) != 2 * f.rank - 1:
        rep.failed = "fixed_directions"
        return rep
    k = primitivity_exponent(transition_matrix(f))
    st["primitive"] = k is not None
    st["primitivity_exponent"] = k
    if k is None:
        rep.failed = "primitive"
        return rep
    st["lw_connected"] = lw_connected(f)
    if not st["lw_connected"]:
        rep.failed = "lw_connected"
        return rep
    try:
        v = find_ipnps([h], budget=pnp_budget)
    except NotApplicable as e:
        st["pnp"] = f"not applicable: {e}"
        rep.inconclusive = True
        return rep
    st["pnp"] = v.kind
    if v.kind == "found":
        rep.failed = "pnp"
        return rep
    if v.kind == "depth_exceeded":
        rep.inconclusive = True
        return rep
    rep.graph_index = catalog_index(unlabel(stable_whitehead_graph(h)))
    return rep


# -- classification ---------------------------------------------------------------------


def corpus_classes(pnp_budget: Budget | None = None, skip=()) -> dict:
    """Catalog index -> (corpus name, report) for every corpus map that verifies."""
    out: dict = {}
    for e in corpus_entries():
        if e.name in skip:
            continue
        rep = verify_map(e.map(), pnp_budget)
        if rep.ok:
            out.setdefault(rep.graph_index, (e.name, rep))
    return out


def classify(pnp_budget: Budget | None = None, loop_budget: amd_mod.LoopBudget | None = None, skip=()) -> list[dict]:
    """One verdict per catalog entry, ordered by catalog index."""
    covered = corpus_classes(pnp_budget, skip)
    rows = []
    for i, g in enumerate(enumerate_catalog()):
        row = {"index": i, "name": catalog_names().get(i), "code": g.code}
        if i in covered:
            name, rep = covered[i]
            row.update(achievable="yes", witness=f"corpus:{name}", rotationless_power=rep.stages["rotationless_power"])
        else:
            row.update(_diagram_verdict(g, pnp_budget, loop_budget))
        rows.append(row)
    return rows


def _diagram_verdict(g, pnp_budget, loop_budget) -> dict:
    d = amd_mod.build_amd(g)
    if not d.nodes:
        return {"achievable": "no", "reason": "non-birecurrent-all-structures"}
    if not any(amd_mod.irreducibility_potential(c) for c in d.components):
        return {"achievable": "no", "reason": "diagram-irreducibility"}
    res = amd_mod.find_representative_loop(g, budget=loop_budget, pnp_budget=pnp_budget, amd=d)
    if res.status == "found":
        return {"achievable": "yes", "witness": "search:" + format_rosemap(res.loops[0].map).strip().replace("\n", "; ")}
    return {"achievable": "unknown", "reason": "search-exhausted-inconclusive"}


def catalog_name_table() -> dict:
    """Catalog index -> name, derived from the corpus and the three uncovered entries.

    Covered entries take their corpus name.  Of the uncovered ones the star
    is III, the one whose chart has a single birecurrent cell is VII, and
    the remaining one is V.
    """
    names = {i: name for i, (name, _) in corpus_classes().items()}
    rest = [i for i in range(len(enumerate_catalog())) if i not in names]
    star = catalog_index(star_graph())
    for i in rest:
        if i == star:
            names[i] = "III"
        elif len(amd_mod.build_chart(enumerate_catalog()[i]).boxed) == 1:
            names[i] = "VII"
        else:
            names[i] = "V"
    return dict(sorted(names.items()))


# -- output helpers --------------------------------------------------------------------------


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _read_map(path: str) -> RoseMap:
    with open(path) as fh:
        return parse_rosemap(fh.read())


def _pnp_budget(args) -> Budget:
    return Budget.parse(args.budget_pnp) if args.budget_pnp else Budget()


# -- commands ------------------------------------------------------------------------------------


def cmd_verify(args) -> int:
    f = _read_map(args.map)
    rep = verify_map(f, _pnp_budget(args))
    if args.json:
        _emit(args, _dump(rep.to_json()))
    else:
        lines = [f"{k}: {v}" for k, v in rep.stages.items()]
        if rep.graph_index is not None:
            gj = _graph_json(rep.graph_index)
            lines.append(f"ideal_whitehead_graph: {gj['index']} {gj['name'] or '-'} {gj['code']}")
        lines.append("result: " + ("pass" if rep.ok else "inconclusive" if rep.inconclusive else f"fail ({rep.failed})"))
        _emit(args, "\n".join(lines) + "\n")
    if rep.inconclusive:
        return EXIT_INCONCLUSIVE
    return EXIT_OK if rep.ok else EXIT_ERROR


def cmd_classify(args) -> int:
    rows = classify(_pnp_budget(args), amd_mod.LoopBudget(max_length=args.budget_loop), skip=set(args.skip or ()))
    yes = sum(r["achievable"] == "yes" for r in rows)
    no = sum(r["achievable"] == "no" for r in rows)
    if args.json:
        _emit(args, _dump({"entries": rows, "achievable": yes, "unachievable": no}))
    else:
        lines = []
        for r in rows:
            detail = r.get("witness") or r.get("reason")
            lines.append(f"{r['index']:2d} {r['name'] or '-':>5} {r['code']} {r['achievable']:>7} {detail}")
        lines.append(f"achievable {yes}, unachievable {no}, undecided {len(rows) - yes - no}")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK if yes + no == len(rows) else EXIT_INCONCLUSIVE


def cmd_catalog(args) -> int:
    if args.regenerate_names:
        table = catalog_name_table()
        _emit(args, _dump({"generated_by": "ttforge catalog --regenerate-names", "names": {str(k): v for k, v in table.items()}}))
        return EXIT_OK
    names = catalog_names()
    rows = [
        {"index": i, "name": names.get(i), "code": g.code, "edges": [list(e) for e in g.edges], "degrees": g.degrees()}
        for i, g in enumerate(enumerate_catalog())
    ]
    if args.json:
        _emit(args, _dump(rows))
    else:
        _emit(args, "".join(f"{r['index']:2d} {r['name'] or '-':>5} {r['code']} degrees {r['degrees']}\n" for r in rows))
    return EXIT_OK


def cmd_ltt(args) -> int:
    f = _read_map(args.map)
    p, h = minimal_rotationless_power(f)
    s = build_ltt(h)
    if args.dot:
        _emit(args, to_dot(s))
    elif args.json:
        _emit(args, _dump({"rotationless_power": p, "structure": s.to_json()}))
    else:
        _emit(args, f"rotationless power {p}\n{s}\n")
    return EXIT_OK


def cmd_chart(args) -> int:
    ch = amd_mod.build_chart(resolve_graph(args.graph), args.rank)
    if args.json:
        _emit(args, _dump(ch.to_json()))
    else:
        _emit(args, "".join(f"{c.name:>6} {'boxed' if c.boxed else 'crossed':>7} {c.structure}\n" for c in ch.cells))
    return EXIT_OK


def cmd_amd(args) -> int:
    g = resolve_graph(args.graph)
    d = amd_mod.build_amd(g, args.rank)
    if args.dot:
        with open(args.dot, "w") as fh:
            fh.write(d.to_dot())
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(_dump(d.to_json()))
    lines = [f"nodes {len(d.nodes)}, edges {len(d.edges)}, components {len(d.components)}"]
    for grp in d.component_classes():
        c = d.components[grp[0]]
        pot = amd_mod.irreducibility_potential(c, args.rank)
        pairs = ",".join(str(i) for i in sorted(amd_mod.red_pairs(c)))
        lines.append(
            f"component class of {len(grp)}: {len(c)} nodes, {len(d.component_edges(c))} edges, "
            f"red edge pairs {pairs}, irreducibility potential {'yes' if pot else 'no'}"
        )
    if not d.nodes:
        lines.append("empty diagram")
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_search(args) -> int:
    g = resolve_graph(args.graph)
    budget = amd_mod.LoopBudget(max_length=args.budget or args.budget_loop)
    res = amd_mod.find_representative_loop(g, args.rank, budget, _pnp_budget(args))
    if args.json:
        _emit(args, _dump(res.to_json(args.trace)))
    else:
        lines = [f"status: {res.status}" + (f" ({res.reason})" if res.reason else "")]
        lines.append(f"candidates checked: {res.candidates}, longest walk length: {res.max_length_reached}")
        for c in res.loops:
            lines.append("generators: " + ", ".join(str(x) for x in c.gens))
            lines.append(f"rotationless power: {c.power}")
            lines.append(format_rosemap(c.map).rstrip())
            if args.trace:
                lines.extend(f"H_{k + 1}: {h}" for k, h in enumerate(amd_mod.format_trace(c.trace)))
        _emit(args, "\n".join(lines) + "\n")
    if res.status == "inconclusive":
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_pnp(args) -> int:
    budget = Budget.parse(args.budget) if args.budget else _pnp_budget(args)
    if args.decomp:
        with open(args.decomp) as fh:
            gens = parse_decomposition(fh.read())
        v = find_ipnps(gens, budget=budget, rank=args.rank)
        p = v.period
    elif args.map:
        f = _read_map(args.map)
        p, h = minimal_rotationless_power(f)
        v = find_ipnps([h], budget=budget)
    else:
        raise ValueError("pnp needs --map or --decomp")
    if args.json:
        _emit(args, _dump(v.to_json(args.trace)))
    else:
        lines = [f"verdict: {v.kind}", f"rotationless power: {p}"]
        if v.kind == "found":
            lines.append(f"rho1 {word_str(v.rho1)} rho2 {word_str(v.rho2)} interior endpoints {list(v.interior)}")
        if args.trace and v.tree is not None:
            lines.append(_dump(v.tree.to_json()).rstrip())
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_INCONCLUSIVE if v.kind == "depth_exceeded" else EXIT_OK


# -- parser --------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    base = argparse.ArgumentParser(add_help=False)
    base.add_argument("--rank", type=int, default=3)
    base.add_argument("--budget-pnp", metavar="E,P", help="PNP search budget: max extensions, max rotationless power")
    base.add_argument("--budget-loop", type=int, default=amd_mod.DEFAULT_MAX_LENGTH, metavar="N", help="longest loop tried")
    base.add_argument("--trace", action="store_true")
    base.add_argument("--out", help="write output here instead of stdout")
    common = argparse.ArgumentParser(add_help=False, parents=[base])
    common.add_argument("--json", action="store_true")

    p = argparse.ArgumentParser(prog="ttforge", description="Train track maps and ideal Whitehead graphs on the rose.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("verify", parents=[common], help="certify a map as a PNP-free representative")
    s.add_argument("--map", required=True)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("classify", parents=[common], help="decide every catalog entry")
    s.add_argument("--skip", action="append", metavar="NAME", help="leave out a corpus entry")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("catalog", parents=[common], help="list the 5-vertex catalog")
    s.add_argument("--regenerate-names", action="store_true", help="recompute the name table from the corpus")
    s.set_defaults(func=cmd_catalog)

    s = sub.add_parser("ltt", parents=[common], help="LTT structure of a map")
    s.add_argument("--map", required=True)
    s.add_argument("--dot", action="store_true")
    s.set_defaults(func=cmd_ltt)

    s = sub.add_parser("chart", parents=[common], help="LTT chart of a graph")
    s.add_argument("--graph", required=True)
    s.set_defaults(func=cmd_chart)

    s = sub.add_parser("amd", parents=[base], help="admissible map diagram of a graph")
    s.add_argument("--graph", required=True)
    s.add_argument("--dot", metavar="FILE")
    s.add_argument("--json", metavar="FILE")
    s.set_defaults(func=cmd_amd)

    s = sub.add_parser("search", parents=[common], help="search the diagram for a representative loop")
    s.add_argument("--graph", required=True)
    s.add_argument("--budget", type=int, metavar="N", help="longest loop tried (same as --budget-loop)")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("pnp", parents=[common], help="look for periodic Nielsen paths")
    s.add_argument("--map", help="map file; its rotationless power is searched")
    s.add_argument("--decomp", help="generator list, one per line in application order")
    s.add_argument("--budget", metavar="E,P", help="same as --budget-pnp")
    s.set_defaults(func=cmd_pnp)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, KeyError, ValueError) as e:  # parse errors and NotApplicable are ValueErrors
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
