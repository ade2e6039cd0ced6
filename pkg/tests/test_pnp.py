import pytest

from ttforge.freegroup import NielsenGen, apply, compose_all, gen_to_rosemap, invert, parse_rosemap, parse_word, power
from ttforge.pnp import Budget, NotApplicable, find_ipnps, verify_pnp
from ttforge.traintrack import gates, is_train_track, minimal_rotationless_power, turn

A, B, C = 1, 2, 3

# a -> aB, c -> ca, b -> Cb, b -> ab, in application order
WARMUP = [NielsenGen(-A, B), NielsenGen(-C, -A), NielsenGen(B, -C), NielsenGen(B, A)]


def test_warmup_generators_print_as_expected():
    assert [str(g) for g in WARMUP] == ["a -> aB", "c -> ca", "b -> Cb", "b -> ab"]


def test_warmup_first_stage_images():
    g1 = gen_to_rosemap(WARMUP[0], 3)
    assert apply(g1, parse_word("b")) == parse_word("b")
    assert apply(g1, parse_word("A")) == parse_word("bA")


def test_warmup_green_turn():
    g = compose_all([gen_to_rosemap(x, 3) for x in WARMUP])
    first = WARMUP[0]
    assert turn(first.folded, first.prefix) == turn(-A, B)
    assert gates(g).illegal_turns == [turn(-A, B)]
    # the composite itself backtracks, so generator mode skips the train track test
    assert not is_train_track(g)


def test_warmup_has_no_pnps():
    v = find_ipnps(WARMUP, rank=3)
    assert v.kind == "none_found"
    assert v.tree.rho1 == (-A,) and v.tree.rho2 == (B,)
    leaves = list(v.tree.leaves())
    assert [(x.rho1, x.rho2) for x in leaves] == [
        (parse_word("AA"), parse_word("bCa")),
        (parse_word("Ab"), parse_word("bCa")),
    ]
    for leaf in leaves:
        assert leaf.event == "legal_turn"
        assert "{B,b}" in leaf.detail


def test_corpus_has_no_pnps(corpus):
    for e in corpus.values():
        _, h = minimal_rotationless_power(e.map())
        assert find_ipnps([h]).kind == "none_found", e.name


def test_commutator_map_has_a_nielsen_path():
    f = parse_rosemap("a -> ab\nb -> bab\n")
    v = find_ipnps([f])
    assert v.kind == "found"
    assert verify_pnp(f, v.rho1, v.rho2, v.power, v.interior)
    path = invert(v.rho1) + v.rho2
    if v.interior == (False, False):
        assert apply(power(f, v.power), path) == path


def test_verify_pnp_rejects_non_paths(graph_vi):
    assert not verify_pnp(graph_vi, parse_word("a"), parse_word("b"))
    with pytest.raises(ValueError):
        verify_pnp(graph_vi, parse_word("a"), parse_word("a"))


def test_small_budget_reports_frontier(graph_vi):
    v = find_ipnps([graph_vi], Budget(1, 8))
    assert v.kind == "depth_exceeded"
    assert v.frontier
    assert v.to_json()["frontier"]


def test_power_budget(corpus):
    _, h = minimal_rotationless_power(corpus["XX"].map())
    assert find_ipnps([h]).kind == "none_found"
    assert find_ipnps([corpus["XX"].map()], Budget(64, 1)).kind == "depth_exceeded"


def test_not_a_train_track_stage_map():
    with pytest.raises(NotApplicable):
        find_ipnps([parse_rosemap("a -> b\nb -> bA\n")])


def test_budget_parse():
    assert Budget.parse("10,3") == Budget(10, 3)
    with pytest.raises(ValueError):
        Budget.parse("10")


def test_verdict_json(graph_vi):
    out = find_ipnps([graph_vi]).to_json(trace=True)
    assert out["kind"] == "none_found"
    assert out["tree"]["rho1"] and out["tree"]["rho2"]
