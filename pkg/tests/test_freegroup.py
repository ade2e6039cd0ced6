import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import automorphisms, nielsen_gens, raw_words
from ttforge.cli import _corpus_dir
from ttforge.freegroup import (
    NielsenGen,
    ParseError,
    apply,
    compose,
    compose_all,
    format_rosemap,
    gen_to_rosemap,
    identity,
    invert,
    is_reduced,
    parse_decomposition,
    parse_generator,
    parse_rosemap,
    parse_word,
    power,
    tighten,
)
from ttforge.moves import peel_decomposition


def cancel_once(w):
    for i in range(len(w) - 1):
        if w[i] == -w[i + 1]:
            return w[:i] + w[i + 2 :], True
    return w, False


def slow_tighten(w):
    w, changed = tuple(w), True
    while changed:
        w, changed = cancel_once(w)
    return w


def substitute(f, w):
    out = []
    for x in w:
        out.extend(f.image(x))
    return slow_tighten(out)


def test_tighten_full_cancellation():
    assert tighten(parse_word("aA")) == ()


def test_tighten_single_cancellation():
    assert tighten(parse_word("abBc")) == parse_word("ac")


def test_tighten_rejects_bad_index():
    with pytest.raises(ValueError):
        tighten([1, 4], rank=3)
    with pytest.raises(ValueError):
        tighten([0])


@settings(max_examples=1000)
@given(raw_words())
def test_tighten_matches_repeated_cancellation(w):
    t = tighten(w)
    assert t == slow_tighten(w)
    assert tighten(t) == t
    assert is_reduced(t)


def test_apply_identity():
    w = parse_word("abCbA")
    assert apply(identity(3), w) == w


def test_apply_graph_vi_image_of_b(graph_vi):
    assert apply(graph_vi, parse_word("b")) == parse_word("baC")


@settings(max_examples=300)
@given(automorphisms(), automorphisms(), raw_words())
def test_apply_is_an_action(f, g, w):
    w = tighten(w)
    assert apply(f, apply(g, w)) == apply(compose(f, g), w)
    assert apply(f, w) == substitute(f, w)


def test_apply_rank_mismatch():
    with pytest.raises(ValueError):
        apply(identity(2), parse_word("c"))


@given(automorphisms())
def test_compose_with_identity(f):
    assert compose(identity(3), f) == f
    assert compose(f, identity(3)) == f


@settings(max_examples=200)
@given(automorphisms(), automorphisms(), automorphisms())
def test_compose_associative(f, g, h):
    assert compose(f, compose(g, h)) == compose(compose(f, g), h)


def test_nielsen_inverse_pair_restores_edge():
    there = gen_to_rosemap(NielsenGen(-1, -2), 3)  # a -> ab
    back = gen_to_rosemap(NielsenGen(-1, 2), 3)  # a -> aB
    assert compose(back, there) == identity(3)


@given(nielsen_gens())
def test_generator_inverse(g):
    inv = NielsenGen(g.folded, -g.prefix)
    assert compose_all([gen_to_rosemap(g, 3), gen_to_rosemap(inv, 3)]) == identity(3)


def test_generator_c_to_bar_b_c():
    f = gen_to_rosemap(NielsenGen(3, -2), 3)
    assert format_rosemap(f) == "a -> a\nb -> b\nc -> Bc\n"
    assert str(NielsenGen(3, -2)) == "c -> Bc"
    assert str(NielsenGen(-2, 3)) == "b -> bC"


def test_generator_forbids_prefix_on_own_edge():
    with pytest.raises(ValueError):
        NielsenGen(2, 2)
    with pytest.raises(ValueError):
        NielsenGen(2, -2)


def test_power():
    f = parse_rosemap("a -> ab\nb -> a\n")
    assert power(f, 3) == compose(f, compose(f, f))
    with pytest.raises(ValueError):
        power(f, 0)


def test_graph_xiii_decomposition_round_trip(corpus):
    f = corpus["XIII"].map()
    gens = peel_decomposition(f)
    assert gens is not None
    assert compose_all([gen_to_rosemap(g, 3) for g in gens]) == f


def test_parse_graph_i_map(corpus):
    f = corpus["I"].map()
    assert f.images[0] == parse_word("ac B ca B cacac B ca")


def test_parse_errors_report_lines():
    with pytest.raises(ParseError, match="line 1: empty image"):
        parse_rosemap("a -> \n")
    with pytest.raises(ParseError, match="line 2: unknown letter '1'"):
        parse_rosemap("a -> ab\nb -> 1\n")
    with pytest.raises(ParseError, match="not freely reduced"):
        parse_rosemap("a -> abB\nb -> b\n")
    with pytest.raises(ParseError, match="missing edges b"):
        parse_rosemap("a -> a\nc -> c\n")
    with pytest.raises(ParseError, match="defined twice"):
        parse_rosemap("a -> a\na -> a\n")
    with pytest.raises(ParseError, match="determinant"):
        parse_rosemap("a -> aa\nb -> b\n")


def test_parse_ignores_comments_and_blank_lines():
    f = parse_rosemap("# header\n\na -> ab  # twist\nb -> b\n")
    assert format_rosemap(f) == "a -> ab\nb -> b\n"


def canonical_text(text):
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            head, body = (s.strip() for s in line.split("->"))
            lines.append(f"{head} -> {''.join(body.split())}\n")
    return "".join(lines)


def test_format_parse_golden_on_corpus(corpus):
    assert len(corpus) == 18
    for e in corpus.values():
        text = _corpus_dir().joinpath(e.file).read_text()
        assert format_rosemap(parse_rosemap(text)) == canonical_text(text)


@given(automorphisms())
def test_format_parse_round_trip(f):
    assert parse_rosemap(format_rosemap(f)) == f


def test_parse_generator_forms():
    assert parse_generator("c -> Bc") == NielsenGen(3, -2)
    assert parse_generator("b -> bC") == NielsenGen(-2, 3)
    for bad in ("a -> aa", "a -> bc", "A -> Ab", "a -> abc", "nonsense"):
        with pytest.raises(ParseError):
            parse_generator(bad)


@given(nielsen_gens())
def test_parse_generator_round_trip(g):
    assert parse_generator(str(g)) == g


def test_parse_decomposition_line_numbers():
    assert parse_decomposition("# chain\na -> aB\n\nc -> ca\n") == [NielsenGen(-1, 2), NielsenGen(-3, -1)]
    with pytest.raises(ParseError, match="line 3"):
        parse_decomposition("a -> aB\n\nc -> cc\n")


@given(st.lists(nielsen_gens(), min_size=1, max_size=5))
def test_determinant_of_generator_chain_is_unit(gens):
    assert abs(compose_all([gen_to_rosemap(g, 3) for g in gens]).determinant()) == 1


@given(raw_words())
def test_invert(w):
    w = tighten(w)
    assert tighten(w + invert(w)) == ()
