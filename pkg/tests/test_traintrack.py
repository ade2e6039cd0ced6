import math
import random

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import automorphisms, random_automorphism
from ttforge.freegroup import RoseMap, apply, compose, directions, identity, parse_rosemap, parse_word, power
from ttforge.traintrack import (
    check_fic,
    direction_map,
    gates,
    is_primitive,
    is_train_track,
    iterate_map,
    lw_connected,
    minimal_rotationless_power,
    primitivity_exponent,
    taken_turn_closure,
    transition_matrix,
    turn,
    turns_of_word,
)

A, B, C = 1, 2, 3
# not invertible, so built directly rather than parsed
REDUCIBLE = RoseMap(tuple(parse_word(w) for w in ("ab", "ba", "cd", "dc")))
BACKTRACKING = "a -> b\nb -> bA\n"


def graph_vi_turns():
    return {turn(A, -B), turn(-A, -C), turn(B, -A), turn(B, -C), turn(C, -A), turn(A, C)}


def iterate_images(f, k):
    """Raw substitution of f applied to the tightened f^(k-1)(E); reports any cancellation."""
    words = [(i,) for i in range(1, f.rank + 1)]
    cancelled = False
    for _ in range(k):
        nxt = []
        for w in words:
            raw = [y for x in w for y in f.image(x)]
            t = apply(f, w)
            cancelled |= len(t) != len(raw)
            nxt.append(t)
        words = nxt
    return words, cancelled


def test_direction_map_graph_vi(graph_vi):
    assert direction_map(graph_vi)[-B] == C


def test_direction_map_identity():
    assert direction_map(identity(3)) == {d: d for d in directions(3)}


@settings(max_examples=100)
@given(automorphisms(), automorphisms())
def test_direction_map_functorial(f, g):
    df, dg, dfg = direction_map(f), direction_map(g), direction_map(compose(f, g))
    for d in dg:
        img = apply(f, g.image(d))
        assert dfg[d] == img[0]
        if img[0] == f.image(g.image(d)[0])[0]:
            assert dfg[d] == df[dg[d]]


def test_gates_graph_vi(graph_vi):
    gs = gates(graph_vi)
    assert gs.periodic == {A, -A, B, C, -C}
    assert gs.fixed == gs.periodic
    assert -B not in gs.periodic
    assert gs.illegal_turns == [turn(-B, C)]


def test_gates_identity():
    gs = gates(identity(3))
    assert len(gs.gates) == 6
    assert gs.fixed == set(directions(3))


def test_corpus_has_five_fixed_directions_after_power(corpus):
    for e in corpus.values():
        p, h = minimal_rotationless_power(e.map())
        table = direction_map(h)
        assert p == e.rotationless_power, e.name
        assert sum(table[d] == d for d in table) == 5, e.name


def test_taken_turns_graph_vi(graph_vi):
    assert taken_turn_closure(graph_vi) == graph_vi_turns()


def test_taken_turns_identity():
    assert taken_turn_closure(identity(3)) == set()


def test_taken_turns_match_iteration(corpus):
    for e in corpus.values():
        f = e.map()
        harvested = set()
        words = [(i,) for i in range(1, 4)]
        for _ in range(3):
            words = [apply(f, w) for w in words]
            for w in words:
                harvested.update(turns_of_word(w))
        assert harvested == taken_turn_closure(f), e.name


def test_corpus_maps_are_train_tracks(corpus):
    for e in corpus.values():
        assert is_train_track(e.map()), e.name


def test_train_track_identity():
    assert is_train_track(identity(3))


def test_backtracking_map_is_not_train_track():
    f = parse_rosemap(BACKTRACKING)
    verdict = is_train_track(f)
    _, cancelled = iterate_images(f, 4)
    assert cancelled
    assert not verdict
    assert verdict.bad_turn is not None


def test_train_track_agrees_with_iteration():
    rng = random.Random(7)
    for _ in range(300):
        f = random_automorphism(rng, n=4)
        _, cancelled = iterate_images(f, 4)
        if cancelled:
            assert not is_train_track(f)
        if is_train_track(f):
            assert not cancelled


def test_transition_matrix_graph_vi(graph_vi):
    m = transition_matrix(graph_vi)
    assert list(m[:, B - 1]) == [1, 1, 1]


def test_transition_matrix_identity():
    assert (transition_matrix(identity(3)) == np.eye(3, dtype=int)).all()


def test_transition_matrix_counts(corpus):
    for e in corpus.values():
        f = e.map()
        m = transition_matrix(f)
        for j, w in enumerate(f.images):
            for i in range(3):
                assert m[i, j] == sum(abs(x) == i + 1 for x in w)


def test_reducible_example_not_primitive():
    assert not is_primitive(transition_matrix(REDUCIBLE))


def test_permutation_matrix_not_primitive():
    assert not is_primitive(transition_matrix(parse_rosemap("a -> b\nb -> a\n")))


def explicit_power_positive(m, limit=30):
    p = np.array(m, dtype=object)
    for k in range(1, limit + 1):
        if (p > 0).all():
            return k
        p = p.dot(np.array(m, dtype=object))
    return None


def test_corpus_primitive(corpus):
    for e in corpus.values():
        m = transition_matrix(e.map())
        k = primitivity_exponent(m)
        assert k is not None and 1 <= k <= 20, e.name
        assert k == explicit_power_positive(m), e.name


def test_rotationless_power_of_graph_xx(corpus):
    p, h = minimal_rotationless_power(corpus["XX"].map())
    assert p == 2
    assert h == power(corpus["XX"].map(), 2)


def test_rotationless_power_when_already_fixed(graph_vi):
    assert minimal_rotationless_power(graph_vi)[0] == 1


@settings(max_examples=200)
@given(automorphisms())
def test_rotationless_power_fixes_periodic_directions(f):
    p, h = minimal_rotationless_power(f)
    assert math.lcm(*range(1, 7)) % p == 0
    table = direction_map(f)
    per = gates(f).periodic
    assert all(iterate_map(table, d, p) == d for d in per)
    for q in range(1, p):
        assert not all(iterate_map(table, d, q) == d for d in per)
    if is_train_track(f):
        # without cancellation the direction map of the power is the iterate
        assert all(direction_map(h)[d] == d for d in per)


def test_fic_graph_vi(graph_vi):
    assert check_fic(graph_vi).satisfied
    assert lw_connected(graph_vi)


def test_fic_reducible_example():
    v = check_fic(REDUCIBLE)
    assert v.status == "fails" and "primitive" in v.failed


def test_fic_identity():
    v = check_fic(identity(3))
    assert v.status == "fails" and "primitive" in v.failed


def test_fic_rejects_non_train_track():
    with pytest.raises(ValueError):
        check_fic(parse_rosemap(BACKTRACKING))


def test_turns_of_word():
    assert turns_of_word(parse_word("abC")) == [turn(-A, B), turn(-B, -C)]
