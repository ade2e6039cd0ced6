import random

import pytest
from hypothesis import strategies as st

from ttforge.cli import corpus_entries
from ttforge.freegroup import NielsenGen, compose_all, gen_to_rosemap, parse_rosemap

GRAPH_VI = """
a -> abacbabaCabacbaba
b -> baC
c -> cABABABCABAc
"""


@pytest.fixture(scope="session")
def graph_vi():
    return parse_rosemap(GRAPH_VI)


@pytest.fixture(scope="session")
def corpus():
    return {e.name: e for e in corpus_entries()}


def letters(rank=3):
    return st.sampled_from([s * i for i in range(1, rank + 1) for s in (1, -1)])


def raw_words(rank=3, max_size=40):
    return st.lists(letters(rank), max_size=max_size)


@st.composite
def nielsen_gens(draw, rank=3):
    u = draw(letters(rank))
    a = draw(letters(rank).filter(lambda x: abs(x) != abs(u)))
    return NielsenGen(u, a)


@st.composite
def automorphisms(draw, rank=3, max_gens=6):
    gens = draw(st.lists(nielsen_gens(rank), min_size=1, max_size=max_gens))
    return compose_all([gen_to_rosemap(g, rank) for g in gens])


def random_automorphism(rng: random.Random, rank=3, n=6):
    gens = []
    for _ in range(n):
        u = rng.choice([1, -1]) * rng.randint(1, rank)
        a = rng.choice([x for x in range(-rank, rank + 1) if x and abs(x) != abs(u)])
        gens.append(NielsenGen(u, a))
    return compose_all([gen_to_rosemap(g, rank) for g in gens])


# one PASS/FAIL line per acceptance criterion, shown in the terminal summary

_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    n, title = mark.args
    passed, _, took = _criteria.get(n, (True, title, 0.0))
    _criteria[n] = (passed and rep.passed, title, took + call.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        passed, title, took = _criteria[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if passed else 'FAIL'}  {title} ({took:.1f}s)")
