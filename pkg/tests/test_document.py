from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from bvhtt.document import DocumentError, ProblemDocument, parse_problem, parse_rational, serialize
from bvhtt.random_instances import random_mc, random_unimodular
from bvhtt.sdr import compute_homology_sdr

from conftest import FIXTURES, fixture_text, rng_for


def test_empty_space():
    doc = parse_problem("[space]\n")
    assert doc.space.dim == 0
    assert doc.linf().space.dim == 0


def test_acyclic_fixture():
    doc = parse_problem(fixture_text("acyclic_pair.txt"))
    sp = doc.space
    assert sp.names == ("u", "v") and sp.parities == (0, 1)
    assert sp.matrix()[1][0] == 1  # d(u) = v


def test_undeclared_generator_is_located():
    text = "[space]\na b : even\n[differential]\na -> c\n"
    with pytest.raises(DocumentError) as err:
        parse_problem(text)
    assert (err.value.line, err.value.col) == (4, 6)
    assert "c" in err.value.msg


@pytest.mark.parametrize("tok", ["0.5", "1e3", ".5", "1/0"])
def test_inexact_literals_rejected(tok):
    with pytest.raises(DocumentError):
        parse_rational(tok)


def test_rationals():
    assert parse_rational("-3/4") == Fraction(-3, 4)
    assert parse_rational("7") == 7


def test_decimal_in_document_rejected():
    text = "[space]\na : even\nw : odd\n[structure]\na, a -> 0.5 w\n"
    with pytest.raises(DocumentError) as err:
        parse_problem(text)
    assert err.value.line == 5


def test_unknown_section():
    with pytest.raises(DocumentError):
        parse_problem("[space]\na : even\n[bogus]\n")


@pytest.mark.parametrize("name", sorted(p.name for p in FIXTURES.glob("*.txt")))
def test_fixture_round_trip(name):
    doc = parse_problem(fixture_text(name))
    text = serialize(doc)
    assert parse_problem(text) == doc
    assert serialize(parse_problem(text)) == text


@given(st.integers(0, 10**6))
def test_random_round_trip(seed):
    rng = rng_for(seed)
    u = random_unimodular(rng, max_dim=3, cutoff=4)
    doc = ProblemDocument(u.space, u.linf, u.function, compute_homology_sdr(u.space), {"cutoff": 4})
    back = parse_problem(serialize(doc))
    assert back == doc
    assert back.unimodular() == u
    assert back.sdr.S == doc.sdr.S and back.sdr.I == doc.sdr.I
