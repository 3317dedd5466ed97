from fractions import Fraction

from hypothesis import given, strategies as st

from bvhtt.doubling import double_odd_quantum, halve_odd_quantum
from bvhtt.document import parse_problem
from bvhtt.feynman import (
    check_bv_stokes, check_graph_sum, effective_action, minimal_model_linf,
    minimal_model_unimodular, wick_integral,
)
from bvhtt.graded import Poly, SuperSpace
from bvhtt.random_instances import random_poly, random_unimodular
from bvhtt.sdr import compute_homology_sdr, identity_sdr, induced_double_sdr, lagrangian_data
from bvhtt.structures import check_mc_unimodular, check_qme

from conftest import fixture_text, rng_for

seeds = st.integers(0, 10**6)


def _lag(space):
    sq, ds, sds = induced_double_sdr(compute_homology_sdr(space), "odd")
    return lagrangian_data(sq, ds, sds)


ACYCLIC = SuperSpace(("u", "v"), (0, 1), [[0, 0], [1, 0]])


def test_integral_of_one_and_odd_degree():
    lag = _lag(ACYCLIC)
    big = lag.ds.total
    assert wick_integral(Poly.const(big, 3), lag) == {0: Poly.const(lag.small_ds.total, 3)}
    # u and v^ restrict to the two fibre coordinates
    for k in (0, 3):
        f = Poly(big, 3, {(k,): Fraction(1)})
        assert lag.restrict(f, 3).terms
        assert not any(v.terms for v in wick_integral(f, lag).values())


def test_quadratic_pair_gives_propagator():
    lag = _lag(ACYCLIC)
    f = Poly(lag.ds.total, 3, {(0, 3): Fraction(1)})  # u v^
    assert lag.restrict(f, 3).terms == {(0, 1): 1}
    g = lag.propagator
    assert g[0][1] == g[1][0] == -1
    out = wick_integral(f, lag)
    assert set(out) == {1} and out[1] == Poly.const(lag.small_ds.total, 1).scale(g[0][1])


@given(seeds)
def test_stokes(seed):
    rng = rng_for(seed)
    u = random_unimodular(rng, max_dim=2, cutoff=3)
    lag = _lag(u.space)
    sp = lag.ds.total
    assert check_bv_stokes(Poly.const(sp, 4), lag).ok
    f = random_poly(sp, 4, rng.randint(0, 1), rng, 1, 4, 5)
    assert check_bv_stokes(f, lag).ok


def test_zero_differential_gives_restriction():
    doc = parse_problem(fixture_text("zero_differential.txt"))
    m = doc.linf()
    sdr = identity_sdr(m.space)
    sq, ds, sds = induced_double_sdr(sdr, "odd")
    lag = lagrangian_data(sq, ds, sds)
    from bvhtt.structures import UnimodularStructure
    u = UnimodularStructure(m, Poly.zero(m.space, m.cutoff - 1))
    q = double_odd_quantum(u, ds)
    r = effective_action(q, lag, 1)
    assert halve_odd_quantum(r, sds) == u


def test_acyclic_action_vanishes():
    doc = parse_problem(fixture_text("acyclic_pair.txt"))
    u = doc.unimodular()
    sdr = compute_homology_sdr(u.space)
    sq, ds, sds = induced_double_sdr(sdr, "odd")
    lag = lagrangian_data(sq, ds, sds)
    r = effective_action(double_odd_quantum(u, ds), lag, 1)
    assert r.coeff(0).is_zero()
    assert minimal_model_linf(u.linf, sdr).space.dim == 0


@given(seeds)
def test_effective_action_solves_qme(seed):
    u = random_unimodular(rng_for(seed), max_dim=3, cutoff=4)
    lag = _lag(u.space)
    r = effective_action(double_odd_quantum(u, lag.ds), lag, 1)
    assert check_qme(r, 1).ok


@given(st.integers(0, 10**6))
def test_graph_sum_matches_direct_expansion(seed):
    u = random_unimodular(rng_for(seed), max_dim=2, cutoff=4)
    lag = _lag(u.space)
    q = double_odd_quantum(u, lag.ds)
    assert check_graph_sum(q, lag, 2).ok


def test_massey_volume_function():
    doc = parse_problem(fixture_text("massey_unimodular.txt"))
    u = doc.unimodular()
    assert check_mc_unimodular(u).ok
    out = minimal_model_unimodular(u, compute_homology_sdr(u.space))
    assert check_mc_unimodular(out).ok
    # the volume function is gauge trivial; its loop cancels the corolla
    assert out.function.is_zero()
