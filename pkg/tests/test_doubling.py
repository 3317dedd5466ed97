from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from bvhtt.doubling import (
    HalvingError, check_divergence_identities, double_even, double_odd, double_odd_quantum,
    even_double, even_double_structure, halve_even, halve_odd, halve_odd_quantum, odd_double,
    strictly_unimodular_double,
)
from bvhtt.graded import EVEN, ODD, Derivation, Poly, SuperSpace, bv_laplacian, lift_differential
from bvhtt.random_instances import random_derivation, random_mc, random_space, random_unimodular
from bvhtt.structures import (
    QuantumElement, UnimodularStructure, check_mc_linf, check_mc_unimodular, check_qme,
)

from conftest import rng_for

seeds = st.integers(0, 10**6)


def test_double_even_of_single_term():
    sp = SuperSpace(("x", "t"), (EVEN, ODD))
    f = Poly(sp, 3, {(0, 1): Fraction(2)})  # 2 x t, odd
    xi = Derivation(sp, 3, ODD, {0: f})  # 2 x t d/dx
    ds = even_double(sp)
    assert double_even(xi, ds) == Poly(ds.total, 4, {(0, 1, 2): Fraction(2)})  # 2 x t x*
    assert halve_even(double_even(xi, ds), ds, ODD) == xi


def test_halve_even_drops_terms_outside():
    sp = SuperSpace(("x", "y"), (EVEN, EVEN))
    ds = even_double(sp)
    two_duals = Poly(ds.total, 3, {(2, 3): Fraction(1)})
    assert halve_even(two_duals, ds, EVEN).is_zero()


def test_lifted_differential_and_double():
    sp = SuperSpace(("u", "v"), (EVEN, ODD), [[0, 0], [1, 0]])
    d = lift_differential(sp, 2)
    from bvhtt.graded import commutator
    assert commutator(d, d).is_zero()
    ds = odd_double(sp)
    assert ds.total.check() == []


def test_laplacian_examples():
    sp = SuperSpace(("x",), (EVEN,))
    ds = odd_double(sp)
    x, xh = Poly.var(ds.total, 0, 4), Poly.var(ds.total, 1, 4)
    assert bv_laplacian(x * xh, ds.ctx) == Poly.const(ds.total, 4)
    assert bv_laplacian(x * x * xh, ds.ctx) == x.scale(2)


@given(seeds)
def test_round_trips(seed):
    rng = rng_for(seed)
    sp, _ = random_space(rng, 4)
    for p in (EVEN, ODD):
        xi = random_derivation(sp, 4, p, rng, 0, 4, 3)
        e, o = even_double(sp), odd_double(sp)
        assert halve_even(double_even(xi, e), e, p) == xi
        assert halve_odd(double_odd(xi, o), o, p, strict=True) == xi


@given(seeds)
def test_divergence_identities(seed):
    rng = rng_for(seed)
    sp, _ = random_space(rng, 4)
    xi = random_derivation(sp, 4, rng.randint(0, 1), rng, 0, 4, 3)
    assert check_divergence_identities(xi).ok


@given(seeds)
def test_even_double_is_strictly_unimodular(seed):
    m = random_mc(rng_for(seed), max_dim=3, cutoff=4)
    assert check_mc_linf(even_double_structure(m)).ok
    assert check_mc_unimodular(strictly_unimodular_double(m)).ok


@given(seeds)
def test_quantum_lift_round_trip_and_qme(seed):
    u = random_unimodular(rng_for(seed), max_dim=3, cutoff=4)
    ds = odd_double(u.space)
    q = double_odd_quantum(u, ds)
    assert check_qme(q).ok
    assert halve_odd_quantum(q, ds) == u


def test_quantum_halving_rejects_dual_terms():
    sp = SuperSpace(("a",), (EVEN,))
    ds = odd_double(sp)
    # hbar^1 term depending on the dual copy
    bad = QuantumElement(ds.ctx, (Poly.zero(ds.total, 3), Poly(ds.total, 1, {(0,): Fraction(1)}).copy(1)
                                  * Poly.const(ds.total, 1)), 3)
    bad2 = QuantumElement(ds.ctx, (Poly(ds.total, 3, {(0, 0, 0): Fraction(1)}),), 3)
    with pytest.raises(HalvingError):
        halve_odd_quantum(bad2, ds)
    assert halve_odd_quantum(bad, ds).function == Poly(sp, 2, {(0,): Fraction(1, 2)})


def test_zero_inputs():
    sp = SuperSpace(("a", "b"), (EVEN, ODD))
    u = UnimodularStructure.zero(sp, 3)
    q = double_odd_quantum(u)
    assert all(c.is_zero() for c in q.coeffs)
    assert double_even(Derivation.zero(sp, 3), even_double(sp)).is_zero()
