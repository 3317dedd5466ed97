from hypothesis import given, strategies as st

from bvhtt.graded import SuperSpace
from bvhtt.htt import brute_force_mc, htt_transfer
from bvhtt.random_instances import random_mc
from bvhtt.sdr import compute_homology_sdr, identity_sdr
from bvhtt.structures import MultilinearFamily, from_lie_bracket, to_multilinear

from bvhtt.document import parse_problem
from bvhtt.feynman import minimal_model_linf

from conftest import fixture_text, rng_for

seeds = st.integers(0, 10**6)


def test_identity_transfer():
    # with d = 0 and s = 0 only corollas survive
    m = parse_problem(fixture_text("zero_differential.txt")).linf()
    fam = to_multilinear(m)
    assert htt_transfer(fam, identity_sdr(m.space)) == fam
    assert htt_transfer(fam, compute_homology_sdr(m.space)) == fam


def test_massey_product():
    m = parse_problem(fixture_text("massey.txt")).linf()
    sdr = compute_homology_sdr(m.space)
    out = htt_transfer(to_multilinear(m), sdr)
    assert out.arity(3)  # a nontrivial ternary operation on homology
    assert out == to_multilinear(minimal_model_linf(m, sdr))


def test_brute_force_on_lie_brackets():
    v = SuperSpace(("e", "f", "h"), (0, 0, 0))
    good = {(0, 1): {2: 1}, (2, 0): {0: 2}, (2, 1): {1: -2}}
    bad = {(0, 1): {2: 1}, (2, 0): {0: 2}, (2, 1): {1: -3}}
    assert brute_force_mc(to_multilinear(from_lie_bracket(v, good, 3))).ok
    rep = brute_force_mc(to_multilinear(from_lie_bracket(v, bad, 3)))
    assert not rep.ok and "arity 3" in rep.failures()


def test_binary_part_is_restriction():
    # l_2 = p m_2 (i, i) since no internal edge fits in a two-leaf tree
    m = random_mc(rng_for(11), max_dim=4, cutoff=3, min_dim=4, nterms=4, gauge="always")
    sdr = compute_homology_sdr(m.space)
    fam = to_multilinear(m)
    out = htt_transfer(fam, sdr, 2)
    from bvhtt.htt import _apply, _apply_tensor
    for (mono, outs) in out.arity(2).items():
        args = [{r: x for r in range(m.space.dim) if (x := sdr.I[r][w])} for w in mono]
        assert _apply(sdr.P, _apply_tensor(fam, args)) == outs


@given(seeds)
def test_transferred_structures_are_mc(seed):
    m = random_mc(rng_for(seed), max_dim=4, cutoff=4, nterms=4, gauge="always")
    out = htt_transfer(to_multilinear(m), compute_homology_sdr(m.space))
    assert brute_force_mc(out).ok
