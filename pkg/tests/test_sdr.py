from fractions import Fraction

from hypothesis import given, strategies as st

from bvhtt import linalg as la
from bvhtt.graded import SuperSpace
from bvhtt.random_instances import random_mc, random_space
from bvhtt.sdr import (
    SDRData, check_lagrangian, compute_homology_sdr, identity_sdr, induced_double_sdr,
    lagrangian_data, repair_side_conditions, verify_sdr,
)

from conftest import rng_for

seeds = st.integers(0, 10**6)


def _random_space(seed, max_dim=6):
    rng = rng_for(seed)
    sp, _ = random_space(rng, max_dim)
    m = random_mc(rng, max_dim=max_dim, cutoff=2)
    return m.space, rng


def test_zero_differential_gives_identity():
    sp = SuperSpace(("a", "b"), (0, 1))
    s = compute_homology_sdr(sp)
    assert s.small == sp and s.I == la.identity(2) and la.is_zero(s.S)


def test_acyclic_pair():
    sp = SuperSpace(("u", "v"), (0, 1), [[0, 0], [1, 0]])
    s = compute_homology_sdr(sp)
    assert s.small.dim == 0
    assert s.S == [[0, 1], [0, 0]]  # s(v) = u, s(u) = 0
    assert verify_sdr(s).ok
    sq, ds, sds = induced_double_sdr(s, "odd")
    lag = lagrangian_data(sq, ds, sds)
    # one coordinate pair on the fibre, paired by the free action
    assert lag.nl == 2
    assert all(lag.quadratic[a][a] == 0 for a in range(2)) and lag.quadratic[0][1] != 0
    assert check_lagrangian(lag).ok


def test_identity_sdr_has_empty_fibre():
    sp = SuperSpace(("a", "t"), (0, 1))
    sq, ds, sds = induced_double_sdr(identity_sdr(sp), "odd")
    lag = lagrangian_data(sq, ds, sds)
    assert lag.nl == 0 and lag.propagator == ()


def _decomposition_ok(s: SDRData) -> bool:
    n = s.big.dim
    d = s.big.matrix()
    ri, rd, rs = la.rank(s.I), la.rank(d), la.rank(s.S)
    cols = [list(r) for r in zip(*s.I)] + [list(r) for r in zip(*d)] + [list(r) for r in zip(*s.S)]
    return ri + rd + rs == n and la.rank(cols) == n


@given(seeds)
def test_homology_sdr_and_decomposition(seed):
    sp, _ = _random_space(seed)
    s = compute_homology_sdr(sp)
    assert verify_sdr(s).ok
    assert _decomposition_ok(s)


@given(seeds)
def test_repair_of_broken_homotopies(seed):
    sp, rng = _random_space(seed)
    s = compute_homology_sdr(sp)
    n = sp.dim
    d = sp.matrix()
    par = sp.parities

    def rand_even():
        return [[Fraction(rng.choice((-1, 0, 1, 2))) if par[a] == par[b] else Fraction(0)
                 for b in range(n)] for a in range(n)]

    def rand_odd():
        return [[Fraction(rng.choice((-1, 0, 1))) if par[a] != par[b] else Fraction(0)
                 for b in range(n)] for a in range(n)]

    # s + d X d + (d Y - Y d) keeps ds + sd = 1 - ip but breaks the side conditions
    x, y = rand_odd(), rand_even()
    extra = la.add(la.matmul(la.matmul(d, x, n, n), d, n, n),
                   la.sub(la.matmul(d, y, n, n), la.matmul(y, d, n, n)))
    broken = SDRData(sp, s.small, s.i, s.p, la.add(s.S, extra))
    rep = verify_sdr(broken)
    assert all(rep.residuals[k] is True or not any(any(r) for r in rep.residuals[k])
               for k in ("ds + sd = 1 - ip", "p i = 1"))
    fixed = repair_side_conditions(broken)
    assert verify_sdr(fixed).ok
    assert la.is_zero(la.matmul(fixed.S, fixed.S, n, n))
    # idempotent on valid input
    assert repair_side_conditions(s).S == s.S


@given(seeds)
def test_induced_double_sdrs_and_lagrangians(seed):
    sp, _ = _random_space(seed, 4)
    s = compute_homology_sdr(sp)
    sq, ds, sds = induced_double_sdr(s, "odd")
    assert verify_sdr(sq).ok
    assert check_lagrangian(lagrangian_data(sq, ds, sds)).ok
    se, e, se_small = induced_double_sdr(s, "even")
    q2, qd, qsd = induced_double_sdr(se, "odd")
    assert verify_sdr(se).ok and verify_sdr(q2).ok
    assert check_lagrangian(lagrangian_data(q2, qd, qsd)).ok
