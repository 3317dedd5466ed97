"""Strong deformation retracts and the Lagrangian data used for integration.

All maps are point-level matrices on coordinate spaces: ``i`` is big x small,
``p`` is small x big, ``s`` is big x big, and the differential of a space is
its stored matrix.  The axioms are p i = 1, D s + s D = 1 - i p, and the side
conditions s i = 0, p s = 0, s s = 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import linalg as la
from .doubling import DoubledSpace, make_double
from .graded import Poly, PoissonContext, SuperSpace
from .structures import McReport, _is_zero


class SDRError(ValueError):
    pass


@dataclass(frozen=True)
class SDRData:
    big: SuperSpace
    small: SuperSpace
    i: tuple
    p: tuple
    s: tuple

    def __post_init__(self):
        for nm in ("i", "p", "s"):
            m = getattr(self, nm)
            object.__setattr__(self, nm, tuple(tuple(Fraction(x) for x in row) for row in m))
        nb, ns = self.big.dim, self.small.dim
        if len(self.i) != nb or any(len(r) != ns for r in self.i):
            raise SDRError("i has the wrong shape")
        if len(self.p) != ns or any(len(r) != nb for r in self.p):
            raise SDRError("p has the wrong shape")
        if len(self.s) != nb or any(len(r) != nb for r in self.s):
            raise SDRError("s has the wrong shape")

    def mat(self, name) -> la.Matrix:
        return [list(r) for r in getattr(self, name)]

    @property
    def I(self):
        return self.mat("i")

    @property
    def P(self):
        return self.mat("p")

    @property
    def S(self):
        return self.mat("s")


def _parity_ok(mat, rows, cols, parity) -> bool:
    return all(mat[a][b] == 0 or (rows[a] + cols[b]) % 2 == parity
               for a in range(len(rows)) for b in range(len(cols)))


def verify_sdr(data: SDRData) -> McReport:
    nb, ns = data.big.dim, data.small.dim
    d, dh = data.big.matrix(), data.small.matrix()
    i, p, s = data.I, data.P, data.S
    pb, ps = data.big.parities, data.small.parities
    r = McReport()
    r.residuals["p i = 1"] = la.sub(la.matmul(p, i, nb, ns), la.identity(ns))
    lhs = la.add(la.matmul(d, s, nb, nb), la.matmul(s, d, nb, nb))
    r.residuals["ds + sd = 1 - ip"] = la.sub(lhs, la.sub(la.identity(nb), la.matmul(i, p, ns, nb)))
    r.residuals["d i = i d"] = la.sub(la.matmul(d, i, nb, ns), la.matmul(i, dh, ns, ns))
    r.residuals["p d = d p"] = la.sub(la.matmul(p, d, nb, nb), la.matmul(dh, p, ns, nb))
    r.residuals["s i = 0"] = la.matmul(s, i, nb, ns)
    r.residuals["p s = 0"] = la.matmul(p, s, nb, nb)
    r.residuals["s s = 0"] = la.matmul(s, s, nb, nb)
    r.residuals["parities"] = (_parity_ok(i, pb, ps, 0) and _parity_ok(p, ps, pb, 0)
                               and _parity_ok(s, pb, pb, 1))
    return r


# ---------------------------------------------------------------------------

def _sub(mat, rows, cols):
    return [[mat[r][c] for c in cols] for r in rows]


def compute_homology_sdr(space: SuperSpace, prefix: str = "") -> SDRData:
    """Deterministic SDR onto homology representatives (leftmost pivots).

    Works parity block by parity block: boundaries are the independent
    columns of d, complements are the unit vectors at those pivot columns,
    and homology representatives are kernel vectors extending the boundaries.
    Each homology generator is named after the free column of its kernel vector.
    """
    problems = space.check()
    if problems:
        raise SDRError("; ".join(problems))
    n = space.dim
    d = space.matrix()
    par = space.parities
    idx = {q: [k for k in range(n) if par[k] == q] for q in (0, 1)}
    hom, bnd, comp = [], [], []
    for q in (0, 1):
        src, tgt = idx[1 - q], idx[q]
        # boundaries of parity q, with complements of parity 1 - q
        if src and tgt:
            block = _sub(d, tgt, src)
            for c in la.column_basis(block):
                k = src[c]
                e = [Fraction(0)] * n
                e[k] = Fraction(1)
                comp.append(e)
                bnd.append([d[row][k] for row in range(n)])
    for q in (0, 1):
        cols, rows = idx[q], idx[1 - q]
        if not cols:
            continue
        block = _sub(d, rows, cols) if rows else []
        chosen = [b for b in bnd if any(b[k] for k in cols)]
        for kv, f in la.nullspace_free(block, len(cols)):
            z = [Fraction(0)] * n
            for r, k in enumerate(cols):
                z[k] = kv[r]
            if la.rank(chosen + [z]) > len(chosen):
                chosen.append(z)
                hom.append((z, cols[f]))
    hom.sort(key=lambda t: t[1])
    vecs = [z for z, _ in hom] + bnd + comp
    if len(vecs) != n:
        raise SDRError("failed to build a Hodge basis")
    bmat = la.transpose(vecs)
    binv = la.inverse(bmat)
    r, nb_ = len(hom), len(bnd)
    i_new = [[Fraction(int(a == b)) for b in range(r)] for a in range(n)]
    p_new = [[Fraction(int(a == b)) for b in range(n)] for a in range(r)]
    s_new = la.zeros(n, n)
    for j in range(nb_):
        s_new[r + nb_ + j][r + j] = Fraction(1)
    i_m = la.matmul(bmat, i_new, n, r)
    p_m = la.matmul(p_new, binv, n, n)
    s_m = la.matmul(la.matmul(bmat, s_new, n, n), binv, n, n)
    small = SuperSpace(tuple(prefix + space.names[f] for _, f in hom), tuple(par[f] for _, f in hom))
    return SDRData(space, small, i_m, p_m, s_m)


def repair_side_conditions(data: SDRData) -> SDRData:
    """s~ = (ds+sd) s (ds+sd), then s' = s~ d s~."""
    rep = verify_sdr(data)
    basic = ("p i = 1", "ds + sd = 1 - ip", "d i = i d", "p d = d p")
    if not all(_is_zero(rep.residuals[k]) for k in basic):
        raise SDRError("input fails the basic SDR axioms")
    n = data.big.dim
    d, s = data.big.matrix(), data.S
    h = la.add(la.matmul(d, s, n, n), la.matmul(s, d, n, n))
    st = la.matmul(la.matmul(h, s, n, n), h, n, n)
    s2 = la.matmul(la.matmul(st, d, n, n), st, n, n)
    return SDRData(data.big, data.small, data.i, data.p, s2)


def identity_sdr(space: SuperSpace) -> SDRData:
    n = space.dim
    return SDRData(space, space, la.identity(n), la.identity(n), la.zeros(n, n))


def with_homotopy_sign(data: SDRData, big: SuperSpace, sign: int) -> SDRData:
    return SDRData(big, data.small, data.i, data.p, la.scale(data.S, sign))


def _psign(space) -> la.Matrix:
    n = space.dim
    return [[Fraction(-1 if space.parities[a] else 1) if a == b else Fraction(0) for b in range(n)]
            for a in range(n)]


def dual_sdr(data: SDRData, big: SuperSpace, small: SuperSpace) -> SDRData:
    """(p^T, i^T, s^T P) on the dual block, where P is the base parity sign matrix."""
    n = data.big.dim
    s_new = la.matmul(la.transpose(data.S), _psign(data.big), n, n)
    return SDRData(big, small, la.transpose(data.P, n), la.transpose(data.I, data.small.dim), s_new)


def direct_sum_sdr(a: SDRData, b: SDRData, big: SuperSpace, small: SuperSpace) -> SDRData:
    """Block sum; generators of ``big``/``small`` are a's followed by b's."""
    na, nb = a.big.dim, b.big.dim
    ra, rb = a.small.dim, b.small.dim

    def block(x, y, r1, c1, r2, c2):
        out = la.zeros(r1 + r2, c1 + c2)
        for i_ in range(r1):
            for j in range(c1):
                out[i_][j] = x[i_][j]
        for i_ in range(r2):
            for j in range(c2):
                out[r1 + i_][c1 + j] = y[i_][j]
        return out

    return SDRData(big, small,
                   block(a.I, b.I, na, ra, nb, rb),
                   block(a.P, b.P, ra, na, rb, nb),
                   block(a.S, b.S, na, na, nb, nb))


def _block(mat, r0, r1, c0, c1):
    return [row[c0:c1] for row in mat[r0:r1]]


def induced_double_sdr(base: SDRData, kind: str, ds: DoubledSpace | None = None,
                       small_ds: DoubledSpace | None = None) -> tuple[SDRData, DoubledSpace, DoubledSpace]:
    """SDR from a double of base.big onto the same kind of double of base.small."""
    ds = ds or make_double(base.big, kind)
    small_ds = small_ds or make_double(base.small, kind)
    n, r = ds.n, small_ds.n
    m = ds.total.matrix()
    a = _block(m, 0, n, 0, n)
    d = base.big.matrix()
    if a == d:
        sign = 1
    elif a == la.scale(d, -1):
        sign = -1
    else:
        raise SDRError("unexpected base block of the doubled differential")
    if any(m[x][y] for x in range(n) for y in range(n, 2 * n)) or \
            any(m[x][y] for x in range(n, 2 * n) for y in range(n)):
        raise SDRError("doubled differential mixes base and dual blocks")
    tb, tsm = ds.total, small_ds.total
    bb = SuperSpace(tb.names[:n], tb.parities[:n], a)
    sb = SuperSpace(tsm.names[:r], tsm.parities[:r], _block(tsm.matrix(), 0, r, 0, r))
    db = SuperSpace(tb.names[n:], tb.parities[n:], _block(m, n, 2 * n, n, 2 * n))
    sdb = SuperSpace(tsm.names[r:], tsm.parities[r:], _block(tsm.matrix(), r, 2 * r, r, 2 * r))
    first = SDRData(bb, sb, base.i, base.p, la.scale(base.S, sign))
    second = dual_sdr(base, db, sdb)
    total = direct_sum_sdr(first, second, tb, tsm)
    rep = verify_sdr(total)
    if not rep.ok:
        raise SDRError("induced SDR fails: " + ", ".join(rep.failures()))
    return total, ds, small_ds


# ---------------------------------------------------------------------------
# Lagrangian data on an odd double

@dataclass(frozen=True)
class LagrangianData:
    """Splitting Q = i(H) + L with L spanned by columns of s.

    ``rspace`` has the small double's generators followed by coordinates
    l_1..l_k on L; ``images[a]`` expresses y_a on Q in those coordinates.
    ``propagator`` G is the inverse quadratic form of the free part on L.
    """

    sdr: SDRData
    ds: DoubledSpace
    small_ds: DoubledSpace
    basis: tuple  # columns spanning L, as vectors in Q
    rspace: SuperSpace
    images: tuple
    quadratic: tuple  # B with d W / d l_a = sum_c B[a][c] l_c
    propagator: tuple

    @property
    def nh(self) -> int:
        return self.small_ds.total.dim

    @property
    def nl(self) -> int:
        return len(self.basis)

    def restrict(self, f: Poly, order: int | None = None) -> Poly:
        """Pull f back to the fibre coordinates (h, l)."""
        if f.space != self.ds.total:
            raise SDRError("function does not live on the big double")
        return f.substitute(list(self.images), self.rspace, order)


def free_part(ds: DoubledSpace) -> Poly:
    """Quadratic Hamiltonian of the double's differential."""
    from .doubling import _double
    from .graded import lift_differential
    return _double(lift_differential(ds.base, 2), ds)


def _point_form(ctx: PoissonContext) -> la.Matrix:
    n = ctx.space.dim
    om = la.zeros(n, n)
    for a in range(n):
        b = ctx.partner[a]
        om[a][b] = Fraction(ctx.omega(a, b))
    return om


def lagrangian_data(data: SDRData, ds: DoubledSpace, small_ds: DoubledSpace) -> LagrangianData:
    if ds.kind != "odd" or small_ds.kind != "odd":
        raise SDRError("integration needs odd doubles")
    if data.big != ds.total or data.small != small_ds.total:
        raise SDRError("SDR does not match the doubles")
    n, r = ds.total.dim, small_ds.total.dim
    s = data.S
    cols = la.column_basis(s)
    basis = tuple(tuple(s[a][c] for a in range(n)) for c in cols)
    if 2 * len(basis) != n - r:
        raise SDRError("image of the homotopy is not half of the complement")
    par = ds.total.parities
    lpar = tuple(1 - par[c] for c in cols)
    hnames = small_ds.total.names
    lnames = tuple(f"l{k + 1}" for k in range(len(cols)))
    rspace = SuperSpace(hnames + lnames, small_ds.total.parities + lpar)
    ii = data.I
    images = []
    for a in range(n):
        terms = {(b,): ii[a][b] for b in range(r) if ii[a][b]}
        for k, v in enumerate(basis):
            if v[a]:
                terms[(r + k,)] = v[a]
        images.append(Poly(rspace, 2, terms))
    w = free_part(ds).substitute(images, rspace, 2)
    nl = len(basis)
    for mono in w.terms:
        kinds = {v >= r for v in mono}
        if len(kinds) > 1:
            raise SDRError("free part couples H and L")
    hh = Poly(small_ds.total, 2, {m: c for m, c in w.terms.items() if all(v < r for v in m)})
    if hh != free_part(small_ds):
        raise SDRError("free part does not restrict to the small double's free part")
    bmat = la.zeros(nl, nl)
    for a in range(nl):
        da = w.deriv(r + a)
        for mono, c in da.terms.items():
            if len(mono) != 1 or mono[0] < r:
                raise SDRError("unexpected term in the free part on L")
            bmat[a][mono[0] - r] = c
    try:
        binv = la.inverse(bmat)
    except ZeroDivisionError:
        raise SDRError("free part is degenerate on L") from None
    psign = [[Fraction(-1 if lpar[a] else 1) if a == b else Fraction(0) for b in range(nl)]
             for a in range(nl)]
    g = la.scale(la.transpose(la.matmul(binv, psign, nl, nl)), -1)
    return LagrangianData(data, ds, small_ds, basis, rspace, tuple(images),
                          tuple(map(tuple, bmat)), tuple(map(tuple, g)))


def check_lagrangian(lag: LagrangianData) -> McReport:
    """Isotropy of L, orthogonality to i(H), and the induced bracket on H."""
    ctx, sctx = lag.ds.ctx, lag.small_ds.ctx
    om = _point_form(ctx)
    n = ctx.space.dim
    r = lag.nh
    w = la.inverse(om)
    k = la.transpose([list(v) for v in lag.basis], n) if lag.basis else la.zeros(n, 0)
    nl = lag.nl
    kt = la.transpose(k, nl)
    ii = lag.sdr.I
    rep = McReport()
    rep.residuals["L isotropic"] = la.matmul(la.matmul(kt, w, n, n), k, n, nl) if nl else []
    rep.residuals["H orthogonal to L"] = (la.matmul(la.matmul(la.transpose(ii, r), w, n, n), k, n, nl)
                                          if nl else [])
    rep.residuals["half dimension"] = 2 * nl + r == n
    p = lag.sdr.P
    induced = la.matmul(la.matmul(p, om, n, n), la.transpose(p, r), n, r)
    rep.residuals["induced bracket on H"] = la.sub(induced, _point_form(sctx))
    rep.residuals["propagator"] = la.sub(la.matmul([list(x) for x in lag.quadratic],
                                                   la.transpose([list(x) for x in lag.propagator], nl),
                                                   nl, nl),
                                         la.scale([[Fraction(int(a == b)) * (-1 if lag.rspace.parities[r + a] else 1)
                                                    for b in range(nl)] for a in range(nl)], -1)) if nl else []
    return rep
