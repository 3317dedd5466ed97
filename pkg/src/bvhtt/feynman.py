"""Fibre integrals over the Lagrangian and the graph expansion of the effective action.

The integral of a polynomial over L (normalised against exp(S_free / hbar))
is Wick's theorem with the propagator G from :class:`LagrangianData`:

    int P = [exp(hbar/2 * sum (-1)^|a| G_ab d_a d_b) P] at l = 0.

The effective action rho = hbar log int exp(S / hbar) is computed as a sum
over connected stable graphs.  Each vertex gets its own copy of the
l-coordinates, so an edge between vertices v and w is one application of
the mixed operator C_vw.
"""
from __future__ import annotations

from fractions import Fraction
from math import factorial

from .doubling import (
    DoubledSpace, even_double, even_double_structure, halve_even, halve_odd,
    double_odd_quantum, halve_odd_quantum, odd_double,
)
from .graded import (
    EVEN, ODD, Poly, SuperSpace, bv_bracket, bv_laplacian, hamiltonian_from_field,
    multiply,
)
from .graphs import StableGraph, enumerate_stable_graphs, vertex_automorphisms
from .sdr import (
    LagrangianData, SDRData, free_part, induced_double_sdr, lagrangian_data, verify_sdr,
)
from .structures import (
    LinfStructure, McReport, QuantumElement, StructureError, UnimodularStructure,
    check_mc_linf, check_mc_unimodular,
)


class PipelineError(RuntimeError):
    pass


def _laplace_terms(lag: LagrangianData):
    r = lag.nh
    par = lag.rspace.parities
    out = []
    for a, row in enumerate(lag.propagator):
        for b, g in enumerate(row):
            if g:
                out.append((a, b, (-1 if par[r + a] else 1) * g))
    return out


def _contract(p: Poly, terms, off_a: int, off_b: int) -> Poly:
    """sum_ab (-1)^|a| G_ab d_(a+off_a) d_(b+off_b) p."""
    out: dict = {}
    cache: dict = {}
    for a, b, c in terms:
        db = cache.get(b)
        if db is None:
            db = cache[b] = p.deriv(off_b + b)
        if not db.terms:
            continue
        val = db.deriv(off_a + a)
        for m, x in val.terms.items():
            out[m] = out.get(m, 0) + c * x
    return Poly(p.space, p.order, out)


def _wick_laplacian(p: Poly, lag: LagrangianData) -> Poly:
    r = lag.nh
    return _contract(p, _laplace_terms(lag), r, r)


def wick_integral(f: Poly, lag: LagrangianData) -> dict[int, Poly]:
    """int over L of f, as {hbar power: function on the small double}."""
    small = lag.small_ds.total
    r = lag.nh
    g = lag.restrict(f) if f.space == lag.ds.total else f
    if g.space != lag.rspace:
        raise StructureError("function lives on neither the double nor the fibre space")
    out: dict[int, Poly] = {}
    by_ldeg: dict[int, dict] = {}
    for m, c in g.terms.items():
        k = sum(1 for v in m if v >= r)
        by_ldeg.setdefault(k, {})[m] = c
    for k, terms in by_ldeg.items():
        if k % 2:
            continue
        j = k // 2
        p = Poly(lag.rspace, g.order, terms)
        for step in range(j):
            p = _wick_laplacian(p, lag).scale(Fraction(1, 2 * (step + 1)))
        val = Poly(small, f.order, {m: c for m, c in p.terms.items() if all(v < r for v in m)})
        if val.terms:
            out[j] = out.get(j, Poly.zero(small, f.order)) + val
    return out


def check_bv_stokes(f: Poly, lag: LagrangianData) -> McReport:
    """int (hbar Delta f + (-1)^|f| [f, S_free]) = hbar Delta_H int f, order by order in hbar."""
    ctx, sctx = lag.ds.ctx, lag.small_ds.ctx
    sfree = free_part(lag.ds)
    rep = McReport()
    order = f.order
    lhs: dict[int, Poly] = {}
    rhs: dict[int, Poly] = {}

    def acc(tab, k, p):
        if p.terms:
            tab[k] = tab.get(k, Poly.zero(lag.small_ds.total, order)) + p.copy(order)

    for par in (EVEN, ODD):
        fp = f.parity_part(par)
        if not fp.terms:
            continue
        br = bv_bracket(fp, sfree.copy(order), ctx)
        if par:
            br = -br
        for k, v in wick_integral(br, lag).items():
            acc(lhs, k, v)
        for k, v in wick_integral(bv_laplacian(fp, ctx), lag).items():
            acc(lhs, k + 1, v)
        for k, v in wick_integral(fp, lag).items():
            acc(rhs, k + 1, bv_laplacian(v, sctx))
    for k in sorted(set(lhs) | set(rhs)):
        a = lhs.get(k, Poly.zero(lag.small_ds.total, order))
        b = rhs.get(k, Poly.zero(lag.small_ds.total, order))
        rep.residuals[f"hbar^{k}"] = a - b
    return rep


# ---------------------------------------------------------------------------
# graph expansion

class _Tagged:
    """Fibre space with one copy of the l-coordinates per vertex."""

    def __init__(self, lag: LagrangianData, copies: int):
        r, nl = lag.nh, lag.nl
        rs = lag.rspace
        names = list(rs.names[:r])
        pars = list(rs.parities[:r])
        for t in range(copies):
            names += [f"{nm}@{t}" for nm in rs.names[r:]]
            pars += list(rs.parities[r:])
        self.space = SuperSpace(tuple(names), tuple(pars))
        self.r, self.nl = r, nl

    def off(self, t: int) -> int:
        return self.r + t * self.nl

    def place(self, p: Poly, t: int) -> Poly:
        # the index map is monotone, so sorted monomials stay sorted
        r, shift = self.r, t * self.nl
        terms = {tuple(v if v < r else v + shift for v in m): c for m, c in p.terms.items()}
        return Poly(self.space, p.order, terms)

    def ldeg(self, m, t: int) -> int:
        lo = self.off(t)
        hi = lo + self.nl
        return sum(1 for v in m if lo <= v < hi)


def _pieces(q: QuantumElement, lag: LagrangianData, hbar_order: int):
    """Restricted vertex pieces keyed by (genus, legs, half-edges)."""
    r = lag.nh
    out: dict = {}
    for g in range(hbar_order + 1):
        c = q.coeff(g)
        if not c.terms:
            continue
        rc = lag.restrict(c)
        for m, x in rc.terms.items():
            e = sum(1 for v in m if v >= r)
            key = (g, len(m) - e, e)
            out.setdefault(key, {})[m] = x
    return {k: Poly(lag.rspace, q.weight, t) for k, t in out.items()}


def _bfs_order(g: StableGraph) -> list[int]:
    adj: dict = {v: [] for v in range(g.n_vertices)}
    for a, b in g.edges:
        if a != b:
            adj[a].append(b)
            adj[b].append(a)
    order, seen = [0], {0}
    k = 0
    while k < len(order):
        for w in sorted(adj[order[k]]):
            if w not in seen:
                seen.add(w)
                order.append(w)
        k += 1
    return order


def graph_amplitude(g: StableGraph, pieces: dict, lag: LagrangianData, tag: _Tagged,
                    order: int) -> Poly:
    """Labelled-vertex amplitude of one graph (without the 1/|Aut_V| factor)."""
    terms = _laplace_terms(lag)
    mult = g.multiplicity()
    vorder = _bfs_order(g)
    pos = {v: k for k, v in enumerate(vorder)}
    remaining = {v: g.half_edges(v) for v in vorder}
    acc = None
    for v in vorder:
        key = (g.genus[v], g.legs[v], g.half_edges(v))
        piece = pieces.get(key)
        if piece is None:
            return Poly.zero(tag.space, order)
        t = pos[v]
        p = tag.place(piece, t).copy(order + 2 * g.n_edges)
        loops = mult.get((v, v), 0)
        for k in range(loops):
            p = _contract(p, terms, tag.off(t), tag.off(t)).scale(Fraction(1, 2 * (k + 1)))
            remaining[v] -= 2
        acc = p if acc is None else multiply(acc, p, max(acc.order, p.order))
        for (a, b), k in mult.items():
            if a == b or v not in (a, b):
                continue
            w = b if a == v else a
            if pos[w] > t:
                continue
            for step in range(k):
                acc = _contract(acc, terms, tag.off(pos[w]), tag.off(t)).scale(Fraction(1, step + 1))
            remaining[v] -= k
            remaining[w] -= k
        placed = [u for u in vorder if pos[u] <= t]
        acc = acc.filter(lambda m: all(tag.ldeg(m, pos[u]) == remaining[u] for u in placed))
        if not acc.terms:
            return Poly.zero(tag.space, order)
    return acc.copy(order)


def effective_action(q: QuantumElement, lag: LagrangianData, hbar_order: int = 1) -> QuantumElement:
    """rho = hbar log int exp(S / hbar) through the given hbar order, by graphs."""
    if q.ctx != lag.ds.ctx:
        raise StructureError("quantum element does not live on the big double")
    if hbar_order > 1:
        raise NotImplementedError("only hbar orders 0 and 1 are computed")
    w = q.weight
    pieces = _pieces(q, lag, hbar_order)
    small = lag.small_ds
    r = lag.nh
    max_v = max(max(w - 2, 1), w)
    tag = _Tagged(lag, max_v)
    coeffs = []
    for h in range(hbar_order + 1):
        order = w - 2 * h
        total: dict = {}
        for n in range(1, order + 1):
            for g in enumerate_stable_graphs(n, h):
                amp = graph_amplitude(g, pieces, lag, tag, order)
                if not amp.terms:
                    continue
                aut = vertex_automorphisms(g)
                for m, c in amp.terms.items():
                    if any(v >= r for v in m):
                        raise PipelineError("graph amplitude kept fibre coordinates")
                    total[m] = total.get(m, 0) + Fraction(c) / aut
        coeffs.append(Poly(small.total, order, total))
    return QuantumElement(small.ctx, tuple(coeffs), w)


rho = effective_action


# ---------------------------------------------------------------------------
# direct expansion of Z, used to cross-check the graph sum

def _series_mul(a: dict, b: dict, space, weight: int) -> dict:
    out: dict = {}
    for ka, pa in a.items():
        for kb, pb in b.items():
            k = ka + kb
            order = weight - 2 * k
            if order < 0:
                continue
            prod_ = multiply(pa.copy(order), pb.copy(order), order)
            if prod_.terms:
                out[k] = out[k] + prod_ if k in out else prod_
    return out


def _series_exp(x: dict, space, weight: int) -> dict:
    """exp of a series with no weight-zero part, truncated at the weight."""
    result = {0: Poly.const(space, weight)}
    term = {0: Poly.const(space, weight)}
    for k in range(1, weight + 1):
        term = _series_mul(term, x, space, weight)
        term = {a: p.scale(Fraction(1, k)) for a, p in term.items()}
        if not term:
            break
        for a, p in term.items():
            result[a] = result[a] + p.copy(weight - 2 * a) if a in result else p.copy(weight - 2 * a)
    return result


def partition_function(q: QuantumElement, lag: LagrangianData, weight: int) -> dict:
    """Z = int exp((S - S_free) / hbar) on the small double, as {hbar power: Poly}.

    Only monomials hbar^a x^I with 2a + |I| <= weight are kept.
    """
    if q.weight < weight + 2:
        raise ValueError("quantum element is not known to high enough weight")
    rs = lag.rspace
    x: dict = {}
    for g, c in enumerate(q.coeffs):
        a = g - 1
        order = weight - 2 * a
        if order < 0 or not c.terms:
            continue
        rc = lag.restrict(c.copy(order), order)
        if rc.terms:
            x[a] = rc
    ez = _series_exp(x, rs, weight)
    out: dict = {}
    for a, p in ez.items():
        for j, v in wick_integral(p, lag).items():
            k = a + j
            o = weight - 2 * k
            v = v.copy(o)
            if v.terms:
                out[k] = out[k] + v if k in out else v
    return out


def check_graph_sum(q: QuantumElement, lag: LagrangianData, weight: int) -> McReport:
    """[Z exp(-rho_0 / hbar)] has no negative hbar powers and its hbar^0 part is exp(rho_1)."""
    space = lag.small_ds.total
    z = partition_function(q, lag, weight)
    rh = effective_action(q, lag, 1)
    neg = {-1: rh.coeff(0).copy(weight + 2).scale(-1)}
    e = _series_mul(z, _series_exp(neg, space, weight), space, weight)
    one = _series_exp({0: rh.coeff(1).copy(weight)}, space, weight)
    rep = McReport()
    for a in sorted(e):
        if a < 0:
            rep.residuals[f"hbar^{a}"] = e[a]
    zero = Poly.zero(space, weight)
    rep.residuals["hbar^0"] = e.get(0, zero).copy(weight) - one.get(0, zero).copy(weight)
    return rep


# ---------------------------------------------------------------------------
# the two transfer pipelines

def _check_sdr(sdr: SDRData, space: SuperSpace):
    if sdr.big != space:
        raise StructureError("SDR does not start at the structure's space")
    rep = verify_sdr(sdr)
    if not rep.ok:
        raise StructureError("invalid SDR: " + ", ".join(rep.failures()))


def minimal_model_unimodular(u: UnimodularStructure, sdr: SDRData,
                             validate: bool = True) -> UnimodularStructure:
    """Halve, at hbar order one, the effective action of the quantum lift."""
    _check_sdr(sdr, u.space)
    if validate and not check_mc_unimodular(u).ok:
        raise StructureError("input is not a unimodular structure")
    sq, ds, sds = induced_double_sdr(sdr, "odd")
    lag = lagrangian_data(sq, ds, sds)
    q = double_odd_quantum(u, ds, validate=False)
    r = effective_action(q, lag, 1)
    return halve_odd_quantum(r, sds)


def minimal_model_linf(m: LinfStructure, sdr: SDRData, validate: bool = True) -> LinfStructure:
    """Tree-level transfer through the even double and its odd double."""
    _check_sdr(sdr, m.space)
    if validate and not check_mc_linf(m).ok:
        raise StructureError("input is not an L-infinity structure")
    e = even_double(m.space)
    me = even_double_structure(m, e)
    se, e, se_small = induced_double_sdr(sdr, "even", e)
    sq, qd, sqd = induced_double_sdr(se, "odd")
    lag = lagrangian_data(sq, qd, sqd)
    u = UnimodularStructure(me, Poly.zero(me.space, me.cutoff - 1))
    q = double_odd_quantum(u, qd, validate=False)
    r = effective_action(q, lag, 0)
    x = halve_odd(r.coeff(0), sqd, ODD, strict=True)
    f = hamiltonian_from_field(x, se_small.ctx, ODD)
    n = se_small.n
    for mono in f.terms:
        if sum(1 for v in mono if v >= n) != 1:
            raise PipelineError("transferred field is not the lift of a field on the base")
    xi = halve_even(f, se_small, ODD)
    return LinfStructure(sdr.small, xi.with_order(m.cutoff), m.cutoff)
