"""Even and odd doubles, the doubling maps and their one-sided inverses.

A double of a coordinate space with n generators has 2n generators: the
base coordinates keep their indices 0..n-1 and the dual copy of generator j
sits at n + j.  In the even double the copy has the same parity and is named
``name*``; in the odd double it has the opposite parity and is named ``name^``.
The double's own differential is the Hamiltonian field of the doubled base
differential, so doubling commutes with taking differentials.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .graded import (
    EVEN, ODD, Derivation, Poly, PoissonContext, SuperSpace, bv_laplacian,
    divergence, hamiltonian_from_field, hamiltonian_vector_field,
    lift_differential, mono_parity, multiply,
)
from .structures import (
    HALF, LinfStructure, McReport, QuantumElement, StructureError,
    UnimodularStructure, check_mc_unimodular,
)

SUFFIX = {"even": "*", "odd": "^"}


class HalvingError(ValueError):
    pass


def linear_matrix(xi: Derivation) -> list[list[Fraction]]:
    """Matrix M with xi(x_k) = sum_i M[k][i] x_i; rejects non-linear fields."""
    n = xi.space.dim
    m = [[Fraction(0)] * n for _ in range(n)]
    for k, f in xi.images.items():
        for mono, c in f.terms.items():
            if len(mono) != 1:
                raise ValueError("vector field is not linear")
            m[k][mono[0]] = c
    return m


@dataclass(frozen=True)
class DoubledSpace:
    base: SuperSpace
    kind: str
    total: SuperSpace
    ctx: PoissonContext

    @property
    def n(self) -> int:
        return self.base.dim

    def base_index(self, j: int) -> int:
        return j

    def dual_index(self, j: int) -> int:
        return self.n + j

    def embed(self, f: Poly, order: int | None = None) -> Poly:
        """Pull back a base function along the projection to the base coordinates."""
        order = f.order if order is None else order
        if f.space != self.base:
            raise StructureError("function does not live on the base space")
        return Poly(self.total, order, f.terms)

    def restrict(self, f: Poly, order: int | None = None) -> Poly:
        """Keep the terms in base coordinates only."""
        n = self.n
        order = f.order if order is None else order
        return Poly(self.base, order, {m: c for m, c in f.terms.items() if all(v < n for v in m)})


def _raw_double(base: SuperSpace, kind: str) -> tuple[SuperSpace, tuple, tuple]:
    n = base.dim
    sfx = SUFFIX[kind]
    taken = set(base.names)
    duals = []
    for nm in base.names:
        new = nm + sfx
        while new in taken:
            new += sfx
        taken.add(new)
        duals.append(new)
    names = base.names + tuple(duals)
    if kind == "even":
        pars = base.parities + base.parities
    else:
        pars = base.parities + tuple(1 - p for p in base.parities)
    partner = tuple(list(range(n, 2 * n)) + list(range(n)))
    dual = (False,) * n + (True,) * n
    return SuperSpace(names, pars), partner, dual


def make_double(base: SuperSpace, kind: str) -> DoubledSpace:
    if kind not in SUFFIX:
        raise ValueError("kind must be 'even' or 'odd'")
    raw, partner, dual = _raw_double(base, kind)
    ctx = PoissonContext(raw, kind, partner, dual)
    pre = DoubledSpace(base, kind, raw, ctx)
    d = lift_differential(base, 2)
    h = _double(d, pre)
    mat = linear_matrix(hamiltonian_vector_field(h, ctx))
    total = raw.with_differential(mat)
    return DoubledSpace(base, kind, total, PoissonContext(total, kind, partner, dual))


def even_double(base: SuperSpace) -> DoubledSpace:
    return make_double(base, "even")


def odd_double(base: SuperSpace) -> DoubledSpace:
    return make_double(base, "odd")


def _double(xi: Derivation, ds: DoubledSpace) -> Poly:
    if xi.space.names != ds.base.names or xi.space.parities != ds.base.parities:
        raise StructureError("vector field does not live on the base of the double")
    order = xi.order + 1
    out: dict = {}
    par = ds.total.parities
    for j, f in xi.images.items():
        dj = ds.dual_index(j)
        for mono, c in f.terms.items():
            # monomials are sorted and base indices precede dual ones
            sign = 1
            if ds.kind == "odd" and mono_parity(mono, par):
                sign = -1
            key = mono + (dj,)
            out[key] = out.get(key, 0) + sign * c
    return Poly(ds.total, order, out)


def double_even(xi: Derivation, ds: DoubledSpace | None = None) -> Poly:
    """D_ev: f d/dx_j -> f x_j*."""
    ds = ds or even_double(xi.space)
    if ds.kind != "even":
        raise ValueError("need an even double")
    return _double(xi, ds)


def double_odd(xi: Derivation, ds: DoubledSpace | None = None) -> Poly:
    """D_od: f d/dx_j -> (-1)^{|f|} f x_j^."""
    ds = ds or odd_double(xi.space)
    if ds.kind != "odd":
        raise ValueError("need an odd double")
    return _double(xi, ds)


def _halve(F: Poly, ds: DoubledSpace, parity: int | None, strict: bool) -> Derivation:
    n = ds.n
    tpar = ds.total.parities
    images: dict[int, dict] = {}
    found_par = set()
    for mono, c in F.terms.items():
        duals = [v for v in mono if v >= n]
        if len(duals) != 1:
            if strict:
                raise HalvingError("term outside functions on the base tensor the dual copy: "
                                   + "*".join(ds.total.names[v] for v in mono))
            continue
        j = duals[0] - n
        rest = mono[:-1]  # the dual index is the largest, hence last
        sign = 1
        if ds.kind == "odd" and mono_parity(rest, tpar):
            sign = -1
        images.setdefault(j, {})[rest] = sign * c
        p = (mono_parity(rest, tpar) + ds.base.parities[j]) % 2
        found_par.add(p)
    if len(found_par) > 1:
        raise HalvingError("halved vector field is not homogeneous")
    if parity is None:
        parity = found_par.pop() if found_par else ODD
    order = max(F.order - 1, 0)
    return Derivation(ds.base, order, parity,
                      {j: Poly(ds.base, order, t) for j, t in images.items()})


def halve_even(F: Poly, ds: DoubledSpace, parity: int | None = None) -> Derivation:
    """H_ev: keeps the terms linear in the dual copy, zero on everything else."""
    if ds.kind != "even":
        raise ValueError("need an even double")
    return _halve(F, ds, parity, strict=False)


def halve_odd(F: Poly, ds: DoubledSpace, parity: int | None = None, strict: bool = False) -> Derivation:
    if ds.kind != "odd":
        raise ValueError("need an odd double")
    return _halve(F, ds, parity, strict)


# quantum lift -------------------------------------------------------------

# The quantum lift uses hbar * KAPPA * f.  With the BV bracket of the master
# equation, Delta D_od(m) = div(m) and [D_od(m), f] = m(f), so the hbar^1
# equation reads div(m) + KAPPA (d + m)(f) = 0; KAPPA = 2 matches the
# unimodular equation with its factor 1/2 on the divergence.
KAPPA = 2


def double_odd_quantum(u: UnimodularStructure, ds: DoubledSpace | None = None,
                       validate: bool = True) -> QuantumElement:
    if validate and not check_mc_unimodular(u).ok:
        raise StructureError("input is not a unimodular structure")
    ds = ds or odd_double(u.space)
    n = u.cutoff
    m0 = double_odd(u.linf.deriv, ds)
    m1 = ds.embed(u.function, n - 1).scale(KAPPA)
    return QuantumElement(ds.ctx, (m0, m1), n + 1)


def halve_odd_quantum(q: QuantumElement, ds: DoubledSpace) -> UnimodularStructure:
    """(H_od(m_0), m_1 / KAPPA); rejects terms outside the admissible subspaces."""
    if q.ctx != ds.ctx:
        raise StructureError("quantum element does not live on this double")
    if len(q.coeffs) > 2 and any(c.terms for c in q.coeffs[2:]):
        raise HalvingError("hbar^2 and higher terms cannot be halved")
    cutoff = q.weight - 1
    m = halve_odd(q.coeff(0), ds, ODD, strict=True)
    m1 = q.coeff(1)
    n = ds.n
    for mono in m1.terms:
        if any(v >= n for v in mono):
            raise HalvingError("hbar^1 term depends on the dual copy")
    f = Poly(ds.base, cutoff - 1, {mm: c / KAPPA for mm, c in m1.terms.items()})
    return UnimodularStructure(LinfStructure(ds.base, m.with_order(cutoff), cutoff), f)


def even_double_structure(m: LinfStructure, ds: DoubledSpace | None = None) -> LinfStructure:
    """The L-infinity structure X_{D_ev(m)} on the even double."""
    ds = ds or even_double(m.space)
    x = hamiltonian_vector_field(double_even(m.deriv, ds), ds.ctx)
    return LinfStructure(ds.total, Derivation(ds.total, m.cutoff, ODD, x.images), m.cutoff)


def strictly_unimodular_double(m: LinfStructure, ds: DoubledSpace | None = None) -> UnimodularStructure:
    e = even_double_structure(m, ds)
    return UnimodularStructure(e, Poly.zero(e.space, e.cutoff - 1))


def field_from_hamiltonian(F: Poly, ds: DoubledSpace) -> Derivation:
    return hamiltonian_vector_field(F, ds.ctx)


def hamiltonian_of(x: Derivation, ds: DoubledSpace, parity: int) -> Poly:
    return hamiltonian_from_field(x, ds.ctx, parity)


def check_divergence_identities(xi: Derivation) -> McReport:
    """div X_{D_ev xi} = 0 and div X_{D_od xi} = -2 (-1)^{|xi|} div xi."""
    ev = even_double(xi.space)
    od = odd_double(xi.space)
    # the top degree of a doubled Hamiltonian is incomplete after truncation
    top = xi.order - 1
    x_ev = hamiltonian_vector_field(double_even(xi, ev), ev.ctx)
    x_od = hamiltonian_vector_field(double_odd(xi, od), od.ctx)
    r1 = divergence(x_ev).filter(lambda m: len(m) <= top)
    sign = -1 if xi.parity == EVEN else 1
    r2 = divergence(x_od) - od.embed(divergence(xi), x_od.order).scale(2 * sign)
    return McReport({"even": r1, "odd": r2.filter(lambda m: len(m) <= top)})


def laplacian_of_double(xi: Derivation) -> Poly:
    od = odd_double(xi.space)
    return bv_laplacian(double_odd(xi, od), od.ctx)
