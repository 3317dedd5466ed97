"""L-infinity, unimodular and quantum structures, with their validators.

Conventions.  A structure on V lives on the coordinate space ``U = Pi V``,
whose generators x_j have the parity of the basis vectors of Pi V.  The
space's matrix D is the point-level differential d(e_j) = sum_i D[i][j] e_i,
and it lifts to the odd vector field x_k -> sum_i D[k][i] x_i.  With these
coordinates an L-infinity structure is an *odd* derivation m of order >= 2
with [d, m] + 1/2 [m, m] = 0, and the function of a unimodular pair is even.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, prod
from typing import Iterable, Mapping

from .graded import (
    EVEN, ODD, Derivation, Poly, PoissonContext, SuperSpace, apply_derivation,
    bv_bracket, bv_laplacian, commutator, divergence, lift_differential,
    mono_parity, normalize_word,
)

HALF = Fraction(1, 2)


class StructureError(ValueError):
    pass


@dataclass
class McReport:
    residuals: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(_is_zero(r) for r in self.residuals.values())

    def failures(self) -> list[str]:
        return [k for k, r in self.residuals.items() if not _is_zero(r)]

    def merge(self, other: "McReport", prefix: str = "") -> "McReport":
        for k, v in other.residuals.items():
            self.residuals[prefix + k] = v
        return self

    def __bool__(self):
        return self.ok


def _is_zero(r) -> bool:
    if isinstance(r, (Poly, Derivation)):
        return r.is_zero()
    if isinstance(r, bool):
        return r
    if isinstance(r, list):
        return all(x == 0 for row in r for x in row)
    return r == 0


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinfStructure:
    """An MC candidate m on the coordinate space (images of degree <= cutoff)."""

    space: SuperSpace
    deriv: Derivation
    cutoff: int

    def __post_init__(self):
        if self.deriv.space != self.space:
            raise StructureError("derivation does not live on the structure's space")
        if not self.deriv.is_zero():
            if self.deriv.parity != ODD:
                raise StructureError("structure derivations are odd in coordinate conventions")
            if (self.deriv.min_order() or 2) < 2:
                raise StructureError("structure derivation must have order >= 2")
        if self.deriv.order != self.cutoff:
            object.__setattr__(self, "deriv", self.deriv.with_order(self.cutoff))

    @property
    def base(self) -> SuperSpace:
        return self.space.pi()

    @classmethod
    def zero(cls, space, cutoff):
        return cls(space, Derivation.zero(space, cutoff), cutoff)

    def differential(self) -> Derivation:
        return lift_differential(self.space, self.cutoff)

    def total(self) -> Derivation:
        return self.differential() + self.deriv

    def arity(self, n: int) -> Derivation:
        return self.deriv.order_part(n)

    def __eq__(self, other):
        if not isinstance(other, LinfStructure):
            return NotImplemented
        return self.space == other.space and self.deriv == other.deriv


@dataclass(frozen=True)
class UnimodularStructure:
    linf: LinfStructure
    function: Poly  # even, degree in [1, cutoff - 1]

    def __post_init__(self):
        f = self.function
        if f.space != self.linf.space:
            raise StructureError("function lives on another space")
        if f.terms:
            if f.parity() != EVEN:
                raise StructureError("the unimodular function is even in coordinate conventions")
            if f.constant():
                raise StructureError("the unimodular function has no constant term")
        if f.order != self.linf.cutoff - 1:
            object.__setattr__(self, "function", f.copy(self.linf.cutoff - 1))

    @property
    def space(self):
        return self.linf.space

    @property
    def cutoff(self):
        return self.linf.cutoff

    @classmethod
    def zero(cls, space, cutoff):
        return cls(LinfStructure.zero(space, cutoff), Poly.zero(space, cutoff - 1))

    def __eq__(self, other):
        if not isinstance(other, UnimodularStructure):
            return NotImplemented
        return self.linf == other.linf and self.function == other.function


@dataclass(frozen=True)
class QuantumElement:
    """m_0 + hbar m_1 + ... on an odd double; the free part is the space's differential.

    Weight 2g + degree is bounded by ``weight``; the hbar^g coefficient is
    stored with truncation order weight - 2g.
    """

    ctx: PoissonContext
    coeffs: tuple
    weight: int

    def __post_init__(self):
        if self.ctx.kind != "odd":
            raise StructureError("quantum elements live on an odd double")
        fixed = []
        for g, c in enumerate(self.coeffs):
            if c.space != self.ctx.space:
                raise StructureError("coefficient lives on another space")
            if c.terms and c.parity() != EVEN:
                raise StructureError("quantum elements are even")
            low = c.min_degree()
            if low is not None and 2 * g + low <= 2:
                raise StructureError("terms of weight <= 2 are not allowed")
            fixed.append(c.copy(self.weight - 2 * g))
        while fixed and fixed[-1].is_zero() and len(fixed) > 1:
            fixed.pop()
        object.__setattr__(self, "coeffs", tuple(fixed))

    @property
    def space(self):
        return self.ctx.space

    def coeff(self, g: int) -> Poly:
        if g < len(self.coeffs):
            return self.coeffs[g]
        return Poly.zero(self.ctx.space, max(self.weight - 2 * g, 0))

    def __eq__(self, other):
        if not isinstance(other, QuantumElement):
            return NotImplemented
        n = max(len(self.coeffs), len(other.coeffs))
        return self.ctx == other.ctx and all(self.coeff(g) == other.coeff(g) for g in range(n))


# ---------------------------------------------------------------------------
# validators

def mc_residual(m: LinfStructure) -> Derivation:
    d = m.differential()
    return commutator(d, m.deriv) + commutator(m.deriv, m.deriv).scale(HALF)


def check_mc_linf(m: LinfStructure) -> McReport:
    res = mc_residual(m)
    return McReport({f"order {k}": res.order_part(k) for k in range(1, m.cutoff + 1)})


def unimodular_residual(u: UnimodularStructure) -> Poly:
    m = u.linf
    n = u.cutoff - 1
    f = u.function
    d = m.differential().with_order(n)
    mm = m.deriv.with_order(n)
    return apply_derivation(d, f) + divergence(m.deriv).copy(n).scale(HALF) + apply_derivation(mm, f)


def check_mc_unimodular(u: UnimodularStructure) -> McReport:
    rep = check_mc_linf(u.linf)
    res = unimodular_residual(u)
    for k in range(0, u.cutoff):
        rep.residuals[f"divergence degree {k}"] = res.degree_part(k)
    return rep


def qme_residuals(q: QuantumElement, hbar_order: int | None = None) -> list[Poly]:
    ctx = q.ctx
    top = q.weight // 2 + 1 if hbar_order is None else hbar_order + 1
    dq = lift_differential(ctx.space, q.weight)
    out = []
    for g in range(top):
        order = q.weight - 2 * g
        if order < 0:
            break
        r = apply_derivation(dq.with_order(order), q.coeff(g).copy(order))
        if g >= 1:
            r = r + bv_laplacian(q.coeff(g - 1), ctx).copy(order)
        for a in range(g + 1):
            br = bv_bracket(q.coeff(a).copy(order + 2), q.coeff(g - a).copy(order + 2), ctx)
            r = r + br.copy(order).scale(HALF)
        out.append(r)
    return out


def check_qme(q: QuantumElement, hbar_order: int | None = None) -> McReport:
    res = qme_residuals(q, hbar_order)
    return McReport({f"hbar^{g}": r for g, r in enumerate(res)})


# ---------------------------------------------------------------------------
# multilinear presentation

def _mult_factor(mono) -> int:
    counts = {}
    for v in mono:
        counts[v] = counts.get(v, 0) + 1
    return prod(factorial(c) for c in counts.values())


@dataclass(frozen=True)
class MultilinearFamily:
    """Graded-symmetric tensors T^j_I of the structure maps on Pi V.

    ``maps[n][I][j]`` is the coefficient of basis vector j in m_n applied to
    the basis vectors listed by the sorted multi-index I; values on other
    orderings follow by the Koszul rule with the parities of ``space``.
    The polynomial form is Q_j = sum over ordered words (1/n!) T^j_w x_w.
    """

    space: SuperSpace
    maps: Mapping[int, Mapping[tuple, Mapping[int, Fraction]]]
    cutoff: int

    @classmethod
    def from_entries(cls, space: SuperSpace, entries: Iterable[tuple], cutoff: int) -> "MultilinearFamily":
        """Entries are (word, output, value); words may be any ordering."""
        par = space.parities
        maps: dict = {}
        for word, j, val in entries:
            word = tuple(space.index(w) if isinstance(w, str) else w for w in word)
            j = space.index(j) if isinstance(j, str) else j
            val = Fraction(val)
            n = len(word)
            if n < 2 or n > cutoff:
                raise StructureError(f"arity {n} outside 2..{cutoff}")
            r = normalize_word(word, par)
            if r is None:
                if val:
                    raise StructureError("nonzero value on a repeated odd input violates graded symmetry")
                continue
            s, mono = r
            if val and (mono_parity(mono, par) + par[j]) % 2 != 1:
                raise StructureError("structure maps must be odd on Pi V")
            slot = maps.setdefault(n, {}).setdefault(mono, {})
            v = s * val
            if j in slot and slot[j] != v:
                raise StructureError("entries are not graded-symmetric")
            slot[j] = v
        return cls(space, _clean(maps), cutoff)

    def value(self, word: tuple, j: int) -> Fraction:
        r = normalize_word(word, self.space.parities)
        if r is None:
            return Fraction(0)
        s, mono = r
        return s * self.maps.get(len(word), {}).get(mono, {}).get(j, Fraction(0))

    def evaluate(self, word: tuple) -> dict[int, Fraction]:
        r = normalize_word(word, self.space.parities)
        if r is None:
            return {}
        s, mono = r
        return {j: s * c for j, c in self.maps.get(len(word), {}).get(mono, {}).items()}

    def entries(self):
        for n in sorted(self.maps):
            for mono in sorted(self.maps[n]):
                for j in sorted(self.maps[n][mono]):
                    yield n, mono, j, self.maps[n][mono][j]

    def arity(self, n: int) -> dict:
        return self.maps.get(n, {})

    def __eq__(self, other):
        if not isinstance(other, MultilinearFamily):
            return NotImplemented
        return self.space == other.space and _clean(self.maps) == _clean(other.maps)


def _clean(maps) -> dict:
    out = {}
    for n, tab in maps.items():
        t2 = {}
        for mono, outs in tab.items():
            o2 = {j: Fraction(c) for j, c in outs.items() if c}
            if o2:
                t2[mono] = o2
        if t2:
            out[n] = t2
    return out


def to_multilinear(m: LinfStructure) -> MultilinearFamily:
    maps: dict = {}
    for j, f in m.deriv.images.items():
        for mono, c in f.terms.items():
            maps.setdefault(len(mono), {}).setdefault(mono, {})[j] = c * _mult_factor(mono)
    return MultilinearFamily(m.space, _clean(maps), m.cutoff)


def to_derivation(fam: MultilinearFamily) -> LinfStructure:
    par = fam.space.parities
    images: dict[int, dict] = {}
    for n, tab in fam.maps.items():
        if n < 2:
            raise StructureError("multilinear families start at arity 2")
        for mono, outs in tab.items():
            if tuple(sorted(mono)) != tuple(mono) or normalize_word(mono, par) != (1, tuple(mono)):
                raise StructureError("multi-indices must be sorted with no repeated odd entries")
            for j, c in outs.items():
                if c and (mono_parity(mono, par) + par[j]) % 2 != 1:
                    raise StructureError("structure maps must be odd on Pi V")
                images.setdefault(j, {})[tuple(mono)] = Fraction(c) / _mult_factor(mono)
    xi = Derivation(fam.space, fam.cutoff, ODD,
                    {j: Poly(fam.space, fam.cutoff, t) for j, t in images.items()})
    return LinfStructure(fam.space, xi, fam.cutoff)


# ---------------------------------------------------------------------------
# gauge transformations

def _exp_ad(xi: Derivation, target: Derivation, cutoff: int) -> Derivation:
    total = target
    term = target
    k = 1
    while True:
        term = commutator(xi, term).scale(Fraction(1, k))
        if term.is_zero() or k > cutoff:
            break
        total = total + term
        k += 1
    return total


def _check_gauge(xi: Derivation, space):
    if xi.space != space:
        raise StructureError("gauge parameter lives on another space")
    if not xi.is_zero():
        if xi.parity != EVEN:
            raise StructureError("gauge parameters are even vector fields")
        if (xi.min_order() or 2) < 2:
            raise StructureError("gauge parameter must have order >= 2")


def gauge_transform_linf(m: LinfStructure, xi: Derivation) -> LinfStructure:
    """m' = exp(ad xi)(d + m) - d, truncated at the cutoff."""
    _check_gauge(xi, m.space)
    xi = Derivation(m.space, m.cutoff, EVEN, xi.images)
    d = m.differential()
    new = _exp_ad(xi, d + m.deriv, m.cutoff) - d
    return LinfStructure(m.space, Derivation(m.space, m.cutoff, ODD, new.images), m.cutoff)


# The dgla g[Pi V] = Der >< functions: elements are pairs (vector field, function)
# where the function's shifted parity is one more than its polynomial parity.

def _g_bracket(a, b):
    (xi, f), (nu, g) = a, b
    sign = -1 if (xi.parity and nu.parity) else 1
    vf = commutator(xi, nu)
    fn = apply_derivation(xi, g) - apply_derivation(nu, f).scale(sign)
    return vf, fn


def _g_differential(a, d: Derivation):
    xi, f = a
    n = f.order
    # the divergence term carries -(-1)^{|xi|} so that the differential is a derivation
    c = HALF if xi.parity else -HALF
    return commutator(d, xi), apply_derivation(d.with_order(n), f) + divergence(xi).copy(n).scale(c)


def gauge_transform_unimodular(u: UnimodularStructure, xi: Derivation, g: Poly) -> UnimodularStructure:
    """Gauge action of (xi, g) in g[Pi V].

    At xi = 0 this is f' = f + (d + m)(g).  For xi != 0 the function also
    picks up the divergence terms of the exact dgla action.
    """
    _check_gauge(xi, u.space)
    n = u.cutoff
    if g.terms:
        if g.parity() != ODD:
            raise StructureError("the function part of a gauge parameter is odd")
        if g.constant():
            raise StructureError("the function part of a gauge parameter has no constant term")
    xi = Derivation(u.space, n, EVEN, xi.images)
    a = (xi, g.copy(n - 1).scale(-1))
    d = u.linf.differential()
    x = (u.linf.deriv, u.function)
    da = _g_differential(a, d)

    def add(p, q, c=1):
        return p[0] + q[0].scale(c), p[1] + q[1].scale(c)

    out = x
    tx, td = x, da
    out = add(out, td, -1)
    k = 1
    while k <= n + 1:
        tx = _g_bracket(a, tx)
        td = _g_bracket(a, td)
        out = add(out, tx, Fraction(1, factorial(k)))
        out = add(out, td, Fraction(-1, factorial(k + 1)))
        if tx[0].is_zero() and tx[1].is_zero() and td[0].is_zero() and td[1].is_zero():
            break
        k += 1
    m_new = LinfStructure(u.space, Derivation(u.space, n, ODD, out[0].images), n)
    return UnimodularStructure(m_new, out[1].copy(n - 1))


# ---------------------------------------------------------------------------
# binary brackets on V versus structures on Pi V

def from_lie_bracket(v: SuperSpace, table: Mapping[tuple, Mapping], cutoff: int = 2) -> LinfStructure:
    """Structure on Pi V from a graded antisymmetric bracket on V.

    ``table[(i, j)]`` maps output indices to coefficients of [e_i, e_j].
    The shifted map is m_2(pi x, pi y) = (-1)^{|x|} pi [x, y]; missing
    orderings are filled in by antisymmetry and conflicts are rejected.
    """
    par = v.parities
    full: dict = {}
    for (i, j), outs in table.items():
        i = v.index(i) if isinstance(i, str) else i
        j = v.index(j) if isinstance(j, str) else j
        vals = {(v.index(k) if isinstance(k, str) else k): Fraction(c) for k, c in outs.items() if c}
        for k in vals:
            if (par[i] + par[j] + par[k]) % 2:
                raise StructureError("the bracket must be even")
        for key, val in (((i, j), vals), ((j, i), {k: -(-1) ** (par[i] * par[j]) * c for k, c in vals.items()})):
            if key in full and full[key] != val:
                raise StructureError("bracket is not graded antisymmetric")
            full[key] = val
    u = v.pi()
    entries = []
    for (i, j), outs in full.items():
        sign = -1 if par[i] else 1
        for k, c in outs.items():
            entries.append(((i, j), k, sign * c))
    return to_derivation(MultilinearFamily.from_entries(u, entries, max(cutoff, 2)))


def to_lie_bracket(m: LinfStructure) -> dict:
    """Inverse of :func:`from_lie_bracket` on the binary part, over all ordered pairs."""
    fam = to_multilinear(m)
    u = m.space
    vpar = [1 - p for p in u.parities]
    out: dict = {}
    for i in range(u.dim):
        for j in range(u.dim):
            vals = fam.evaluate((i, j))
            if vals:
                sign = -1 if vpar[i] else 1
                out[(i, j)] = {k: sign * c for k, c in vals.items()}
    return out
