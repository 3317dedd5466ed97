"""Exact kernel for Z/2-graded formal power series.

Everything here works over the rationals.  A :class:`SuperSpace` is an ordered
list of generators with parities (0 even, 1 odd) and an optional odd
differential.  When a super space is used as the variable set of a
:class:`Poly`, its generators are coordinate functions and monomials are
stored as sorted index tuples, with the Koszul sign of the sorting absorbed
into the coefficient.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

EVEN, ODD = 0, 1

Monomial = tuple[int, ...]


class SpaceMismatch(ValueError):
    pass


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floating point coefficients are not allowed")
    return Fraction(x)


@dataclass(frozen=True)
class SuperSpace:
    names: tuple[str, ...]
    parities: tuple[int, ...]
    # differential[i][j] is the coefficient of generator i in d(generator j)
    differential: tuple[tuple[Fraction, ...], ...] | None = None
    _index: dict = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if len(self.names) != len(self.parities):
            raise ValueError("names and parities differ in length")
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate generator names")
        if any(p not in (0, 1) for p in self.parities):
            raise ValueError("parities must be 0 or 1")
        d = self.differential
        if d is not None:
            n = len(self.names)
            d = tuple(tuple(as_fraction(c) for c in row) for row in d)
            if len(d) != n or any(len(row) != n for row in d):
                raise ValueError("differential must be a square matrix")
            if all(c == 0 for row in d for c in row):
                d = None
            object.__setattr__(self, "differential", d)
        object.__setattr__(self, "_index", {nm: i for i, nm in enumerate(self.names)})

    @classmethod
    def build(cls, gens: Iterable[tuple[str, int]], differential=None) -> "SuperSpace":
        gens = list(gens)
        return cls(tuple(g[0] for g in gens), tuple(int(g[1]) for g in gens), differential)

    @property
    def dim(self) -> int:
        return len(self.names)

    @property
    def sdim(self) -> tuple[int, int]:
        odd = sum(self.parities)
        return self.dim - odd, odd

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown generator {name!r}") from None

    def matrix(self) -> list[list[Fraction]]:
        n = self.dim
        if self.differential is None:
            return [[Fraction(0)] * n for _ in range(n)]
        return [list(row) for row in self.differential]

    def pi(self) -> "SuperSpace":
        """Parity reversion; the differential keeps its matrix."""
        return SuperSpace(self.names, tuple(1 - p for p in self.parities), self.differential)

    def with_differential(self, mat) -> "SuperSpace":
        return SuperSpace(self.names, self.parities, mat)

    def check(self) -> list[str]:
        """Return a list of violated invariants (empty when valid)."""
        problems = []
        d = self.matrix()
        n = self.dim
        for i in range(n):
            for j in range(n):
                if d[i][j] != 0 and self.parities[i] == self.parities[j]:
                    problems.append(f"differential is not odd at ({self.names[i]}, {self.names[j]})")
        for i in range(n):
            for j in range(n):
                if sum(d[i][k] * d[k][j] for k in range(n)) != 0:
                    problems.append("differential does not square to zero")
                    return problems
        return problems


def _mono_mul(a: Monomial, b: Monomial, par) -> tuple[int, Monomial] | None:
    """Multiply sorted monomials, returning (sign, sorted product) or None if zero."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    odd_a = [v for v in a if par[v]]
    swaps = 0
    if odd_a:
        for v in b:
            if par[v]:
                k = bisect_right(odd_a, v)
                if k and odd_a[k - 1] == v:
                    return None
                swaps += len(odd_a) - k
    return (-1 if swaps & 1 else 1), tuple(sorted(a + b))


def mono_parity(m: Monomial, par) -> int:
    return sum(par[v] for v in m) & 1


def normalize_word(word: Iterable[int], par) -> tuple[int, Monomial] | None:
    """Sort an arbitrary word of generators; returns (Koszul sign, monomial)."""
    sign, mono = 1, ()
    for v in word:
        r = _mono_mul(mono, (v,), par)
        if r is None:
            return None
        s, mono = r
        sign *= s
    return sign, mono


class Poly:
    """Truncated element of the completed symmetric algebra on ``space``.

    ``order`` bounds word length; products silently drop longer terms.
    """

    __slots__ = ("space", "order", "terms")

    def __init__(self, space: SuperSpace, order: int, terms: Mapping[Monomial, Fraction] | None = None):
        self.space = space
        self.order = order
        self.terms: dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                if c and len(m) <= order:
                    self.terms[m] = c

    # construction -----------------------------------------------------
    @classmethod
    def zero(cls, space, order):
        return cls(space, order)

    @classmethod
    def const(cls, space, order, c=1):
        return cls(space, order, {(): as_fraction(c)})

    @classmethod
    def var(cls, space, i, order, c=1):
        if isinstance(i, str):
            i = space.index(i)
        return cls(space, order, {(i,): as_fraction(c)})

    @classmethod
    def from_words(cls, space, order, words: Iterable[tuple[object, Iterable]]):
        """Build from (coefficient, word) pairs; words may list names or indices."""
        par = space.parities
        out: dict[Monomial, Fraction] = {}
        for c, word in words:
            idx = [space.index(w) if isinstance(w, str) else w for w in word]
            r = normalize_word(idx, par)
            if r is None:
                continue
            s, m = r
            out[m] = out.get(m, Fraction(0)) + s * as_fraction(c)
        return cls(space, order, out)

    def _new(self, terms):
        p = Poly.__new__(Poly)
        p.space, p.order = self.space, self.order
        p.terms = {m: c for m, c in terms.items() if c and len(m) <= self.order}
        return p

    def _check(self, other: "Poly"):
        if self.space != other.space:
            raise SpaceMismatch("polynomials live on different spaces")

    # basic algebra -----------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(self.space, self.order, other)
        self._check(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, 0) + c
        res = self._new(t)
        res.order = min(self.order, other.order)
        return res._new(res.terms)

    __radd__ = __add__

    def __neg__(self):
        return self._new({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(self.space, self.order, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Poly":
        c = as_fraction(c)
        return self._new({m: c * v for m, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        return multiply(self, other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.space == other.space and self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"Poly({format_poly(self)})"

    def is_zero(self) -> bool:
        return not self.terms

    def copy(self, order=None) -> "Poly":
        p = self._new(self.terms)
        if order is not None:
            p.order = order
            p = p._new(p.terms)
        return p

    # gradings ----------------------------------------------------------
    def parity(self) -> int | None:
        """Parity of a homogeneous polynomial; None for zero (compatible with any)."""
        par = self.space.parities
        ps = {mono_parity(m, par) for m in self.terms}
        if not ps:
            return None
        if len(ps) > 1:
            raise ValueError("polynomial is not homogeneous in parity")
        return ps.pop()

    def parity_part(self, p: int) -> "Poly":
        par = self.space.parities
        return self._new({m: c for m, c in self.terms.items() if mono_parity(m, par) == p})

    def degree_part(self, k: int) -> "Poly":
        return self._new({m: c for m, c in self.terms.items() if len(m) == k})

    def degrees(self) -> list[int]:
        return sorted({len(m) for m in self.terms})

    def min_degree(self) -> int | None:
        return min((len(m) for m in self.terms), default=None)

    def max_degree(self) -> int | None:
        return max((len(m) for m in self.terms), default=None)

    def filter(self, pred: Callable[[Monomial], bool]) -> "Poly":
        return self._new({m: c for m, c in self.terms.items() if pred(m)})

    def constant(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    # calculus ------------------------------------------------------------
    def deriv(self, i: int) -> "Poly":
        """Left partial derivative with respect to generator ``i``."""
        par = self.space.parities
        pi = par[i]
        out: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            if i not in m:
                continue
            k = m.index(i)
            cnt = m.count(i)
            sign = -1 if (pi and sum(par[v] for v in m[:k]) & 1) else 1
            rest = m[:k] + m[k + 1:]
            out[rest] = out.get(rest, 0) + sign * cnt * c
        return self._new(out)

    def deriv_right(self, i: int) -> "Poly":
        """Right partial derivative: F = sum (F <- d_i) x_i for linear F."""
        par = self.space.parities
        pi = par[i]
        out: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            if i not in m:
                continue
            k = m.index(i)
            cnt = m.count(i)
            last = k + cnt - 1
            sign = -1 if (pi and sum(par[v] for v in m[last + 1:]) & 1) else 1
            rest = m[:last] + m[last + 1:]
            out[rest] = out.get(rest, 0) + sign * cnt * c
        return self._new(out)

    def substitute(self, images: list["Poly"], target: SuperSpace, order: int | None = None) -> "Poly":
        """Apply the algebra map sending generator i to ``images[i]`` (parity preserving)."""
        order = self.order if order is None else order
        one = Poly.const(target, order)
        result: dict[Monomial, Fraction] = {}
        cache: dict[Monomial, Poly] = {(): one}

        def power(m: Monomial) -> Poly:
            if m in cache:
                return cache[m]
            val = multiply(power(m[:-1]), images[m[-1]], order)
            cache[m] = val
            return val

        for m, c in sorted(self.terms.items()):
            for mm, cc in power(m).terms.items():
                result[mm] = result.get(mm, 0) + c * cc
        return Poly(target, order, result)


def multiply(a: Poly, b: Poly, order: int | None = None) -> Poly:
    """Graded-commutative product with Koszul signs, truncated at the order."""
    a._check(b)
    order = min(a.order, b.order) if order is None else order
    par = a.space.parities
    out: dict[Monomial, Fraction] = {}
    for ma, ca in a.terms.items():
        la = len(ma)
        for mb, cb in b.terms.items():
            if la + len(mb) > order:
                continue
            r = _mono_mul(ma, mb, par)
            if r is None:
                continue
            s, m = r
            out[m] = out.get(m, 0) + (ca * cb if s > 0 else -ca * cb)
    return Poly(a.space, order, out)


def format_poly(p: Poly) -> str:
    if not p.terms:
        return "0"
    parts = []
    for m, c in sorted(p.terms.items(), key=lambda t: (len(t[0]), t[0])):
        word = "*".join(p.space.names[v] for v in m)
        if not word:
            parts.append(str(c))
        elif c == 1:
            parts.append(word)
        elif c == -1:
            parts.append("-" + word)
        else:
            parts.append(f"{c} {word}")
    return " + ".join(parts).replace("+ -", "- ")


# ---------------------------------------------------------------------------
# derivations


class Derivation:
    """A (homogeneous) vector field sum_i images[i] d/dx_i on ``space``."""

    __slots__ = ("space", "order", "parity", "images")

    def __init__(self, space: SuperSpace, order: int, parity: int, images: Mapping[int, Poly] | None = None):
        self.space = space
        self.order = order
        self.parity = parity
        self.images: dict[int, Poly] = {}
        for i, f in (images or {}).items():
            if isinstance(i, str):
                i = space.index(i)
            if f.space != space:
                raise SpaceMismatch("image polynomial lives on another space")
            if f.terms:
                fp = f.parity()
                if fp is not None and fp != (parity + space.parities[i]) % 2:
                    raise ValueError(f"image of {space.names[i]} has the wrong parity")
                self.images[i] = f.copy(order)

    @classmethod
    def zero(cls, space, order, parity=ODD):
        return cls(space, order, parity)

    def image(self, i: int) -> Poly:
        return self.images.get(i) or Poly.zero(self.space, self.order)

    def _check(self, other):
        if self.space != other.space:
            raise SpaceMismatch("derivations live on different spaces")

    def __call__(self, f: Poly) -> Poly:
        return apply_derivation(self, f)

    def __add__(self, other: "Derivation") -> "Derivation":
        self._check(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.parity != other.parity:
            raise ValueError("cannot add derivations of different parity")
        keys = set(self.images) | set(other.images)
        order = min(self.order, other.order)
        return Derivation(self.space, order, self.parity,
                          {i: self.image(i) + other.image(i) for i in keys})

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "Derivation":
        return Derivation(self.space, self.order, self.parity,
                          {i: f.scale(c) for i, f in self.images.items()})

    def __eq__(self, other):
        if not isinstance(other, Derivation):
            return NotImplemented
        a = {i: f for i, f in self.images.items() if f.terms}
        b = {i: f for i, f in other.images.items() if f.terms}
        return self.space == other.space and a == b

    def __repr__(self):
        if self.is_zero():
            return "Derivation(0)"
        body = ", ".join(f"{self.space.names[i]}: {format_poly(f)}" for i, f in sorted(self.images.items()))
        return f"Derivation({body})"

    def is_zero(self) -> bool:
        return not any(f.terms for f in self.images.values())

    def min_order(self) -> int | None:
        """Smallest polynomial degree among the images (the vector field order)."""
        degs = [f.min_degree() for f in self.images.values() if f.terms]
        return min(degs) if degs else None

    def order_part(self, k: int) -> "Derivation":
        return Derivation(self.space, self.order, self.parity,
                          {i: f.degree_part(k) for i, f in self.images.items()})

    def truncate_above(self, k: int) -> "Derivation":
        return Derivation(self.space, self.order, self.parity,
                          {i: f.filter(lambda m: len(m) <= k) for i, f in self.images.items()})

    def with_order(self, order: int) -> "Derivation":
        return Derivation(self.space, order, self.parity, self.images)


def apply_derivation(xi: Derivation, f: Poly) -> Poly:
    """Graded Leibniz extension: xi(f) = sum_i xi(x_i) * (d_i f)."""
    if xi.space != f.space:
        raise SpaceMismatch("derivation and polynomial live on different spaces")
    order = min(xi.order, f.order)
    out = Poly.zero(f.space, order)
    for i, img in xi.images.items():
        if not img.terms:
            continue
        df = f.deriv(i)
        if df.terms:
            out = out + multiply(img, df, order)
    return out


def commutator(xi: Derivation, nu: Derivation) -> Derivation:
    """[xi, nu] = xi nu - (-1)^{|xi||nu|} nu xi, computed on generators."""
    xi._check(nu)
    order = min(xi.order, nu.order)
    parity = (xi.parity + nu.parity) % 2
    sign = -1 if (xi.parity and nu.parity) else 1
    images = {}
    for i in range(xi.space.dim):
        val = apply_derivation(xi, nu.image(i)) - apply_derivation(nu, xi.image(i)).scale(sign)
        if val.terms:
            images[i] = val
    return Derivation(xi.space, order, parity, images)


def lift_differential(space: SuperSpace, order: int) -> Derivation:
    """The odd linear vector field x_k -> sum_i D[k][i] x_i of the space's differential."""
    d = space.matrix()
    images = {}
    for k in range(space.dim):
        terms = {(i,): d[k][i] for i in range(space.dim) if d[k][i]}
        if terms:
            images[k] = Poly(space, order, terms)
    return Derivation(space, order, ODD, images)


def divergence(xi: Derivation) -> Poly:
    """sum_i (-1)^{|f_i||x_i|} d_i f_i."""
    par = xi.space.parities
    out = Poly.zero(xi.space, xi.order)
    for i, f in xi.images.items():
        if not par[i]:
            out = out + f.deriv(i)
            continue
        # split by monomial parity for the sign
        ev = f.filter(lambda m: not mono_parity(m, par))
        od = f.filter(lambda m: mono_parity(m, par))
        out = out + ev.deriv(i) - od.deriv(i)
    return out


# ---------------------------------------------------------------------------
# Poisson structures on doubles

@dataclass(frozen=True)
class PoissonContext:
    """Constant Poisson structure on the coordinates of a double.

    ``partner[i]`` is the conjugate coordinate of generator i.  For the even
    kind the dual copy p of x satisfies (p, x) = 1; for the odd kind the
    BV bracket satisfies [y, eta] = (-1)^{|y|} so that the symmetric
    antibracket gives {eta, y} = 1.
    """

    space: SuperSpace
    kind: str  # "even" or "odd"
    partner: tuple[int, ...]
    # dual[i] is True when generator i is the dual-copy member of its pair
    dual: tuple[bool, ...]

    def __post_init__(self):
        if self.kind not in ("even", "odd"):
            raise ValueError("kind must be 'even' or 'odd'")
        par = self.space.parities
        for i, j in enumerate(self.partner):
            if self.partner[j] != i or i == j:
                raise ValueError("partner map must be a fixed-point-free involution")
            if self.dual[i] == self.dual[j]:
                raise ValueError("each pair needs one base and one dual member")
            same = par[i] == par[j]
            if (self.kind == "even") != same:
                raise ValueError("pair parities do not match the pairing kind")

    def omega(self, a: int, b: int) -> int:
        """Bracket of coordinate a with coordinate b."""
        if self.partner[a] != b:
            return 0
        par = self.space.parities
        if self.kind == "even":
            if self.dual[a]:
                return 1
            # (x, p) = -(-1)^{|x||p|} (p, x)
            return 1 if par[a] else -1
        base = b if self.dual[a] else a
        s = -1 if par[base] else 1
        return s if not self.dual[a] else -s

    def laplacian_pairs(self) -> list[tuple[int, int]]:
        """(even member, odd member) of each conjugate pair, odd kind only."""
        par = self.space.parities
        out = []
        for i, j in enumerate(self.partner):
            if i < j:
                out.append((i, j) if par[i] == EVEN else (j, i))
        return out


def _raw_bracket(f: Poly, g: Poly, ctx: PoissonContext) -> Poly:
    if f.space != ctx.space or g.space != ctx.space:
        raise SpaceMismatch("polynomials do not live on the context's space")
    order = min(f.order, g.order)
    out = Poly.zero(ctx.space, order)
    for a in range(ctx.space.dim):
        fa = f.deriv_right(a)
        if not fa.terms:
            continue
        b = ctx.partner[a]
        gb = g.deriv(b)
        if not gb.terms:
            continue
        out = out + multiply(fa, gb, order).scale(ctx.omega(a, b))
    return out


def bv_bracket(f: Poly, g: Poly, ctx: PoissonContext) -> Poly:
    """Odd bracket induced by the BV Laplacian (the one in the master equation)."""
    if ctx.kind != "odd":
        raise ValueError("the BV bracket needs an odd context")
    return _raw_bracket(f, g, ctx)


def _split_parity(f: Poly):
    return [(p, f.parity_part(p)) for p in (0, 1) if f.parity_part(p).terms]


def poisson_bracket(f: Poly, g: Poly, ctx: PoissonContext) -> Poly:
    """(f, g) for the even kind; the symmetric antibracket {f, g} for the odd kind."""
    if ctx.kind == "even":
        return _raw_bracket(f, g, ctx)
    out = Poly.zero(ctx.space, min(f.order, g.order))
    for p, fp in _split_parity(f):
        val = _raw_bracket(fp, g, ctx)
        out = out + (val.scale(-1) if p else val)
    return out


def hamiltonian_vector_field(f: Poly, ctx: PoissonContext) -> Derivation:
    """X_f(g) = (-1)^{|f|} (f, g), resp. (-1)^{|f|} {f, g} on the odd double."""
    order = f.order
    parts = _split_parity(f.filter(lambda m: len(m) > 0))
    if not parts:
        return Derivation.zero(ctx.space, order, ODD if ctx.kind == "odd" else EVEN)
    if len(parts) > 1:
        raise ValueError("Hamiltonian must be homogeneous")
    p, fp = parts[0]
    vf_parity = p if ctx.kind == "even" else (p + 1) % 2
    images = {}
    for b in range(ctx.space.dim):
        y = Poly.var(ctx.space, b, order)
        val = poisson_bracket(fp, y, ctx)
        if p:
            val = -val
        if val.terms:
            images[b] = val
    return Derivation(ctx.space, order, vf_parity, images)


def hamiltonian_from_field(x: Derivation, ctx: PoissonContext, parity: int) -> Poly:
    """Recover F (without constant term) with X_F = x, F of the given parity.

    Uses F <- d_a = sum_b (F, y_b) W_ba where W inverts the coordinate brackets,
    then the right Euler identity F_k = (1/k) sum_a (F <- d_a) y_a.
    """
    order = x.order + 1
    space = ctx.space
    sign = -1 if parity else 1
    # (F, y_b) in the bracket used by X
    fy = {}
    for b in range(space.dim):
        img = x.image(b)
        if ctx.kind == "odd":
            # X_F(y) = (-1)^{|F|} {F, y} = raw bracket
            fy[b] = img.copy(order)
        else:
            fy[b] = img.copy(order).scale(sign)
    grads = {}
    for a in range(space.dim):
        b = ctx.partner[a]
        w = ctx.omega(a, b)
        # (F, y_b) = (F <- d_a) omega(a, b) for the unique a paired with b
        grads[a] = fy[b].scale(Fraction(1, w))
    out: dict[Monomial, Fraction] = {}
    for a, g in grads.items():
        prod = multiply(g, Poly.var(space, a, order), order)
        for m, c in prod.terms.items():
            out[m] = out.get(m, 0) + c / len(m)
    return Poly(space, order, out)


def bv_laplacian(f: Poly, ctx: PoissonContext) -> Poly:
    """sum over conjugate pairs of d_even d_odd f."""
    if ctx.kind != "odd":
        raise ValueError("the BV Laplacian needs an odd context")
    if f.space != ctx.space:
        raise SpaceMismatch("polynomial does not live on the context's space")
    out = Poly.zero(f.space, f.order)
    for e, o in ctx.laplacian_pairs():
        do = f.deriv(o)
        if do.terms:
            out = out + do.deriv(e)
    return out

