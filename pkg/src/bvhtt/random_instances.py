"""Seeded generators of random spaces, polynomials and structures for testing."""
from __future__ import annotations

import random
from fractions import Fraction

from . import linalg
from .graded import (
    EVEN, ODD, Derivation, Poly, SuperSpace, mono_parity, normalize_word,
)
from .structures import LinfStructure, UnimodularStructure, gauge_transform_linf

COEFFS = (-2, -1, -1, 1, 1, 2, Fraction(1, 2), Fraction(-1, 3))


def _coef(rng):
    return Fraction(rng.choice(COEFFS))


def random_poly(space, order, parity, rng, mindeg=0, maxdeg=None, nterms=4) -> Poly:
    maxdeg = order if maxdeg is None else min(maxdeg, order)
    if space.dim == 0:
        return Poly(space, order, {(): _coef(rng)} if parity == EVEN and mindeg == 0 else {})
    terms: dict = {}
    for _ in range(nterms * 3):
        if len(terms) >= nterms:
            break
        k = rng.randint(mindeg, maxdeg)
        r = normalize_word([rng.randrange(space.dim) for _ in range(k)], space.parities)
        if r is None:
            continue
        _, m = r
        if mono_parity(m, space.parities) != parity:
            continue
        terms[m] = terms.get(m, 0) + _coef(rng)
    return Poly(space, order, terms)


def random_derivation(space, order, parity, rng, min_order=0, max_order=None, nterms=3) -> Derivation:
    imgs = {}
    for i in range(space.dim):
        if rng.random() < 0.75:
            imgs[i] = random_poly(space, order, (parity + space.parities[i]) % 2, rng,
                                  min_order, max_order, nterms)
    return Derivation(space, order, parity, imgs)


def random_parity_matrix(parities, rng, dense=0.5):
    """Random invertible matrix that preserves parity blocks."""
    n = len(parities)
    while True:
        a = linalg.zeros(n, n)
        for i in range(n):
            for j in range(n):
                if parities[i] == parities[j] and (i == j or rng.random() < dense):
                    a[i][j] = Fraction(rng.choice((-1, 1, 1, 2))) if i != j else Fraction(rng.choice((1, 1, -1, 2)))
        if linalg.det(a) != 0:
            return a


def random_space(rng, max_dim=4, min_dim=1, names="abcdefghijkl", min_hom=0) -> tuple[SuperSpace, list]:
    """Coordinate space with a random differential.

    Returns the space and a list of blocks describing its undeformed shape:
    ("h", i) homology generators and ("pair", i, j) acyclic pairs d(e_i) = e_j.
    """
    dim = rng.randint(min_dim, max_dim)
    blocks = []
    pars = []
    k = 0
    while k < dim:
        hom_left = min_hom - sum(1 for b in blocks if b[0] == "h")
        if dim - k >= 2 + max(hom_left, 0) and rng.random() < 0.45:
            p = rng.randint(0, 1)
            pars += [p, 1 - p]
            blocks.append(("pair", k, k + 1))
            k += 2
        else:
            pars.append(rng.randint(0, 1))
            blocks.append(("h", k))
            k += 1
    d0 = linalg.zeros(dim, dim)
    for b in blocks:
        if b[0] == "pair":
            d0[b[2]][b[1]] = Fraction(1)
    space = SuperSpace(tuple(names[:dim]), tuple(pars), d0)
    return space, blocks


def change_basis(space: SuperSpace, xi: Derivation | None, a) -> tuple[SuperSpace, Derivation | None]:
    """Coordinates x = A x'; returns the transported space and vector field."""
    ainv = linalg.inverse(a)
    d = space.matrix()
    new_d = linalg.matmul(linalg.matmul(ainv, d), a)
    new_space = space.with_differential(new_d)
    if xi is None:
        return new_space, None
    n = space.dim
    order = xi.order
    subs = [Poly(new_space, order, {(l,): a[k][l] for l in range(n) if a[k][l]}) for k in range(n)]
    images = {}
    for l in range(n):
        acc = Poly.zero(new_space, order)
        for k in range(n):
            if ainv[l][k]:
                img = xi.image(k)
                if img.terms:
                    moved = Poly(space, order, img.terms).substitute(subs, new_space, order)
                    acc = acc + moved.scale(ainv[l][k])
        if acc.terms:
            images[l] = acc
    return new_space, Derivation(new_space, order, xi.parity, images)


def layered_structure(space: SuperSpace, gens: list[int], rng, cutoff: int, nterms: int = 2) -> Derivation:
    """Odd vector field on the given generators with Q^2 = 0 by a two-layer shape."""
    if len(gens) < 2:
        return Derivation.zero(space, cutoff)
    cut = rng.randint(1, len(gens) - 1)
    low, high = gens[:cut], gens[cut:]
    sub = SuperSpace(tuple(space.names[i] for i in low), tuple(space.parities[i] for i in low))
    images = {}
    for j in high:
        f = random_poly(sub, cutoff, (space.parities[j] + 1) % 2, rng, 2, cutoff, nterms)
        if f.terms:
            images[j] = Poly(space, cutoff, {tuple(low[v] for v in m): c for m, c in f.terms.items()})
    return Derivation(space, cutoff, ODD, images)


def random_mc(rng, max_dim=4, cutoff=4, gauge=True, basis_change=True, min_dim=1,
              nterms=2, min_hom=0) -> LinfStructure:
    """Gauge transform of (homology structure + contractible pairs), in random coordinates.

    ``gauge`` may be True (random, 85%), False, or "always"; ``nterms``
    controls the density of both the layered part and the gauge field.
    """
    space, blocks = random_space(rng, max_dim, min_dim, min_hom=min_hom)
    hom = [b[1] for b in blocks if b[0] == "h"]
    m = layered_structure(space, hom, rng, cutoff, nterms)
    s = LinfStructure(space, m, cutoff)
    if gauge == "always" or (gauge and rng.random() < 0.85):
        xi = random_derivation(space, cutoff, EVEN, rng, 2, cutoff, nterms)
        s = gauge_transform_linf(s, xi)
    if basis_change and rng.random() < 0.7:
        a = random_parity_matrix(space.parities, rng)
        sp, dv = change_basis(space, s.deriv, a)
        s = LinfStructure(sp, dv, cutoff)
    return s


def strict_unimodular_part(space, gens, rng, cutoff):
    """Two-layer field whose images avoid the coordinates they act on; divergence zero."""
    return layered_structure(space, gens, rng, cutoff)


def random_unimodular(rng, max_dim=4, cutoff=4, min_dim=1, nterms=2) -> UnimodularStructure:
    from .structures import gauge_transform_unimodular

    space, blocks = random_space(rng, max_dim, min_dim)
    hom = [b[1] for b in blocks if b[0] == "h"]
    m = layered_structure(space, hom, rng, cutoff, nterms)
    u = UnimodularStructure(LinfStructure(space, m, cutoff), Poly.zero(space, cutoff - 1))
    xi = random_derivation(space, cutoff, EVEN, rng, 2, cutoff, 2)
    g = random_poly(space, cutoff - 1, ODD, rng, 1, cutoff - 1, 2)
    u = gauge_transform_unimodular(u, xi, g)
    if rng.random() < 0.6:
        a = random_parity_matrix(space.parities, rng)
        sp, dv = change_basis(space, u.linf.deriv, a)
        f = _transport_function(space, sp, u.function, a)
        u = UnimodularStructure(LinfStructure(sp, dv, cutoff), f)
    return u


def _transport_function(old, new, f: Poly, a) -> Poly:
    n = old.dim
    subs = [Poly(new, f.order, {(l,): a[k][l] for l in range(n) if a[k][l]}) for k in range(n)]
    return Poly(old, f.order, f.terms).substitute(subs, new, f.order)


def _parity_kernel(mat_rows, parities):
    """Homogeneous kernel vectors, split by parity block of the columns."""
    out = []
    n = len(parities)
    for q in (0, 1):
        idx = [a for a in range(n) if parities[a] == q]
        if not idx:
            continue
        sub = [[row[a] for a in idx] for row in mat_rows]
        if sub:
            basis = linalg.nullspace(sub, len(idx))
        else:
            basis = [[Fraction(int(i == j)) for i in range(len(idx))] for j in range(len(idx))]
        for v in basis:
            out.append((q, {idx[k]: v[k] for k in range(len(idx)) if v[k]}))
    return out


def descending_gauge(space: SuperSpace, sdr, rng, cutoff: int, nterms: int = 3) -> Derivation | None:
    """Even field that vanishes on im(i) + im(s) and takes values in ker(p).

    Gauge transforming by such a field leaves the transferred structure
    unchanged, which gives an exact check of gauge covariance.
    """
    n = space.dim
    cols = [[sdr.I[a][b] for a in range(n)] for b in range(sdr.small.dim)]
    cols += [[sdr.S[a][c] for a in range(n)] for c in range(n)]
    phis = _parity_kernel(cols, space.parities)
    vecs = _parity_kernel(sdr.P, space.parities)
    if not phis or not vecs:
        return None
    images: dict = {}
    for _ in range(nterms):
        qv, v = rng.choice(vecs)
        qp, phi = rng.choice(phis)
        r = random_poly(space, cutoff, (qv + qp) % 2, rng, 1, cutoff - 1, 1)
        term = r * Poly(space, cutoff, {(k,): c for k, c in phi.items()})
        for a, c in v.items():
            images[a] = images.get(a, Poly.zero(space, cutoff)) + term.scale(c)
    return Derivation(space, cutoff, EVEN, images)
