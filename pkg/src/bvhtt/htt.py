"""Tree-formula homotopy transfer and a brute-force multilinear MC check.

Both work on the tensors T^j_I of a :class:`MultilinearFamily` and never
touch polynomials, so they are independent of the derivation-side code.
The structure maps act on points of Pi V; the space's matrix plays the
role of the unary map.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product

from .graded import normalize_word
from .structures import McReport, MultilinearFamily, StructureError
from .sdr import SDRData, verify_sdr

Vector = dict  # basis index -> Fraction


def _koszul(order, parities) -> int:
    """Sign of the permutation listing positions in ``order``, counting odd swaps."""
    sign = 1
    seq = list(order)
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b] and parities[seq[a]] and parities[seq[b]]:
                sign = -sign
    return sign


def _apply(mat, v: Vector) -> Vector:
    out: Vector = {}
    for c, x in v.items():
        for r in range(len(mat)):
            y = mat[r][c]
            if y:
                out[r] = out.get(r, 0) + y * x
    return {k: x for k, x in out.items() if x}


def _apply_tensor(fam: MultilinearFamily, args: list[Vector]) -> Vector:
    """Multilinear evaluation of m_r on homogeneous vectors."""
    out: Vector = {}
    r = len(args)
    tab = fam.maps.get(r)
    if not tab:
        return out
    par = fam.space.parities
    for combo in product(*[list(a.items()) for a in args]):
        word = tuple(k for k, _ in combo)
        coef = Fraction(1)
        for _, x in combo:
            coef *= x
        nw = normalize_word(word, par)
        if nw is None:
            continue
        s, mono = nw
        outs = tab.get(mono)
        if not outs:
            continue
        for j, c in outs.items():
            out[j] = out.get(j, 0) + s * coef * c
    return {k: x for k, x in out.items() if x}


def _add(a: Vector, b: Vector, c=1) -> Vector:
    out = dict(a)
    for k, x in b.items():
        out[k] = out.get(k, 0) + c * x
    return {k: x for k, x in out.items() if x}


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


HOMOTOPY_SIGN = -1  # trees use h = -s, i.e. d h + h d = i p - 1


def htt_transfer(fam: MultilinearFamily, sdr: SDRData, n_max: int | None = None,
                 validate: bool = True) -> MultilinearFamily:
    """Transferred maps l_n = p o (sum over trees) on the small space."""
    if validate:
        rep = verify_sdr(sdr)
        if not rep.ok:
            raise StructureError("invalid SDR: " + ", ".join(rep.failures()))
    if sdr.big != fam.space:
        raise StructureError("SDR and structure live on different spaces")
    n_max = fam.cutoff if n_max is None else n_max
    small = sdr.small
    spar = small.parities
    i_m, p_m = sdr.I, sdr.P
    h_m = [[HOMOTOPY_SIGN * x for x in row] for row in sdr.S]
    entries = []
    for n in range(2, n_max + 1):
        for word in _sorted_words(small.dim, n, spar):
            inputs = [{r: x for r in range(len(i_m)) if (x := i_m[r][w])} for w in word]
            wpar = [spar[w] for w in word]
            memo: dict = {}

            def mu(block: tuple) -> Vector:
                if block in memo:
                    return memo[block]
                total: Vector = {}
                for part in _set_partitions(list(block)):
                    if len(part) < 2:
                        continue
                    part = sorted(part, key=lambda b: b[0])
                    order = [x for b in part for x in b]
                    sign = _koszul(order, wpar)
                    args = [nu(tuple(b)) for b in part]
                    if any(not a for a in args):
                        continue
                    total = _add(total, _apply_tensor(fam, args), sign)
                memo[block] = total
                return total

            def nu(block: tuple) -> Vector:
                if len(block) == 1:
                    return inputs[block[0]]
                return _apply(h_m, mu(block))

            val = _apply(p_m, mu(tuple(range(n))))
            for j, c in val.items():
                entries.append((word, j, c))
    return MultilinearFamily.from_entries(small, entries, n_max)


def _sorted_words(dim: int, n: int, par):
    """Sorted multi-indices with no repeated odd entry."""
    def rec(start, k):
        if k == 0:
            yield ()
            return
        for a in range(start, dim):
            for rest in rec(a, k - 1):
                if rest and rest[0] == a and par[a]:
                    continue
                yield (a,) + rest
    yield from rec(0, n)


def brute_force_mc(fam: MultilinearFamily, n_max: int | None = None) -> McReport:
    """Generalised Jacobi identities on every sorted basis word up to arity n_max.

    For each word w: sum over unshuffles (J, rest) of Koszul sign times
    m_p(m_q(e_J), e_rest), with m_1 the space's differential.
    """
    n_max = fam.cutoff if n_max is None else n_max
    sp = fam.space
    par = sp.parities
    d = sp.matrix()
    dim = sp.dim
    rep = McReport()

    def m(args: list[Vector]) -> Vector:
        if len(args) == 1:
            return _apply(d, args[0])
        return _apply_tensor(fam, args)

    for n in range(1, n_max + 1):
        bad: dict = {}
        for word in _sorted_words(dim, n, par):
            wpar = [par[w] for w in word]
            basis = [{w: Fraction(1)} for w in word]
            total: Vector = {}
            for q in range(1, n + 1):
                if q > n_max or n - q + 1 > n_max:
                    continue
                for J in combinations(range(n), q):
                    rest = [k for k in range(n) if k not in J]
                    sign = _koszul(list(J) + rest, wpar)
                    inner = m([basis[k] for k in J])
                    if not inner:
                        continue
                    total = _add(total, m([inner] + [basis[k] for k in rest]), sign)
            if total:
                bad[word] = total
        rep.residuals[f"arity {n}"] = len(bad) == 0
        if bad:
            rep.residuals[f"arity {n} words"] = False
    return rep
