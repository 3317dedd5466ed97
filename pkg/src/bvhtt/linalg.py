"""Small dense linear algebra over the rationals (lists of lists of Fractions)."""
from __future__ import annotations

from fractions import Fraction

Matrix = list[list[Fraction]]


def zeros(r: int, c: int) -> Matrix:
    return [[Fraction(0)] * c for _ in range(r)]


def identity(n: int) -> Matrix:
    m = zeros(n, n)
    for i in range(n):
        m[i][i] = Fraction(1)
    return m


def shape(a: Matrix, cols: int | None = None) -> tuple[int, int]:
    return len(a), (len(a[0]) if a else (cols or 0))


def matmul(a: Matrix, b: Matrix, inner: int | None = None, cols: int | None = None) -> Matrix:
    n = len(a)
    k = len(b) if inner is None else inner
    m = (len(b[0]) if b else 0) if cols is None else cols
    out = zeros(n, m)
    for i in range(n):
        row = a[i]
        orow = out[i]
        for t in range(k):
            c = row[t]
            if c:
                brow = b[t]
                for j in range(m):
                    if brow[j]:
                        orow[j] += c * brow[j]
    return out


def add(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def sub(a: Matrix, b: Matrix) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def scale(a: Matrix, c) -> Matrix:
    return [[c * x for x in r] for r in a]


def transpose(a: Matrix, rows: int | None = None) -> Matrix:
    if not a:
        return [[] for _ in range(rows or 0)]
    return [list(col) for col in zip(*a)]


def is_zero(a: Matrix) -> bool:
    return all(x == 0 for r in a for x in r)


def rref(a: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form with leftmost pivots (deterministic)."""
    m = [list(map(Fraction, r)) for r in a]
    rows = len(m)
    cols = len(m[0]) if m else 0
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def rank(a: Matrix) -> int:
    if not a or not a[0]:
        return 0
    return len(rref(a)[1])


def nullspace_free(a: Matrix, cols: int | None = None) -> list[tuple[list[Fraction], int]]:
    """Kernel basis; each vector is paired with its free column (where it equals 1)."""
    n = len(a[0]) if a else (cols or 0)
    if not a:
        return [([Fraction(int(i == j)) for i in range(n)], j) for j in range(n)]
    m, pivots = rref(a)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -m[r][f]
        basis.append((v, f))
    return basis


def nullspace(a: Matrix, cols: int | None = None) -> list[list[Fraction]]:
    """Basis vectors of the kernel of ``a``."""
    return [v for v, _ in nullspace_free(a, cols)]


def column_basis(a: Matrix, cols: int | None = None) -> list[int]:
    """Indices of a maximal independent set of columns (leftmost first)."""
    if not a:
        return []
    return rref(a)[1]


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    aug = [list(a[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    m, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in m]


def det(a: Matrix) -> Fraction:
    n = len(a)
    m = [list(map(Fraction, r)) for r in a]
    d = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            d = -d
        d *= m[c][c]
        for i in range(c + 1, n):
            if m[i][c]:
                f = m[i][c] / m[c][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return d


def solve_left(a: Matrix, b: Matrix) -> Matrix | None:
    """Find X with X a = b (rows of b in the row space of a), or None."""
    # X a = b  <=>  a^T X^T = b^T
    at = transpose(a)
    bt = transpose(b)
    x = solve(at, bt)
    return None if x is None else transpose(x)


def solve(a: Matrix, b: Matrix) -> Matrix | None:
    """Find one X with a X = b, or None if inconsistent."""
    rows = len(a)
    n = len(a[0]) if a else 0
    k = len(b[0]) if b else 0
    aug = [list(a[i]) + list(b[i]) for i in range(rows)]
    m, pivots = rref(aug)
    if any(p >= n for p in pivots):
        return None
    x = zeros(n, k)
    for r, pc in enumerate(pivots):
        x[pc] = m[r][n:]
    return x
