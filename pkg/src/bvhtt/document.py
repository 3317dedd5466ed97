"""Plain-text problem documents.

A document is a list of named sections; blank lines and ``#`` comments are
ignored.  Literals are integers or fractions such as ``-3/4``; decimals
are rejected so nothing inexact can sneak in.  Example::

    [space]
    a b u : even
    w z : odd

    [differential]
    u -> w

    [structure]
    a, b -> w
    a, u -> z

    [options]
    cutoff = 4

``[space]`` lists the coordinates of the shifted space carrying the
symmetric structure maps, in order.  ``[differential]`` gives d on basis
vectors.  ``[structure]`` gives m_n on basis tuples; ``[field]`` may instead
give images of coordinates under the odd vector field, e.g. ``w = a*b``.
``[function]`` holds the even function f of a unimodular structure, and
``[sdr]`` an explicit retract (``small a : even``, ``i a -> a``,
``p a -> a``, ``s w -> u``).  Without ``[sdr]`` one is computed.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg as la
from .graded import EVEN, ODD, Derivation, Poly, SuperSpace, format_poly, normalize_word
from .sdr import SDRData
from .structures import (
    LinfStructure, MultilinearFamily, StructureError, UnimodularStructure, to_derivation,
    to_multilinear,
)

SECTIONS = ("space", "differential", "structure", "field", "function", "sdr", "options")
DEFAULT_CUTOFF = 4
NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_NAME_RE = re.compile(NAME + r"$")
_NUM_RE = re.compile(r"\d+(?:/\d+)?$")
_BAD_NUM_RE = re.compile(r"\d*\.\d*|\d+[eE][-+]?\d+")


class DocumentError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.msg, self.line, self.col = msg, line, col
        super().__init__(f"line {line}, column {col}: {msg}" if line else msg)


@dataclass
class ProblemDocument:
    space: SuperSpace
    structure: LinfStructure | None = None
    function: Poly | None = None
    sdr: SDRData | None = None
    options: dict = field(default_factory=dict)

    @property
    def cutoff(self) -> int:
        return int(self.options.get("cutoff", DEFAULT_CUTOFF))

    def linf(self) -> LinfStructure:
        if self.structure is None:
            return LinfStructure.zero(self.space, self.cutoff)
        return self.structure

    def unimodular(self) -> UnimodularStructure:
        m = self.linf()
        f = self.function if self.function is not None else Poly.zero(self.space, m.cutoff - 1)
        return UnimodularStructure(m, f.copy(m.cutoff - 1))

    def __eq__(self, other):
        if not isinstance(other, ProblemDocument):
            return NotImplemented
        return serialize(self) == serialize(other)


# ---------------------------------------------------------------------------
# parsing

def parse_rational(tok: str, line: int = 0, col: int = 0) -> Fraction:
    tok = tok.strip()
    neg = tok.startswith("-")
    body = tok.lstrip("+-").strip()
    if _BAD_NUM_RE.fullmatch(body):
        raise DocumentError(f"non-rational literal {tok!r}", line, col)
    if not _NUM_RE.match(body):
        raise DocumentError(f"bad number {tok!r}", line, col)
    try:
        val = Fraction(body)
    except ZeroDivisionError:
        raise DocumentError(f"zero denominator in {tok!r}", line, col) from None
    return -val if neg else val


_TOKEN_RE = re.compile(r"\s*(?:(?P<num>[0-9.][0-9./eE]*)|(?P<name>" + NAME + r")|(?P<op>[-+*]))")


def _tokens(text: str, line: int, col0: int):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise DocumentError(f"unexpected character {text[pos:].strip()[:1]!r}", line,
                                col0 + pos + len(text[pos:]) - len(text[pos:].lstrip()))
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), col0 + start))
        pos = m.end()
    return out


def _terms(text: str, line: int, col0: int):
    """Parse 'c1 x*y - c2 z + 3' into (coefficient, [names], column) triples."""
    toks = _tokens(text, line, col0)
    if not toks:
        raise DocumentError("empty expression", line, col0)
    out = []
    k = 0
    first = True
    while k < len(toks):
        sign = 1
        if toks[k][0] == "op" and toks[k][1] in "+-":
            sign = -1 if toks[k][1] == "-" else 1
            k += 1
        elif not first:
            raise DocumentError("expected '+' or '-'", line, toks[k][2])
        if k >= len(toks):
            raise DocumentError("dangling sign", line, toks[-1][2])
        col = toks[k][2]
        coef = Fraction(1)
        names = []
        if toks[k][0] == "num":
            coef = parse_rational(toks[k][1], line, col)
            k += 1
        if k < len(toks) and toks[k][0] == "name":
            names.append(toks[k][1])
            k += 1
            while k + 1 < len(toks) and toks[k][1] == "*" and toks[k + 1][0] == "name":
                names.append(toks[k + 1][1])
                k += 2
        elif coef == 1 and (k == 0 or toks[k - 1][0] != "num"):
            raise DocumentError("expected a number or a generator", line, toks[k][2] if k < len(toks) else col)
        if k < len(toks) and toks[k][1] == "*":
            raise DocumentError("dangling '*'", line, toks[k][2])
        out.append((sign * coef, names, col))
        first = False
    return out


class _Parser:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.sections: dict[str, list[tuple[int, str, int]]] = {}

    def split(self):
        current = None
        for no, raw in enumerate(self.lines, 1):
            body = raw.split("#", 1)[0]
            if not body.strip():
                continue
            st = body.strip()
            col = body.find(st) + 1
            if st.startswith("["):
                if not st.endswith("]"):
                    raise DocumentError("unterminated section header", no, col)
                name = st[1:-1].strip().lower()
                if name not in SECTIONS:
                    raise DocumentError(f"unknown section [{name}]", no, col)
                if name in self.sections:
                    raise DocumentError(f"section [{name}] given twice", no, col)
                self.sections[name] = []
                current = name
                continue
            if current is None:
                raise DocumentError("text before the first section", no, col)
            self.sections[current].append((no, body.rstrip(), col))


def _parity_word(tok: str, line: int, col: int) -> int:
    t = tok.strip().lower()
    if t in ("even", "0"):
        return EVEN
    if t in ("odd", "1"):
        return ODD
    raise DocumentError(f"parity must be even or odd, got {tok!r}", line, col)


def _declarations(rows, prefix=None):
    names, pars = [], []
    for no, body, col in rows:
        st = body.strip()
        if prefix:
            if not st.startswith(prefix + " "):
                continue
            st = st[len(prefix):].strip()
        if ":" not in st:
            raise DocumentError("expected 'names : parity'", no, col)
        left, right = st.rsplit(":", 1)
        p = _parity_word(right, no, col + body.find(":") + 1)
        for n in left.split():
            if not _NAME_RE.match(n):
                raise DocumentError(f"bad generator name {n!r}", no, col)
            if n in names:
                raise DocumentError(f"generator {n!r} declared twice", no, col)
            names.append(n)
            pars.append(p)
    return names, pars


def _resolve(space: SuperSpace, name: str, line: int, col: int) -> int:
    try:
        return space.index(name)
    except (KeyError, ValueError):
        raise DocumentError(f"undeclared generator {name!r}", line, col) from None


def _linear(space, text, line, col) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for c, names, tcol in _terms(text, line, col):
        if len(names) != 1:
            raise DocumentError("expected a linear combination of generators", line, tcol)
        k = _resolve(space, names[0], line, tcol)
        out[k] = out.get(k, 0) + c
    return {k: v for k, v in out.items() if v}


def _poly(space, order, text, line, col) -> Poly:
    out: dict = {}
    for c, names, tcol in _terms(text, line, col):
        idx = [_resolve(space, n, line, tcol) for n in names]
        if len(idx) > order:
            raise DocumentError(f"term of degree {len(idx)} exceeds the cutoff {order}", line, tcol)
        r = normalize_word(idx, space.parities)
        if r is None:
            continue
        s, mono = r
        out[mono] = out.get(mono, 0) + s * c
    return Poly(space, order, out)


def _arrow(body, no, col):
    if "->" not in body:
        raise DocumentError("expected 'lhs -> rhs'", no, col)
    left, right = body.split("->", 1)
    return left, right, col + len(left) + 2


def parse_problem(text: str) -> ProblemDocument:
    p = _Parser(text)
    p.split()
    secs = p.sections
    opts = _options(secs.get("options", []))
    names, pars = _declarations(secs.get("space", []))
    n = len(names)
    base = SuperSpace(tuple(names), tuple(pars))
    dmat = la.zeros(n, n)
    for no, body, col in secs.get("differential", []):
        left, right, rcol = _arrow(body, no, col)
        src = _resolve(base, left.strip(), no, col)
        for k, c in _linear(base, right, no, rcol).items():
            if pars[k] == pars[src]:
                raise DocumentError("the differential must change parity", no, rcol)
            dmat[k][src] += c
    try:
        space = SuperSpace(tuple(names), tuple(pars), dmat)
    except ValueError as e:
        raise DocumentError(str(e)) from None
    probs = space.check()
    if probs:
        raise DocumentError("; ".join(probs))
    entries = []
    max_arity = 0
    for no, body, col in secs.get("structure", []):
        left, right, rcol = _arrow(body, no, col)
        word = []
        for tok in left.split(","):
            word.append(_resolve(space, tok.strip(), no, col + body.find(tok.strip())))
        if len(word) < 2:
            raise DocumentError("structure maps start at arity 2", no, col)
        max_arity = max(max_arity, len(word))
        for k, c in _linear(space, right, no, rcol).items():
            wp = sum(pars[w] for w in word) + pars[k]
            if wp % 2 != 1:
                raise DocumentError("parity mismatch: structure maps are odd", no, rcol)
            entries.append((tuple(word), k, c))
    cutoff = int(opts.get("cutoff", max(DEFAULT_CUTOFF, max_arity)))
    opts["cutoff"] = cutoff
    structure = None
    try:
        if entries:
            fam = MultilinearFamily.from_entries(space, entries, cutoff)
            structure = to_derivation(fam)
        field_rows = secs.get("field", [])
        if field_rows:
            imgs = {}
            for no, body, col in field_rows:
                if "=" not in body:
                    raise DocumentError("expected 'x = polynomial'", no, col)
                left, right = body.split("=", 1)
                k = _resolve(space, left.strip(), no, col)
                f = _poly(space, cutoff, right, no, col + len(left) + 1)
                if f.terms and f.parity() != (pars[k] + 1) % 2:
                    raise DocumentError("parity mismatch: the field must be odd", no, col)
                if f.terms and f.min_degree() < 2:
                    raise DocumentError("field terms must have degree at least 2", no, col)
                imgs[k] = imgs.get(k, Poly.zero(space, cutoff)) + f
            xi = Derivation(space, cutoff, ODD, imgs)
            structure = LinfStructure(space, xi if structure is None else structure.deriv + xi, cutoff)
    except StructureError as e:
        raise DocumentError(str(e)) from None
    function = None
    frows = secs.get("function", [])
    if frows:
        function = Poly.zero(space, cutoff - 1)
        for no, body, col in frows:
            st = body.strip()
            m = re.match(r"f\s*=", st)
            if m:
                st = st[m.end():]
            f = _poly(space, cutoff - 1, st, no, col)
            if f.terms and f.parity() != EVEN:
                raise DocumentError("parity mismatch: f must be even", no, col)
            if f.constant():
                raise DocumentError("f must have no constant term", no, col)
            function = function + f
    sdr = _sdr(space, secs["sdr"]) if "sdr" in secs else None
    return ProblemDocument(space, structure, function, sdr, opts)


def _options(rows) -> dict:
    out: dict = {}
    for no, body, col in rows:
        if "=" not in body:
            raise DocumentError("expected 'key = value'", no, col)
        k, v = (t.strip() for t in body.split("=", 1))
        k = k.replace("_", "-")
        if k not in ("cutoff", "hbar-order", "seed"):
            raise DocumentError(f"unknown option {k!r}", no, col)
        if not re.fullmatch(r"-?\d+", v):
            raise DocumentError(f"option {k} needs an integer", no, col + body.find("=") + 1)
        out[k] = int(v)
    if "cutoff" in out and out["cutoff"] < 2:
        raise DocumentError("cutoff must be at least 2")
    return out


def _sdr(space: SuperSpace, rows) -> SDRData:
    names, pars = _declarations([r for r in rows if r[1].strip().startswith("small ")], "small")
    small = SuperSpace(tuple(names), tuple(pars))
    n, r = space.dim, small.dim
    i_m, p_m, s_m = la.zeros(n, r), la.zeros(r, n), la.zeros(n, n)
    for no, body, col in rows:
        st = body.strip()
        if st.startswith("small "):
            continue
        kind = st.split(None, 1)[0]
        if kind not in ("i", "p", "s"):
            raise DocumentError("expected 'small', 'i', 'p' or 's'", no, col)
        left, right, rcol = _arrow(st[1:], no, col + 1)
        if kind == "i":
            src = _resolve(small, left.strip(), no, col)
            for k, c in _linear(space, right, no, rcol).items():
                i_m[k][src] += c
        elif kind == "p":
            src = _resolve(space, left.strip(), no, col)
            for k, c in _linear(small, right, no, rcol).items():
                p_m[k][src] += c
        else:
            src = _resolve(space, left.strip(), no, col)
            for k, c in _linear(space, right, no, rcol).items():
                s_m[k][src] += c
    return SDRData(space, small, i_m, p_m, s_m)


# ---------------------------------------------------------------------------
# serialisation

def _fmt(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_linear(vec: dict, names) -> str:
    parts = []
    for k in sorted(vec):
        c = vec[k]
        if not c:
            continue
        mag = abs(c)
        body = names[k] if mag == 1 else f"{_fmt(mag)} {names[k]}"
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(("- " if c < 0 else "+ ") + body)
    return " ".join(parts) if parts else "0"


def _decl_lines(space: SuperSpace, prefix: str = "") -> list[str]:
    lines = []
    k = 0
    names, pars = space.names, space.parities
    while k < len(names):
        j = k
        while j < len(names) and pars[j] == pars[k]:
            j += 1
        lines.append(prefix + " ".join(names[k:j]) + " : " + ("odd" if pars[k] else "even"))
        k = j
    return lines


def serialize(doc: ProblemDocument) -> str:
    sp = doc.space
    names = sp.names
    out = ["[space]"] + _decl_lines(sp)
    d = sp.matrix()
    drows = []
    for src in range(sp.dim):
        vec = {k: d[k][src] for k in range(sp.dim) if d[k][src]}
        if vec:
            drows.append(f"{names[src]} -> {format_linear(vec, names)}")
    if drows:
        out += ["", "[differential]"] + drows
    if doc.structure is not None:
        fam = to_multilinear(doc.structure)
        rows = []
        for n in sorted(fam.maps):
            for mono in sorted(fam.maps[n]):
                vec = fam.maps[n][mono]
                if any(vec.values()):
                    rows.append(", ".join(names[v] for v in mono) + " -> " + format_linear(vec, names))
        if rows:
            out += ["", "[structure]"] + rows
    if doc.function is not None and doc.function.terms:
        out += ["", "[function]", "f = " + format_poly(doc.function)]
    if doc.sdr is not None:
        s = doc.sdr
        sm = s.small
        rows = _decl_lines(sm, "small ")
        for b in range(sm.dim):
            rows.append(f"i {sm.names[b]} -> " + format_linear({k: s.i[k][b] for k in range(sp.dim)}, names))
        for a in range(sp.dim):
            vec = {k: s.p[k][a] for k in range(sm.dim) if s.p[k][a]}
            if vec:
                rows.append(f"p {names[a]} -> " + format_linear(vec, sm.names))
        for a in range(sp.dim):
            vec = {k: s.s[k][a] for k in range(sp.dim) if s.s[k][a]}
            if vec:
                rows.append(f"s {names[a]} -> " + format_linear(vec, names))
        out += ["", "[sdr]"] + rows
    opts = dict(doc.options)
    if opts:
        out += ["", "[options]"] + [f"{k} = {opts[k]}" for k in sorted(opts)]
    return "\n".join(out) + "\n"
