"""Stable graphs, rooted trees and their automorphism counts.

Stable graphs are connected multigraphs whose vertices carry a genus tag
and a number of external legs.  Legs are unlabelled; symmetric vertex
tensors make that consistent.  Only trees and one-loop graphs are
enumerated: trees are grown leaf by leaf and one-loop graphs are a tree
plus one edge.  Isomorphism classes come from colour refinement followed
by relabelling within colour classes.  Every result is cached.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement, permutations
from math import factorial, prod


@dataclass(frozen=True, order=True)
class StableGraph:
    genus: tuple[int, ...]
    legs: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]  # sorted pairs (v <= w), repeated for multi-edges

    @property
    def n_vertices(self) -> int:
        return len(self.genus)

    @property
    def n_legs(self) -> int:
        return sum(self.legs)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def betti(self) -> int:
        return self.n_edges - self.n_vertices + 1

    @property
    def hbar_order(self) -> int:
        return self.betti + sum(self.genus)

    def half_edges(self, v: int) -> int:
        return sum((a == v) + (b == v) for a, b in self.edges)

    def valence(self, v: int) -> int:
        return self.legs[v] + self.half_edges(v)

    def multiplicity(self) -> dict:
        out: dict = {}
        for e in self.edges:
            out[e] = out.get(e, 0) + 1
        return out

    def is_connected(self) -> bool:
        return _connected(self.n_vertices, self.edges)

    def is_stable(self) -> bool:
        for v, g in enumerate(self.genus):
            if 2 * g + self.valence(v) <= 2:
                return False
        return True

    def relabel(self, perm) -> "StableGraph":
        """perm[v] is the new label of vertex v."""
        n = self.n_vertices
        g = [0] * n
        l = [0] * n
        for v in range(n):
            g[perm[v]] = self.genus[v]
            l[perm[v]] = self.legs[v]
        e = tuple(sorted(tuple(sorted((perm[a], perm[b]))) for a, b in self.edges))
        return StableGraph(tuple(g), tuple(l), e)

    def canonical(self) -> "StableGraph":
        return _canonical(self)


def _connected(n, edges) -> bool:
    if n == 0:
        return False
    adj = {v: set() for v in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def _colour_classes(g: StableGraph) -> list[list[int]]:
    """Vertex classes after colour refinement, in a labelling-independent order."""
    n = g.n_vertices
    nbrs: list[dict] = [dict() for _ in range(n)]
    loops = [0] * n
    for a, b in g.edges:
        if a == b:
            loops[a] += 1
        else:
            nbrs[a][b] = nbrs[a].get(b, 0) + 1
            nbrs[b][a] = nbrs[b].get(a, 0) + 1
    keys = [(g.genus[v], g.legs[v], loops[v], g.half_edges(v)) for v in range(n)]
    colour = _rank(keys)
    while True:
        keys = [(colour[v], tuple(sorted((colour[w], k) for w, k in nbrs[v].items()))) for v in range(n)]
        new = _rank(keys)
        if len(set(new)) == len(set(colour)):
            break
        colour = new
    classes: dict = {}
    for v in range(n):
        classes.setdefault(colour[v], []).append(v)
    return [classes[c] for c in sorted(classes)]


def _rank(keys) -> list[int]:
    order = {k: i for i, k in enumerate(sorted(set(keys)))}
    return [order[k] for k in keys]


def _class_perms(classes):
    """Permutations sending the k-th class onto a fixed block of labels, class by class."""
    def rec(k, start):
        if k == len(classes):
            yield {}
            return
        cls = classes[k]
        for arr in permutations(range(start, start + len(cls))):
            for rest in rec(k + 1, start + len(cls)):
                d = dict(zip(cls, arr))
                d.update(rest)
                yield d
    for d in rec(0, 0):
        yield [d[v] for v in range(len(d))]


@lru_cache(maxsize=None)
def _canonical(g: StableGraph) -> StableGraph:
    best = None
    for perm in _class_perms(_colour_classes(g)):
        cand = g.relabel(perm)
        key = (cand.genus, cand.legs, cand.edges)
        if best is None or key < best[0]:
            best = (key, cand)
    return best[1]


@lru_cache(maxsize=None)
def vertex_automorphisms(g: StableGraph) -> int:
    """Number of vertex permutations preserving genus, legs and edge multiplicities."""
    classes = _colour_classes(g)
    count = 0
    for perm in _class_perms(classes):
        # map each class onto itself: compose with the inverse of the identity layout
        layout = [v for cls in classes for v in cls]
        full = [0] * g.n_vertices
        for v in range(g.n_vertices):
            full[v] = layout[perm[v]]
        count += g.relabel(full) == g
    return count


def automorphism_order(g: StableGraph) -> int:
    """Order of the automorphism group acting on vertices, half-edges and legs.

    Parallel edges may be permuted, self-loops flipped and legs at a vertex
    permuted, on top of the vertex symmetries.
    """
    local = 1
    for (a, b), k in g.multiplicity().items():
        local *= factorial(k) * (2 ** k if a == b else 1)
    local *= prod(factorial(n) for n in g.legs)
    return vertex_automorphisms(g) * local


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _free_trees(n_vertices: int) -> tuple:
    """Edge lists of unlabelled trees, grown one leaf at a time."""
    if n_vertices == 1:
        return ((),)
    out = set()
    for edges in _free_trees(n_vertices - 1):
        for v in range(n_vertices - 1):
            g = StableGraph((0,) * n_vertices, (0,) * n_vertices, tuple(sorted(edges + ((v, n_vertices - 1),))))
            out.add(g.canonical().edges)
    return tuple(sorted(out))


@lru_cache(maxsize=None)
def _multigraphs(n_vertices: int, n_edges: int, loops: bool) -> tuple:
    """Connected edge multisets up to vertex relabelling, for first Betti number 0 or 1."""
    b = n_edges - n_vertices + 1
    if b == 0:
        return _free_trees(n_vertices)
    if b != 1 or not loops:
        raise ValueError("only trees and one-loop graphs are enumerated")
    out = set()
    zero = (0,) * n_vertices
    for edges in _free_trees(n_vertices):
        for a in range(n_vertices):
            for c in range(a, n_vertices):
                g = StableGraph(zero, zero, tuple(sorted(edges + ((a, c),))))
                out.add(g.canonical().edges)
    return tuple(sorted(out))


@lru_cache(maxsize=None)
def enumerate_stable_graphs(n_legs: int, hbar_order: int) -> tuple[StableGraph, ...]:
    """All connected stable graphs with the given leg count and hbar order."""
    if n_legs < 0 or hbar_order < 0:
        return ()
    if hbar_order > 1:
        raise NotImplementedError("graphs are enumerated through one loop only")
    # each vertex has 2g - 2 + valence >= 1, and these sum to 2h - 2 + n
    vmax = 2 * hbar_order - 2 + n_legs
    found = set()
    for nv in range(1, vmax + 1):
        for b in range(0, hbar_order + 1):
            ne = nv - 1 + b
            gtot = hbar_order - b
            for edges in _multigraphs(nv, ne, b > 0):
                for genus in _compositions(gtot, nv):
                    for legs in _compositions(n_legs, nv):
                        g = StableGraph(genus, legs, edges)
                        if g.is_stable():
                            found.add(g.canonical())
    return tuple(sorted(found))


def enumerate_order1_graphs(n_legs: int, cutoff: int | None = None) -> tuple[StableGraph, ...]:
    """Graphs of hbar order exactly one: one-loop graphs and trees with a genus-one vertex."""
    if cutoff is not None and n_legs > cutoff:
        return ()
    return enumerate_stable_graphs(n_legs, 1)


def enumerate_stable_trees(n_legs: int) -> tuple[StableGraph, ...]:
    return enumerate_stable_graphs(n_legs, 0)


# ---------------------------------------------------------------------------
# rooted trees: a leaf is (), an internal vertex is a sorted tuple of children

RootedTree = tuple


def leaves(t: RootedTree) -> int:
    return 1 if t == () else sum(leaves(c) for c in t)


def internal_vertices(t: RootedTree) -> int:
    return 0 if t == () else 1 + sum(internal_vertices(c) for c in t)


def _partitions(n: int, maxpart: int, minparts: int):
    """Integer partitions of n into non-increasing parts, at least ``minparts`` parts."""
    def rec(rem, mx):
        if rem == 0:
            yield ()
            return
        for k in range(min(rem, mx), 0, -1):
            for rest in rec(rem - k, k):
                yield (k,) + rest
    for p in rec(n, maxpart):
        if len(p) >= minparts:
            yield p


@lru_cache(maxsize=None)
def enumerate_trees(n_leaves: int) -> tuple[RootedTree, ...]:
    """Rooted trees with unlabelled leaves, every internal vertex having >= 2 children."""
    if n_leaves < 1:
        raise ValueError("need at least one leaf")
    if n_leaves == 1:
        return ((),)
    out = set()
    for parts in _partitions(n_leaves, n_leaves - 1, 2):
        for kids in _choose_children(parts):
            out.add(tuple(sorted(kids)))
    return tuple(sorted(out, key=_tree_key))


def _choose_children(parts):
    if not parts:
        yield ()
        return
    k = parts[0]
    same = 1
    while same < len(parts) and parts[same] == k:
        same += 1
    opts = _subtrees(k)
    for combo in combinations_with_replacement(range(len(opts)), same):
        chosen = tuple(opts[c] for c in combo)
        for rest in _choose_children(parts[same:]):
            yield chosen + rest


def _subtrees(k):
    return list(enumerate_trees(k))


def _tree_key(t):
    return (internal_vertices(t), repr(t))


def enumerate_trees_by_grafting(n_leaves: int) -> tuple[RootedTree, ...]:
    """Second enumeration: graft a new leaf onto every vertex or edge of smaller trees."""
    if n_leaves < 1:
        raise ValueError("need at least one leaf")
    level = {()}
    for _ in range(n_leaves - 1):
        nxt = set()
        for t in level:
            nxt.update(_grafts(t))
        level = nxt
    return tuple(sorted(level, key=_tree_key))


def _canon_tree(t):
    if t == ():
        return ()
    return tuple(sorted(_canon_tree(c) for c in t))


def _grafts(t):
    out = set()
    # subdivide the edge above t and hang a leaf there
    out.add(_canon_tree(((), t)))
    if t != ():
        # attach a leaf directly to the root vertex
        out.add(_canon_tree(t + ((),)))
        for i, c in enumerate(t):
            for g in _grafts(c):
                out.add(_canon_tree(t[:i] + (g,) + t[i + 1:]))
    return out


def tree_automorphisms(t: RootedTree) -> int:
    if t == ():
        return 1
    counts: dict = {}
    for c in t:
        counts[c] = counts.get(c, 0) + 1
    return prod(factorial(k) for k in counts.values()) * prod(tree_automorphisms(c) for c in t)
