"""Rooted trees on dense integer ids, bitmask vertex sets, and tree surgery.

Vertices are integers ``0..n-1`` and subsets of vertices are packed into
integer bitmasks, so set algebra stays cheap and hashable.  Everything in
this module is immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

# Subset enumeration downstream is exponential in the tree order; 2**24 is
# the desk-scale ceiling.  Callers may override per call.
MAX_TREE_ORDER = 24


@dataclass(frozen=True)
class VertexSet:
    """An immutable set of vertex ids packed into an integer bitmask.

    Bit ``v`` is set iff vertex ``v`` is a member.  The width invariant
    (all set bits below the tree order) is enforced by the functions that
    receive a tree for context, not by the container itself.
    """

    bits: int = 0

    @classmethod
    def of(cls, *vertices):
        """Build a set from explicit vertex ids: ``VertexSet.of(0, 2, 5)``."""
        return cls.from_iter(vertices)

    @classmethod
    def from_iter(cls, vertices):
        bits = 0
        for v in vertices:
            if v < 0:
                raise ValueError("vertex ids are nonnegative integers")
            bits |= 1 << v
        return cls(bits)

    def members(self):
        return tuple(self)

    def add(self, v):
        return VertexSet(self.bits | (1 << v))

    def remove(self, v):
        return VertexSet(self.bits & ~(1 << v))

    def issubset(self, other):
        return self.bits & ~other.bits == 0

    def isdisjoint(self, other):
        return self.bits & other.bits == 0

    def __contains__(self, v):
        return bool(self.bits >> v & 1)

    def __iter__(self):
        bits = self.bits
        while bits:
            low = bits & -bits
            yield low.bit_length() - 1
            bits ^= low

    def __len__(self):
        return self.bits.bit_count()

    def __bool__(self):
        return self.bits != 0

    def __or__(self, other):
        return VertexSet(self.bits | other.bits)

    def __and__(self, other):
        return VertexSet(self.bits & other.bits)

    def __sub__(self, other):
        return VertexSet(self.bits & ~other.bits)

    def __repr__(self):
        return "VertexSet({%s})" % ", ".join(str(v) for v in self)


@dataclass(frozen=True)
class RootedTree:
    """A finite tree with a distinguished root and dense ids ``0..n-1``.

    ``edges`` keeps construction order with each pair normalised to
    ``(min, max)``; ``parent[root] == -1``; ``preorder`` lists vertices
    root-first so a reversed scan is a valid post-order.
    """

    n: int
    root: int
    edges: tuple
    parent: tuple = field(repr=False)
    children: tuple = field(repr=False)
    neighbors: tuple = field(repr=False)
    depth: tuple = field(repr=False)
    preorder: tuple = field(repr=False)

    def edge_index(self, u, v):
        """Index of edge {u, v} into ``edges`` (and per-edge parameter tuples)."""
        key = (u, v) if u < v else (v, u)
        try:
            return self.edges.index(key)
        except ValueError:
            raise KeyError("no edge %s-%s in tree" % key) from None

    def all_vertices(self):
        return VertexSet((1 << self.n) - 1)

    def neighbor_bits(self, v):
        bits = 0
        for w in self.neighbors[v]:
            bits |= 1 << w
        return bits


def build_tree(edges, root=0, max_order=MAX_TREE_ORDER):
    """Validate an edge list and assemble a :class:`RootedTree`.

    Ids must be dense (``0..n-1`` with ``n = max id + 1``); the edge list
    must form a single tree containing ``root``.  Raises ``ValueError`` on
    cycles, disconnection, duplicate edges, or an absent root.
    """
    norm = []
    seen = set()
    max_id = root
    for e in edges:
        u, v = int(e[0]), int(e[1])
        if u == v:
            raise ValueError("self-loop at vertex %d" % u)
        if u < 0 or v < 0:
            raise ValueError("vertex ids must be nonnegative")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise ValueError("duplicate edge %s-%s" % key)
        seen.add(key)
        norm.append(key)
        max_id = max(max_id, u, v)
    n = max_id + 1
    if n > max_order:
        raise ValueError("tree order %d exceeds cap %d" % (n, max_order))
    if not 0 <= root < n:
        raise ValueError("root %d not a vertex" % root)
    if len(norm) != n - 1:
        raise ValueError(
            "edge count %d != n-1 = %d (cycle or missing vertices)" % (len(norm), n - 1)
        )

    nbr = [[] for _ in range(n)]
    for u, v in norm:
        nbr[u].append(v)
        nbr[v].append(u)

    parent = [-2] * n
    depth = [0] * n
    order = [root]
    parent[root] = -1
    for v in order:
        for w in nbr[v]:
            if parent[w] == -2:
                parent[w] = v
                depth[w] = depth[v] + 1
                order.append(w)
    if len(order) != n:
        raise ValueError("edge list is disconnected")

    children = [[] for _ in range(n)]
    for v in order[1:]:
        children[parent[v]].append(v)

    return RootedTree(
        n=n,
        root=root,
        edges=tuple(norm),
        parent=tuple(parent),
        children=tuple(tuple(c) for c in children),
        neighbors=tuple(tuple(sorted(x)) for x in nbr),
        depth=tuple(depth),
        preorder=tuple(order),
    )


# ---------------------------------------------------------------------------
# generators


def path(n):
    """Path on ``n`` vertices 0-1-...-(n-1), rooted at 0.  ``path(1)`` is
    the degenerate single vertex."""
    if n < 1:
        raise ValueError("path needs at least one vertex")
    return build_tree([(i, i + 1) for i in range(n - 1)], root=0)


def star(k):
    """Star with center 0 and leaves ``1..k``."""
    if k < 1:
        raise ValueError("star needs at least one leaf")
    return build_tree([(0, i) for i in range(1, k + 1)], root=0)


def spider(k, leg_len):
    """``k`` legs of ``leg_len`` vertices each, glued at center 0.

    Leg ``j`` (0-based) occupies the consecutive ids
    ``1 + j*leg_len .. (j+1)*leg_len`` walking outward, so for example
    ``spider(3, 2)`` has inner ring {1, 3, 5} and outer ring {2, 4, 6}.
    ``spider(k, 1)`` equals ``star(k)``.
    """
    if k < 1 or leg_len < 1:
        raise ValueError("spider needs k >= 1 legs of length >= 1")
    edges = []
    for j in range(k):
        base = 1 + j * leg_len
        edges.append((0, base))
        for i in range(leg_len - 1):
            edges.append((base + i, base + i + 1))
    return build_tree(edges, root=0)


def octopus(m, depth):
    """Center with ``m >= 3`` arms of ``depth`` vertices each.

    Same shape family as :func:`spider`; the separate name matches the
    truncation used by the resampling-derivative results, which need a
    branching center.
    """
    if m < 3:
        raise ValueError("octopus needs at least 3 arms")
    return spider(m, depth)


# ---------------------------------------------------------------------------
# boundaries and subtrees


@dataclass(frozen=True)
class BoundaryReport:
    """Inner/outer boundaries of a vertex set ``S`` within a tree.

    ``inner``: members of S with at least one neighbor outside S.
    ``outer``: non-members adjacent to S.  ``full`` is their union.
    """

    inner: VertexSet
    outer: VertexSet
    full: VertexSet
    _tree: RootedTree = field(repr=False)
    _subset: VertexSet = field(repr=False)

    def outer_of(self, inside):
        """Outer-boundary vertices adjacent to ``inside`` (a subset of S)."""
        bits = 0
        sub = inside.bits & self._subset.bits
        while sub:
            low = sub & -sub
            sub ^= low
            bits |= self._tree.neighbor_bits(low.bit_length() - 1)
        return VertexSet(bits & self.outer.bits)


def boundaries(tree, subset):
    """Boundary report for ``subset`` (see :class:`BoundaryReport`)."""
    s = subset.bits
    if s >> tree.n:
        raise ValueError("subset contains ids outside the tree")
    inner = 0
    outer = 0
    for v in subset:
        nb = tree.neighbor_bits(v)
        if nb & ~s:
            inner |= 1 << v
        outer |= nb & ~s
    return BoundaryReport(
        inner=VertexSet(inner),
        outer=VertexSet(outer),
        full=VertexSet(inner | outer),
        _tree=tree,
        _subset=subset,
    )


def is_connected(tree, subset):
    """True iff ``subset`` induces a connected subgraph (empty set counts)."""
    s = subset.bits
    if s >> tree.n:
        raise ValueError("subset contains ids outside the tree")
    if s == 0:
        return True
    start = (s & -s).bit_length() - 1
    seen = 1 << start
    stack = [start]
    while stack:
        v = stack.pop()
        fresh = tree.neighbor_bits(v) & s & ~seen
        seen |= fresh
        while fresh:
            low = fresh & -fresh
            fresh ^= low
            stack.append(low.bit_length() - 1)
    return seen == s


@dataclass(frozen=True)
class SpanningSubtree:
    """Minimal subtree spanning a vertex set, with bookkeeping.

    ``tree`` is the re-indexed subtree (ids ``0..m-1`` in increasing order
    of the original ids, rooted at the vertex closest to the original
    root); ``vertex_map[new_id] == original_id``.  ``closure`` is the
    subtree's vertex set in original ids — the smallest superset of S that
    spans its own subtree.  ``removable`` collects the inner-boundary
    vertices of S having degree >= 2 inside the subtree; it is empty
    whenever every inner-boundary vertex is a subtree leaf.
    """

    tree: RootedTree
    vertex_map: tuple
    closure: VertexSet
    removable: VertexSet

    def degree_counts(self):
        """Map degree -> number of subtree vertices with that degree."""
        counts = {}
        for v in range(self.tree.n):
            d = len(self.tree.neighbors[v])
            counts[d] = counts.get(d, 0) + 1
        return counts


def spanning_subtree(tree, subset):
    """Minimal subtree of ``tree`` whose vertex set contains ``subset``.

    Computed by pruning leaves that are not in ``subset`` until none
    remain.  The size of the result's boundary — its number of leaves —
    is what the degree-profile closed forms consume downstream.
    """
    s = subset.bits
    if s == 0:
        raise ValueError("subset must be nonempty")
    if s >> tree.n:
        raise ValueError("subset contains ids outside the tree")

    alive = set(range(tree.n))
    deg = [len(tree.neighbors[v]) for v in range(tree.n)]
    queue = [v for v in alive if deg[v] <= 1 and not (s >> v & 1)]
    while queue:
        v = queue.pop()
        if v not in alive or (s >> v & 1):
            continue
        if deg[v] <= 1:
            alive.discard(v)
            for w in tree.neighbors[v]:
                if w in alive:
                    deg[w] -= 1
                    if deg[w] <= 1 and not (s >> w & 1):
                        queue.append(w)

    kept = sorted(alive)
    new_id = {orig: i for i, orig in enumerate(kept)}
    sub_edges = [
        (new_id[u], new_id[v]) for (u, v) in tree.edges if u in alive and v in alive
    ]
    sub_root = new_id[min(alive, key=lambda v: (tree.depth[v], v))]
    sub = build_tree(sub_edges, root=sub_root) if sub_edges else build_tree([], root=0)

    closure_bits = 0
    for v in kept:
        closure_bits |= 1 << v

    removable = 0
    for v in subset:
        outside = tree.neighbor_bits(v) & ~s
        inside_sub = sum(1 for w in tree.neighbors[v] if w in alive)
        if outside and inside_sub >= 2:
            removable |= 1 << v

    return SpanningSubtree(
        tree=sub,
        vertex_map=tuple(kept),
        closure=VertexSet(closure_bits),
        removable=VertexSet(removable),
    )


def subdivide(tree, k):
    """Replace every edge by a path of ``k`` edges.

    Original vertices keep their ids; the ``k - 1`` fresh vertices per edge
    are appended after ``n - 1`` in edge order, walking from the lower
    endpoint to the higher.  Returns ``(new_tree, originals)`` where
    ``originals`` is the vertex set of the surviving original ids.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    originals = VertexSet((1 << tree.n) - 1)
    if k == 1:
        return tree, originals
    edges = []
    nxt = tree.n
    for u, v in tree.edges:
        prev = u
        for _ in range(k - 1):
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
        edges.append((prev, v))
    new_tree = build_tree(edges, root=tree.root, max_order=max(MAX_TREE_ORDER, nxt))
    return new_tree, originals


def connected_subsets(tree, min_size=1, max_size=None):
    """Yield the bitmasks of all nonempty connected vertex sets, once each.

    Enumeration grows each set from its minimum vertex, only ever adding
    larger ids, and bans a branching vertex from later siblings so no set
    is produced twice.  Order is by anchor vertex, not canonical; sort the
    result if a canonical order is needed.
    """
    if max_size is None:
        max_size = tree.n
    nbr_bits = [tree.neighbor_bits(v) for v in range(tree.n)]

    def grow(cur, size, cand, banned):
        if size >= min_size:
            yield cur
        if size == max_size:
            return
        c = cand
        while c:
            low = c & -c
            c ^= low
            u = low.bit_length() - 1
            new_cand = (c | (nbr_bits[u] & allowed & ~banned)) & ~cur & ~low
            yield from grow(cur | low, size + 1, new_cand & ~banned, banned)
            banned |= low

    for v0 in range(tree.n):
        allowed = -1 << (v0 + 1)
        yield from grow(1 << v0, 1, nbr_bits[v0] & allowed, 0)


# ---------------------------------------------------------------------------
# JSON round trip


def tree_to_json(tree):
    return json.dumps(
        {"n": tree.n, "root": tree.root, "edges": [list(e) for e in tree.edges]},
        separators=(",", ":"),
    )


def tree_from_json(text):
    obj = json.loads(text)
    t = build_tree([tuple(e) for e in obj["edges"]], root=obj.get("root", 0))
    if "n" in obj and obj["n"] != t.n:
        raise ValueError("declared n=%d but edges span %d vertices" % (obj["n"], t.n))
    return t
