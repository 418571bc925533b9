"""Finite quivers, finite paths, path counting and convexity.

Paths are stored in traversal order (first arrow traversed first). Composite
paths are conventionally written right to left, so ``Path.render`` prints the
last arrow first.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass


class QuiverError(ValueError):
    """Bad input to a quiver operation (unknown vertex, endpoint mismatch, ...)."""


class CycleError(QuiverError):
    """The operation needs an acyclic quiver but an oriented cycle is present."""


class _Infinite:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "infinite"

    __str__ = __repr__


INFINITE = _Infinite()


@dataclass(frozen=True)
class Arrow:
    id: str
    source: str
    target: str


class FiniteQuiver:
    """A finite directed multigraph. Vertex and arrow order is kept as given."""

    def __init__(self, vertices, arrows):
        self.vertices = tuple(vertices)
        self.arrows = tuple(a if isinstance(a, Arrow) else Arrow(*a) for a in arrows)
        self._vset = frozenset(self.vertices)
        self._by_id = {}
        self._out = {v: [] for v in self.vertices}
        self._in = {v: [] for v in self.vertices}
        for a in self.arrows:
            self._by_id.setdefault(a.id, a)
            if a.source in self._out:
                self._out[a.source].append(a)
            if a.target in self._in:
                self._in[a.target].append(a)

    def __repr__(self):
        return f"FiniteQuiver({len(self.vertices)} vertices, {len(self.arrows)} arrows)"

    def __eq__(self, other):
        return (isinstance(other, FiniteQuiver) and self._vset == other._vset
                and sorted(self.arrows, key=_akey) == sorted(other.arrows, key=_akey))

    def __hash__(self):
        return hash((self._vset, frozenset(self.arrows)))

    def __contains__(self, v):
        return v in self._vset

    def arrow(self, aid):
        try:
            return self._by_id[aid]
        except KeyError:
            raise QuiverError(f"unknown arrow {aid!r}") from None

    def has_arrow(self, aid):
        return aid in self._by_id

    def out_arrows(self, v):
        self._check(v)
        return self._out[v]

    def in_arrows(self, v):
        self._check(v)
        return self._in[v]

    def _check(self, v):
        if v not in self._vset:
            raise QuiverError(f"unknown vertex {v!r}")


def _akey(a):
    return (a.id, a.source, a.target)


@dataclass(frozen=True)
class Path:
    """A finite path; ``arrows`` in traversal order. Trivial paths have no arrows."""

    source: str
    target: str
    arrows: tuple = ()

    @classmethod
    def trivial(cls, v):
        return cls(v, v, ())

    def __len__(self):
        return len(self.arrows)

    def is_trivial(self):
        return not self.arrows

    def render(self):
        """Right-to-left rendering: the last arrow traversed is printed first."""
        if not self.arrows:
            return f"e_{self.source}"
        return " ".join(reversed(self.arrows))

    def __str__(self):
        return self.render()


def path_from_arrows(q, arrow_ids, source=None):
    """Build a Path from arrow ids in traversal order, checking that they chain."""
    arrow_ids = tuple(arrow_ids)
    if not arrow_ids:
        if source is None:
            raise QuiverError("trivial path needs a base vertex")
        q._check(source)
        return Path.trivial(source)
    arrs = [q.arrow(a) for a in arrow_ids]
    for x, y in zip(arrs, arrs[1:]):
        if x.target != y.source:
            raise QuiverError(f"arrows {x.id} and {y.id} do not chain")
    if source is not None and arrs[0].source != source:
        raise QuiverError("path does not start at the given vertex")
    return Path(arrs[0].source, arrs[-1].target, arrow_ids)


# ---------------------------------------------------------------- basic structure

def validate(q):
    """Return the list of defects of q; an empty list means q is well formed."""
    defects = []
    seen = set()
    for v in q.vertices:
        if not isinstance(v, str) or not v:
            defects.append(f"bad vertex id {v!r}")
        elif v in seen:
            defects.append(f"duplicate id {v}")
        seen.add(v)
    aseen = set()
    for a in q.arrows:
        if not isinstance(a.id, str) or not a.id:
            defects.append(f"bad arrow id {a.id!r}")
        elif a.id in aseen:
            defects.append(f"duplicate id {a.id}")
        aseen.add(a.id)
        for end in (a.source, a.target):
            if end not in seen:
                defects.append(f"dangling endpoint {end} of arrow {a.id}")
    return defects


def opposite(q):
    return FiniteQuiver(q.vertices, [Arrow(a.id, a.target, a.source) for a in q.arrows])


def full_subquiver(q, verts):
    keep = set(verts)
    return FiniteQuiver([v for v in q.vertices if v in keep],
                        [a for a in q.arrows if a.source in keep and a.target in keep])


def direct_successors(q, a):
    return {x.target for x in q.out_arrows(a)}


def direct_predecessors(q, a):
    return {x.source for x in q.in_arrows(a)}


def topological_order(q):
    """Vertices in an order where every arrow goes forward; CycleError otherwise."""
    indeg = {v: 0 for v in q.vertices}
    for a in q.arrows:
        indeg[a.target] += 1
    queue = deque(v for v in q.vertices if indeg[v] == 0)
    order = []
    while queue:
        v = queue.popleft()
        order.append(v)
        for a in q._out[v]:
            indeg[a.target] -= 1
            if indeg[a.target] == 0:
                queue.append(a.target)
    if len(order) != len(q.vertices):
        raise CycleError("quiver has an oriented cycle")
    return order


def has_oriented_cycle(q):
    try:
        topological_order(q)
    except CycleError:
        return True
    return False


def reachable_from(q, sources):
    """All vertices reachable from the given set (including it)."""
    seen = set(sources)
    stack = list(seen)
    while stack:
        v = stack.pop()
        for a in q._out[v]:
            if a.target not in seen:
                seen.add(a.target)
                stack.append(a.target)
    return seen


def reaching(q, targets):
    """All vertices from which some target is reachable (including the targets)."""
    seen = set(targets)
    stack = list(seen)
    while stack:
        v = stack.pop()
        for a in q._in[v]:
            if a.source not in seen:
                seen.add(a.source)
                stack.append(a.source)
    return seen


# ---------------------------------------------------------------- paths

def _paths(q, a, b, max_len):
    q._check(a)
    q._check(b)
    useful = reaching(q, [b])
    out = []

    def walk(v, acc):
        if v == b:
            out.append(acc)
        if max_len is not None and len(acc) >= max_len:
            return
        for x in q._out[v]:
            if x.target in useful:
                walk(x.target, acc + (x.id,))

    if a in useful:
        walk(a, ())
    out.sort()
    return [Path(a, b, arrs) for arrs in out]


def enumerate_paths(q, a, b):
    """Q(a, b) in lexicographic order of arrow-id sequences."""
    if has_oriented_cycle(q):
        raise CycleError("Q(a,b) may be infinite on a quiver with oriented cycles")
    return _paths(q, a, b, None)


def enumerate_paths_bounded(q, a, b, max_len):
    """Paths from a to b of length at most max_len; allowed on cyclic quivers."""
    return _paths(q, a, b, max_len)


def count_paths(q, a, b):
    """|Q(a, b)| as a Python int, or INFINITE when a cycle lies on some route a -> b."""
    q._check(a)
    q._check(b)
    rel = reachable_from(q, [a]) & reaching(q, [b])
    if not rel:
        return 0
    sub = full_subquiver(q, rel)
    try:
        order = topological_order(sub)
    except CycleError:
        return INFINITE
    count = {v: 0 for v in order}
    count[a] = 1
    for v in order:
        c = count[v]
        if c:
            for x in sub._out[v]:
                count[x.target] += c
    return count[b]


def is_interval_finite(q):
    return not has_oriented_cycle(q)


def convex_hull(q, S):
    """Full subquiver on S and every vertex lying on a path between members of S."""
    S = set(S)
    for v in S:
        q._check(v)
    if has_oriented_cycle(q):
        raise CycleError("convex hull needs an acyclic quiver")
    between = reachable_from(q, S) & reaching(q, S)
    return full_subquiver(q, S | between)


def is_convex(q, sub):
    sub = set(sub)
    for v in sub:
        q._check(v)
    if has_oriented_cycle(q):
        raise CycleError("convexity needs an acyclic quiver")
    return (reachable_from(q, sub) & reaching(q, sub)) <= sub


def compose(p, r):
    """p after r (right-to-left convention): traverse r, then p."""
    if r.target != p.source:
        raise QuiverError(f"cannot compose: r ends at {r.target}, p starts at {p.source}")
    return Path(r.source, p.target, r.arrows + p.arrows)
