"""Finitely presented infinite quivers: a finite acyclic core plus periodic rays.

A ray repeats a block template at depths 0, 1, 2, ...  For an outward ray a
step arrow ``u => v`` is realised as ``(u, k+1) -> (v, k)`` for every depth k,
so paths run toward the core; inward rays run away from it.  Window vertices
are named ``ray.depth.blockVertex`` and window arrows ``ray.depth.id`` (step
instances carry the deeper depth), attach arrows ``ray.id``.

Right infinite paths live in outward rays and left infinite paths in inward
rays; everything about left infinite paths is computed on the opposite
presentation.  Path counts are exact Python ints; "unbounded" is reported
symbolically, never as a number.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from math import lcm

from quiverrep.quiver_core import (
    Arrow,
    FiniteQuiver,
    QuiverError,
    count_paths,
    has_oriented_cycle,
    opposite as quiver_opposite,
    validate as quiver_validate,
)

OUTWARD = "outward"
INWARD = "inward"
RIGHT = "right"
LEFT = "left"


class NotUIF(Exception):
    """The requested construction needs a uniformly interval finite convex hull."""


class NeedsLargerWindow(Exception):
    """A certificate could not be produced within the configured window or horizon."""


# ---------------------------------------------------------------- presentation types

@dataclass(frozen=True)
class BlockTemplate:
    block: tuple
    intra: tuple = ()
    steps: tuple = ()
    orientation: str = OUTWARD


@dataclass(frozen=True)
class Ray:
    id: str
    template: BlockTemplate
    attach: tuple = ()
    labels: tuple = ()   # (block vertex, pattern such as "a_{k+1}")

    @property
    def outward(self):
        return self.template.orientation == OUTWARD


@dataclass(frozen=True, order=True)
class ExtVertex:
    """A vertex of the infinite quiver: core vertex (ray None) or (ray, depth, block vertex)."""

    ray: str | None
    depth: int
    v: str

    @classmethod
    def core(cls, v):
        return cls(None, 0, v)

    @property
    def is_core(self):
        return self.ray is None

    def name(self):
        return self.v if self.ray is None else f"{self.ray}.{self.depth}.{self.v}"

    def shifted(self, d):
        return self if self.ray is None else ExtVertex(self.ray, self.depth + d, self.v)

    def __str__(self):
        return self.name()


_AFFINE = re.compile(r"^([+-]?\d*)k([+-]\d+)?$")


def _eval_affine(expr, k):
    expr = expr.replace(" ", "")
    if re.fullmatch(r"[+-]?\d+", expr):
        return int(expr)
    m = _AFFINE.match(expr)
    if not m:
        raise ValueError(f"bad label expression {expr!r}")
    coef = m.group(1)
    coef = 1 if coef in ("", "+") else -1 if coef == "-" else int(coef)
    return coef * k + int(m.group(2) or 0)


def _render_label(pattern, k):
    return re.sub(r"\{([^}]*)\}", lambda m: str(_eval_affine(m.group(1), k)), pattern)


class RayQuiverPresentation:
    """Finite acyclic core plus finitely many rays (immutable)."""

    def __init__(self, core, rays, name=""):
        self.core = core
        self.rays = tuple(rays)
        self.name = name
        self._rays = {r.id: r for r in self.rays}
        self._cache = {}

    def __repr__(self):
        return f"RayQuiverPresentation({self.name or 'unnamed'}, {len(self.rays)} rays)"

    def ray(self, rid):
        try:
            return self._rays[rid]
        except KeyError:
            raise QuiverError(f"unknown ray {rid!r}") from None

    # -- naming
    def _label_maps(self):
        if "labels" not in self._cache:
            pats = {}
            for r in self.rays:
                for b, pat in r.labels:
                    pats[(r.id, b)] = pat
            self._cache["labels"] = pats
        return self._cache["labels"]

    def label(self, x):
        """Human label of an ExtVertex (falls back to the window name)."""
        if x.ray is None:
            return x.v
        pat = self._label_maps().get((x.ray, x.v))
        return _render_label(pat, x.depth) if pat else x.name()

    def resolve(self, name):
        """ExtVertex for a core name, a window name ``ray.k.b`` or a ray label."""
        name = name.strip()
        if name in self.core:
            return ExtVertex.core(name)
        parts = name.split(".")
        if len(parts) >= 3 and parts[0] in self._rays and parts[1].isdigit():
            b = ".".join(parts[2:])
            if b in self._rays[parts[0]].template.block:
                return ExtVertex(parts[0], int(parts[1]), b)
        for (rid, b), pat in self._label_maps().items():
            rx = "^" + re.sub(r"\\\{[^}]*\\\}", r"(-?\\d+)", re.escape(pat)) + "$"
            m = re.match(rx, name)
            if not m:
                continue
            # solve pattern(k) == name for k >= 0 by scanning the affine map
            inner = re.findall(r"\{([^}]*)\}", pat)
            val = int(m.group(1))
            a0 = _eval_affine(inner[0], 0)
            a1 = _eval_affine(inner[0], 1) - a0
            if a1 != 0 and (val - a0) % a1 == 0 and (val - a0) // a1 >= 0:
                k = (val - a0) // a1
                if _render_label(pat, k) == name:
                    return ExtVertex(rid, k, b)
            if a1 != 0 and val - a0 == -a1:
                # depth -1: the core vertex the ray continues into, when unambiguous
                r = self._rays[rid]
                ends = {(a.target if r.outward else a.source) for a in r.attach
                        if (a.source if r.outward else a.target) == b}
                if len(ends) == 1:
                    return ExtVertex.core(ends.pop())
        raise QuiverError(f"unknown vertex {name!r}")

    def check_vertex(self, x):
        if x.ray is None:
            if x.v not in self.core:
                raise QuiverError(f"unknown vertex {x.v!r}")
        else:
            r = self.ray(x.ray)
            if x.v not in r.template.block or x.depth < 0:
                raise QuiverError(f"unknown vertex {x.name()!r}")
        return x

    def vertex_depth(self, x):
        return -1 if x.ray is None else x.depth


# ---------------------------------------------------------------- validation and opposite

def validate_presentation(rq):
    """List of defects; empty means the presentation is valid."""
    defects = list(quiver_validate(rq.core))
    if not defects and has_oriented_cycle(rq.core):
        defects.append("core has an oriented cycle")
    seen = set()
    for r in rq.rays:
        if r.id in seen:
            defects.append(f"duplicate id {r.id}")
        seen.add(r.id)
        t = r.template
        if t.orientation not in (OUTWARD, INWARD):
            defects.append(f"ray {r.id}: bad orientation {t.orientation!r}")
        if not t.block:
            defects.append(f"ray {r.id}: empty block")
        if len(set(t.block)) != len(t.block):
            defects.append(f"ray {r.id}: duplicate block vertex")
        ids = [a.id for a in t.intra] + [a.id for a in t.steps] + [a.id for a in r.attach]
        for i in sorted({i for i in ids if ids.count(i) > 1}):
            defects.append(f"ray {r.id}: duplicate id {i}")
        for a in t.intra + t.steps:
            for end in (a.source, a.target):
                if end not in t.block:
                    defects.append(f"ray {r.id}: dangling endpoint {end} of arrow {a.id}")
        if all(a.source in t.block and a.target in t.block for a in t.intra):
            if has_oriented_cycle(FiniteQuiver(t.block, t.intra)):
                defects.append(f"ray {r.id}: intra arrows contain an oriented cycle")
        for a in r.attach:
            if t.orientation == OUTWARD:
                bv, cv = a.source, a.target
            else:
                cv, bv = a.source, a.target
            if bv not in t.block:
                defects.append(f"ray {r.id}: attach arrow {a.id} has unknown block vertex {bv}")
            if cv not in rq.core:
                defects.append(f"ray {r.id}: attach arrow {a.id} has unknown core vertex {cv}")
    return defects


def opposite(rq):
    """Opposite presentation: every arrow reversed, orientations swapped."""
    if "opposite" in rq._cache:
        return rq._cache["opposite"]
    rays = []
    for r in rq.rays:
        t = r.template
        rev = lambda arrs: tuple(Arrow(a.id, a.target, a.source) for a in arrs)  # noqa: E731
        t2 = BlockTemplate(t.block, rev(t.intra), rev(t.steps),
                           INWARD if t.orientation == OUTWARD else OUTWARD)
        rays.append(Ray(r.id, t2, rev(r.attach), r.labels))
    op = RayQuiverPresentation(quiver_opposite(rq.core), rays, rq.name + "^op" if rq.name else "")
    op._cache["opposite"] = rq
    rq._cache["opposite"] = op
    return op


# ---------------------------------------------------------------- windows

@dataclass
class WindowQuiver:
    K: int
    quiver: FiniteQuiver
    to_name: dict         # ExtVertex -> vertex id
    from_name: dict       # vertex id -> ExtVertex
    arrow_info: dict      # arrow id -> (kind, ray id, template arrow id, depth)
    rq: RayQuiverPresentation

    def vertex(self, x):
        return self.to_name[x]

    def boundary(self):
        """Window vertices at the maximal depth K (their fibres may be truncated)."""
        return {n for x, n in self.to_name.items() if x.ray is not None and x.depth == self.K}


def materialize_window(rq, K):
    """Full subquiver on the core and all ray vertices of depth <= K."""
    key = ("window", K)
    if key in rq._cache:
        return rq._cache[key]
    if K < 0:
        raise ValueError("window depth must be nonnegative")
    verts, arrows = [], []
    to_name, from_name, info = {}, {}, {}
    for v in rq.core.vertices:
        x = ExtVertex.core(v)
        to_name[x] = v
        from_name[v] = x
        verts.append(v)
    for a in rq.core.arrows:
        arrows.append(a)
        info[a.id] = ("core", None, a.id, None)
    for r in rq.rays:
        t = r.template
        for k in range(K + 1):
            for b in t.block:
                x = ExtVertex(r.id, k, b)
                n = x.name()
                to_name[x] = n
                from_name[n] = x
                verts.append(n)
        for a in r.attach:
            aid = f"{r.id}.{a.id}"
            if r.outward:
                arrows.append(Arrow(aid, f"{r.id}.0.{a.source}", a.target))
            else:
                arrows.append(Arrow(aid, a.source, f"{r.id}.0.{a.target}"))
            info[aid] = ("attach", r.id, a.id, 0)
        for k in range(K + 1):
            for a in t.intra:
                aid = f"{r.id}.{k}.{a.id}"
                arrows.append(Arrow(aid, f"{r.id}.{k}.{a.source}", f"{r.id}.{k}.{a.target}"))
                info[aid] = ("intra", r.id, a.id, k)
            if k >= 1:
                for a in t.steps:
                    aid = f"{r.id}.{k}.{a.id}"
                    if r.outward:
                        arrows.append(Arrow(aid, f"{r.id}.{k}.{a.source}", f"{r.id}.{k-1}.{a.target}"))
                    else:
                        arrows.append(Arrow(aid, f"{r.id}.{k-1}.{a.source}", f"{r.id}.{k}.{a.target}"))
                    info[aid] = ("step", r.id, a.id, k)
    w = WindowQuiver(K, FiniteQuiver(verts, arrows), to_name, from_name, info, rq)
    rq._cache[key] = w
    return w


def window_arrow(rq, aid):
    """(source ExtVertex, target ExtVertex) of a window arrow id, at any depth."""
    if rq.core.has_arrow(aid):
        a = rq.core.arrow(aid)
        return ExtVertex.core(a.source), ExtVertex.core(a.target)
    parts = aid.split(".")
    if parts[0] in rq._rays:
        r = rq._rays[parts[0]]
        t = r.template
        if len(parts) >= 3 and parts[1].isdigit():
            k, tid = int(parts[1]), ".".join(parts[2:])
            for a in t.intra:
                if a.id == tid:
                    return ExtVertex(r.id, k, a.source), ExtVertex(r.id, k, a.target)
            for a in t.steps:
                if a.id == tid and k >= 1:
                    if r.outward:
                        return ExtVertex(r.id, k, a.source), ExtVertex(r.id, k - 1, a.target)
                    return ExtVertex(r.id, k - 1, a.source), ExtVertex(r.id, k, a.target)
        tid = ".".join(parts[1:])
        for a in r.attach:
            if a.id == tid:
                if r.outward:
                    return ExtVertex(r.id, 0, a.source), ExtVertex.core(a.target)
                return ExtVertex.core(a.source), ExtVertex(r.id, 0, a.target)
    hits = [r for r in rq.rays if any(a.id == aid for a in r.attach)]
    if len(hits) == 1:
        return window_arrow(rq, f"{hits[0].id}.{aid}")
    raise QuiverError(f"unknown arrow {aid!r}")


# ---------------------------------------------------------------- count matrices

def _imul(X, Y):
    if not X:
        return []
    cols = list(zip(*Y))
    return [[sum(a * b for a, b in zip(row, col)) for col in cols] for row in X]


def _imatvec(X, v):
    return [sum(a * b for a, b in zip(row, v)) for row in X]


def _vecmat(v, X):
    n = len(X[0]) if X else 0
    return [sum(v[i] * X[i][j] for i in range(len(v))) for j in range(n)]


@dataclass(frozen=True)
class CountMatrices:
    """A (intra path counts), S (step multiplicities), T = S A, AS = A S; indexed by the block."""

    block: tuple
    A: tuple
    S: tuple
    T: tuple
    AS: tuple

    def index(self, b):
        return self.block.index(b)


def count_matrices(rq, rid):
    key = ("mats", rid)
    if key in rq._cache:
        return rq._cache[key]
    r = rq.ray(rid)
    t = r.template
    B = list(t.block)
    n = len(B)
    idx = {b: i for i, b in enumerate(B)}
    from quiverrep.quiver_core import topological_order
    order = topological_order(FiniteQuiver(B, t.intra))
    A = [[0] * n for _ in range(n)]
    for u in B:
        cnt = {v: 0 for v in B}
        cnt[u] = 1
        for v in order:
            if cnt[v]:
                for a in t.intra:
                    if a.source == v:
                        cnt[a.target] += cnt[v]
        for v in B:
            A[idx[u]][idx[v]] = cnt[v]
    S = [[0] * n for _ in range(n)]
    for a in t.steps:
        S[idx[a.source]][idx[a.target]] += 1
    T = _imul(S, A)
    AS = _imul(A, S)
    cm = CountMatrices(tuple(B), tuple(map(tuple, A)), tuple(map(tuple, S)),
                       tuple(map(tuple, T)), tuple(map(tuple, AS)))
    rq._cache[key] = cm
    return cm


def _core_count(rq, a, b):
    key = ("core", a, b)
    c = rq._cache.get(key)
    if c is None:
        c = count_paths(rq.core, a, b)
        rq._cache[key] = c
    return c


def _within_ray(rq, rid, u, k, w, j):
    """Paths (u, k) -> (w, j) inside one ray (outward: k >= j; inward: j >= k)."""
    cm = count_matrices(rq, rid)
    m = k - j if rq.ray(rid).outward else j - k
    if m < 0:
        return 0
    row = list(cm.A[cm.index(u)])
    for _ in range(m):
        row = _vecmat(_vecmat(row, cm.S), cm.A)
    return row[cm.index(w)]


def _down_row(rq, rid, u, k):
    """Row vector of path counts from (u, k) to the depth-0 block of an outward ray."""
    cm = count_matrices(rq, rid)
    row = list(cm.A[cm.index(u)])
    for _ in range(k):
        row = _vecmat(_vecmat(row, cm.S), cm.A)
    return row


def _from_core(rq, c, b):
    """Paths from core vertex c to b (core or inward-ray vertex)."""
    if b.ray is None:
        return _core_count(rq, c, b.v)
    r = rq.ray(b.ray)
    if r.outward:
        return 0
    total = 0
    for a in r.attach:
        cc = _core_count(rq, c, a.source)
        if cc:
            total += cc * _within_ray(rq, r.id, a.target, 0, b.v, b.depth)
    return total


def _exit_vector(rq, rid, b):
    """g[x] = number of paths from (x, 0) of outward ray rid that leave through the core to b."""
    cm = count_matrices(rq, rid)
    g = [0] * len(cm.block)
    for a in rq.ray(rid).attach:
        g[cm.index(a.source)] += _from_core(rq, a.target, b)
    return g


def path_count_ext(rq, a, b):
    """|Q(a, b)| in the infinite quiver, exactly."""
    rq.check_vertex(a)
    rq.check_vertex(b)
    if a.ray is None:
        return _from_core(rq, a.v, b)
    r = rq.ray(a.ray)
    if not r.outward:
        if b.ray == a.ray:
            return _within_ray(rq, r.id, a.v, a.depth, b.v, b.depth)
        return 0
    if b.ray == a.ray:
        return _within_ray(rq, r.id, a.v, a.depth, b.v, b.depth)
    if b.ray is not None and rq.ray(b.ray).outward:
        return 0
    row = _down_row(rq, r.id, a.v, a.depth)
    g = _exit_vector(rq, r.id, b)
    return sum(x * y for x, y in zip(row, g))


# ---------------------------------------------------------------- power boundedness

def _sccs(n, adj):
    """Tarjan's algorithm (iterative); returns list of components (lists of nodes)."""
    index = [None] * n
    low = [0] * n
    onstack = [False] * n
    stack, comps = [], []
    counter = 0
    for root in range(n):
        if index[root] is not None:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                onstack[v] = True
            recurse = False
            nbrs = adj[v]
            while i < len(nbrs):
                w = nbrs[i]
                i += 1
                if index[w] is None:
                    work.append((v, i))
                    work.append((w, 0))
                    recurse = True
                    break
                if onstack[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    onstack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return comps


def _reach(n, adj):
    reach = []
    for s in range(n):
        seen = {s}
        st = [s]
        while st:
            v = st.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    st.append(w)
        reach.append(seen)
    return reach


@dataclass(frozen=True)
class PowerDecision:
    bounded: bool
    witness: tuple | None = None   # ("multiplicity", u, v, m) or ("two_cycles", comp) or ("chain", c1, c2)


def power_decision(T, sources, sinks):
    """Decide whether sup_m (T^m)[u][v] is finite for all u in sources, v in sinks.

    SCC criterion on the digraph of T: bounded iff every SCC lying on a route
    from a source to a sink is trivial or one simple cycle whose arcs all have
    multiplicity 1, and no such route passes through two nontrivial SCCs.
    """
    n = len(T)
    adj = [[w for w in range(n) if T[v][w]] for v in range(n)]
    comps = _sccs(n, adj)
    reach = _reach(n, adj)
    src = set(sources)
    snk = set(sinks)
    fwd = set().union(*(reach[u] for u in src)) if src else set()
    back = {x for x in range(n) if reach[x] & snk}
    nontriv = []
    for comp in comps:
        cs = set(comp)
        if len(comp) == 1 and not T[comp[0]][comp[0]]:
            continue
        if not (cs & fwd and cs & back):
            continue
        for v in comp:
            outw = sum(T[v][w] for w in comp)
            if outw != 1:
                for w in comp:
                    if T[v][w] >= 2:
                        return PowerDecision(False, ("multiplicity", v, w, T[v][w]))
                return PowerDecision(False, ("two_cycles", tuple(comp)))
        nontriv.append(comp)
    for c1 in nontriv:
        for c2 in nontriv:
            if c1 is not c2 and c2[0] in reach[c1[0]]:
                return PowerDecision(False, ("chain", tuple(c1), tuple(c2)))
    return PowerDecision(True)


def _cycle_lcm(T):
    n = len(T)
    adj = [[w for w in range(n) if T[v][w]] for v in range(n)]
    out = 1
    for comp in _sccs(n, adj):
        if len(comp) > 1 or T[comp[0]][comp[0]]:
            out = lcm(out, len(comp))
    return out


@dataclass(frozen=True)
class BoundedCounts:
    bounded: bool
    values: dict | None = None     # (u, v) -> sup over m
    witness: tuple | None = None   # in block-vertex names


def decide_counts(A, S, si, ti):
    """Matrix form of bounded_counts on block indices.

    Returns (bounded, {(u, v): sup}, witness in indices).  A is the intra path
    count matrix (row = source), S the step multiplicities.
    """
    n = len(A)
    T = _imul(S, A)
    expanded = {x for u in si for x in range(n) if A[u][x]}
    dec = power_decision(T, expanded, ti)
    if not dec.bounded:
        return False, None, dec.witness
    horizon = n + _cycle_lcm(T) + 1
    cur = [list(r) for r in A]
    best = {(u, v): cur[u][v] for u in si for v in ti}
    for _ in range(horizon):
        cur = _imul(cur, T)
        for u in si:
            for v in ti:
                if cur[u][v] > best[(u, v)]:
                    best[(u, v)] = cur[u][v]
    return True, best, None


def bounded_counts(rq, rid, sources, sinks):
    """Decide sup_m [A (S A)^m][u][v] < infinity for u in sources, v in sinks."""
    cm = count_matrices(rq, rid)
    B = cm.block
    ok, best, w = decide_counts(cm.A, cm.S, [cm.index(u) for u in sources], [cm.index(v) for v in sinks])
    if not ok:
        if w[0] == "multiplicity":
            wit = ("multiplicity", B[w[1]], B[w[2]], w[3])
        elif w[0] == "two_cycles":
            wit = ("two_cycles", tuple(B[i] for i in w[1]))
        else:
            wit = ("chain", tuple(B[i] for i in w[1]), tuple(B[i] for i in w[2]))
        return BoundedCounts(False, None, wit)
    return BoundedCounts(True, {(B[u], B[v]): x for (u, v), x in best.items()}, None)


# ---------------------------------------------------------------- infinite paths

@dataclass(frozen=True)
class RayPath:
    """An eventually periodic one-sided infinite path.

    ``prefix`` lists window arrow ids starting at the finite end (alpha_1 first);
    the periodic part starts at ``entry`` and reads ``word`` (template arrow ids)
    repeatedly, moving one arrow further from the finite end per letter.
    """

    direction: str
    prefix: tuple
    entry: ExtVertex
    word: tuple

    def literal(self, rq=None):
        name = (rq.label(self.entry) if rq is not None else self.entry.name())
        pre = " ".join(self.prefix)
        return f"{pre}; {name}; ({' '.join(self.word)})"

    def __str__(self):
        return self.literal()


def _right_view(rq, p):
    """Presentation and path on which p is right infinite."""
    if p.direction == RIGHT:
        return rq, p
    return opposite(rq), RayPath(RIGHT, p.prefix, p.entry, p.word)


def _letter(rq, rid, tid):
    r = rq.ray(rid)
    for a in r.template.intra:
        if a.id == tid:
            return ("intra", a)
    for a in r.template.steps:
        if a.id == tid:
            return ("step", a)
    raise QuiverError(f"{tid!r} is not an intra or step arrow of ray {rid}")


def _read(rq, x, tid):
    """Read one letter of a right infinite path at vertex x of an outward ray.

    Returns (next vertex, window arrow id).
    """
    kind, a = _letter(rq, x.ray, tid)
    if a.target != x.v:
        raise QuiverError(f"letter {tid} does not end at {x.name()}")
    if kind == "intra":
        return ExtVertex(x.ray, x.depth, a.source), f"{x.ray}.{x.depth}.{tid}"
    return ExtVertex(x.ray, x.depth + 1, a.source), f"{x.ray}.{x.depth + 1}.{tid}"


def _check_word(rq, entry, word):
    if entry.ray is None or not rq.ray(entry.ray).outward:
        raise QuiverError("the periodic part of a right infinite path must lie on an outward ray")
    if not word:
        raise QuiverError("empty period word")
    x = entry
    for tid in word:
        x, _ = _read(rq, x, tid)
    if x.v != entry.v or x.depth <= entry.depth:
        raise QuiverError("period word does not close up with a net depth increase")
    return x.depth - entry.depth


def _primitive(word):
    L = len(word)
    for d in range(1, L + 1):
        if L % d == 0 and word[:d] * (L // d) == word:
            return word[:d]
    return word


def _check_prefix(rq, p):
    """Validate the prefix; returns the target vertex t(p)."""
    cur = p.entry
    for aid in reversed(p.prefix):
        s, t = window_arrow(rq, aid)
        if s != cur:
            raise QuiverError(f"prefix arrow {aid} does not chain onto {cur.name()}")
        cur = t
    return cur


def _canonical_right(rq, p):
    word = tuple(p.word)
    _check_word(rq, p.entry, word)
    _check_prefix(rq, p)
    word = _primitive(word)
    prefix = list(p.prefix)
    entry = p.entry
    while prefix:
        last = prefix[-1]
        s, t = window_arrow(rq, last)
        if t.ray != entry.ray or t.is_core:
            break
        try:
            nxt, aid = _read(rq, t, word[-1])
        except QuiverError:
            break
        if aid != last or nxt != entry:
            break
        prefix.pop()
        entry = t
        word = (word[-1],) + word[:-1]
    return RayPath(RIGHT, tuple(prefix), entry, word)


def _class_key(rq, canon):
    """(ray, lexicographically least rotation, entry block vertex, entry depth mod steps)."""
    word = canon.word
    L = len(word)
    steps = sum(1 for t in word if _letter(rq, canon.entry.ray, t)[0] == "step")
    best = None
    x = canon.entry
    for j in range(L):
        rot = word[j:] + word[:j]
        cand = (rot, x.v, x.depth % steps)
        if best is None or cand[0] < best[0]:
            best = cand
        x, _ = _read(rq, x, word[j])
    return (canon.entry.ray, best[0], best[1], best[2])


class RayClass:
    """Equivalence class of eventually periodic infinite paths.

    Equality and hashing use the class key only; ``rep`` keeps the canonical
    form of the path the class was built from (its target matters for
    convex-hull questions).
    """

    __slots__ = ("direction", "key", "rep")

    def __init__(self, direction, key, rep):
        self.direction = direction
        self.key = key
        self.rep = rep

    def __eq__(self, other):
        return isinstance(other, RayClass) and (self.direction, self.key) == (other.direction, other.key)

    def __hash__(self):
        return hash((self.direction, self.key))

    def __repr__(self):
        return f"RayClass({self.key_literal()})"

    def key_literal(self):
        rid, word, b, d = self.key
        return f"{rid}.{d}.{b}; ({' '.join(word)})"

    def tail_path(self):
        """The class representative with empty prefix at the canonical entry."""
        rid, word, b, d = self.key
        return RayPath(self.direction, (), ExtVertex(rid, d, b), word)

    def literal(self, rq=None):
        return self.rep.literal(rq)


def class_canonicalize(rq, p):
    """Canonical class of an infinite path (trimmed prefix, primitive word, least rotation key)."""
    if isinstance(p, RayClass):
        return p
    rqr, pr = _right_view(rq, p)
    canon = _canonical_right(rqr, pr)
    key = _class_key(rqr, canon)
    rep = RayPath(p.direction, canon.prefix, canon.entry, canon.word)
    return RayClass(p.direction, key, rep)


def class_equal(rq, p, q):
    if p.direction != q.direction:
        raise ValueError("cannot compare a right infinite path with a left infinite one")
    return class_canonicalize(rq, p) == class_canonicalize(rq, q)


def _as_path(p):
    return p.rep if isinstance(p, RayClass) else p


def vertex_sequence(rq, p, i):
    """a_i = t(alpha_{i+1}) for right infinite p (s(alpha_{i+1}) for left infinite p)."""
    p = _as_path(p)
    rqr, pr = _right_view(rq, p)
    return _vertex_seq_right(rqr, pr, i)


def _vertex_seq_right(rq, p, i):
    m = len(p.prefix)
    if i <= m:
        if i == m:
            return p.entry
        s, t = window_arrow(rq, p.prefix[i])
        return t
    x = p.entry
    j = 0
    L = len(p.word)
    for j in range(i - m):
        x, _ = _read(rq, x, p.word[j % L])
    return x


def _path_target(rq, p):
    return _vertex_seq_right(rq, p, 0)


# ---------------------------------------------------------------- class sizes

@dataclass(frozen=True)
class ClassSize:
    finite: bool
    value: int | None = None
    index: int | None = None       # least index i with |Q(a_i, a)| equal to the value
    witness: tuple | None = None

    def __str__(self):
        return str(self.value) if self.finite else "unbounded"


def _depth_vectors(rq, rid, a):
    """(k0, c_{k0}) with c_k[x] = |Q((x, k), a)| for k >= k0 and c_k = A S c_{k-1}."""
    cm = count_matrices(rq, rid)
    if a.ray == rid:
        w = cm.index(a.v)
        return a.depth, [cm.A[x][w] for x in range(len(cm.block))]
    if a.ray is not None and rq.ray(a.ray).outward:
        return 0, [0] * len(cm.block)
    g = _exit_vector(rq, rid, a)
    return 0, _imatvec(cm.A, g)


def _tail_info(rq, cls):
    rid, word, b, d = cls.key
    steps = sum(1 for t in word if _letter(rq, rid, t)[0] == "step")
    return rid, word, b, d, steps


def _class_size_right(rq, cls, rep, a):
    rq.check_vertex(a)
    rid, word, b0, d0, s = _tail_info(rq, cls)
    cm = count_matrices(rq, rid)
    n = len(cm.block)
    k0, c = _depth_vectors(rq, rid, a)
    t0 = max(0, -(-(k0 - d0) // s))
    D = d0 + t0 * s
    h = list(c)
    for _ in range(D - k0):
        h = _imatvec(cm.AS, h)
    W = [list(r) for r in cm.AS]
    Wp = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(s):
        Wp = _imul(Wp, W)
    sinks = [v for v in range(n) if h[v]]
    bi = cm.index(b0)
    if not sinks:
        return ClassSize(True, 0, 0)
    dec = power_decision(Wp, [bi], sinks)
    if not dec.bounded:
        return ClassSize(False, witness=dec.witness)
    vec = list(h)
    for _ in range(n):
        vec = _imatvec(Wp, vec)
    value = vec[bi]
    # least index along the representative with the stabilised count
    i = 0
    limit = len(rep.prefix) + len(rep.word) * (t0 + n + 2) + len(rep.word)
    while i <= limit:
        if path_count_ext(rq, _vertex_seq_right(rq, rep, i), a) == value:
            return ClassSize(True, value, i)
        i += 1
    raise AssertionError("stabilised count not reached along the representative")


def class_size(rq, p, a):
    """sup_i |Q(a_i, a)| along the class of p (the size of [p]_a)."""
    cls = class_canonicalize(rq, p)
    rqr, _ = _right_view(rq, cls.rep)
    rep = RayPath(RIGHT, cls.rep.prefix, cls.rep.entry, cls.rep.word)
    return _class_size_right(rqr, cls, rep, a)


def is_uif_hull(rq, p):
    """Whether the convex hull of the representative path is uniformly interval finite.

    Decided by finiteness of the class members ending at the path's own target.
    """
    cls = class_canonicalize(rq, p)
    rqr, _ = _right_view(rq, cls.rep)
    rep = RayPath(RIGHT, cls.rep.prefix, cls.rep.entry, cls.rep.word)
    return _class_size_right(rqr, cls, rep, _path_target(rqr, rep)).finite


def is_uif_class(rq, p):
    """Whether every path in the class has a uniformly interval finite convex hull.

    Equivalently the class has finitely many members ending at every vertex.
    """
    cls = class_canonicalize(rq, p)
    rqr, _ = _right_view(rq, cls.rep)
    rep = RayPath(RIGHT, cls.rep.prefix, cls.rep.entry, cls.rep.word)
    rid, word, b0, d0, s = _tail_info(rqr, cls)
    for b in rqr.ray(rid).template.block:
        for k in range(s):
            if not _class_size_right(rqr, cls, rep, ExtVertex(rid, k, b)).finite:
                return False
    return True


def stabilization_index(rq, p):
    """Least N with |Q(a_i, a_j)| = 1 for all i >= j >= N along the path p.

    Raises NotUIF when no tail of p has a uniformly interval finite hull.
    """
    cls = class_canonicalize(rq, p)
    rqr, _ = _right_view(rq, cls.rep)
    rep = RayPath(RIGHT, cls.rep.prefix, cls.rep.entry, cls.rep.word)
    m, L = len(rep.prefix), len(rep.word)
    bad = -1
    for j in range(m + L):
        cs = _class_size_right(rqr, cls, rep, _vertex_seq_right(rqr, rep, j))
        if not (cs.finite and cs.value == 1):
            if j >= m:
                raise NotUIF(f"class {cls.key_literal()} has no uniformly interval finite tail")
            bad = j
    return bad + 1


# ---------------------------------------------------------------- predecessors

@dataclass(frozen=True)
class PredecessorReport:
    ok: bool
    witness: ExtVertex | None
    fed_block_vertices: dict       # outward ray id -> block vertices with infinitely many predecessors


def all_vertices_have_finite_predecessors(rq):
    """Whether every vertex has finitely many predecessors; else a witness vertex.

    A ray vertex (x, k) has infinitely many predecessors iff x is reachable from
    a cycle in the digraph of T = S A; everything those vertices reach inherits this.
    """
    fed = {}
    witness = None
    for r in rq.rays:
        if not r.outward:
            continue
        cm = count_matrices(rq, r.id)
        n = len(cm.block)
        adj = [[w for w in range(n) if cm.T[v][w]] for v in range(n)]
        cyc = set()
        for comp in _sccs(n, adj):
            if len(comp) > 1 or cm.T[comp[0]][comp[0]]:
                cyc.update(comp)
        reach = _reach(n, adj)
        F = set()
        for c in cyc:
            F |= reach[c]
        if not F:
            continue
        fed[r.id] = tuple(b for i, b in enumerate(cm.block) if i in F)
        if witness is None:
            for a in r.attach:
                if cm.index(a.source) in F:
                    witness = ExtVertex.core(a.target)
                    break
            if witness is None:
                witness = ExtVertex(r.id, 0, fed[r.id][0])
    return PredecessorReport(not fed, witness, fed)


# ---------------------------------------------------------------- class listing

def _reading_edges(rq, rid):
    """Edges of the reading graph: (from block vertex, to block vertex, letter, is_step)."""
    t = rq.ray(rid).template
    edges = [(a.target, a.source, a.id, False) for a in t.intra]
    edges += [(a.target, a.source, a.id, True) for a in t.steps]
    return edges


def _closed_words(rq, rid, bound):
    edges = _reading_edges(rq, rid)
    found = set()
    for start in rq.ray(rid).template.block:
        def walk(v, word, steps):
            if word and v == start and steps:
                w = _primitive(tuple(word))
                L = len(w)
                found.add(min(w[j:] + w[:j] for j in range(L)))
            if len(word) >= bound:
                return
            for (u, x, tid, st) in edges:
                if u == v:
                    word.append(tid)
                    walk(x, word, steps + st)
                    word.pop()
        walk(start, [], 0)
    return sorted(found)


def _reading_sccs_simple(rq, rid):
    """(all nontrivial reading-graph SCCs are simple cycles, their lengths)."""
    B = list(rq.ray(rid).template.block)
    idx = {b: i for i, b in enumerate(B)}
    n = len(B)
    mult = [[0] * n for _ in range(n)]
    for (u, x, tid, st) in _reading_edges(rq, rid):
        mult[idx[u]][idx[x]] += 1
    adj = [[w for w in range(n) if mult[v][w]] for v in range(n)]
    ok, lengths = True, []
    for comp in _sccs(n, adj):
        if len(comp) == 1 and not mult[comp[0]][comp[0]]:
            continue
        if any(sum(mult[v][w] for w in comp) != 1 for v in comp):
            ok = False
        lengths.append(len(comp))
    return ok, lengths


@dataclass(frozen=True)
class ClassListing:
    classes: tuple
    complete: bool


def _representative_to(rq, cls, a, K_extra=2):
    """A path of the class ending at a (least tail index, lexicographically least finite part)."""
    from quiverrep.quiver_core import enumerate_paths
    tail = cls.tail_path()
    for i in range(0, 10 ** 6):
        x = _vertex_seq_right(rq, tail, i)
        if path_count_ext(rq, x, a) > 0:
            W = materialize_window(rq, max(x.depth, 0) + 1)
            q = enumerate_paths(W.quiver, W.to_name[x], W.to_name[a])[0]
            # prefix in alpha_1-first order, plus the part of the tail before x
            pre = tuple(reversed(q.arrows))
            y = tail.entry
            steps_before = []
            for j in range(i):
                y, aid = _read(rq, y, tail.word[j % len(tail.word)])
                steps_before.append(aid)
            word = tail.word[i % len(tail.word):] + tail.word[:i % len(tail.word)]
            return RayPath(RIGHT, pre, x, word)
    raise AssertionError("unreachable")


def list_classes_through(rq, a, period_bound):
    """Right infinite classes with a member ending at a and period length <= period_bound."""
    rq.check_vertex(a)
    out = []
    complete = True
    for r in rq.rays:
        if not r.outward:
            continue
        ok, lengths = _reading_sccs_simple(rq, r.id)
        words = _closed_words(rq, r.id, period_bound)
        reaches = False
        for w in words:
            steps = sum(1 for t in w if _letter(rq, r.id, t)[0] == "step")
            start = _letter(rq, r.id, w[0])[1].target
            for d in range(steps):
                key = (r.id, w, start, d)
                cls = RayClass(RIGHT, key, RayPath(RIGHT, (), ExtVertex(r.id, d, start), w))
                cs = _class_size_right(rq, cls, cls.rep, a)
                if cs.finite and cs.value == 0:
                    continue
                reaches = True
                rep = _canonical_right(rq, _representative_to(rq, cls, a))
                out.append(RayClass(RIGHT, key, rep))
        if not ok or any(L > period_bound for L in lengths):
            # a ray whose reading graph is not a union of simple cycles carries
            # non-periodic tails; it only matters if its vertices reach a
            if reaches or _ray_reaches(rq, r.id, a):
                complete = False
    out.sort(key=lambda c: c.key)
    return ClassListing(tuple(out), complete)


def _ray_reaches(rq, rid, a):
    cm = count_matrices(rq, rid)
    return any(path_count_ext(rq, ExtVertex(rid, k, b), a) for b in cm.block
               for k in range(max(a.depth if a.ray == rid else 0, 0), (a.depth if a.ray == rid else 0) + 2))


# ---------------------------------------------------------------- literals

def parse_raypath(rq, text):
    """Parse ``prefix; entry; (word)``; prefix and entry may be omitted.

    Prefix arrows are window arrow ids, alpha_1 first; the word lists template
    arrow ids of a single ray. The direction follows the ray orientation.
    """
    text = text.strip()
    parts = [s.strip() for s in text.split(";")]
    if len(parts) > 3 or not parts[-1].startswith("(") or not parts[-1].endswith(")"):
        raise QuiverError(f"bad path literal {text!r}")
    word = tuple(parts[-1][1:-1].split())
    if not word:
        raise QuiverError("empty period word")
    prefix = tuple(parts[0].split()) if len(parts) == 3 else ()
    entry_name = parts[-2] if len(parts) >= 2 else ""
    rid = None
    qual = [w.split(".", 1) for w in word]
    if all(len(q) == 2 and q[0] in rq._rays for q in qual):
        rid = qual[0][0]
        word = tuple(q[1] for q in qual)
    entry = rq.resolve(entry_name) if entry_name else None
    if entry is not None:
        rid = entry.ray
    if rid is None:
        cands = []
        for r in rq.rays:
            ids = {a.id for a in r.template.intra} | {a.id for a in r.template.steps}
            if all(w in ids for w in word):
                cands.append(r)
        outs = [r for r in cands if r.outward]
        pick = outs if outs else cands
        if len(pick) != 1:
            raise QuiverError(f"cannot determine the ray of word {' '.join(word)}")
        rid = pick[0].id
    r = rq.ray(rid)
    direction = RIGHT if r.outward else LEFT
    kind, first = _letter(rq, rid, word[0])
    if entry is None:
        bv = first.target if r.outward else first.source
        entry = ExtVertex(rid, 0, bv)
    p = RayPath(direction, prefix, entry, word)
    rqr, pr = _right_view(rq, p)
    _check_word(rqr, pr.entry, pr.word)
    _check_prefix(rqr, pr)
    return p
