"""Pointwise finite dimensional representations on finite quivers and windows.

A representation stores one dimension per vertex and one matrix per arrow,
acting on column vectors (``mats[alpha]`` has ``dims[target]`` rows).  On a
window of a ray quiver the representation is the restriction of a
representation of the infinite quiver; fibres at depth K may be truncated and
are reported as boundary fibres.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lcm

from quiverrep.linalg import (
    Matrix, Q, block_diag, complement, coordinates, intersect, nullspace, span,
)
from quiverrep.quiver_core import (
    FiniteQuiver, Path, QuiverError, opposite as quiver_opposite, reachable_from,
    topological_order,
)
from quiverrep.ray_quiver import (
    RIGHT, ExtVertex, NeedsLargerWindow, NotUIF, RayPath, WindowQuiver,
    _canonical_right, _read, class_canonicalize, class_size, count_matrices,
    is_uif_class, materialize_window, opposite as rq_opposite,
)


class TruncationError(QuiverError):
    """The successors of a vertex leave the window, so P_a would be truncated."""


class RepError(ValueError):
    """Shape, quiver or field mismatch between representations or morphisms."""


# ---------------------------------------------------------------- representations

class Rep:
    """A representation of a finite quiver (possibly a window of a ray quiver)."""

    def __init__(self, quiver, field, dims, mats, labels=None, window=None):
        if isinstance(quiver, WindowQuiver):
            window = quiver
            quiver = quiver.quiver
        self.quiver = quiver
        self.field = field
        self.window = window
        self.dims = {v: int(dims.get(v, 0)) for v in quiver.vertices}
        self.mats = {}
        for a in quiver.arrows:
            m = mats.get(a.id)
            shape = (self.dims[a.target], self.dims[a.source])
            if m is None:
                m = Matrix.zero(field, *shape)
            elif m.shape != shape:
                raise RepError(f"matrix of {a.id} has shape {m.shape}, expected {shape}")
            self.mats[a.id] = m
        self.labels = labels

    def __repr__(self):
        return f"Rep(dims={self.dim_vector()})"

    def __eq__(self, other):
        return (isinstance(other, Rep) and self.quiver == other.quiver
                and self.dims == other.dims and self.mats == other.mats)

    __hash__ = None

    def dim_vector(self):
        return tuple(self.dims[v] for v in self.quiver.vertices)

    def total_dim(self):
        return sum(self.dims.values())

    def is_zero(self):
        return self.total_dim() == 0

    def path_map(self, path):
        m = Matrix.identity(self.field, self.dims[path.source])
        for aid in path.arrows:
            m = self.mats[aid] @ m
        return m

    def boundary(self):
        return self.window.boundary() if self.window is not None else set()

    def label_strings(self, v):
        if not self.labels or v not in self.labels:
            return []
        return [x.render() if isinstance(x, Path) else str(x) for x in self.labels[v]]


def _same_quiver(M, N):
    if M.quiver != N.quiver:
        raise RepError("representations live on different quivers")
    if M.field != N.field:
        raise RepError("representations use different fields")


class Morphism:
    """A family of matrices f(v): M(v) -> N(v), checked for naturality."""

    def __init__(self, source, target, maps, check=True):
        _same_quiver(source, target)
        self.source = source
        self.target = target
        F = source.field
        self.maps = {}
        for v in source.quiver.vertices:
            m = maps.get(v)
            shape = (target.dims[v], source.dims[v])
            if m is None:
                m = Matrix.zero(F, *shape)
            elif m.shape != shape:
                raise RepError(f"map at {v} has shape {m.shape}, expected {shape}")
            self.maps[v] = m
        if check:
            for a in source.quiver.arrows:
                lhs = self.maps[a.target] @ source.mats[a.id]
                rhs = target.mats[a.id] @ self.maps[a.source]
                if lhs != rhs:
                    raise RepError(f"not a morphism: naturality fails at arrow {a.id}")

    def __repr__(self):
        return f"Morphism({self.source!r} -> {self.target!r})"

    def __eq__(self, other):
        return isinstance(other, Morphism) and self.maps == other.maps

    __hash__ = None

    def __matmul__(self, other):
        """self after other."""
        if other.target.dims != self.source.dims:
            raise RepError("morphisms do not compose")
        return Morphism(other.source, self.target,
                        {v: self.maps[v] @ other.maps[v] for v in self.maps}, check=False)

    def __add__(self, other):
        return Morphism(self.source, self.target,
                        {v: self.maps[v] + other.maps[v] for v in self.maps}, check=False)

    def __sub__(self, other):
        return Morphism(self.source, self.target,
                        {v: self.maps[v] - other.maps[v] for v in self.maps}, check=False)

    def scale(self, c):
        return Morphism(self.source, self.target,
                        {v: m.scale(c) for v, m in self.maps.items()}, check=False)

    @classmethod
    def identity(cls, M):
        return cls(M, M, {v: Matrix.identity(M.field, M.dims[v]) for v in M.quiver.vertices},
                   check=False)

    @classmethod
    def zero(cls, M, N):
        return cls(M, N, {}, check=False)

    def is_zero(self):
        return all(m.is_zero() for m in self.maps.values())

    def is_iso(self):
        return all(m.is_invertible() for m in self.maps.values())

    def is_mono(self):
        return all(m.is_injective() for m in self.maps.values())

    def is_epi(self):
        return all(m.is_surjective() for m in self.maps.values())

    def inverse(self):
        return Morphism(self.target, self.source,
                        {v: m.inverse() for v, m in self.maps.items()}, check=False)

    def vector(self):
        """Flattened entries (vertex order, row major); coordinates in Hom as a space."""
        out = []
        for v in self.source.quiver.vertices:
            for r in self.maps[v].rows:
                out.extend(r)
        return out


# ---------------------------------------------------------------- distinguished reps

def rep_zero(q, F=Q):
    win = None
    if isinstance(q, WindowQuiver):
        win, q = q, q.quiver
    return Rep(q, F, {}, {}, window=win)


def rep_S(q, a, F=Q):
    win = None
    if isinstance(q, WindowQuiver):
        win, q = q, q.quiver
    q._check(a)
    return Rep(q, F, {a: 1}, {}, labels={a: [Path.trivial(a)]}, window=win)


def _arrow_key(win, aid):
    if win is None:
        return ("", "", aid)
    kind, rid, tid, _ = win.arrow_info[aid]
    return (kind, rid or "", tid)


def _path_key(win, p):
    return tuple(_arrow_key(win, x) for x in p.arrows)


def _paths_from(q, a, win=None):
    """All paths starting at a, grouped by target (dynamic programming over a topological order)."""
    order = topological_order(q)
    reach = reachable_from(q, [a])
    paths = {v: [] for v in q.vertices}
    paths[a] = [Path.trivial(a)]
    for v in order:
        if v not in reach or not paths[v]:
            continue
        for arr in q.out_arrows(v):
            paths[arr.target].extend(Path(a, arr.target, p.arrows + (arr.id,)) for p in paths[v])
    for v in paths:
        paths[v].sort(key=lambda p: (_path_key(win, p), p.arrows))
    return paths


def _rep_from_paths(q, F, paths, win):
    """Representation with the given path bases and 0/1 left-multiplication matrices."""
    dims = {v: len(ps) for v, ps in paths.items()}
    index = {v: {p.arrows: i for i, p in enumerate(ps)} for v, ps in paths.items()}
    mats = {}
    one = F.one
    for arr in q.arrows:
        m = Matrix.zero(F, dims[arr.target], dims[arr.source])
        tgt = index[arr.target]
        for j, p in enumerate(paths[arr.source]):
            m.rows[tgt[p.arrows + (arr.id,)]][j] = one
        mats[arr.id] = m
    return Rep(q, F, dims, mats, labels={v: list(ps) for v, ps in paths.items()}, window=win)


def rep_P(q, a, F=Q, strict=True):
    """P_a with basis the paths starting at a.

    On a window, ``strict`` refuses vertices whose successors leave the window.
    """
    win = None
    if isinstance(q, WindowQuiver):
        win, q = q, q.quiver
    q._check(a)
    if win is not None and strict:
        for v in reachable_from(q, [a]):
            x = win.from_name[v]
            if x.ray is not None and x.depth == win.K and not win.rq.ray(x.ray).outward:
                raise TruncationError(f"successors of {a} leave the window at {v}")
    return _rep_from_paths(q, F, _paths_from(q, a, win), win)


def dual(M):
    """D M on the opposite quiver: same dimensions, transposed matrices."""
    win = None
    if M.window is not None:
        win = materialize_window(rq_opposite(M.window.rq), M.window.K)
        q = win.quiver
    else:
        q = quiver_opposite(M.quiver)
    labels = None
    if M.labels:
        labels = {v: [("D", x) for x in xs] for v, xs in M.labels.items()}
    return Rep(q, M.field, dict(M.dims), {aid: m.T() for aid, m in M.mats.items()},
               labels=labels, window=win)


def dual_morphism(f):
    """D f: D N -> D M."""
    DM, DN = dual(f.source), dual(f.target)
    return Morphism(DN, DM, {v: m.T() for v, m in f.maps.items()}, check=False)


def rep_I(q, a, F=Q):
    """I_a = D P_a over the opposite quiver; fibre at b dual to the paths b -> a."""
    if isinstance(q, WindowQuiver):
        opw = materialize_window(rq_opposite(q.rq), q.K)
        return dual(rep_P(opw, a, F, strict=False))
    return dual(rep_P(quiver_opposite(q), a, F))


def rep_I_window(rq, a, K, F=Q):
    """Restriction of I_a to the window of depth K (with an inferred period)."""
    name = a.name() if isinstance(a, ExtVertex) else a
    return EventuallyPeriodicRep.infer(rep_I(materialize_window(rq, K), name, F))


def restrict(M, win):
    """Restriction of a window representation to a smaller window (a full subquiver)."""
    q = win.quiver
    labels = None
    if M.labels:
        labels = {v: M.labels[v] for v in q.vertices if v in M.labels}
    return Rep(q, M.field, {v: M.dims[v] for v in q.vertices},
               {a.id: M.mats[a.id] for a in q.arrows}, labels=labels, window=win)


def restrict_morphism(f, M, N):
    return Morphism(M, N, {v: f.maps[v] for v in M.quiver.vertices}, check=False)


# ---------------------------------------------------------------- eventually periodic reps

def _depth_matches(M, d):
    """Dims and matrices at depths in (K-d, K] equal those d levels shallower."""
    win = M.window
    K = win.K
    if d < 1 or K < 2 * d:
        return False
    for x, name in win.to_name.items():
        if x.ray is not None and x.depth > K - d:
            if M.dims[name] != M.dims[win.to_name[x.shifted(-d)]]:
                return False
    for aid, (kind, rid, tid, k) in win.arrow_info.items():
        if kind in ("intra", "step") and k > K - d:
            if M.mats[aid] != M.mats[f"{rid}.{k - d}.{tid}"]:
                return False
    return True


class EventuallyPeriodicRep:
    """A window representation together with a verified depth period d.

    ``period`` is None when no period was declared or found; such a rep still
    carries exact window data but cannot be extended.
    """

    def __init__(self, rep, period=None, rq=None):
        if rep.window is None:
            raise RepError("eventually periodic representations live on windows")
        self.rep = rep
        self.rq = rq or rep.window.rq
        self.K = rep.window.K
        if period is not None and not _depth_matches(rep, period):
            raise RepError(f"depth period {period} is not certified on window {self.K}")
        self.period = period

    def __repr__(self):
        return f"EventuallyPeriodicRep(K={self.K}, period={self.period})"

    @classmethod
    def infer(cls, rep):
        """Smallest certified period, or None."""
        for d in range(1, rep.window.K // 2 + 1):
            if _depth_matches(rep, d):
                return cls(rep, d)
        return cls(rep, None)

    def extend(self, K2):
        """The periodic continuation on the window of depth K2 >= K."""
        if K2 < self.K:
            raise ValueError("extend needs a deeper window")
        if K2 == self.K:
            return self
        if self.period is None:
            raise NeedsLargerWindow("no certified period; cannot extend the window")
        d, K, M = self.period, self.K, self.rep
        win = materialize_window(self.rq, K2)

        def back(k):
            if k <= K:
                return k
            return k - d * (-(-(k - K) // d))

        dims = {}
        for x, name in win.to_name.items():
            if x.ray is None or x.depth <= K:
                dims[name] = M.dims[name]
            else:
                dims[name] = M.dims[ExtVertex(x.ray, back(x.depth), x.v).name()]
        mats = {}
        for aid, (kind, rid, tid, k) in win.arrow_info.items():
            if kind in ("intra", "step") and k > K:
                mats[aid] = M.mats[f"{rid}.{back(k)}.{tid}"]
            else:
                mats[aid] = M.mats[aid]
        return EventuallyPeriodicRep(Rep(win, M.field, dims, mats), d, self.rq)

    def infinite_support_rays(self):
        """Rays whose fibres are nonzero somewhere in every period (so infinitely often)."""
        if self.period is None:
            return []
        out = []
        win = self.rep.window
        for r in self.rq.rays:
            if any(self.rep.dims[win.to_name[ExtVertex(r.id, k, b)]]
                   for k in range(self.K - self.period + 1, self.K + 1) for b in r.template.block):
                out.append(r.id)
        return out


def rep_P_window(rq, a, K, F=Q):
    """Restriction of P_a to the window of depth K (with an inferred period)."""
    win = materialize_window(rq, K)
    name = a.name() if isinstance(a, ExtVertex) else a
    return EventuallyPeriodicRep.infer(rep_P(win, name, F, strict=False))


def _tail_anchor(rq, cls, K):
    """Index and vertex far enough along the class tail that every window count is stable."""
    tail = cls.tail_path()
    rid = cls.key[0]
    cm = count_matrices(rq, rid)
    s = sum(1 for t in tail.word if _letter_kind(rq, rid, t) == "step")
    need = K + (len(cm.block) + 2) * s
    x = tail.entry
    i = 0
    L = len(tail.word)
    while x.depth < need or i % L:
        x, _ = _read(rq, x, tail.word[i % L])
        i += 1
    return i, x


def _letter_kind(rq, rid, tid):
    t = rq.ray(rid).template
    return "step" if any(a.id == tid for a in t.steps) else "intra"


def rep_X_window(rq, p, K, F=Q):
    """X_[p] restricted to the window of depth K, with class members as basis labels.

    The basis of X(b) is indexed by Q(x, b) for a vertex x far along the tail;
    each q corresponds to the member q followed by the tail beyond x.
    """
    cls = class_canonicalize(rq, p)
    if cls.direction != RIGHT:
        raise ValueError("X needs a right infinite class; use rep_Y_window for left infinite ones")
    if not is_uif_class(rq, cls):
        raise NotUIF(f"class {cls.key_literal()} has a member whose convex hull is not "
                     "uniformly interval finite")
    i, x = _tail_anchor(rq, cls, K)
    big = materialize_window(rq, x.depth)
    PX = rep_P(big, x.name(), F, strict=False)
    win = materialize_window(rq, K)
    X = restrict(PX, win)
    tail = cls.tail_path()
    L = len(tail.word)
    word = tail.word[i % L:] + tail.word[:i % L]
    labels = {}
    for v in win.quiver.vertices:
        want = class_size(rq, cls, win.from_name[v])
        if not want.finite or want.value != X.dims[v]:
            raise NeedsLargerWindow(f"tail anchor at {x.name()} does not stabilise the fibre at {v}")
        labels[v] = [_canonical_right(rq, RayPath(RIGHT, tuple(reversed(q.arrows)), x, word))
                     for q in PX.labels[v]]
    X.labels = labels
    return EventuallyPeriodicRep.infer(X)


def rep_Y_window(rq, q, K, F=Q):
    """Y_[q] = D X_[q^op] for a left infinite class q, restricted to the window K."""
    op = rq_opposite(rq)
    cls = class_canonicalize(rq, q)
    rp = RayPath(RIGHT, cls.rep.prefix, cls.rep.entry, cls.rep.word)
    X = rep_X_window(op, rp, K, F)
    Y = dual(X.rep)
    return EventuallyPeriodicRep.infer(Y)


# ---------------------------------------------------------------- subrepresentations

class Sub:
    """A subrepresentation of M given by a subspace basis (list of vectors) per vertex."""

    def __init__(self, M, spaces, check=True):
        self.parent = M
        F = M.field
        self.spaces = {v: span(F, spaces.get(v, []), M.dims[v]) for v in M.quiver.vertices}
        if check:
            for a in M.quiver.arrows:
                for x in self.spaces[a.source]:
                    y = M.mats[a.id].apply(x)
                    if not _in_span(F, self.spaces[a.target], y, M.dims[a.target]):
                        raise RepError(f"not a subrepresentation: arrow {a.id} leaves the subspace")
        self._rep = None

    def dims(self):
        return {v: len(b) for v, b in self.spaces.items()}

    def total_dim(self):
        return sum(len(b) for b in self.spaces.values())

    @property
    def rep(self):
        if self._rep is None:
            self._build()
        return self._rep

    @property
    def inclusion(self):
        if self._rep is None:
            self._build()
        return self._incl

    def _build(self):
        M, F = self.parent, self.parent.field
        dims = self.dims()
        mats = {}
        for a in M.quiver.arrows:
            S, T = self.spaces[a.source], self.spaces[a.target]
            cols = []
            for x in S:
                c = coordinates(F, T, M.mats[a.id].apply(x), M.dims[a.target])
                cols.append(c)
            mats[a.id] = Matrix.from_columns(F, len(T), cols) if cols else Matrix.zero(F, len(T), 0)
        self._rep = Rep(M.quiver, F, dims, mats, window=M.window)
        self._incl = Morphism(self._rep, M, {
            v: (Matrix.from_columns(F, M.dims[v], self.spaces[v]) if self.spaces[v]
                else Matrix.zero(F, M.dims[v], 0)) for v in M.quiver.vertices}, check=False)

    def __eq__(self, other):
        return isinstance(other, Sub) and self.spaces == other.spaces

    __hash__ = None


def _in_span(F, basis, vec, n):
    if all(x == 0 for x in vec):
        return True
    return len(span(F, list(basis) + [vec], n)) == len(basis)


def radical(M):
    """Sum of the images of all arrows ending at each vertex."""
    spaces = {v: [] for v in M.quiver.vertices}
    for a in M.quiver.arrows:
        spaces[a.target].extend(M.mats[a.id].columns())
    return Sub(M, spaces, check=False)


def socle(M):
    """Intersection of the kernels of all arrows leaving each vertex."""
    F = M.field
    spaces = {}
    for v in M.quiver.vertices:
        rows = []
        for a in M.quiver.out_arrows(v):
            rows.extend(M.mats[a.id].rows)
        spaces[v] = nullspace(F, rows, M.dims[v]) if rows else _unit_basis(F, M.dims[v])
    return Sub(M, spaces, check=False)


def _unit_basis(F, n):
    return [[F.one if i == j else F.zero for i in range(n)] for j in range(n)]


def quotient(M, sub):
    """M / sub with the projection morphism; quotient bases are echelon complements."""
    F = M.field
    comps = {v: complement(F, sub.spaces[v], M.dims[v]) for v in M.quiver.vertices}
    proj = {}
    for v in M.quiver.vertices:
        n = M.dims[v]
        S, C = sub.spaces[v], comps[v]
        if n == 0:
            proj[v] = Matrix.zero(F, 0, 0)
            continue
        B = Matrix.from_columns(F, n, list(S) + list(C))
        Binv = B.inverse()
        proj[v] = Binv.submatrix(list(range(len(S), n)), list(range(n)))
    dims = {v: len(comps[v]) for v in M.quiver.vertices}
    mats = {}
    for a in M.quiver.arrows:
        C = comps[a.source]
        lift = (Matrix.from_columns(F, M.dims[a.source], C) if C
                else Matrix.zero(F, M.dims[a.source], 0))
        mats[a.id] = proj[a.target] @ M.mats[a.id] @ lift
    Qt = Rep(M.quiver, F, dims, mats, window=M.window)
    return Qt, Morphism(M, Qt, proj, check=False)


def top(M):
    return quotient(M, radical(M))


def sub_generated(M, gens):
    """Smallest subrepresentation containing the generators [(vertex, vector), ...]."""
    F = M.field
    spaces = {v: [] for v in M.quiver.vertices}
    for v, x in gens:
        if len(x) != M.dims[v]:
            raise RepError(f"generator at {v} has length {len(x)}, expected {M.dims[v]}")
        spaces[v].append([F(c) for c in x])
    order = topological_order(M.quiver)
    for v in order:
        spaces[v] = span(F, spaces[v], M.dims[v])
        for a in M.quiver.out_arrows(v):
            spaces[a.target].extend(M.mats[a.id].apply(x) for x in spaces[v])
    return Sub(M, spaces, check=False)


def intersect_subreps(s1, s2):
    M, F = s1.parent, s1.parent.field
    return Sub(M, {v: intersect(F, s1.spaces[v], s2.spaces[v], M.dims[v])
                   for v in M.quiver.vertices}, check=False)


def sum_subreps(s1, s2):
    M = s1.parent
    return Sub(M, {v: s1.spaces[v] + s2.spaces[v] for v in M.quiver.vertices}, check=False)


def image_sub(f):
    return Sub(f.target, {v: m.columns() for v, m in f.maps.items()}, check=False)


def kernel_sub(f):
    F = f.source.field
    return Sub(f.source, {v: nullspace(F, m.rows, m.ncols) if m.nrows else _unit_basis(F, m.ncols)
                          for v, m in f.maps.items()}, check=False)


def whole(M):
    return Sub(M, {v: _unit_basis(M.field, M.dims[v]) for v in M.quiver.vertices}, check=False)


# ---------------------------------------------------------------- sums

def direct_sum(reps):
    """Blockwise direct sum of representations on one quiver."""
    reps = list(reps)
    if not reps:
        raise RepError("direct sum of an empty list needs a quiver")
    M0 = reps[0]
    for M in reps[1:]:
        _same_quiver(M0, M)
    F = M0.field
    dims = {v: sum(M.dims[v] for M in reps) for v in M0.quiver.vertices}
    mats = {a.id: block_diag(F, [M.mats[a.id] for M in reps]) for a in M0.quiver.arrows}
    return Rep(M0.quiver, F, dims, mats, window=M0.window)


def sum_maps(reps, S):
    """Canonical inclusions into and projections out of the direct sum S."""
    incs, projs = [], []
    offs = {v: 0 for v in S.quiver.vertices}
    F = S.field
    for M in reps:
        inc, pr = {}, {}
        for v in S.quiver.vertices:
            n, o, N = M.dims[v], offs[v], S.dims[v]
            i = Matrix.zero(F, N, n)
            for j in range(n):
                i.rows[o + j][j] = F.one
            inc[v] = i
            pr[v] = i.T()
            offs[v] += n
        incs.append(Morphism(M, S, inc, check=False))
        projs.append(Morphism(S, M, pr, check=False))
    return incs, projs


def can_direct_sum(reps):
    """A finite family always has a pointwise finite direct sum."""
    reps = list(reps)
    for M in reps[1:]:
        _same_quiver(reps[0], M)
    return True


def can_direct_sum_projectives(rq, rid, b, start=0, stride=1):
    """Whether {P_(rid, k, b) : k = start + j*stride} has a direct sum in rep(Q).

    Returns (answer, witness vertex hit by infinitely many members or None).
    Each vertex must lie in the support of finitely many members; by
    periodicity only finitely many target shapes need checking.
    """
    from quiverrep.ray_quiver import _exit_vector
    r = rq.ray(rid)
    cm = count_matrices(rq, rid)
    n = len(cm.block)
    bi = cm.index(b)
    if not r.outward:
        return True, None   # members reach only deeper vertices; each vertex sees finitely many
    targets = [(ExtVertex.core(c), _exit_vector(rq, rid, ExtVertex.core(c))) for c in topological_order(rq.core)]
    starts = [(ExtVertex(rid, 0, y), [cm.A[x][cm.index(y)] for x in range(n)]) for y in cm.block]
    for tgt, g in targets + starts:
        v0 = [int(x > 0) for x in (_mv(cm.A, g) if tgt.is_core else g)]
        # boolean orbit of c_{k+1} = AS c_k, tracked together with k mod stride
        seen = {}
        k = 0
        vec = v0
        hits = []
        while True:
            state = (tuple(vec), k % stride)
            if state in seen:
                loop_start = seen[state]
                break
            seen[state] = k
            hits.append(vec[bi] > 0 and k >= start and (k - start) % stride == 0)
            vec = [int(any(cm.AS[x][y] and vec[y] for y in range(n))) for x in range(n)]
            k += 1
        if any(hits[loop_start:]):
            return False, tgt
    return True, None


def _mv(A, v):
    return [sum(a * b for a, b in zip(row, v)) for row in A]


# ---------------------------------------------------------------- Hom spaces

def hom_space(M, N):
    """Echelon basis of Hom(M, N) as a list of morphisms."""
    _same_quiver(M, N)
    F = M.field
    verts = M.quiver.vertices
    offs, n = {}, 0
    for v in verts:
        offs[v] = n
        n += N.dims[v] * M.dims[v]
    rows = []
    z = F.zero
    neg = (lambda x: -x) if F.p is None else (lambda x: (-x) % F.p)
    for a in M.quiver.arrows:
        s, t = a.source, a.target
        ms, mt, ns, nt = M.dims[s], M.dims[t], N.dims[s], N.dims[t]
        Ma, Na = M.mats[a.id], N.mats[a.id]
        # f(t) M(a) - N(a) f(s) = 0, entry (i, j) with i < nt, j < ms
        for i in range(nt):
            for j in range(ms):
                row = [z] * n
                nz = False
                for k in range(mt):
                    c = Ma.rows[k][j]
                    if c:
                        row[offs[t] + i * mt + k] = c
                        nz = True
                for k in range(ns):
                    c = Na.rows[i][k]
                    if c:
                        idx = offs[s] + k * ms + j
                        row[idx] = row[idx] + neg(c) if F.p is None else (row[idx] + neg(c)) % F.p
                        nz = True
                if nz:
                    rows.append(row)
    basis = nullspace(F, rows, n) if rows else _unit_basis(F, n)
    return [_morphism_from_vector(M, N, vec, offs) for vec in basis]


def _morphism_from_vector(M, N, vec, offs=None):
    F = M.field
    maps = {}
    o = 0
    for v in M.quiver.vertices:
        r, c = N.dims[v], M.dims[v]
        maps[v] = Matrix._raw(F, r, c, [list(vec[o + i * c:o + (i + 1) * c]) for i in range(r)])
        o += r * c
    return Morphism(M, N, maps, check=False)


def combine(F, basis, coeffs):
    """Linear combination of morphisms with the given coefficients."""
    out = Morphism.zero(basis[0].source, basis[0].target)
    for c, f in zip(coeffs, basis):
        if c:
            out = out + f.scale(c)
    return out


@dataclass
class HomIso:
    """Mutually inverse linear maps between a Hom space and a fibre (or its dual)."""

    forward: object
    backward: object
    hom_basis: list
    P: Rep


def eta_iso(q, a, M):
    """Hom(P_a, M) -> M(a), f -> f(a)(e_a), with inverse x -> (p -> M(p) x)."""
    P = rep_P(q, a, M.field)
    _same_quiver(P, M)
    e = P.labels[a].index(Path.trivial(a))

    def forward(f):
        return f.maps[a].column(e)

    def backward(x):
        maps = {}
        for v in M.quiver.vertices:
            cols = [M.path_map(p).apply(x) for p in P.labels[v]]
            maps[v] = (Matrix.from_columns(M.field, M.dims[v], cols) if cols
                       else Matrix.zero(M.field, M.dims[v], 0))
        return Morphism(P, M, maps, check=False)

    return HomIso(forward, backward, hom_space(P, M), P)


def zeta_iso(q, a, M):
    """Hom(M, I_a) -> D M(a), f -> (x -> f(a)(x)(e_a)), with inverse phi -> (x -> (p -> phi(M(p) x)))."""
    I = rep_I(q, a, M.field)
    _same_quiver(M, I)
    paths_in = I.labels[a]
    e = [lab[1] for lab in paths_in].index(Path.trivial(a))

    def forward(f):
        return list(f.maps[a].rows[e])

    def backward(phi):
        F = M.field
        maps = {}
        row = Matrix._raw(F, 1, len(phi), [list(phi)])
        for v in M.quiver.vertices:
            # fibre of I_a at v: dual basis of the paths v -> a (paths of the opposite quiver reversed)
            rows = []
            for _, p in I.labels[v]:
                fwd = Path(v, a, tuple(reversed(p.arrows)))
                rows.append((row @ M.path_map(fwd)).rows[0])
            maps[v] = Matrix._raw(F, len(rows), M.dims[v], rows) if rows else Matrix.zero(F, 0, M.dims[v])
        return Morphism(M, I, maps, check=False)

    return HomIso(forward, backward, hom_space(M, I), I)


@dataclass
class StableHom:
    dim: int
    basis: list        # morphisms on the base window
    K: int             # window depth at which the projection stabilised
    profile: list      # dimensions of the projected images, window by window


def hom_space_stable(M, N, max_window=64):
    """Hom between eventually periodic reps, via restriction of Hom on growing windows.

    The images of Hom(M|K_j, N|K_j) in the maps on the base window form a
    descending chain; two consecutive equal images certify the answer.
    """
    if M.rq is not N.rq and M.rq.name != N.rq.name:
        raise RepError("representations live on different presentations")
    if M.period is None or N.period is None:
        raise NeedsLargerWindow("both representations need a certified period")
    d = lcm(M.period, N.period)
    K0 = max(M.K, N.K)
    base_M, base_N = M.extend(K0), N.extend(K0)
    F = M.rep.field
    profile = []
    prev = None
    K = K0
    while K <= max_window:
        Mk, Nk = M.extend(K).rep, N.extend(K).rep
        basis = hom_space(Mk, Nk)
        vecs = [restrict_morphism(f, base_M.rep, base_N.rep).vector() for f in basis]
        n = sum(base_M.rep.dims[v] * base_N.rep.dims[v] for v in base_M.rep.quiver.vertices)
        img = span(F, vecs, n)
        profile.append(len(img))
        if prev is not None and img == prev:
            return StableHom(len(img), [_morphism_from_vector(base_M.rep, base_N.rep, v) for v in img],
                             K, profile)
        prev = img
        K += d
    raise NeedsLargerWindow(f"Hom did not stabilise up to window {max_window}")


# ---------------------------------------------------------------- predicates

def arrow_injectivity(M):
    """(True, None) when every structure map is injective, else (False, arrow id)."""
    for a in M.quiver.arrows:
        if not M.mats[a.id].is_injective():
            return False, a.id
    return True, None


def covers_top(sub, M):
    """N + rad M = M."""
    R = radical(M)
    S = sum_subreps(sub, R)
    return all(len(S.spaces[v]) == M.dims[v] for v in M.quiver.vertices)


def meets_socle(sub, M):
    """N meets soc M nontrivially (or N = 0)."""
    if sub.total_dim() == 0:
        return True
    return intersect_subreps(sub, socle(M)).total_dim() > 0


def support(M):
    return {v for v, n in M.dims.items() if n}


def boundary_flags(M):
    """Window vertices at maximal depth: their fibres may see arrows beyond the window."""
    return sorted(M.boundary())


def interior(M):
    b = M.boundary()
    return [v for v in M.quiver.vertices if v not in b]


__all__ = [
    "Rep", "Morphism", "Sub", "EventuallyPeriodicRep", "TruncationError", "RepError",
    "rep_S", "rep_P", "rep_I", "rep_I_window", "rep_P_window", "rep_X_window", "rep_Y_window",
    "rep_zero", "dual", "dual_morphism", "restrict", "radical", "socle", "top", "quotient",
    "sub_generated", "intersect_subreps", "sum_subreps", "direct_sum", "sum_maps",
    "can_direct_sum", "can_direct_sum_projectives", "hom_space", "hom_space_stable",
    "eta_iso", "zeta_iso", "arrow_injectivity", "covers_top", "meets_socle", "support",
    "boundary_flags", "interior", "image_sub", "kernel_sub", "whole", "combine",
]
