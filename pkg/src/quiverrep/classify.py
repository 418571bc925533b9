"""Krull-Schmidt decomposition, isomorphism tests and the projective/injective classifiers.

Decomposition is randomised but seeded: endomorphisms are drawn from an
echelon basis of End(M) and split off with Fitting's lemma.  Leaves carry an
End-local certificate (every tested endomorphism nilpotent or invertible),
which is a certificate, not a proof, unless End(M) is one dimensional.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from sympy import Poly, QQ, GF, symbols
from sympy.polys.matrices import DomainMatrix

from quiverrep import limits
from quiverrep.linalg import Matrix, complement, make_rng, span
from quiverrep.linrep import (
    _tail_anchor,
    EventuallyPeriodicRep, Morphism, Rep, RepError, Sub, _unit_basis, arrow_injectivity,
    direct_sum, dual, hom_space, image_sub, intersect_subreps, kernel_sub, radical, rep_P,
    rep_X_window, restrict, sub_generated, sum_subreps,
)
from quiverrep.quiver_core import topological_order
from quiverrep.ray_quiver import (
    RIGHT, ExtVertex, NotUIF, RayPath, _closed_words, _letter,
    all_vertices_have_finite_predecessors, class_canonicalize, is_uif_class, materialize_window,
    vertex_sequence, _read,
)


class DecompositionFailure(Exception):
    """The randomised splitter ran out of retries without a certified answer."""


# ---------------------------------------------------------------- Fitting splits

@dataclass
class Piece:
    rep: Rep
    inclusion: Morphism     # piece -> M
    projection: Morphism    # M -> piece


def _split_pieces(M, subs):
    """Pieces for an internal direct sum decomposition M = sub_1 + ... + sub_r."""
    F = M.field
    pieces = []
    projs = {}
    for v in M.quiver.vertices:
        n = M.dims[v]
        cols = [x for s in subs for x in s.spaces[v]]
        if len(cols) != n:
            raise RepError("subrepresentations do not form a direct sum decomposition")
        projs[v] = Matrix.from_columns(F, n, cols).inverse() if n else Matrix.zero(F, 0, 0)
    off = {v: 0 for v in M.quiver.vertices}
    for s in subs:
        rep, inc = s.rep, s.inclusion
        pr = {}
        for v in M.quiver.vertices:
            k = len(s.spaces[v])
            pr[v] = projs[v].submatrix(list(range(off[v], off[v] + k)), list(range(M.dims[v])))
            off[v] += k
        pieces.append(Piece(rep, inc, Morphism(M, rep, pr, check=False)))
    return pieces


def _power(phi, n):
    return Morphism(phi.source, phi.target, {v: m.power(n) for v, m in phi.maps.items()}, check=False)


def fitting_split(M, phi):
    """M = ker(phi^n) + im(phi^n) with n = total dim, or None when phi^n is zero or invertible."""
    if phi.source.dims != M.dims or phi.target.dims != M.dims:
        raise RepError("not an endomorphism of M")
    Morphism(M, M, phi.maps)          # naturality check
    n = M.total_dim()
    if n == 0:
        return None
    pn = _power(phi, n)
    K, I = kernel_sub(pn), image_sub(pn)
    if K.total_dim() == 0 or I.total_dim() == 0:
        return None
    return _split_pieces(M, [K, I])


def _nil_or_inv(phi):
    n = phi.source.total_dim()
    pn = _power(phi, n)
    return pn.is_zero() or phi.is_iso()


# ---------------------------------------------------------------- characteristic polynomials

def _charpoly(F, m):
    if m.nrows == 0:
        return [F.one]
    dom = QQ if F.p is None else GF(F.p)
    rows = [[dom(int(x.numerator)) / dom(int(x.denominator)) if F.p is None else dom(int(x))
             for x in r] for r in m.rows]
    return list(DomainMatrix(rows, m.shape, dom).charpoly())


_X = symbols("x")


def _factors(F, coeffs):
    if F.p is None:
        poly = Poly([QQ(c.numerator, c.denominator) if hasattr(c, "numerator") else c for c in coeffs],
                    _X, domain=QQ)
    else:
        poly = Poly([int(c) % F.p for c in coeffs], _X, modulus=F.p)
    return [f for f, _ in poly.factor_list()[1]]


def _poly_coeffs(F, f):
    out = []
    for c in f.all_coeffs():
        if F.p is None:
            c = QQ.convert(c) if not isinstance(c, int) else c
            out.append(Fraction(int(c.numerator), int(c.denominator)) if not isinstance(c, int) else Fraction(c))
        else:
            out.append(int(c) % F.p)
    return out


def _eval_poly(coeffs, phi):
    """f(phi) for f given by coefficients, leading first (Horner)."""
    M = phi.source
    out = Morphism.zero(M, M)
    ident = Morphism.identity(M)
    for c in coeffs:
        out = (phi @ out) + ident.scale(c)
    return out


def _poly_split(M, phi):
    """Split using an irreducible factor of the characteristic polynomial of phi."""
    F = M.field
    fac = set()
    for v in M.quiver.vertices:
        if M.dims[v]:
            for f in _factors(F, _charpoly(F, phi.maps[v])):
                fac.add(f)
    if len(fac) < 2:
        return None
    f = sorted(fac, key=str)[0]
    return fitting_split(M, _eval_poly(_poly_coeffs(F, f), phi))


# ---------------------------------------------------------------- decomposition

def _random_combo(F, basis, rng):
    out = Morphism.zero(basis[0].source, basis[0].target)
    for b in basis:
        c = F.random(rng)
        if c:
            out = out + b.scale(c)
    return out


def _annihilator_element(M, E, rng):
    """A random endomorphism killing a random vector of a random nonzero fibre."""
    F = M.field
    verts = [v for v in M.quiver.vertices if M.dims[v]]
    v = verts[rng.randrange(len(verts))]
    x = [F.random(rng) for _ in range(M.dims[v])]
    if all(c == 0 for c in x):
        x[0] = F.one
    # columns: images phi_i(v) x; solve for combinations that vanish
    cols = [b.maps[v].apply(x) for b in E]
    rows = [[c[i] for c in cols] for i in range(M.dims[v])]
    from quiverrep.linalg import nullspace
    ker = nullspace(F, rows, len(E))
    if not ker:
        return None
    out = Morphism.zero(M, M)
    for k in ker:
        c = F.random(rng)
        if c:
            comb = Morphism.zero(M, M)
            for a, b in zip(k, E):
                if a:
                    comb = comb + b.scale(a)
            out = out + comb.scale(c)
    return out


@dataclass
class LocalCertificate:
    end_dim: int
    tested: int
    certain: bool      # End(M) is one dimensional


def _try_split(M, rng, retries):
    """(pieces or None, certificate for M when no split was found)."""
    E = hom_space(M, M)
    if len(E) <= 1:
        return None, LocalCertificate(len(E), len(E), True)
    tested = 0
    for b in E:
        tested += 1
        sp = fitting_split(M, b)
        if sp:
            return sp, None
    for t in range(retries):
        if t % 2 == 0:
            phi = _random_combo(M.field, E, rng)
            sp = fitting_split(M, phi) or _poly_split(M, phi)
        else:
            phi = _annihilator_element(M, E, rng)
            sp = fitting_split(M, phi) if phi is not None else None
        tested += 1
        if sp:
            return sp, None
    return None, LocalCertificate(len(E), tested, False)


@dataclass
class DecompositionResult:
    pieces: list
    certificates: list
    seed: int

    def dim_vectors(self):
        return sorted(p.rep.dim_vector() for p in self.pieces)


def decompose(M, seed=0, max_retries=24):
    """Split M into indecomposables with inclusions and projections."""
    rng = make_rng(seed)
    if M.total_dim() == 0:
        return DecompositionResult([], [], seed)
    todo = [Piece(M, Morphism.identity(M), Morphism.identity(M))]
    leaves, certs = [], []
    while todo:
        pc = todo.pop()
        sp, cert = _try_split(pc.rep, rng, max_retries)
        if sp is None:
            if cert is None:
                raise DecompositionFailure("no split and no certificate")
            leaves.append(pc)
            certs.append(cert)
            continue
        for sub in sp:
            todo.append(Piece(sub.rep, pc.inclusion @ sub.inclusion, sub.projection @ pc.projection))
    order = sorted(range(len(leaves)), key=lambda i: leaves[i].rep.dim_vector())
    leaves = [leaves[i] for i in order]
    certs = [certs[i] for i in order]
    _check_reassembly(M, leaves)
    return DecompositionResult(leaves, certs, seed)


def _check_reassembly(M, pieces):
    total = Morphism.zero(M, M)
    for p in pieces:
        total = total + p.inclusion @ p.projection
    if total != Morphism.identity(M):
        raise DecompositionFailure("pieces do not reassemble to the identity")


def is_indecomposable(M, seed=0, max_retries=24):
    res = decompose(M, seed, max_retries)
    return len(res.pieces) == 1, res


# ---------------------------------------------------------------- isomorphism

@dataclass
class IsoResult:
    isomorphic: bool
    iso: Morphism | None = None
    reason: str = ""

    def __bool__(self):
        return self.isomorphic


def iso_test(M, N, seed=0, retries=16):
    if M.quiver != N.quiver or M.field != N.field:
        raise RepError("representations live on different quivers or fields")
    if M.dims != N.dims:
        return IsoResult(False, reason="dimension vectors differ")
    if M.total_dim() == 0:
        return IsoResult(True, Morphism.zero(M, N))
    H = hom_space(M, N)
    if not H:
        return IsoResult(False, reason="Hom(M, N) = 0")
    rng = make_rng(seed)
    for b in H:
        if b.is_iso():
            return IsoResult(True, b)
    for _ in range(retries):
        f = _random_combo(M.field, H, rng)
        if f.is_iso():
            return IsoResult(True, f)
    dm, dn = decompose(M, seed), decompose(N, seed)
    if dm.dim_vectors() != dn.dim_vectors():
        return IsoResult(False, reason="indecomposable summands differ")
    if len(dm.pieces) == 1:
        return IsoResult(False, reason="no invertible morphism between indecomposables")
    used = set()
    total = Morphism.zero(M, N)
    for pm in dm.pieces:
        for j, pn in enumerate(dn.pieces):
            if j in used or pm.rep.dims != pn.rep.dims:
                continue
            r = iso_test(pm.rep, pn.rep, seed, retries)
            if r:
                used.add(j)
                total = total + pn.inclusion @ r.iso @ pm.projection
                break
        else:
            return IsoResult(False, reason="a summand of M has no isomorphic partner in N")
    Morphism(M, N, total.maps)
    return IsoResult(True, total)


# ---------------------------------------------------------------- classification

@dataclass(frozen=True)
class SummandLabel:
    kind: str           # P, X, I or Y
    name: str           # vertex name or class literal
    multiplicity: int = 1

    def __str__(self):
        core = f"{self.kind}({self.name})"
        return core if self.multiplicity == 1 else f"{core}^{self.multiplicity}"


@dataclass
class Verdict:
    projective: bool
    kind: str = "projective"          # or "injective"
    summands: list = field(default_factory=list)
    reason: str | None = None         # ArrowNotInjective, NonUIFRay, SummandMismatch, TopObstruction
    witness: str | None = None
    window_K: int | None = None
    seed: int = 0
    notes: list = field(default_factory=list)

    def __str__(self):
        if self.projective:
            word = "Projective" if self.kind == "projective" else "Injective"
            return f"{word}([{', '.join(map(str, self.summands))}])"
        word = "NotProjective" if self.kind == "projective" else "NotInjective"
        return f"{word}({self.reason}: {self.witness})"


def _deep_levels(E):
    return list(range(E.K - E.period + 1, E.K + 1))


def _deep_classes(E, rq):
    """Right infinite classes whose tails run through the deep support of E."""
    M, win = E.rep, E.rep.window
    found = []
    if E.period is None:
        return found
    for r in rq.rays:
        if not r.outward:
            continue
        levels = _deep_levels(E)
        supp = {b for b in r.template.block
                if all(M.dims[win.to_name[ExtVertex(r.id, k, b)]] for k in levels)}
        if not supp:
            continue
        bound = 2 * len(r.template.block) * E.period
        for w in _closed_words(rq, r.id, bound):
            ok = True
            for t in w:
                kind, a = _letter(rq, r.id, t)
                if a.source not in supp or a.target not in supp:
                    ok = False
            if not ok:
                continue
            steps = sum(1 for t in w if _letter(rq, r.id, t)[0] == "step")
            start = _letter(rq, r.id, w[0])[1].target
            for d in range(steps):
                p = RayPath(RIGHT, (), ExtVertex(r.id, d, start), w)
                found.append(class_canonicalize(rq, p))
    out = []
    for c in found:
        if c not in out:
            out.append(c)
    return out


def _tail_vertices(rq, cls, levels):
    """Window names of the tail vertices of cls at the given depths."""
    tail = cls.tail_path()
    x = tail.entry
    out = []
    lo, hi = min(levels), max(levels)
    i = 0
    while x.depth <= hi:
        if x.depth >= lo:
            out.append(x.name())
        x, _ = _read(rq, x, tail.word[i % len(tail.word)])
        i += 1
    return out


def _gen_by_fibres(M, names):
    F = M.field
    gens = [(v, b) for v in names for b in _unit_basis(F, M.dims[v])]
    return sub_generated(M, gens)


def _contained(F, A, B, n):
    return len(span(F, list(B) + list(A), n)) == len(span(F, B, n))


def classify_projective(E, seed=0, kind="projective"):
    """Verdict on whether the window representation E is projective in rep(Q).

    Pipeline: arrow injectivity; right infinite classes through the deep
    support (each must be class-UIF); the sub generated by the deep tail
    fibres of each class compared with the same construction in X^m; the
    rest lifted from a top complement along P_a.
    """
    if not isinstance(E, EventuallyPeriodicRep):
        E = EventuallyPeriodicRep.infer(E)
    M = E.rep
    rq = E.rq
    F = M.field
    K = E.K
    v = Verdict(False, kind, window_K=K, seed=seed)
    ok, bad = arrow_injectivity(M)
    if not ok:
        v.reason, v.witness = "ArrowNotInjective", bad
        return v
    if E.period is None:
        v.notes.append("no certified depth period; the window is read as a finitely supported representation")
    classes = _deep_classes(E, rq)
    for c in classes:
        if not is_uif_class(rq, c):
            v.reason, v.witness = "NonUIFRay", c.key_literal()
            return v
    levels = _deep_levels(E) if classes else []
    X0 = Sub(M, {}, check=False)
    labels = []
    for c in classes:
        tails = _tail_vertices(rq, c, levels)
        m = M.dims[tails[-1]]
        sub = _gen_by_fibres(M, tails)
        X = rep_X_window(rq, c, K, F).rep
        Xm = direct_sum([X] * m)
        ref = _gen_by_fibres(Xm, tails)
        if not iso_test(sub.rep, ref.rep, seed):
            v.reason, v.witness = "SummandMismatch", f"X({c.key_literal()})^{m}"
            return v
        if intersect_subreps(X0, sub).total_dim():
            v.reason, v.witness = "SummandMismatch", f"X({c.key_literal()}) overlaps another summand"
            return v
        X0 = sum_subreps(X0, sub)
        labels.append(SummandLabel("X", c.key_literal(), m))
    # finite part: lift a complement of rad M + X0 along P_a
    R = sum_subreps(radical(M), X0)
    gens = []
    for a in M.quiver.vertices:
        for u in complement(F, R.spaces[a], M.dims[a]) if M.dims[a] else []:
            gens.append((a, u))
    h_reps, h_maps = [], []
    for a, u in gens:
        P = rep_P(M.window, a, F, strict=False)
        maps = {}
        for w in M.quiver.vertices:
            cols = [M.path_map(p).apply(u) for p in P.labels[w]]
            maps[w] = Matrix.from_columns(F, M.dims[w], cols) if cols else Matrix.zero(F, M.dims[w], 0)
        h_reps.append(P)
        h_maps.append(maps)
    Pm = Sub(M, {}, check=False)
    if gens:
        S = direct_sum(h_reps)
        hm = {}
        for w in M.quiver.vertices:
            blocks = [mp[w] for mp in h_maps]
            m = blocks[0]
            for b in blocks[1:]:
                m = m.hstack(b)
            hm[w] = m
        h = Morphism(S, M, hm)
        if not all(m.is_injective() for m in h.maps.values()):
            bad = next(w for w in M.quiver.vertices if not h.maps[w].is_injective())
            v.reason, v.witness = "SummandMismatch", f"lift of the top is not injective at {bad}"
            return v
        Pm = image_sub(h)
    if intersect_subreps(Pm, X0).total_dim():
        bad = next(w for w in M.quiver.vertices if intersect_subreps(Pm, X0).spaces[w])
        v.reason, v.witness = "TopObstruction", f"projective part meets the flat part at {bad}"
        return v
    total = sum_subreps(Pm, X0)
    for w in M.quiver.vertices:
        if len(total.spaces[w]) != M.dims[w]:
            v.reason, v.witness = "TopObstruction", w
            return v
    counts = {}
    for a, _ in gens:
        counts[a] = counts.get(a, 0) + 1
    plabels = [SummandLabel("P", _vertex_label(M, a), n) for a, n in counts.items()]
    v.projective = True
    v.summands = labels + plabels
    return v


def _vertex_label(M, name):
    win = M.window
    if win is None:
        return name
    return win.rq.label(win.from_name[name])


def classify_injective(E, seed=0):
    """Classify through the dual on the opposite presentation, relabelling P as I and X as Y."""
    if not isinstance(E, EventuallyPeriodicRep):
        E = EventuallyPeriodicRep.infer(E)
    D = EventuallyPeriodicRep.infer(dual(E.rep))
    v = classify_projective(D, seed, kind="injective")
    v.summands = [SummandLabel({"P": "I", "X": "Y"}[s.kind], s.name, s.multiplicity) for s in v.summands]
    return v


def has_enough_projectives(rq):
    rep = all_vertices_have_finite_predecessors(rq)
    return rep.ok, (rep.witness if rep.ok is False else None)


# ---------------------------------------------------------------- projective covers

@dataclass
class ProjectiveCover:
    summands: list           # vertices a_i, one per copy of P_{a_i}
    P: Rep
    h: Morphism
    essential: bool          # ker h inside rad P


def _lift_generators(M, gens):
    F = M.field
    reps, blocks = [], []
    for a, u in gens:
        P = rep_P(M.quiver, a, F)
        maps = {}
        for w in M.quiver.vertices:
            cols = [M.path_map(p).apply(u) for p in P.labels[w]]
            maps[w] = Matrix.from_columns(F, M.dims[w], cols) if cols else Matrix.zero(F, M.dims[w], 0)
        reps.append(P)
        blocks.append(maps)
    return reps, blocks


def _assemble(M, reps, blocks):
    F = M.field
    if not reps:
        Z = Rep(M.quiver, F, {}, {})
        return Z, Morphism(Z, M, {}, check=False)
    S = direct_sum(reps)
    hm = {}
    for w in M.quiver.vertices:
        m = blocks[0][w]
        for b in blocks[1:]:
            m = m.hstack(b[w])
        hm[w] = m
    return S, Morphism(S, M, hm)


def projective_cover(M):
    """P = sum of P_a over a basis of top M, with h: P -> M lifting the top."""
    F = M.field
    R = radical(M)
    gens = [(a, u) for a in topological_order(M.quiver)
            for u in (complement(F, R.spaces[a], M.dims[a]) if M.dims[a] else [])]
    reps, blocks = _lift_generators(M, gens)
    P, h = _assemble(M, reps, blocks)
    if not h.is_epi():
        raise AssertionError("lift of the top is not surjective")
    ker = kernel_sub(h)
    rad = radical(P)
    essential = all(_contained(F, ker.spaces[w], rad.spaces[w], P.dims[w]) for w in P.quiver.vertices)
    return ProjectiveCover([a for a, _ in gens], P, h, essential)


def cover_without(M, cover, drop):
    """h restricted to all summands but the one at position drop (for essentiality checks)."""
    gens_all = []
    F = M.field
    R = radical(M)
    for a in topological_order(M.quiver):
        for u in (complement(F, R.spaces[a], M.dims[a]) if M.dims[a] else []):
            gens_all.append((a, u))
    gens = [g for i, g in enumerate(gens_all) if i != drop]
    reps, blocks = _lift_generators(M, gens)
    return _assemble(M, reps, blocks)


# ---------------------------------------------------------------- flat witnesses

@dataclass
class FlatWitness:
    vertices: list           # a_0, a_1, ... (ExtVertex)
    reps: list               # P_{a_i} restricted to the window
    maps: list               # psi_i: P_{a_i} -> P_{a_{i+1}}
    chains: dict             # window vertex -> limits.Chain of fibres
    colimit_dims: dict
    X: Rep
    injective: bool
    matches_X: bool


def flat_witness_chain(rq, p, K, F=None, length=None):
    """The chain P_{a_0} -> P_{a_1} -> ... along p, restricted to the window of depth K.

    Each map sends a path u from a_i to u followed by alpha_{i+1}.  Its
    colimit (computed fibrewise) is compared with the window of X_[p].
    """
    from quiverrep.linalg import Q
    F = F or Q
    cls = class_canonicalize(rq, p)
    if not is_uif_class(rq, cls):
        raise NotUIF(f"class {cls.key_literal()} is not uniformly interval finite")
    X = rep_X_window(rq, cls, K, F).rep
    _, anchor = _tail_anchor(rq, cls, K)
    rep = RayPath(RIGHT, cls.rep.prefix, cls.rep.entry, cls.rep.word)
    verts = [vertex_sequence(rq, rep, 0)]
    i = 0
    while length is None or i < length:
        nxt = vertex_sequence(rq, rep, i + 1)
        verts.append(nxt)
        i += 1
        if length is None and nxt.depth >= anchor.depth and i >= len(rep.prefix):
            break
    big = materialize_window(rq, max(x.depth for x in verts) + 1)
    win = materialize_window(rq, K)
    reps = []
    for x in verts:
        P = rep_P(big, big.to_name[x], F, strict=False)
        reps.append(restrict(P, win))
    maps = []
    for j in range(len(verts) - 1):
        A, B = reps[j], reps[j + 1]
        alpha = _arrow_between(rq, rep, j, big)
        mp = {}
        for w in win.quiver.vertices:
            idx = {q.arrows: k for k, q in enumerate(B.labels[w])}
            m = Matrix.zero(F, B.dims[w], A.dims[w])
            for c, q in enumerate(A.labels[w]):
                m.rows[idx[(alpha,) + q.arrows]][c] = F.one
            mp[w] = m
        maps.append(Morphism(A, B, mp))
    chains, cdims = {}, {}
    injective = all(f.is_mono() for f in maps)
    for w in win.quiver.vertices:
        dims = [R.dims[w] for R in reps]
        ch = limits.Chain(F, dims, [f.maps[w] for f in maps])
        chains[w] = ch
        cdims[w] = limits.colimit_image(ch, 0).colimit_dim
    matches = all(cdims[w] == X.dims[w] for w in win.quiver.vertices)
    if matches:
        matches = bool(iso_test(reps[-1], X))
    return FlatWitness(verts, reps, maps, chains, cdims, X, injective, matches)


def _arrow_between(rq, rep, j, big):
    """Window id of alpha_{j+1}, the arrow from a_{j+1} to a_j along the path."""
    if j < len(rep.prefix):
        aid = rep.prefix[j]
        if big.quiver.has_arrow(aid):
            return aid
        hits = [a for a in big.quiver.arrows if a.id.endswith("." + aid)]
        return hits[0].id
    x = rep.entry
    L = len(rep.word)
    k = j - len(rep.prefix)
    for t in range(k):
        x, _ = _read(rq, x, rep.word[t % L])
    _, aid = _read(rq, x, rep.word[k % L])
    return aid
