"""Acceptance suite: worked examples reproduced exactly, plus seeded property sweeps.

Each criterion is one test named test_criterion_NN_*; conftest prints a PASS/FAIL
line per criterion in the terminal summary.
"""

import itertools
import random
from collections import Counter

import numpy as np
import pytest

from quiverrep.classify import (
    classify_injective, classify_projective, cover_without, decompose, flat_witness_chain,
    has_enough_projectives, projective_cover,
)
from quiverrep.limits import NoFactorization, colimit_image, factor_through, reduced_chain
from quiverrep.linalg import Field, Matrix, Q
from quiverrep.linrep import (
    EventuallyPeriodicRep, Morphism, direct_sum, eta_iso, hom_space, hom_space_stable, rep_I,
    rep_I_window, rep_P, rep_P_window, rep_X_window, top, zeta_iso,
)
from quiverrep.ray_quiver import (
    ExtVertex, bounded_counts, class_size, decide_counts, is_uif_class, is_uif_hull,
    list_classes_through, parse_raypath, path_count_ext, stabilization_index,
)

from conftest import corpus, random_acyclic, random_rep
from test_classify import conjugate, known_indecomposables
from test_limits import brute_factor, coequalizer_image_dims, random_chain
from test_ray_quiver import _classes, oracle_bounded, powers_oracle

F2, F3, F5, F7 = Field(2), Field(3), Field(5), Field(7)


def test_criterion_01_ladder_counts_and_classes():
    L = corpus("ladder.rq")
    a0 = L.resolve("a_0")
    for i in range(1, 9):
        assert path_count_ext(L, L.resolve(f"a_{i}"), a0) == i + 1
        assert path_count_ext(L, L.resolve(f"b_{i}"), a0) == 1
    u = parse_raypath(L, "alpha1; a_1; (alpha)")
    v = parse_raypath(L, "beta1; b_1; (beta)")
    assert is_uif_hull(L, v) is True
    assert is_uif_hull(L, u) is False
    assert class_size(L, u, a0).finite is False
    assert class_size(L, v, a0).value == 1
    listing = list_classes_through(L, a0, 4)
    assert listing.complete is True
    assert {c.key_literal() for c in listing.classes} == {"r.0.a; (alpha)", "r.0.b; (beta)"}


def test_criterion_02_ladder_tail_stabilises_at_one():
    L = corpus("ladder.rq")
    assert stabilization_index(L, parse_raypath(L, "alpha1; a_1; (alpha)")) == 1
    # indices count vertices along the given path; the bare tail already starts at a_1
    assert stabilization_index(L, parse_raypath(L, "(alpha)")) == 0
    # window counts: one path a_i -> a_j for all i >= j >= 1, but two paths a_1 -> a_0
    for j in range(1, 5):
        for i in range(j, j + 4):
            assert path_count_ext(L, L.resolve(f"a_{i}"), L.resolve(f"a_{j}")) == 1
    assert path_count_ext(L, L.resolve("a_1"), L.resolve("a_0")) == 2


def test_criterion_03_two_ladders_are_not_uif():
    E = corpus("ex210.rq")
    for N in range(1, 5):
        assert path_count_ext(E, E.resolve(f"a_{N + 2}"), E.resolve(f"a_{N}")) == 2
    classes = _classes(E, 4)
    assert classes
    assert not any(is_uif_hull(E, p) or is_uif_class(E, p) for p in classes)
    listing = list_classes_through(E, E.resolve("a0"), 4)
    assert listing.complete is False
    assert not any(is_uif_hull(E, p) for p in listing.classes)


def test_criterion_04_half_double_flat_dims():
    H = corpus("halfdouble.rq")
    X = rep_X_window(H, parse_raypath(H, "(step)"), 6)
    w = X.rep.window
    for i in range(0, 7):
        assert X.rep.dims[w.to_name[H.resolve(str(i))]] == 1
    for i in range(1, 7):
        assert X.rep.dims[w.to_name[H.resolve(str(-i))]] == 2 ** i
    # pointwise finite on the window, but the support has unbounded path counts
    assert all(isinstance(d, int) for d in X.rep.dims.values())
    assert bounded_counts(H, "neg", ["b"], ["b"]).bounded is False
    zero = H.resolve("0")
    assert [path_count_ext(H, zero, H.resolve(str(-i))) for i in range(1, 7)] == [2 ** i for i in range(1, 7)]


def test_criterion_05_ainfinf_flat_projective_injective():
    A = corpus("ainfinf.rq")
    K = 6
    X = rep_X_window(A, parse_raypath(A, "(step)"), K)
    assert set(X.rep.dims.values()) == {1}
    assert all(m.rows == [[1]] for m in X.rep.mats.values())
    assert hom_space_stable(X, X).dim == 1
    assert str(classify_projective(X)) == "Projective([X(pos.0.b; (step))])"
    for i in range(-4, 5):
        P = rep_P_window(A, A.resolve(str(i)), K)
        assert str(classify_projective(P)) == f"Projective([P({i})])"
        I = rep_I_window(A, A.resolve(str(i)), K)
        assert str(classify_injective(I)) == f"Injective([I({i})])"
    assert str(classify_injective(X)) == "Injective([Y(neg.0.b; (step))])"
    M = direct_sum([X.rep] + [rep_I_window(A, A.resolve(i), K).rep for i in ("-2", "0", "2")])
    got = classify_injective(EventuallyPeriodicRep.infer(M))
    assert got.projective
    assert Counter(str(s) for s in got.summands) == Counter(["Y(neg.0.b; (step))", "I(-2)", "I(0)", "I(2)"])


def test_criterion_06_hom_projective_injective_suite():
    rng = random.Random(60)
    for n in range(200):
        F = Q if n % 2 else F7
        q = random_acyclic(rng, rng.randint(1, 8), rng.randint(0, 10))
        M = random_rep(q, F, rng, maxdim=4)
        a = rng.choice(q.vertices)
        eta, zeta = eta_iso(q, a, M), zeta_iso(q, a, M)
        assert len(eta.hom_basis) == len(zeta.hom_basis) == M.dims[a]
        # an independent route to the dimensions: the general Hom solver
        if n % 4 == 0:
            assert len(hom_space(rep_P(q, a, F), M)) == M.dims[a]
            assert len(hom_space(M, rep_I(q, a, F))) == M.dims[a]
        for iso in (eta, zeta):
            for f in iso.hom_basis:
                assert iso.backward(iso.forward(f)) == f
            x = [F(rng.randint(0, 6)) for _ in range(M.dims[a])]
            assert iso.forward(iso.backward(x)) == x


def test_criterion_07_krull_schmidt_suite():
    for seed in range(100):
        rng = random.Random(7000 + seed)
        q = random_acyclic(rng, rng.randint(2, 5), 6)
        F = F5 if seed % 2 else Q
        pool = [M for M in known_indecomposables(q, F) if M.total_dim()]
        parts = [rng.choice(pool) for _ in range(rng.randint(1, 4))]
        M, _ = conjugate(direct_sum(parts), rng)
        res = decompose(M, seed)
        assert res.dim_vectors() == sorted(P.dim_vector() for P in parts)
        total = Morphism.zero(M, M)
        for p in res.pieces:
            assert p.projection @ p.inclusion == Morphism.identity(p.rep)
            total = total + p.inclusion @ p.projection
        assert total == Morphism.identity(M)


def test_criterion_08_limits_suite():
    for seed in range(100):
        rng = random.Random(8000 + seed)
        H = rng.randint(1, 5)
        c = random_chain(rng, Q if seed % 2 else F3, H)
        imgs, total = coequalizer_image_dims(c.F, c.dims, c.maps)
        for i in range(H + 1):
            ci = colimit_image(c, i)
            assert (ci.dim, ci.colimit_dim) == (imgs[i], total)
        assert all(m.is_injective() for m in reduced_chain(c).chain.maps)
    checked = 0
    for seed in range(100):
        rng = random.Random(8500 + seed)
        F = F2 if seed % 2 else F3
        H = rng.randint(1, 4)
        c = random_chain(rng, F, H)
        u, v = rng.randint(0, 3), rng.randint(0, 3)
        if u * c.dims[H] > (9 if F is F2 else 6):
            continue
        g = Matrix.random(F, v, u, rng)
        hH = Matrix.random(F, v, c.dims[H], rng)
        h = [hH @ c.composite(i, H) for i in range(H + 1)]
        sols = brute_factor(F, c, h, g)
        checked += 1
        if not sols:
            with pytest.raises(NoFactorization):
                factor_through(c, h, g)
        else:
            fs = factor_through(c, h, g)
            assert fs[H] in sols
            assert all(fs[i + 1] @ c.maps[i] == fs[i] for i in range(H))
    assert checked >= 60


def _intra_counts(N):
    n = len(N)
    A = np.eye(n, dtype=np.int64)
    P = np.eye(n, dtype=np.int64)
    for _ in range(n):
        P = P @ np.array(N, dtype=np.int64)
        A = A + P
    return A.tolist()


def _check_template(A, S):
    seq = powers_oracle(A, S)
    n = len(A)
    for u in range(n):
        for v in range(n):
            ok, best, _ = decide_counts(A, S, [u], [v])
            expect, sup = oracle_bounded(seq, u, v)
            assert ok == expect, (A, S, u, v)
            if ok:
                assert best[(u, v)] == sup


def test_criterion_09_bounded_counts_against_powers():
    # every template with |B| <= 2, intra arrows included
    for n in (1, 2):
        upper = [(i, j) for i in range(n) for j in range(i + 1, n)]
        for nv in itertools.product(range(3), repeat=len(upper)):
            N = [[0] * n for _ in range(n)]
            for (i, j), x in zip(upper, nv):
                N[i][j] = x
            A = _intra_counts(N)
            for sv in itertools.product(range(3), repeat=n * n):
                _check_template(A, [list(sv[i * n:(i + 1) * n]) for i in range(n)])
    # every step matrix with |B| = 3
    I3 = [[int(i == j) for j in range(3)] for i in range(3)]
    for sv in itertools.product(range(3), repeat=9):
        _check_template(I3, [list(sv[i * 3:(i + 1) * 3]) for i in range(3)])
    # sampled templates with |B| in {3, 4} and intra arrows
    rng = random.Random(9)
    for _ in range(400):
        n = rng.choice((3, 4))
        N = [[rng.randint(0, 2) if j > i else 0 for j in range(n)] for i in range(n)]
        S = [[rng.choice((0, 0, 1, 1, 2)) for _ in range(n)] for _ in range(n)]
        _check_template(_intra_counts(N), S)


def test_criterion_10_enough_projectives_and_covers():
    O = corpus("oddcolumn.rq")
    ok, w = has_enough_projectives(O)
    assert ok is False and O.label(w) == "1"
    assert has_enough_projectives(corpus("ainfinf.rq"))[0] is False
    assert has_enough_projectives(corpus("inward.rq")) == (True, None)
    for seed in range(50):
        rng = random.Random(10000 + seed)
        q = random_acyclic(rng, rng.randint(1, 6), 8)
        M = random_rep(q, F5, rng, 3)
        cov = projective_cover(M)
        assert cov.h.is_epi() and cov.essential
        assert top(cov.P)[0].dims == top(M)[0].dims
        for i in range(len(cov.summands)):
            assert not cover_without(M, cov, i)[1].is_epi()


@pytest.mark.parametrize("name", ["ainfinf.rq", "dinf.rq"])
def test_criterion_11_flat_witness(name):
    rq = corpus(name)
    for K in (4, 6):
        fw = flat_witness_chain(rq, parse_raypath(rq, "(step)"), K)
        assert fw.injective and fw.matches_X
        assert fw.colimit_dims == fw.X.dims
        assert all(f.is_mono() for f in fw.maps)
        assert all(isinstance(v, ExtVertex) or v for v in fw.vertices)
