import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quiverrep.quiver_core import count_paths, reaching
from quiverrep.ray_quiver import (
    RIGHT, ExtVertex, NotUIF, RayPath, _closed_words, all_vertices_have_finite_predecessors,
    bounded_counts, class_canonicalize, class_equal, class_size, decide_counts, is_uif_class,
    is_uif_hull, list_classes_through, materialize_window, opposite, parse_raypath, path_count_ext,
    power_decision, stabilization_index, validate_presentation, vertex_sequence,
)

from conftest import corpus, random_presentation

RAY_CORPUS = ["ladder.rq", "ex210.rq", "ainfinf.rq", "halfdouble.rq", "oddcolumn.rq", "dinf.rq",
              "inward.rq"]


def window_vertices(rq, depth):
    out = [ExtVertex.core(v) for v in rq.core.vertices]
    for r in rq.rays:
        out += [ExtVertex(r.id, k, b) for k in range(depth + 1) for b in r.template.block]
    return out


def window_count(rq, a, b, K):
    w = materialize_window(rq, K)
    return count_paths(w.quiver, w.to_name[a], w.to_name[b])


def powers_oracle(A, S, m_max=50, cap=10 ** 9):
    """sup over m <= m_max of A (SA)^m by direct numpy powers, with an overflow cap."""
    A = np.array(A, dtype=np.int64)
    T = np.array(S, dtype=np.int64) @ A
    cur = A.copy()
    seq = [cur.copy()]
    for _ in range(m_max):
        cur = np.minimum(cur @ T, cap)
        seq.append(cur.copy())
    return np.array(seq)


def oracle_bounded(seq, u, v, cap=10 ** 9):
    vals = seq[:, u, v]
    if vals.max() >= cap:
        return False, None
    return int(vals[26:].max()) <= int(vals[:26].max()), int(vals.max())


@pytest.mark.parametrize("name", RAY_CORPUS)
def test_corpus_valid_and_counts_match_windows(name):
    rq = corpus(name)
    assert validate_presentation(rq) == []
    verts = window_vertices(rq, 3)
    for a in verts:
        for b in verts:
            K = max(a.depth, b.depth)
            assert path_count_ext(rq, a, b) == window_count(rq, a, b, K), (a, b)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_random_presentations_counts_match_windows(seed):
    rq = random_presentation(random.Random(seed))
    verts = window_vertices(rq, 2)
    for a in verts:
        for b in verts:
            assert path_count_ext(rq, a, b) == window_count(rq, a, b, max(a.depth, b.depth))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_opposite_reverses_counts(seed):
    rq = random_presentation(random.Random(seed))
    op = opposite(rq)
    assert opposite(op) is rq
    verts = window_vertices(rq, 2)
    for a in verts:
        for b in verts:
            assert path_count_ext(rq, a, b) == path_count_ext(op, b, a)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 4), st.data())
def test_decide_counts_matches_power_oracle(n, data):
    ints = st.integers(0, 2)
    S = [[data.draw(ints) for _ in range(n)] for _ in range(n)]
    # intra path counts of a random acyclic block (upper triangular, unit diagonal)
    N = [[data.draw(ints) if j > i else 0 for j in range(n)] for i in range(n)]
    A = np.eye(n, dtype=np.int64)
    P = np.eye(n, dtype=np.int64)
    for _ in range(n):
        P = P @ np.array(N)
        A = A + P
    A = A.tolist()
    seq = powers_oracle(A, S)
    for u in range(n):
        for v in range(n):
            ok, best, _ = decide_counts(A, S, [u], [v])
            expect, sup = oracle_bounded(seq, u, v)
            assert ok == expect, (A, S, u, v)
            if ok:
                assert best[(u, v)] == sup


def test_power_decision_witnesses():
    assert power_decision([[1]], [0], [0]).bounded
    assert power_decision([[2]], [0], [0]).witness == ("multiplicity", 0, 0, 2)
    d = power_decision([[1, 1], [0, 1]], [0], [1])
    assert not d.bounded and d.witness[0] == "chain"
    d = power_decision([[1, 1], [1, 0]], [0], [0])
    assert not d.bounded and d.witness[0] == "two_cycles"
    # a cycle off every route does not matter
    assert power_decision([[0, 0], [0, 2]], [0], [0]).bounded


def test_ladder_counts_and_bounded_counts():
    L = corpus("ladder.rq")
    a0 = L.resolve("a0")
    for i in range(1, 9):
        assert path_count_ext(L, L.resolve(f"a_{i}"), a0) == i + 1
        assert path_count_ext(L, L.resolve(f"b_{i}"), a0) == 1
    assert not bounded_counts(L, "r", ["a"], ["b"]).bounded
    assert bounded_counts(L, "r", ["b"], ["b"]).values == {("b", "b"): 1}


def test_resolve_names_and_labels():
    L = corpus("ladder.rq")
    assert L.resolve("a_3") == ExtVertex("r", 2, "a")
    assert L.resolve("r.2.a") == ExtVertex("r", 2, "a")
    assert L.resolve("a_0") == ExtVertex.core("a0")
    assert L.label(ExtVertex("r", 4, "b")) == "b_5"
    A = corpus("ainfinf.rq")
    assert A.resolve("-3") == ExtVertex("neg", 2, "b")
    assert A.resolve("0") == ExtVertex.core("0")


def test_parse_raypath_forms():
    L = corpus("ladder.rq")
    u = parse_raypath(L, "alpha1; a_1; (alpha)")
    assert u.prefix == ("r.alpha1",) or u.prefix == ("alpha1",)
    assert u.word == ("alpha",)
    bare = parse_raypath(L, "(beta)")
    assert bare.entry == ExtVertex("r", 0, "b")
    with pytest.raises(Exception):
        parse_raypath(L, "alpha1; a_1; alpha")


def test_class_canonicalization_shift_invariance():
    L = corpus("ladder.rq")
    u = parse_raypath(L, "alpha1; a_1; (alpha)")
    tail = RayPath(RIGHT, (), ExtVertex("r", 3, "a"), ("alpha",))
    assert class_equal(L, u, tail)
    assert class_canonicalize(L, u).key_literal() == "r.0.a; (alpha)"
    v = parse_raypath(L, "(beta)")
    assert not class_equal(L, u, v)


def _classes(rq, bound=4):
    out = []
    for r in rq.rays:
        if not r.outward:
            continue
        for w in _closed_words(rq, r.id, bound):
            start = None
            tmpl = r.template
            for a in tmpl.intra + tmpl.steps:
                if a.id == w[0]:
                    start = a.target
            out.append(RayPath(RIGHT, (), ExtVertex(r.id, 0, start), w))
    return out


@pytest.mark.parametrize("name", ["ladder.rq", "ex210.rq", "ainfinf.rq", "halfdouble.rq", "dinf.rq",
                                  "oddcolumn.rq"])
def test_class_size_matches_window_sup(name):
    rq = corpus(name)
    targets = [ExtVertex.core(v) for v in rq.core.vertices] + [
        ExtVertex(r.id, 0, b) for r in rq.rays for b in r.template.block]
    for p in _classes(rq):
        seq = [vertex_sequence(rq, p, i) for i in range(24)]
        K = max(x.depth for x in seq)
        w = materialize_window(rq, K)
        for a in targets:
            vals = [count_paths(w.quiver, w.to_name[x], w.to_name[a]) for x in seq]
            s = class_size(rq, p, a)
            if s.finite:
                assert s.value == max(vals), (p, a)
            else:
                assert max(vals[12:]) > max(vals[:6]), (p, a)


def test_ladder_class_facts():
    L = corpus("ladder.rq")
    u = parse_raypath(L, "alpha1; a_1; (alpha)")
    v = parse_raypath(L, "beta1; b_1; (beta)")
    a0 = L.resolve("a0")
    assert not is_uif_hull(L, u) and is_uif_hull(L, v)
    assert not class_size(L, u, a0).finite
    assert class_size(L, v, a0).value == 1
    listing = list_classes_through(L, a0, 4)
    assert listing.complete
    assert {c.key_literal() for c in listing.classes} == {"r.0.a; (alpha)", "r.0.b; (beta)"}
    assert stabilization_index(L, u) == 1
    assert stabilization_index(L, parse_raypath(L, "beta1 r.0.gamma; a_1; (alpha)")) == 2


def test_stabilization_refuses_non_uif_tail():
    E = corpus("ex210.rq")
    for p in _classes(E, 4):
        assert not is_uif_class(E, p)
        with pytest.raises(NotUIF):
            stabilization_index(E, p)


@pytest.mark.parametrize("name,ok,witness", [
    ("oddcolumn.rq", False, "1"), ("ainfinf.rq", False, "0"), ("inward.rq", True, None),
    ("ladder.rq", False, "a0")])
def test_finite_predecessors(name, ok, witness):
    rq = corpus(name)
    rep = all_vertices_have_finite_predecessors(rq)
    assert rep.ok is ok
    if witness is not None:
        assert rq.label(rep.witness) == witness


def test_finite_predecessors_against_window_growth():
    # predecessors of a vertex inside growing windows stay bounded iff the decision says so
    rng = random.Random(4)
    for _ in range(25):
        rq = random_presentation(rng)
        rep = all_vertices_have_finite_predecessors(rq)
        verts = window_vertices(rq, 0)
        grows = False
        for x in verts:
            counts = []
            for K in (4, 8):
                w = materialize_window(rq, K)
                counts.append(len(reaching(w.quiver, [w.to_name[x]])))
            grows |= counts[1] > counts[0]
        assert grows == (not rep.ok)
