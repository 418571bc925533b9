import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from quiverrep.quiver_core import (
    INFINITE, Arrow, CycleError, FiniteQuiver, Path, QuiverError, compose, convex_hull, count_paths,
    direct_predecessors, direct_successors, enumerate_paths, enumerate_paths_bounded, has_oriented_cycle,
    is_convex, opposite, path_from_arrows, topological_order, validate,
)

from conftest import random_acyclic


def brute_paths(q, a, b):
    """All arrow sequences (any length below |Q0|) that chain from a to b."""
    out = set()
    if a == b:
        out.add(())
    for n in range(1, len(q.vertices)):
        for seq in itertools.product(q.arrows, repeat=n):
            if seq[0].source == a and seq[-1].target == b and all(
                    x.target == y.source for x, y in zip(seq, seq[1:])):
                out.add(tuple(x.id for x in seq))
    return out


def test_a2_and_trivial_path():
    q = FiniteQuiver(["a", "b"], [Arrow("al", "a", "b")])
    assert enumerate_paths(q, "a", "a") == [Path.trivial("a")]
    assert [p.arrows for p in enumerate_paths(q, "a", "b")] == [("al",)]
    assert enumerate_paths(q, "b", "a") == []
    assert Path.trivial("a").render() == "e_a"


def test_enumeration_matches_brute_force():
    rng = random.Random(11)
    for _ in range(30):
        q = random_acyclic(rng, rng.randint(2, 5), rng.randint(1, 6))
        for a in q.vertices:
            for b in q.vertices:
                got = [p.arrows for p in enumerate_paths(q, a, b)]
                assert got == sorted(got)
                assert set(got) == brute_paths(q, a, b)
                assert count_paths(q, a, b) == len(got)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 12))
def test_count_symmetric_under_opposite(seed, n):
    rng = random.Random(seed)
    q = random_acyclic(rng, n, 2 * n)
    op = opposite(q)
    for a in q.vertices:
        for b in q.vertices:
            assert count_paths(q, a, b) == count_paths(op, b, a)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_concatenation_is_injective(seed):
    rng = random.Random(seed)
    q = random_acyclic(rng, 5, 7)
    a, b, c = (rng.choice(q.vertices) for _ in range(3))
    seen = set()
    for p in enumerate_paths(q, a, b):
        for r in enumerate_paths(q, b, c):
            key = compose(r, p).arrows
            assert key not in seen
            seen.add(key)


def test_cycles_refused_and_counted_infinite():
    q = FiniteQuiver(["a", "b"], [Arrow("x", "a", "b"), Arrow("y", "b", "a")])
    assert has_oriented_cycle(q)
    with pytest.raises(CycleError):
        enumerate_paths(q, "a", "b")
    with pytest.raises(CycleError):
        topological_order(q)
    assert count_paths(q, "a", "b") is INFINITE
    assert [p.arrows for p in enumerate_paths_bounded(q, "a", "b", 3)] == [("x",), ("x", "y", "x")]


def test_topological_order_respects_arrows():
    rng = random.Random(5)
    for _ in range(20):
        q = random_acyclic(rng, 7, 12)
        pos = {v: i for i, v in enumerate(topological_order(q))}
        assert all(pos[a.source] < pos[a.target] for a in q.arrows)


def test_convex_hull_brute_force():
    rng = random.Random(9)
    for _ in range(25):
        q = random_acyclic(rng, 6, 8)
        S = set(rng.sample(q.vertices, 2))
        hull = set(convex_hull(q, S).vertices)
        expect = {v for v in q.vertices if any(
            count_paths(q, x, v) and count_paths(q, v, y) for x in S for y in S)} | S
        assert hull == expect
        assert is_convex(q, hull)


def test_validate_and_path_errors():
    q = FiniteQuiver(["a"], [Arrow("x", "a", "z")])
    assert validate(q)
    q = FiniteQuiver(["a", "b", "c"], [Arrow("x", "a", "b"), Arrow("y", "b", "c")])
    assert validate(q) == []
    assert path_from_arrows(q, ["x", "y"]).target == "c"
    with pytest.raises(QuiverError):
        path_from_arrows(q, ["y", "x"])
    with pytest.raises(QuiverError):
        compose(path_from_arrows(q, ["x"]), path_from_arrows(q, ["x"]))
    assert direct_successors(q, "a") == {"b"}
    assert direct_predecessors(q, "c") == {"b"}
