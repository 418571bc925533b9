import itertools
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from quiverrep import _pykernels
from quiverrep.linalg import (
    BACKEND, Field, Matrix, Q, block_diag, complement, coordinates, intersect, nullspace, rref, span,
)

F3 = Field(3)
F7 = Field(7)

small_ints = st.integers(-4, 4)


def matrices(max_rows=4, max_cols=4):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small_ints, min_size=c, max_size=c), min_size=r, max_size=r)))


def test_field_parse_and_repr():
    assert repr(Field.parse("q")) == "q"
    assert Field.parse("fp:7") == F7
    with pytest.raises(ValueError):
        Field(8)
    with pytest.raises(ValueError):
        Field.parse("zz")
    assert F7("3/2") == 3 * pow(2, 5, 7) % 7
    assert F7.inv(3) * 3 % 7 == 1


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_rank_matches_sympy(rows):
    m = Matrix(Q, len(rows), len(rows[0]), rows)
    assert m.rank() == sympy.Matrix(rows).rank()


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_kernel_is_kernel_and_complete(rows):
    m = Matrix(Q, len(rows), len(rows[0]), rows)
    ker = m.kernel().columns()
    assert len(ker) + m.rank() == m.ncols
    for v in ker:
        assert all(x == 0 for x in m.apply(v))


def test_nullspace_gfp_brute_force():
    rng = random.Random(3)
    for _ in range(40):
        r, c = rng.randint(1, 3), rng.randint(1, 4)
        rows = [[rng.randrange(3) for _ in range(c)] for _ in range(r)]
        basis = nullspace(F3, rows, c)
        # every brute-force kernel vector lies in the span, and the count is 3^dim
        kernel = [v for v in itertools.product(range(3), repeat=c)
                  if all(sum(a * b for a, b in zip(row, v)) % 3 == 0 for row in rows)]
        assert len(kernel) == 3 ** len(basis)
        for v in kernel:
            assert len(span(F3, basis + [list(v)], c)) == len(basis)


@settings(max_examples=40, deadline=None)
@given(matrices(4, 4), st.integers(0, 10 ** 6))
def test_cython_and_pure_kernels_agree(rows, seed):
    p = 7
    ncols = len(rows[0])
    pure = _pykernels.rref_modp([list(r) for r in rows], ncols, p)
    if BACKEND == "cython":
        from quiverrep import _kernels
        assert _kernels.rref_modp([list(r) for r in rows], ncols, p) == pure
        rng = random.Random(seed)
        B = [[rng.randrange(p) for _ in range(3)] for _ in range(ncols)]
        A = [[x % p for x in r] for r in rows]
        args = (A, B, len(A), ncols, 3, p)
        assert _kernels.matmul_modp(*args) == _pykernels.matmul_modp(*args)


def test_solve_and_inverse():
    A = Matrix(Q, 2, 2, [[1, 2], [3, 4]])
    inv = A.inverse()
    assert A @ inv == Matrix.identity(Q, 2)
    B = Matrix(Q, 2, 1, [[1], [1]])
    X = A.solve(B)
    assert A @ X == B
    singular = Matrix(Q, 2, 2, [[1, 2], [2, 4]])
    assert singular.solve(Matrix(Q, 2, 1, [[1], [0]])) is None
    assert not singular.is_invertible()


def test_rref_canonical():
    R, piv = rref(Q, [[2, 4], [1, 3]], 2)
    assert R == [[1, 0], [0, 1]] and piv == [0, 1]
    assert rref(F7, [[2, 4]], 2)[0] == [[1, 2]]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(small_ints, min_size=4, max_size=4), max_size=3),
       st.lists(st.lists(small_ints, min_size=4, max_size=4), max_size=3))
def test_intersect_and_complement_dimensions(U, W):
    n = 4
    U, W = span(Q, U, n), span(Q, W, n)
    I = intersect(Q, U, W, n)
    S = span(Q, U + W, n)
    assert len(I) + len(S) == len(U) + len(W)
    for v in I:
        assert len(span(Q, U + [v], n)) == len(U)
        assert len(span(Q, W + [v], n)) == len(W)
    C = complement(Q, U, n)
    assert len(span(Q, U + C, n)) == n and len(C) + len(U) == n


def test_coordinates_roundtrip():
    basis = span(Q, [[1, 1, 0], [0, 1, 1]], 3)
    v = [Fraction(2), Fraction(5), Fraction(3)]
    c = coordinates(Q, basis, v, 3)
    assert [sum(ci * b[i] for ci, b in zip(c, basis)) for i in range(3)] == v


def test_block_diag_and_power():
    A = Matrix(Q, 1, 1, [[2]])
    B = Matrix(Q, 2, 2, [[0, 1], [0, 0]])
    D = block_diag(Q, [A, B])
    assert D.shape == (3, 3)
    assert D.power(2).rows == [[4, 0, 0], [0, 0, 0], [0, 0, 0]]
    assert B.power(0) == Matrix.identity(Q, 2)
