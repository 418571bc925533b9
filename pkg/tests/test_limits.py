import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from quiverrep.limits import (
    Chain, InverseChain, NoFactorization, Periodicity, colimit_image, factor_through,
    kernel_accumulate, ml_index, reduced_chain, solution_set,
)
from quiverrep.linalg import Field, Matrix, Q, span

F3 = Field(3)


def random_chain(rng, F, H, maxdim=3, periodic=None):
    dims = [rng.randint(0, maxdim) for _ in range(H + 1)]
    if periodic:
        s, d = periodic
        for i in range(s + d, H + 1):
            dims[i] = dims[i - d]
    maps = []
    for i in range(H):
        if periodic and i >= periodic[0] + periodic[1]:
            maps.append(maps[i - periodic[1]])
        else:
            maps.append(Matrix.random(F, dims[i + 1], dims[i], rng, density=0.6))
    return Chain(F, dims, maps, Periodicity(*periodic) if periodic else None)


def coequalizer_image_dims(F, dims, maps):
    """Image of each M_i in colim = (sum M_i) / <x - psi_i x>, by direct linear algebra."""
    n = sum(dims)
    offs = [sum(dims[:i]) for i in range(len(dims))]
    rels = []
    for i, m in enumerate(maps):
        for j in range(dims[i]):
            v = [F.zero] * n
            v[offs[i] + j] = F.one
            col = m.column(j)
            for k in range(dims[i + 1]):
                v[offs[i + 1] + k] = v[offs[i + 1] + k] - col[k]
            rels.append(v)
    R = span(F, rels, n)
    out = []
    for i, d in enumerate(dims):
        gens = []
        for j in range(d):
            v = [F.zero] * n
            v[offs[i] + j] = F.one
            gens.append(v)
        out.append(len(span(F, R + gens, n)) - len(R))
    return out, n - len(R)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 5))
def test_colimit_image_matches_coequalizer(seed, H):
    rng = random.Random(seed)
    c = random_chain(rng, Q, H)
    imgs, total = coequalizer_image_dims(Q, c.dims, c.maps)
    for i in range(H + 1):
        ci = colimit_image(c, i)
        assert ci.dim == imgs[i]
        assert ci.colimit_dim == total
        assert ci.injection.is_injective()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_periodic_colimit_matches_long_horizon(seed):
    rng = random.Random(seed)
    s, d = rng.randint(0, 2), rng.randint(1, 2)
    H = s + 2 * d
    c = random_chain(rng, F3, H, periodic=(s, d))
    L = H + 12 * d
    dims = [c.dim(i) for i in range(L + 1)]
    maps = [c.map(i) for i in range(L)]
    imgs, _ = coequalizer_image_dims(F3, dims, maps)
    ci = colimit_image(c, 0)
    assert ci.dim == imgs[0]
    if ci.stable:
        assert ci.colimit_dim == max(imgs[: L // 2])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 5))
def test_reduced_chain_is_injective_and_kernels_are_unions(seed, H):
    rng = random.Random(seed)
    c = random_chain(rng, F3, H)
    red = reduced_chain(c)
    assert all(m.is_injective() for m in red.chain.maps)
    for i in range(H + 1):
        union = []
        for j in range(i, H + 1):
            union += c.composite(i, j).kernel().columns()
        assert kernel_accumulate(c, i) == span(F3, union, c.dims[i])


def brute_factor(F, c, h, g):
    """All f_H with g f_H = h_H, enumerated; each induces the family f_i = f_H psi_iH."""
    p = F.p
    H = c.H
    r, k = g.ncols, c.dims[H]
    found = []
    for bits in itertools.product(range(p), repeat=r * k):
        f = Matrix(F, r, k, [list(bits[i * k:(i + 1) * k]) for i in range(r)])
        fam = [f @ c.composite(i, H) for i in range(H + 1)]
        if all(g @ fam[i] == h[i] for i in range(H + 1)):
            found.append(f)
    return found


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_factor_through_matches_exhaustive_search(seed):
    rng = random.Random(seed)
    F = Field(2) if seed % 2 else F3
    H = rng.randint(1, 4)
    c = random_chain(rng, F, H)
    u, v = rng.randint(0, 2), rng.randint(0, 3)
    g = Matrix.random(F, v, u, rng)
    hH = Matrix.random(F, v, c.dims[H], rng)
    h = [hH @ c.composite(i, H) for i in range(H + 1)]
    if u * c.dims[H] > 8:
        return
    sols = brute_factor(F, c, h, g)
    if not sols:
        with pytest.raises(NoFactorization):
            factor_through(c, h, g)
    else:
        fs = factor_through(c, h, g)
        assert fs[H] in sols
        for i in range(H):
            assert fs[i + 1] @ c.maps[i] == fs[i]


def test_factor_through_rejects_incompatible_h():
    c = Chain(Q, [1, 1], [Matrix(Q, 1, 1, [[0]])])
    g = Matrix.identity(Q, 1)
    with pytest.raises(ValueError):
        factor_through(c, [Matrix(Q, 1, 1, [[1]]), Matrix(Q, 1, 1, [[1]])], g)


def test_periodic_factor_through_on_identity_chain():
    one = Matrix.identity(Q, 1)
    c = Chain(Q, [1, 1, 1], [one, one], Periodicity(0, 1))
    g = Matrix(Q, 1, 1, [[2]])
    fs = factor_through(c, [one, one, one], g)
    assert fs[0].rows == [[Matrix(Q, 1, 1, [["1/2"]]).rows[0][0]]]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 5))
def test_ml_index_is_where_images_stop_shrinking(seed, H):
    rng = random.Random(seed)
    dims = [rng.randint(0, 3) for _ in range(H + 1)]
    maps = [Matrix.random(F3, dims[i], dims[i + 1], rng, 0.6) for i in range(H)]
    ic = InverseChain(F3, dims, maps)
    j, basis = ml_index(ic, 0)
    imgs = [span(F3, ic.composite(k, 0).columns(), dims[0]) for k in range(H + 1)]
    assert basis == imgs[-1]
    assert imgs[j] == imgs[-1] and (j == 0 or imgs[j - 1] != imgs[-1])


def test_solution_set_directions():
    g = Matrix(Q, 1, 2, [[1, 1]])
    h = Matrix(Q, 1, 1, [[3]])
    s = solution_set(g, h)
    assert not s.empty and g @ s.particular == h
    assert len(s.directions) == 1 and (g @ s.directions[0]).is_zero()
    assert solution_set(Matrix.zero(Q, 1, 1), Matrix(Q, 1, 1, [[1]])).empty


def test_bad_chain_shapes_rejected():
    with pytest.raises(ValueError):
        Chain(Q, [1, 2], [Matrix.zero(Q, 1, 1)])
    with pytest.raises(ValueError):
        Chain(Q, [1, 1, 1], [Matrix.identity(Q, 1), Matrix.zero(Q, 1, 1)], Periodicity(0, 1))
