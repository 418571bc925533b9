"""Direct and inverse systems of finite dimensional spaces indexed by 0, 1, 2, ...

A chain is given on a finite horizon 0..H.  Without further data the horizon
is taken literally: the system ends at H, so every limit is computed exactly
(for instance the colimit is M_H).  A chain may also declare that dims and maps
repeat with some period from an index on; then the infinite system is meant,
and stabilisation is certified over all residues before an answer is given.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from quiverrep.linalg import Matrix, complement, nullspace, span
from quiverrep.ray_quiver import NeedsLargerWindow


class NoFactorization(Exception):
    """No compatible family f_i with g f_i = h_i exists."""

    def __init__(self, msg, level=None):
        super().__init__(msg)
        self.level = level


@dataclass(frozen=True)
class Periodicity:
    start: int
    period: int


class _System:
    def __init__(self, F, dims, maps, periodic=None):
        self.F = F
        self.dims = list(dims)
        self.maps = list(maps)
        self.periodic = periodic
        if len(self.maps) != len(self.dims) - 1:
            raise ValueError("a chain with spaces 0..H needs H maps")
        for i, m in enumerate(self.maps):
            if m.shape != self._shape(i):
                raise ValueError(f"map {i} has shape {m.shape}, expected {self._shape(i)}")
        if periodic is not None:
            s, d = periodic.start, periodic.period
            if d < 1 or s + d > self.H:
                raise ValueError("the horizon must cover one full period after the start")
            for i in range(s + d, self.H):
                if self.maps[i] != self.maps[i - d]:
                    raise ValueError(f"map {i} breaks the declared period")

    @property
    def H(self):
        return len(self.dims) - 1

    def _fold(self, i):
        p = self.periodic
        if i <= self.H or p is None:
            return i
        return p.start + (i - p.start) % p.period

    def dim(self, i):
        if i > self.H and self.periodic is None:
            raise IndexError("index beyond the horizon")
        return self.dims[self._fold(i)]

    def map(self, i):
        if i >= self.H:
            if self.periodic is None:
                raise IndexError("index beyond the horizon")
            p = self.periodic
            i = p.start + (i - p.start) % p.period
        return self.maps[i]


class Chain(_System):
    """Direct system: maps[i]: M_i -> M_{i+1}."""

    def _shape(self, i):
        return (self.dims[i + 1], self.dims[i])

    def composite(self, i, j):
        """psi_ij: M_i -> M_j for i <= j."""
        m = Matrix.identity(self.F, self.dim(i))
        for k in range(i, j):
            m = self.map(k) @ m
        return m


class InverseChain(_System):
    """Inverse system: maps[i]: M_{i+1} -> M_i."""

    def _shape(self, i):
        return (self.dims[i], self.dims[i + 1])

    def composite(self, j, i):
        """psi_ji: M_j -> M_i for j >= i."""
        m = Matrix.identity(self.F, self.dim(j))
        for k in range(j - 1, i - 1, -1):
            m = self.map(k) @ m
        return m


def _kernel(F, m):
    if m.nrows == 0:
        return [[F.one if a == b else F.zero for a in range(m.ncols)] for b in range(m.ncols)]
    return nullspace(F, m.rows, m.ncols)


def _certified(system, fn, i, max_steps):
    """An m at which fn(i, m) has stabilised for good, on a periodic system.

    fn(level, m) must satisfy fn(l, m+1) = T_l(fn(l+1, m)) for a fixed operator T_l.
    Equality at m and m+1 on every residue level of the periodic part then
    propagates to all larger m; a level i before the periodic start settles
    start - i steps later.
    """
    p = system.periodic
    levels = [p.start + r for r in range(p.period)]
    for m in range(max_steps):
        if all(fn(lv, m) == fn(lv, m + 1) for lv in levels):
            return m + max(0, p.start - i)
    raise NeedsLargerWindow(f"no stabilisation within {max_steps} steps")


def kernel_accumulate(c, i, max_steps=256):
    """Basis of M'_i, the union of the kernels of psi_ij over all j >= i."""
    F = c.F
    if c.periodic is None:
        if i > c.H:
            raise IndexError("index beyond the horizon")
        return span(F, _kernel(F, c.composite(i, c.H)), c.dims[i])
    fn = lambda lv, m: span(F, _kernel(F, c.composite(lv, lv + m)), c.dim(lv))  # noqa: E731
    m = _certified(c, fn, i, max_steps)
    return fn(i, m)


@dataclass
class ReducedChain:
    chain: Chain
    projections: list        # M_i -> M_i / M'_i
    kernels: list            # bases of M'_i


def _quotient_data(F, basis, n):
    C = complement(F, basis, n)
    if n == 0:
        return C, Matrix.zero(F, 0, 0)
    B = Matrix.from_columns(F, n, list(basis) + C)
    proj = B.inverse().submatrix(list(range(len(basis), n)), list(range(n)))
    return C, proj


def reduced_chain(c, max_steps=256):
    """The chain M_i / M'_i with induced maps, each verified injective."""
    F = c.F
    kers, comps, projs = [], [], []
    for i in range(c.H + 1):
        K = kernel_accumulate(c, i, max_steps)
        C, P = _quotient_data(F, K, c.dims[i])
        kers.append(K)
        comps.append(C)
        projs.append(P)
    maps = []
    for i in range(c.H):
        lift = (Matrix.from_columns(F, c.dims[i], comps[i]) if comps[i]
                else Matrix.zero(F, c.dims[i], 0))
        m = projs[i + 1] @ c.maps[i] @ lift
        if not m.is_injective():
            raise AssertionError(f"induced map {i} is not injective")
        maps.append(m)
    dims = [len(x) for x in comps]
    per = c.periodic
    red = Chain(F, dims, maps, per if per and _periodic_ok(dims, maps, per) else None)
    return ReducedChain(red, projs, kers)


def _periodic_ok(dims, maps, per):
    H = len(dims) - 1
    return all(maps[i] == maps[i - per.period] for i in range(per.start + per.period, H))


@dataclass
class ColimitImage:
    dim: int                 # dim M_i / M'_i
    injection: Matrix        # M_i / M'_i -> colimit presentation
    colimit_dim: int
    stable: bool             # False: dims still growing at the horizon
    profile: list = field(default_factory=list)


def colimit_image(c, i, max_steps=256):
    """M_i / M'_i with its injection into the colimit.

    The colimit is presented as the last space of the reduced chain; on a
    periodic chain it is certified once the reduced dims stop growing over a
    full period (then the remaining induced maps are isomorphisms).
    """
    red = reduced_chain(c, max_steps).chain
    prof = list(red.dims)
    top_level = red.H
    stable = True
    if c.periodic is not None:
        p = c.periodic
        tail = prof[p.start:]
        stable = len(set(tail)) == 1 if len(tail) >= p.period else False
        if not stable:
            return ColimitImage(prof[i], red.composite(i, top_level), prof[-1], False, prof)
    return ColimitImage(prof[i], red.composite(i, top_level), prof[top_level], stable, prof)


def ml_index(ic, i, max_steps=256):
    """Least j >= i with psi_ji(M_j) equal to the stable image, and that image's basis."""
    F = ic.F
    if ic.periodic is None:
        imgs = [span(F, ic.composite(j, i).columns(), ic.dims[i]) for j in range(i, ic.H + 1)]
        final = imgs[-1]
        j = next(k for k, b in enumerate(imgs) if b == final)
        return i + j, final
    fn = lambda lv, m: span(F, ic.composite(lv + m, lv).columns(), ic.dim(lv))  # noqa: E731
    m = _certified(ic, fn, i, max_steps)
    final = fn(i, m)
    j = next(k for k in range(m + 1) if fn(i, k) == final)
    return i + j, final


@dataclass
class AffineSolutionSet:
    """{f : g f = h} as a particular solution plus a direction basis; empty when particular is None."""

    particular: Matrix | None
    directions: list

    @property
    def empty(self):
        return self.particular is None


def solution_set(g, h):
    F = g.F
    X = g.solve(h)
    if X is None:
        return AffineSolutionSet(None, [])
    ker = _kernel(F, g)
    dirs = []
    for k in ker:
        for j in range(h.ncols):
            D = Matrix.zero(F, g.ncols, h.ncols)
            for r in range(g.ncols):
                D.rows[r][j] = k[r]
            dirs.append(D)
    return AffineSolutionSet(X, dirs)


def _flat(m):
    return [x for r in m.rows for x in r]


def factor_through(c, h, g, max_steps=256):
    """Maps f_i: M_i -> U with g f_i = h_i and f_{i+1} psi_i = f_i.

    h is the list of compatible maps h_i: M_i -> V (h_{i+1} psi_i = h_i);
    g: U -> V.  Raises NoFactorization with the first unsolvable level.
    """
    F = c.F
    if len(h) != c.H + 1:
        raise ValueError("need one map h_i per level")
    for i in range(c.H):
        if h[i + 1] @ c.maps[i] != h[i]:
            raise ValueError(f"h is not compatible with the chain at level {i}")
    sols = [solution_set(g, hi) for hi in h]
    for i, s in enumerate(sols):
        if s.empty:
            raise NoFactorization(f"g f = h_{i} has no solution", level=i)
    H = c.H
    fH = sols[H].particular
    if c.periodic is not None:
        # pick f_H in the stable image of the deeper solution sets (Mittag-Leffler)
        hh = lambda j: h[c._fold(j)]  # noqa: E731

        def dir_image(lv, m):
            s = solution_set(g, hh(lv + m))
            psi = c.composite(lv, lv + m)
            return span(F, [_flat(d @ psi) for d in s.directions], g.ncols * c.dim(lv))

        m = _certified(c, dir_image, H, max_steps)
        s = solution_set(g, hh(H + m))
        fH = s.particular @ c.composite(H, H + m)
    fs = [fH @ c.composite(i, H) for i in range(H + 1)]
    for i in range(H + 1):
        assert g @ fs[i] == h[i]
    return fs
