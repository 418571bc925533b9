"""Exact dense linear algebra over the rationals or a prime field.

Matrices act on column vectors. Entries are ``Fraction`` over Q and plain
ints in ``range(p)`` over GF(p). Prime-field row reduction and products run
in the compiled kernel when it is available (see ``BACKEND``); rational row
reduction uses gmpy2 rationals internally when gmpy2 is installed.
"""

from __future__ import annotations

import os
import random
from fractions import Fraction

if os.environ.get("QUIVERREP_PURE"):
    from quiverrep import _pykernels as _k
    BACKEND = "python"
else:
    try:
        from quiverrep import _kernels as _k
        BACKEND = "cython"
    except ImportError:  # extension not built
        from quiverrep import _pykernels as _k
        BACKEND = "python"

try:
    from gmpy2 import mpq as _mpq
except ImportError:
    _mpq = None


def _is_prime(n):
    if n < 2:
        return False
    for d in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % d == 0:
            return n == d
    # deterministic Miller-Rabin for n < 3.3e24
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class Field:
    """The rationals (``p is None``) or the prime field GF(p) with p < 2**31."""

    __slots__ = ("p",)

    def __init__(self, p=None):
        if p is not None:
            p = int(p)
            if not _is_prime(p) or p >= 2 ** 31:
                raise ValueError(f"field characteristic must be a prime below 2**31, got {p}")
        self.p = p

    @classmethod
    def parse(cls, text):
        text = text.strip()
        if text in ("q", "Q", "rationals"):
            return cls(None)
        if text.startswith("fp:"):
            return cls(int(text[3:]))
        raise ValueError(f"unknown field {text!r} (expected q or fp:<p>)")

    def __eq__(self, other):
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self):
        return hash(("Field", self.p))

    def __repr__(self):
        return "q" if self.p is None else f"fp:{self.p}"

    @property
    def zero(self):
        return Fraction(0) if self.p is None else 0

    @property
    def one(self):
        return Fraction(1) if self.p is None else 1

    def __call__(self, x):
        if self.p is None:
            if isinstance(x, str):
                return Fraction(x.strip())
            return Fraction(x)
        if isinstance(x, str):
            x = x.strip()
            if "/" in x:
                num, den = x.split("/")
                return int(num) * pow(int(den), self.p - 2, self.p) % self.p
            return int(x) % self.p
        if isinstance(x, Fraction):
            return x.numerator * pow(x.denominator, self.p - 2, self.p) % self.p
        return int(x) % self.p

    def inv(self, x):
        if self.p is None:
            return 1 / Fraction(x)
        if x % self.p == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(x, self.p - 2, self.p)

    def fmt(self, x):
        return str(x)

    def random(self, rng, lo=-3, hi=3):
        """A random element; small integers over Q keep entries readable."""
        if self.p is None:
            return Fraction(rng.randint(lo, hi))
        return rng.randrange(self.p)


Q = Field(None)


# ---------------------------------------------------------------- row reduction

def _rref_q(rows, ncols):
    if _mpq is not None:
        a = [[_mpq(x.numerator, x.denominator) if type(x) is Fraction else _mpq(x) for x in r]
             for r in rows]
        red, piv = _rref_rows(a, ncols, _mpq(1))
        return [[Fraction(int(x.numerator), int(x.denominator)) for x in r] for r in red], piv
    a = [[x if type(x) is Fraction else Fraction(x) for x in r] for r in rows]
    return _rref_rows(a, ncols, Fraction(1))


def _rref_rows(a, ncols, one):
    m = len(a)
    pivots = []
    r = 0
    for c in range(ncols):
        if r == m:
            break
        piv = next((i for i in range(r, m) if a[i][c] != 0), -1)
        if piv < 0:
            continue
        a[r], a[piv] = a[piv], a[r]
        lead = a[r][c]
        prow = a[r]
        if lead != one:
            prow = [x / lead for x in prow]
            a[r] = prow
        for i in range(m):
            if i != r:
                f = a[i][c]
                if f != 0:
                    row = a[i]
                    for j in range(c, ncols):
                        if prow[j] != 0:
                            row[j] = row[j] - f * prow[j]
        pivots.append(c)
        r += 1
    return a[:r], pivots


def rref(F, rows, ncols):
    """Reduced row echelon form: (nonzero rows, pivot columns)."""
    if not rows or ncols == 0:
        return [], []
    if F.p is None:
        return _rref_q(rows, ncols)
    if any(type(x) is not int for r in rows for x in r):
        rows = [[F(x) for x in r] for r in rows]
    return _k.rref_modp(rows, ncols, F.p)


def _matmul(F, A, B, n, k, m):
    if F.p is not None:
        return _k.matmul_modp(A, B, n, k, m, F.p)
    if k == 0:
        return [[Fraction(0)] * m for _ in range(n)]
    cols = list(zip(*B))
    return [[sum((x * y for x, y in zip(row, col) if x and y), Fraction(0)) for col in cols]
            for row in A]


# ---------------------------------------------------------------- matrices

class Matrix:
    """Immutable exact matrix; ``rows`` is a list of row lists."""

    __slots__ = ("F", "nrows", "ncols", "rows")

    def __init__(self, F, nrows, ncols, rows=None):
        self.F = F
        self.nrows = nrows
        self.ncols = ncols
        if rows is None:
            z = F.zero
            rows = [[z] * ncols for _ in range(nrows)]
        else:
            rows = [[F(x) for x in r] for r in rows]
            if len(rows) != nrows or any(len(r) != ncols for r in rows):
                raise ValueError("matrix shape does not match its data")
        self.rows = rows

    @classmethod
    def _raw(cls, F, nrows, ncols, rows):
        m = cls.__new__(cls)
        m.F, m.nrows, m.ncols, m.rows = F, nrows, ncols, rows
        return m

    @classmethod
    def zero(cls, F, nrows, ncols):
        return cls(F, nrows, ncols)

    @classmethod
    def identity(cls, F, n):
        z, o = F.zero, F.one
        return cls._raw(F, n, n, [[o if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def from_columns(cls, F, nrows, cols):
        cols = [[F(x) for x in c] for c in cols]
        rows = [[c[i] for c in cols] for i in range(nrows)]
        return cls._raw(F, nrows, len(cols), rows)

    @classmethod
    def random(cls, F, nrows, ncols, rng, density=1.0):
        z = F.zero
        rows = [[F.random(rng) if rng.random() < density else z for _ in range(ncols)]
                for _ in range(nrows)]
        return cls._raw(F, nrows, ncols, rows)

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def __repr__(self):
        return f"Matrix({self.nrows}x{self.ncols}, {self.rows})"

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.shape == other.shape
                and self.rows == other.rows)

    def __hash__(self):
        return hash((self.shape, tuple(tuple(r) for r in self.rows)))

    def entry(self, i, j):
        return self.rows[i][j]

    def column(self, j):
        return [r[j] for r in self.rows]

    def columns(self):
        return [self.column(j) for j in range(self.ncols)]

    def T(self):
        return Matrix._raw(self.F, self.ncols, self.nrows,
                           [list(c) for c in zip(*self.rows)] if self.nrows else
                           [[] for _ in range(self.ncols)])

    def __matmul__(self, other):
        if self.ncols != other.nrows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        rows = _matmul(self.F, self.rows, other.rows, self.nrows, self.ncols, other.ncols)
        return Matrix._raw(self.F, self.nrows, other.ncols, rows)

    def apply(self, vec):
        """Matrix times a column vector given as a list."""
        F = self.F
        if F.p is None:
            return [sum((a * b for a, b in zip(r, vec) if a and b), Fraction(0)) for r in self.rows]
        p = F.p
        return [sum(a * b for a, b in zip(r, vec)) % p for r in self.rows]

    def _combine(self, other, sign):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        F = self.F
        if F.p is None:
            rows = [[a + sign * b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)]
        else:
            p = F.p
            rows = [[(a + sign * b) % p for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)]
        return Matrix._raw(F, self.nrows, self.ncols, rows)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        F = self.F
        c = F(c)
        if F.p is None:
            rows = [[c * a for a in r] for r in self.rows]
        else:
            rows = [[c * a % F.p for a in r] for r in self.rows]
        return Matrix._raw(F, self.nrows, self.ncols, rows)

    def is_zero(self):
        return all(x == 0 for r in self.rows for x in r)

    def hstack(self, other):
        if self.nrows != other.nrows:
            raise ValueError("hstack needs equal row counts")
        return Matrix._raw(self.F, self.nrows, self.ncols + other.ncols,
                           [a + b for a, b in zip(self.rows, other.rows)])

    def vstack(self, other):
        if self.ncols != other.ncols:
            raise ValueError("vstack needs equal column counts")
        return Matrix._raw(self.F, self.nrows + other.nrows, self.ncols,
                           [list(r) for r in self.rows] + [list(r) for r in other.rows])

    def submatrix(self, rows, cols):
        return Matrix._raw(self.F, len(rows), len(cols),
                           [[self.rows[i][j] for j in cols] for i in rows])

    def rank(self):
        return len(rref(self.F, self.rows, self.ncols)[1])

    def kernel(self):
        """Basis of the null space as the columns of a matrix (canonical echelon basis)."""
        return Matrix.from_columns(self.F, self.ncols, nullspace(self.F, self.rows, self.ncols))

    def image(self):
        """Basis of the column space as the columns of a matrix (canonical echelon basis)."""
        return Matrix.from_columns(self.F, self.nrows, span(self.F, self.columns(), self.nrows))

    def is_injective(self):
        return self.rank() == self.ncols

    def is_surjective(self):
        return self.rank() == self.nrows

    def is_invertible(self):
        return self.nrows == self.ncols and self.rank() == self.nrows

    def solve(self, B):
        """Some X with self @ X = B, or None when the system is inconsistent."""
        X = solve(self.F, self.rows, self.ncols, B.rows, B.ncols)
        if X is None:
            return None
        return Matrix._raw(self.F, self.ncols, B.ncols, X)

    def inverse(self):
        if not self.is_invertible():
            raise ZeroDivisionError("matrix is singular")
        return self.solve(Matrix.identity(self.F, self.nrows))

    def power(self, n):
        out = Matrix.identity(self.F, self.nrows)
        base = self
        while n:
            if n & 1:
                out = out @ base
            base = base @ base
            n >>= 1
        return out


def block_diag(F, blocks):
    n = sum(b.nrows for b in blocks)
    m = sum(b.ncols for b in blocks)
    out = Matrix.zero(F, n, m)
    i = j = 0
    for b in blocks:
        for r in range(b.nrows):
            out.rows[i + r][j:j + b.ncols] = b.rows[r]
        i += b.nrows
        j += b.ncols
    return out


# ---------------------------------------------------------------- subspace helpers
# Subspaces of F^n are lists of vectors; canonical bases are the RREF rows.

def span(F, vecs, n):
    """Canonical (reduced echelon) basis of the span of the given vectors in F^n."""
    vecs = [v for v in vecs]
    if not vecs:
        return []
    return rref(F, vecs, n)[0]


def nullspace(F, rows, ncols):
    """Canonical basis of {x : rows @ x = 0}."""
    R, piv = rref(F, rows, ncols) if rows else ([], [])
    pivset = set(piv)
    basis = []
    z, o = F.zero, F.one
    for f in range(ncols):
        if f in pivset:
            continue
        v = [z] * ncols
        v[f] = o
        for i, c in enumerate(piv):
            x = R[i][f]
            if x:
                v[c] = -x if F.p is None else (-x) % F.p
        basis.append(v)
    return basis


def solve(F, A, ncols, B, bcols):
    """Solve A X = B exactly; returns X (ncols x bcols rows) or None."""
    m = len(A)
    aug = [list(A[i]) + list(B[i]) for i in range(m)]
    R, piv = rref(F, aug, ncols + bcols) if aug else ([], [])
    if any(c >= ncols for c in piv):
        return None
    z = F.zero
    X = [[z] * bcols for _ in range(ncols)]
    for i, c in enumerate(piv):
        X[c] = list(R[i][ncols:])
    return X


def rank_of(F, vecs, n):
    return len(span(F, vecs, n))


def contains(F, basis, vec, n):
    """True iff vec lies in the span of basis."""
    if all(x == 0 for x in vec):
        return True
    return rank_of(F, list(basis) + [vec], n) == rank_of(F, basis, n)


def intersect(F, U, W, n):
    """Canonical basis of span(U) ∩ span(W)."""
    if not U or not W:
        return []
    # solve sum a_i u_i = sum b_j w_j
    cols = list(U) + [[-x if F.p is None else (-x) % F.p for x in w] for w in W]
    rows = [[c[i] for c in cols] for i in range(n)]
    ker = nullspace(F, rows, len(cols))
    vecs = []
    for k in ker:
        v = [F.zero] * n
        for a, u in zip(k[:len(U)], U):
            if a:
                v = [x + a * y for x, y in zip(v, u)]
        if F.p is not None:
            v = [x % F.p for x in v]
        vecs.append(v)
    return span(F, vecs, n)


def complement(F, basis, n):
    """Echelon complement: standard basis vectors at the non-pivot columns of span(basis)."""
    R, piv = rref(F, basis, n) if basis else ([], [])
    pivset = set(piv)
    out = []
    for j in range(n):
        if j not in pivset:
            v = [F.zero] * n
            v[j] = F.one
            out.append(v)
    return out


def coordinates(F, basis, vec, n):
    """Coefficients c with sum c_i basis_i = vec, or None."""
    k = len(basis)
    A = [[basis[j][i] for j in range(k)] for i in range(n)]
    X = solve(F, A, k, [[x] for x in vec], 1)
    if X is None:
        return None
    return [r[0] for r in X]


def random_vector(F, n, rng):
    return [F.random(rng) for _ in range(n)]


def make_rng(seed):
    return random.Random(seed)
