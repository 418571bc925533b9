# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled prime-field kernels: row reduction and matrix products mod p (p < 2**31)."""

from libc.stdlib cimport malloc, free

ctypedef long long i64


cdef inline i64 _inv(i64 a, i64 p):
    cdef i64 t = 0, newt = 1, r = p, newr = a % p, q, tmp
    while newr != 0:
        q = r // newr
        tmp = t - q * newt
        t = newt
        newt = tmp
        tmp = r - q * newr
        r = newr
        newr = tmp
    if t < 0:
        t += p
    return t


def rref_modp(rows, Py_ssize_t ncols, i64 p):
    """Reduced row echelon form of `rows` over GF(p).

    Returns (nonzero rows of the RREF, pivot columns).
    """
    cdef Py_ssize_t m = len(rows)
    cdef Py_ssize_t i, j, c, r = 0, piv
    cdef i64 f, inv, v
    cdef i64* a
    if m == 0 or ncols == 0:
        return [], []
    a = <i64*> malloc(m * ncols * sizeof(i64))
    if a == NULL:
        raise MemoryError()
    try:
        for i in range(m):
            row = rows[i]
            for j in range(ncols):
                v = row[j] % p
                a[i * ncols + j] = v
        pivots = []
        for c in range(ncols):
            if r == m:
                break
            piv = -1
            for i in range(r, m):
                if a[i * ncols + c] != 0:
                    piv = i
                    break
            if piv < 0:
                continue
            if piv != r:
                for j in range(ncols):
                    v = a[piv * ncols + j]
                    a[piv * ncols + j] = a[r * ncols + j]
                    a[r * ncols + j] = v
            inv = _inv(a[r * ncols + c], p)
            for j in range(c, ncols):
                a[r * ncols + j] = (a[r * ncols + j] * inv) % p
            for i in range(m):
                if i == r:
                    continue
                f = a[i * ncols + c]
                if f == 0:
                    continue
                for j in range(c, ncols):
                    v = (a[i * ncols + j] - f * a[r * ncols + j]) % p
                    if v < 0:
                        v += p
                    a[i * ncols + j] = v
            pivots.append(c)
            r += 1
        out = [[a[i * ncols + j] for j in range(ncols)] for i in range(r)]
    finally:
        free(a)
    return out, pivots


def matmul_modp(A, B, Py_ssize_t n, Py_ssize_t k, Py_ssize_t m, i64 p):
    """Product of an n x k and a k x m matrix over GF(p), as nested lists."""
    cdef Py_ssize_t i, j, l
    cdef i64 s
    cdef i64* a
    cdef i64* b
    if n == 0 or m == 0:
        return [[0] * m for _ in range(n)]
    if k == 0:
        return [[0] * m for _ in range(n)]
    a = <i64*> malloc(n * k * sizeof(i64))
    b = <i64*> malloc(k * m * sizeof(i64))
    if a == NULL or b == NULL:
        free(a)
        free(b)
        raise MemoryError()
    try:
        for i in range(n):
            row = A[i]
            for l in range(k):
                a[i * k + l] = row[l] % p
        for l in range(k):
            row = B[l]
            for j in range(m):
                b[l * m + j] = row[j] % p
        out = []
        for i in range(n):
            orow = []
            for j in range(m):
                s = 0
                for l in range(k):
                    s = (s + a[i * k + l] * b[l * m + j]) % p
                orow.append(s)
            out.append(orow)
    finally:
        free(a)
        free(b)
    return out
