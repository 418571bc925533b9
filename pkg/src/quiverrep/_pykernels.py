"""Pure-Python twins of the compiled prime-field kernels.

Same signatures and results as ``_kernels``; used when the extension is not
built or when QUIVERREP_PURE is set.
"""


def rref_modp(rows, ncols, p):
    m = len(rows)
    if m == 0 or ncols == 0:
        return [], []
    a = [[x % p for x in row] for row in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        if r == m:
            break
        piv = next((i for i in range(r, m) if a[i][c]), -1)
        if piv < 0:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = pow(a[r][c], p - 2, p)
        prow = [(x * inv) % p for x in a[r]]
        a[r] = prow
        for i in range(m):
            if i != r:
                f = a[i][c]
                if f:
                    row = a[i]
                    for j in range(c, ncols):
                        row[j] = (row[j] - f * prow[j]) % p
        pivots.append(c)
        r += 1
    return a[:r], pivots


def matmul_modp(A, B, n, k, m, p):
    if k == 0:
        return [[0] * m for _ in range(n)]
    cols = list(zip(*B)) if m else []
    return [[sum(x * y for x, y in zip(row, col)) % p for col in cols] for row in A]
