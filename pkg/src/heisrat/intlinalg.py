"""Exact integer linear algebra helpers (column echelon / Hermite style)."""

from __future__ import annotations


def ext_gcd(a: int, b: int):
    """(g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def integer_solve(rows, rhs):
    """All integer solutions of A x = b.

    rows: list of m rows of length n; rhs: length m.
    Returns (x0, kernel_basis) or None when no integer solution exists.
    kernel_basis is a list of length-n integer vectors spanning ker(A).
    """
    m = len(rows)
    n = len(rows[0]) if rows else 0
    # Column representation of H = A U with U unimodular.
    h_cols = [[rows[i][j] for i in range(m)] for j in range(n)]
    u_cols = [[1 if i == j else 0 for i in range(n)] for j in range(n)]

    pivots = []
    p = 0
    for i in range(m):
        while True:
            candidates = [j for j in range(p, n) if h_cols[j][i] != 0]
            if not candidates:
                break
            j_min = min(candidates, key=lambda j: abs(h_cols[j][i]))
            h_cols[p], h_cols[j_min] = h_cols[j_min], h_cols[p]
            u_cols[p], u_cols[j_min] = u_cols[j_min], u_cols[p]
            done = True
            for j in range(p + 1, n):
                if h_cols[j][i]:
                    q = h_cols[j][i] // h_cols[p][i]
                    h_cols[j] = [h_cols[j][r] - q * h_cols[p][r] for r in range(m)]
                    u_cols[j] = [u_cols[j][r] - q * u_cols[p][r] for r in range(n)]
                    if h_cols[j][i]:
                        done = False
            if done:
                break
        if p < n and h_cols[p][i] != 0:
            if h_cols[p][i] < 0:
                h_cols[p] = [-v for v in h_cols[p]]
                u_cols[p] = [-v for v in u_cols[p]]
            pivots.append((i, p))
            p += 1
            if p == n:
                break

    # Forward solve on pivot rows.
    y = [0] * n
    for i, pj in pivots:
        acc = rhs[i] - sum(h_cols[j][i] * y[j] for j in range(pj))
        if acc % h_cols[pj][i]:
            return None
        y[pj] = acc // h_cols[pj][i]
    # Verify every row (covers rows without pivots).
    for i in range(m):
        if sum(h_cols[j][i] * y[j] for j in range(n)) != rhs[i]:
            return None
    x0 = [sum(u_cols[j][r] * y[j] for j in range(n)) for r in range(n)]
    kernel = [u_cols[j] for j in range(p, n)]
    return x0, kernel
