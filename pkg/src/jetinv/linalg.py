"""Small exact linear algebra over mpq, and determinants over commutative rings."""

from __future__ import annotations

from gmpy2 import mpq

from .poly import rat


def rref(matrix):
    """Reduced row echelon form over mpq.  Returns (rref, pivot columns)."""
    rows = [[rat(v) for v in row] for row in matrix]
    if not rows:
        return rows, []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                factor = rows[i][c]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def rank(matrix) -> int:
    return len(rref(matrix)[1])


def solve_exact(matrix, rhs):
    """One exact solution of A x = b, or None if inconsistent.

    A is m x n (rows of rationals), b length m.
    """
    m = len(matrix)
    n = len(matrix[0]) if m else 0
    aug = [list(matrix[i]) + [rhs[i]] for i in range(m)]
    red, pivots = rref(aug)
    for row in red:
        if all(v == 0 for v in row[:n]) and row[n] != 0:
            return None
    x = [mpq(0)] * n
    for r, c in enumerate(pivots):
        if c < n:
            x[c] = red[r][n]
    return x


def in_span(vectors, target) -> bool:
    """Is target a Q-linear combination of the given vectors?"""
    if not vectors:
        return all(v == 0 for v in target)
    matrix = [[vec[i] for vec in vectors] for i in range(len(target))]
    return solve_exact(matrix, list(target)) is not None


def det_ring(matrix, one, zero):
    """Determinant over any commutative ring via subset dynamic programming.

    Elements need +, -, * only (no division).  O(2^n * n) ring operations.
    """
    n = len(matrix)
    if n == 0:
        return one
    prev = {0: one}
    for r in range(n):
        row = matrix[r]
        nxt: dict[int, object] = {}
        for mask, value in prev.items():
            sign = 1
            for c in range(n):
                bit = 1 << c
                if mask & bit:
                    sign = -sign
                    continue
                entry = row[c]
                term = value * entry if sign > 0 else -(value * entry)
                key = mask | bit
                acc = nxt.get(key)
                nxt[key] = term if acc is None else acc + term
        prev = nxt
    return prev[(1 << n) - 1]


def det_exact(matrix) -> mpq:
    """Exact rational determinant (fraction-free via the ring DP)."""
    return det_ring([[rat(v) for v in row] for row in matrix], mpq(1), mpq(0))
