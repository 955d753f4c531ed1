"""Small exact linear algebra over Fractions (lists of lists).

Sizes here are at most a few dozen, so plain Gaussian elimination is
fast enough and keeps every intermediate exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def _copy(rows: Sequence[Sequence]) -> list[list]:
    return [list(r) for r in rows]


def det(rows: Sequence[Sequence]):
    """Determinant by fraction-exact elimination (works for floats too)."""
    m = _copy(rows)
    n = len(m)
    if any(len(r) != n for r in m):
        raise ValueError("determinant of a non-square matrix")
    sign = 1
    result = 1
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return m[0][0] * 0 if n else 1
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            sign = -sign
        p = m[col][col]
        result *= p
        for r in range(col + 1, n):
            f = m[r][col]
            if f == 0:
                continue
            f = f / p
            row_r, row_c = m[r], m[col]
            for c in range(col, n):
                row_r[c] -= f * row_c[c]
    return sign * result


def inverse(rows: Sequence[Sequence]) -> list[list]:
    n = len(rows)
    m = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular matrix")
        m[col], m[pivot] = m[pivot], m[col]
        p = m[col][col]
        m[col] = [v / p for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return [r[n:] for r in m]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    """Exact product that skips zero entries; most matrices here are sparse."""
    if not a or not b:
        return [[] for _ in a]
    width = len(b[0])
    zero = a[0][0] * b[0][0] * 0
    sparse_b = [[(j, v) for j, v in enumerate(row) if v] for row in b]
    out = []
    for row in a:
        acc = [zero] * width
        for k, x in enumerate(row):
            if x:
                for j, v in sparse_b[k]:
                    acc[j] = acc[j] + x * v
        out.append(acc)
    return out


def transpose(a: Sequence[Sequence]) -> list[list]:
    return [list(c) for c in zip(*a)]


def congruence_diagonalize(sym: Sequence[Sequence]) -> tuple[list, list[list]]:
    """Return ``(d, T)`` with ``T @ S @ T^T == diag(d)`` exactly.

    Symmetric elimination; when every remaining diagonal entry vanishes
    but an off-diagonal entry does not, row/column q is added to p first,
    which creates the nonzero pivot ``2*S[p][q]``.
    """
    m = _copy(sym)
    n = len(m)
    t = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]

    def add_multiple(dst, src, f):
        # row op on m and t, then the matching column op on m
        m[dst] = [a + f * b for a, b in zip(m[dst], m[src])]
        for row in m:
            row[dst] += f * row[src]
        t[dst] = [a + f * b for a, b in zip(t[dst], t[src])]

    def swap(p, q):
        m[p], m[q] = m[q], m[p]
        for row in m:
            row[p], row[q] = row[q], row[p]
        t[p], t[q] = t[q], t[p]

    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][r] != 0), None)
        if pivot is None:
            pair = next(
                ((p, q) for p in range(col, n) for q in range(p + 1, n) if m[p][q] != 0), None
            )
            if pair is None:
                break
            p, q = pair
            add_multiple(p, q, 1)
            pivot = p
        if pivot != col:
            swap(col, pivot)
        p = m[col][col]
        for r in range(col + 1, n):
            if m[r][col] != 0:
                add_multiple(r, col, -m[r][col] / p)
    return [m[i][i] for i in range(n)], t


def inertia(sym: Sequence[Sequence]) -> tuple[int, int, int]:
    """(positive, negative, zero) counts of an exact symmetric matrix."""
    d, _ = congruence_diagonalize(sym)
    pos = sum(1 for v in d if v > 0)
    neg = sum(1 for v in d if v < 0)
    return pos, neg, len(d) - pos - neg


def rank(rows: Sequence[Sequence]) -> int:
    m = _copy(rows)
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        for i in range(r + 1, len(m)):
            if m[i][col] != 0:
                f = m[i][col] / m[r][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def solve_sparse(rows: Sequence[dict], rhs: Sequence, ncols: int) -> list | None:
    """A solution of ``sum_j rows[i][j] x_j = rhs[i]`` or None if inconsistent.

    Rows are ``{column: value}`` dicts.  Elimination runs to reduced echelon
    form with pivots taken in column order and free columns set to zero, so
    the answer is deterministic and supported on the earliest columns.
    """
    work = [(dict(r), b) for r, b in zip(rows, rhs) if r or b]
    pivots: dict[int, tuple[dict, object]] = {}
    for r, b in work:
        # reduce against existing pivots
        for col in sorted(c for c in r if c in pivots):
            if col not in r:
                continue
            f = r[col]
            prow, pb = pivots[col]
            for c, v in prow.items():
                nv = r.get(c, 0) - f * v
                if nv:
                    r[c] = nv
                else:
                    r.pop(c, None)
            b = b - f * pb
        if not r:
            if b:
                return None
            continue
        col = min(r)
        lead = r[col]
        r = {c: v / lead for c, v in r.items()}
        b = b / lead
        # keep pivot rows fully reduced
        for other, (orow, ob) in list(pivots.items()):
            if col in orow:
                f = orow[col]
                nrow = dict(orow)
                for c, v in r.items():
                    nv = nrow.get(c, 0) - f * v
                    if nv:
                        nrow[c] = nv
                    else:
                        nrow.pop(c, None)
                pivots[other] = (nrow, ob - f * b)
        pivots[col] = (r, b)
    x = [Fraction(0)] * ncols
    for col, (_, b) in pivots.items():
        x[col] = b
    return x
