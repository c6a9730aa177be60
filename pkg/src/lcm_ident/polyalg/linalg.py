"""Exact linear algebra: fraction-free (Bareiss) elimination over the
integers/rationals, and determinants of small symbolic matrices."""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence

from .poly import MultiPoly


def _integer_rows(rows: Sequence[Sequence]) -> list[list[int]]:
    out = []
    for row in rows:
        den = 1
        for v in row:
            if isinstance(v, Fraction):
                den = lcm(den, v.denominator)
        out.append([int(v * den) for v in row])
    return out


def bareiss_det(matrix: Sequence[Sequence]) -> int | Fraction:
    """Determinant by Bareiss elimination; exact for int/Fraction entries."""
    n = len(matrix)
    if n == 0:
        return 1
    if any(len(r) != n for r in matrix):
        raise ValueError("matrix must be square")
    scale = Fraction(1)
    rows = []
    for row in matrix:
        den = 1
        for v in row:
            if isinstance(v, Fraction):
                den = lcm(den, v.denominator)
        scale *= den
        rows.append([int(v * den) for v in row])
    a = rows
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = akk
    det = sign * a[n - 1][n - 1]
    if scale == 1:
        return det
    out = Fraction(det) / scale
    return out.numerator if out.denominator == 1 else out


def exact_rank(matrix: Sequence[Sequence]) -> int:
    """Rank of an int/Fraction matrix by fraction-free elimination."""
    if not matrix:
        return 0
    a = _integer_rows(matrix)
    n_rows, n_cols = len(a), len(a[0])
    rank = 0
    prev = 1
    for col in range(n_cols):
        pivot = next((r for r in range(rank, n_rows) if a[r][col] != 0), None)
        if pivot is None:
            continue
        a[rank], a[pivot] = a[pivot], a[rank]
        p = a[rank][col]
        for r in range(rank + 1, n_rows):
            f = a[r][col]
            row_r, row_p = a[r], a[rank]
            for c in range(col, n_cols):
                row_r[c] = (row_r[c] * p - f * row_p[c]) // prev
        prev = p
        rank += 1
        if rank == n_rows:
            break
    return rank


def symbolic_det(matrix: Sequence[Sequence[MultiPoly]]) -> MultiPoly:
    """Determinant of a square matrix of polynomials.

    Laplace expansion along rows with memoisation on the set of remaining
    columns: O(n 2^n) polynomial products, fine for n up to about 10.
    """
    n = len(matrix)
    if any(len(r) != n for r in matrix):
        raise ValueError("matrix must be square")
    if n == 0:
        return MultiPoly.const(1)
    memo: dict[int, MultiPoly] = {}

    def minor(row: int, cols: int) -> MultiPoly:
        # cols: bitmask of columns still available; rows row..n-1 remain
        if row == n:
            return MultiPoly.const(1)
        if cols in memo:
            return memo[cols]
        total = MultiPoly.const(0)
        sign = 1
        for c in range(n):
            if not cols >> c & 1:
                continue
            entry = matrix[row][c]
            if not entry.is_zero():
                term = entry * minor(row + 1, cols & ~(1 << c))
                total = total + term if sign > 0 else total - term
            sign = -sign
        memo[cols] = total
        return total

    return minor(0, (1 << n) - 1)
