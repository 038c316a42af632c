"""Exact and floating linear algebra used by the rank and determinant tests.

Exact rank and determinants clear denominators row by row and then run
fraction-free (Bareiss) elimination over the Gaussian integers, so every
intermediate entry is itself a minor of the scaled matrix and no rational
blowup happens mid-elimination.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .gaussian import ZERO, GaussianRational, gr
from .poly import PolarizedPoly

DEFAULT_TOL = 1e-9

GaussInt = tuple[int, int]


def _gi_mul(a: GaussInt, b: GaussInt) -> GaussInt:
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _gi_sub(a: GaussInt, b: GaussInt) -> GaussInt:
    return (a[0] - b[0], a[1] - b[1])


def _gi_exact_div(a: GaussInt, b: GaussInt) -> GaussInt:
    n = b[0] * b[0] + b[1] * b[1]
    re = a[0] * b[0] + a[1] * b[1]
    im = a[1] * b[0] - a[0] * b[1]
    q_re, r_re = divmod(re, n)
    q_im, r_im = divmod(im, n)
    if r_re or r_im:
        raise ArithmeticError("inexact Gaussian-integer division in Bareiss step")
    return (q_re, q_im)


def _integer_rows(rows: Sequence[Sequence]) -> tuple[list[list[GaussInt]], Fraction]:
    """Scale each row to Gaussian integers; also return the product of scale factors."""
    out = []
    scale = Fraction(1)
    for row in rows:
        vals = [gr(x) if not isinstance(x, GaussianRational) else x for x in row]
        den = 1
        for v in vals:
            den = math.lcm(den, v.re.denominator, v.im.denominator)
        out.append([(int(v.re * den), int(v.im * den)) for v in vals])
        scale *= den
    return out, scale


def _bareiss(m: list[list[GaussInt]]) -> tuple[int, GaussInt, int]:
    """In-place fraction-free row echelon form.

    Returns (rank, last pivot, number of row swaps). For a square full-rank
    matrix the last pivot is the determinant up to the swap sign.
    """
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    prev: GaussInt = (1, 0)
    rank = 0
    swaps = 0
    for col in range(ncols):
        if rank == nrows:
            break
        pivot = next((r for r in range(rank, nrows) if m[r][col] != (0, 0)), None)
        if pivot is None:
            continue
        if pivot != rank:
            m[rank], m[pivot] = m[pivot], m[rank]
            swaps += 1
        p = m[rank][col]
        for r in range(rank + 1, nrows):
            f = m[r][col]
            row_r, row_k = m[r], m[rank]
            for c in range(col + 1, ncols):
                row_r[c] = _gi_exact_div(_gi_sub(_gi_mul(p, row_r[c]), _gi_mul(f, row_k[c])), prev)
            row_r[col] = (0, 0)
        prev = p
        rank += 1
    return rank, prev, swaps


def exact_rank(rows: Sequence[Sequence]) -> int:
    """Rank over the Gaussian rationals (no rounding anywhere)."""
    rows = [list(r) for r in rows]
    if not rows or not rows[0]:
        return 0
    m, _ = _integer_rows(rows)
    rank, _, _ = _bareiss(m)
    return rank


def exact_det(rows: Sequence[Sequence]) -> GaussianRational:
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("determinant needs a square matrix")
    if n == 0:
        return gr(1)
    m, scale = _integer_rows(rows)
    rank, last, swaps = _bareiss(m)
    if rank < n:
        return ZERO
    d = GaussianRational(last[0], last[1]) / scale
    return -d if swaps % 2 else d


def independent_rows(rows: Sequence[Sequence]) -> list[int]:
    """Indices of a greedy maximal independent subset, scanning in order."""
    chosen: list[int] = []
    rank = 0
    for i in range(len(rows)):
        trial = [rows[j] for j in chosen] + [rows[i]]
        r = exact_rank(trial)
        if r > rank:
            chosen.append(i)
            rank = r
    return chosen


def float_rank(rows: Sequence[Sequence], tol: float = DEFAULT_TOL) -> int:
    """Numerical rank: singular values above ``tol`` (absolute)."""
    a = np.array([[complex(x) for x in r] for r in rows], dtype=complex)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(s > tol))


def to_numpy(rows: Sequence[Sequence]) -> np.ndarray:
    return np.array([[complex(x) for x in r] for r in rows], dtype=complex)


def poly_det(rows: Sequence[Sequence[PolarizedPoly]]) -> PolarizedPoly:
    """Symbolic determinant by Laplace expansion with memoised minors."""
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("determinant needs a square matrix")
    if n == 0:
        raise ValueError("empty matrix")
    nvars = rows[0][0].nvars
    memo: dict[tuple[int, ...], PolarizedPoly] = {}

    # minor built from the last len(cols) rows and the given columns
    def minor(cols: tuple[int, ...]) -> PolarizedPoly:
        if cols in memo:
            return memo[cols]
        r = n - len(cols)
        if len(cols) == 1:
            val = rows[r][cols[0]]
        else:
            val = PolarizedPoly.zero(nvars)
            for pos, c in enumerate(cols):
                entry = rows[r][c]
                if entry.is_zero():
                    continue
                sub = minor(cols[:pos] + cols[pos + 1:])
                if sub.is_zero():
                    continue
                term = entry * sub
                val = val - term if pos % 2 else val + term
        memo[cols] = val
        return val

    return minor(tuple(range(n)))


def is_positive_definite_exact(h: Sequence[Sequence]) -> bool:
    """Sylvester's criterion on a Hermitian Gaussian-rational matrix."""
    n = len(h)
    for k in range(1, n + 1):
        d = exact_det([row[:k] for row in h[:k]])
        if d.im != 0 or d.re <= 0:
            return False
    return True
