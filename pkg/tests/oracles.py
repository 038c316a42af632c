"""Independent reference computations used to check the library.

Nothing here calls the library's linear algebra or differentiation code.
"""

from __future__ import annotations

import cmath
from fractions import Fraction
from itertools import combinations, permutations


def perm_sign(p) -> int:
    sign, seen = 1, [False] * len(p)
    for i in range(len(p)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def leibniz_det(m):
    """Determinant by the permutation expansion (works for any ring elements)."""
    n = len(m)
    if n == 0:
        return 1
    total = 0
    for p in permutations(range(n)):
        term = perm_sign(p)
        for i in range(n):
            term = term * m[i][p[i]]
        total = total + term
    return total


def rank_by_minors(m) -> int:
    """Largest k with a nonzero k x k minor."""
    rows, cols = len(m), len(m[0]) if m else 0
    for k in range(min(rows, cols), 0, -1):
        for r in combinations(range(rows), k):
            for c in combinations(range(cols), k):
                if leibniz_det([[m[i][j] for j in c] for i in r]) != 0:
                    return k
    return 0


def wirtinger_fd(f, point, index, conjugated=False, h=1e-6):
    """Numerical d/dz or d/dzbar of a function of complex coordinates."""
    def shifted(delta):
        q = list(point)
        q[index] = q[index] + delta
        return f(q)
    dx = (shifted(h) - shifted(-h)) / (2 * h)
    dy = (shifted(1j * h) - shifted(-1j * h)) / (2 * h)
    return 0.5 * (dx + 1j * dy) if conjugated else 0.5 * (dx - 1j * dy)


def exp_i(theta):
    return cmath.exp(1j * theta)


def frac(x) -> Fraction:
    return Fraction(x)
