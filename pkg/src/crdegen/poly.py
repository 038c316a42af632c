"""Sparse polarized polynomials in z_1..z_N and formal conjugates.

A polynomial is a map from exponent vectors of length 2N to coefficients.
Slots ``0..N-1`` hold the powers of the holomorphic variables and slots
``N..2N-1`` those of the conjugates; ``z_j`` and ``conj(z_j)`` are treated
as independent indeterminates, so Wirtinger derivatives are plain partials.

Coefficients are normally :class:`GaussianRational`. The float backend
stores Python ``complex`` values in the same structure; all operations
below are written to work for both.

Variable indices in this module are 0-based.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .errors import UsageError
from .gaussian import ONE, ZERO, GaussianRational, gr

__all__ = ["PolarizedPoly", "Exponent"]

Exponent = tuple[int, ...]


def _coerce_coeff(c):
    if isinstance(c, (GaussianRational, complex)):
        return c
    if isinstance(c, (int, Fraction)):
        return gr(c)
    if isinstance(c, float):
        return complex(c)
    if isinstance(c, str):
        return gr(c)
    raise TypeError(f"unsupported coefficient {c!r}")


def _conj(c):
    return c.conjugate()


class PolarizedPoly:
    """Immutable sparse polynomial over Gaussian rationals (or complex floats)."""

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Exponent, object] | None = None):
        self.nvars = nvars
        clean: dict[Exponent, object] = {}
        if terms:
            width = 2 * nvars
            for exp, c in terms.items():
                if len(exp) != width:
                    raise ValueError(f"exponent {exp} has wrong length for {nvars} variables")
                c = _coerce_coeff(c)
                if c != 0:
                    clean[tuple(exp)] = c
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, terms: dict) -> "PolarizedPoly":
        # caller guarantees no zero coefficients
        obj = object.__new__(cls)
        obj.nvars = nvars
        obj.terms = terms
        obj._hash = None
        return obj

    # constructors ------------------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "PolarizedPoly":
        return cls._raw(nvars, {})

    @classmethod
    def const(cls, nvars: int, value) -> "PolarizedPoly":
        return cls(nvars, {(0,) * (2 * nvars): value})

    @classmethod
    def var(cls, nvars: int, index: int, conjugated: bool = False) -> "PolarizedPoly":
        _check_index(nvars, index)
        exp = [0] * (2 * nvars)
        exp[index + (nvars if conjugated else 0)] = 1
        return cls._raw(nvars, {tuple(exp): ONE})

    @classmethod
    def monomial(cls, nvars: int, exp: Sequence[int], coeff=ONE) -> "PolarizedPoly":
        return cls(nvars, {tuple(exp): coeff})

    # basic queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def min_degree(self) -> int:
        """Lowest total degree present; -1 for the zero polynomial."""
        return min((sum(e) for e in self.terms), default=-1)

    def coeff(self, exp: Sequence[int]):
        return self.terms.get(tuple(exp), ZERO)

    def constant_term(self):
        return self.terms.get((0,) * (2 * self.nvars), ZERO)

    def is_float(self) -> bool:
        return any(isinstance(c, complex) for c in self.terms.values())

    def is_holomorphic(self) -> bool:
        n = self.nvars
        return all(not any(e[n:]) for e in self.terms)

    def involves(self, index: int, conjugated: bool | None = None) -> bool:
        """Whether the variable (or its conjugate, or either if None) occurs."""
        slots = []
        if conjugated in (None, False):
            slots.append(index)
        if conjugated in (None, True):
            slots.append(index + self.nvars)
        return any(e[s] for e in self.terms for s in slots)

    def homogeneous_part(self, degree: int) -> "PolarizedPoly":
        return PolarizedPoly._raw(
            self.nvars, {e: c for e, c in self.terms.items() if sum(e) == degree})

    def truncate(self, max_degree: int) -> "PolarizedPoly":
        """Drop every term of total degree above ``max_degree``."""
        return PolarizedPoly._raw(
            self.nvars, {e: c for e, c in self.terms.items() if sum(e) <= max_degree})

    def low_part(self, below: int) -> "PolarizedPoly":
        """Terms of total degree strictly less than ``below``."""
        return self.truncate(below - 1)

    def max_abs_coeff(self) -> float:
        return max((abs(complex(c)) for c in self.terms.values()), default=0.0)

    # arithmetic --------------------------------------------------------------

    def _check(self, other: "PolarizedPoly"):
        if other.nvars != self.nvars:
            raise ValueError(f"variable rosters differ: {self.nvars} vs {other.nvars}")

    def _lift(self, other) -> "PolarizedPoly":
        if isinstance(other, PolarizedPoly):
            self._check(other)
            return other
        return PolarizedPoly.const(self.nvars, other)

    def __add__(self, other):
        if not isinstance(other, (PolarizedPoly, int, Fraction, GaussianRational, complex, float)):
            return NotImplemented
        other = self._lift(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s == 0:
                    del out[e]
                else:
                    out[e] = s
        return PolarizedPoly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return PolarizedPoly._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, (PolarizedPoly, int, Fraction, GaussianRational, complex, float)):
            return NotImplemented
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "PolarizedPoly":
        c = _coerce_coeff(c)
        if c == 0:
            return PolarizedPoly.zero(self.nvars)
        return PolarizedPoly._raw(self.nvars, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational, complex, float)):
            return self.scale(other)
        if not isinstance(other, PolarizedPoly):
            return NotImplemented
        self._check(other)
        if len(other.terms) == 1:
            ((e2, c2),) = other.terms.items()
            return PolarizedPoly._raw(self.nvars, {
                tuple(a + b for a, b in zip(e1, e2)): c1 * c2 for e1, c1 in self.terms.items()})
        acc: dict[Exponent, object] = defaultdict(lambda: ZERO)
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                acc[e] = acc[e] + c1 * c2
        return PolarizedPoly._raw(self.nvars, {e: c for e, c in acc.items() if c != 0})

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if isinstance(other, PolarizedPoly):
            return NotImplemented
        c = _coerce_coeff(other)
        return self.scale(1 / c if isinstance(c, complex) else c.inverse())

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        result = PolarizedPoly.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # structure ---------------------------------------------------------------

    def conjugate(self) -> "PolarizedPoly":
        """Swap holomorphic/conjugate slots and conjugate the coefficients."""
        n = self.nvars
        return PolarizedPoly._raw(
            n, {e[n:] + e[:n]: _conj(c) for e, c in self.terms.items()})

    def is_real(self, tol: float = 0.0) -> bool:
        diff = self - self.conjugate()
        if tol and diff.is_float():
            return diff.max_abs_coeff() <= tol
        return diff.is_zero()

    def wirtinger_d(self, index: int, conjugated: bool = False) -> "PolarizedPoly":
        """Partial derivative in ``z_index`` (or its conjugate)."""
        _check_index(self.nvars, index)
        slot = index + (self.nvars if conjugated else 0)
        out = {}
        for e, c in self.terms.items():
            k = e[slot]
            if k:
                e2 = list(e)
                e2[slot] = k - 1
                out[tuple(e2)] = c * k
        return PolarizedPoly._raw(self.nvars, out)

    def d(self, index: int, conjugated: bool = False) -> "PolarizedPoly":
        return self.wirtinger_d(index, conjugated)

    def gradient(self, conjugated: bool = False) -> list["PolarizedPoly"]:
        return [self.wirtinger_d(j, conjugated) for j in range(self.nvars)]

    def eval(self, point: Sequence):
        """Evaluate at ``point``; conjugate slots receive the conjugated entries."""
        n = self.nvars
        if len(point) != n:
            raise ValueError(f"point has {len(point)} entries, expected {n}")
        vals = [_coerce_coeff(x) for x in point]
        vals = vals + [_conj(v) for v in vals]
        cache: dict[tuple[int, int], object] = {}

        def power(slot, k):
            key = (slot, k)
            if key not in cache:
                cache[key] = vals[slot] ** k
            return cache[key]

        total = ZERO
        for e, c in self.terms.items():
            t = c
            for slot, k in enumerate(e):
                if k:
                    t = t * power(slot, k)
            total = total + t
        return total

    def eval_polarized(self, values: Sequence):
        """Evaluate with all 2N slots given independently."""
        if len(values) != 2 * self.nvars:
            raise ValueError("need one value per slot")
        total = ZERO
        for e, c in self.terms.items():
            t = c
            for v, k in zip(values, e):
                if k:
                    t = t * v ** k
            total = total + t
        return total

    def substitute(self, index: int, conjugated: bool, replacement: "PolarizedPoly") -> "PolarizedPoly":
        """Replace one slot by a polynomial over the same roster."""
        _check_index(self.nvars, index)
        self._check(replacement)
        slot = index + (self.nvars if conjugated else 0)
        buckets: dict[int, dict] = defaultdict(dict)
        for e, c in self.terms.items():
            k = e[slot]
            e2 = list(e)
            e2[slot] = 0
            buckets[k][tuple(e2)] = c
        result = PolarizedPoly.zero(self.nvars)
        for k in sorted(buckets):
            rest = PolarizedPoly._raw(self.nvars, buckets[k])
            result = result + (rest if k == 0 else rest * replacement ** k)
        return result

    def compose_with(self, nvars: int, power_of: Callable[[int, int], "PolarizedPoly"]) -> "PolarizedPoly":
        """Substitute every slot: ``power_of(slot, k)`` returns the k-th power
        of the image of that slot as a polynomial in ``nvars`` variables."""
        result = PolarizedPoly.zero(nvars)
        for e, c in self.terms.items():
            t = PolarizedPoly.const(nvars, c)
            for slot, k in enumerate(e):
                if k:
                    t = t * power_of(slot, k)
            result = result + t
        return result

    def compose(self, images: Sequence["PolarizedPoly"]) -> "PolarizedPoly":
        """``p(H, conj(H))`` for images ``H_j`` (one per variable)."""
        if len(images) != self.nvars:
            raise ValueError(f"need {self.nvars} images, got {len(images)}")
        if not images:
            return self
        m = images[0].nvars
        full = list(images) + [h.conjugate() for h in images]
        cache: dict[tuple[int, int], PolarizedPoly] = {}

        def power_of(slot, k):
            if (slot, k) not in cache:
                cache[(slot, k)] = full[slot] ** k
            return cache[(slot, k)]

        return self.compose_with(m, power_of)

    def linear_change(self, matrix: Sequence[Sequence]) -> "PolarizedPoly":
        """Pull back under ``W = W' @ matrix`` (row-vector convention)."""
        n = self.nvars
        images = []
        for j in range(n):
            h = PolarizedPoly.zero(n)
            for k in range(n):
                if matrix[k][j] != 0:
                    h = h + PolarizedPoly.var(n, k).scale(matrix[k][j])
            images.append(h)
        return self.compose(images)

    def translate(self, point: Sequence) -> "PolarizedPoly":
        """``p(Z + point)``."""
        n = self.nvars
        images = [PolarizedPoly.var(n, j) + _coerce_coeff(point[j]) for j in range(n)]
        return self.compose(images)

    def embed(self, nvars: int, mapping: Sequence[int] | None = None) -> "PolarizedPoly":
        """Re-index into a larger roster: variable j goes to ``mapping[j]``."""
        mapping = list(range(self.nvars)) if mapping is None else list(mapping)
        n = self.nvars
        out = {}
        for e, c in self.terms.items():
            e2 = [0] * (2 * nvars)
            for j in range(n):
                e2[mapping[j]] = e[j]
                e2[mapping[j] + nvars] = e[j + n]
            out[tuple(e2)] = c
        return PolarizedPoly._raw(nvars, out)

    def to_float(self) -> "PolarizedPoly":
        return PolarizedPoly._raw(self.nvars, {e: complex(c) for e, c in self.terms.items()})

    def chop(self, tol: float) -> "PolarizedPoly":
        """Drop float coefficients of modulus <= tol (exact ones untouched)."""
        return PolarizedPoly._raw(self.nvars, {
            e: c for e, c in self.terms.items()
            if not (isinstance(c, complex) and abs(c) <= tol)})

    # equality / text ---------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, PolarizedPoly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction, GaussianRational, complex)):
            return self == PolarizedPoly.const(self.nvars, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def sorted_terms(self) -> list[tuple[Exponent, object]]:
        """Terms in canonical order: by total degree, then exponent vector (descending)."""
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), tuple(-x for x in t[0])))

    def format(self, names: Sequence[str] | None = None) -> str:
        names = list(names) if names else [f"z{j + 1}" for j in range(self.nvars)]
        if not self.terms:
            return "0"
        n = self.nvars
        pieces = []
        for e, c in self.sorted_terms():
            factors = []
            for j in range(n):
                for slot, wrap in ((j, names[j]), (j + n, f"conj({names[j]})")):
                    k = e[slot]
                    if k == 1:
                        factors.append(wrap)
                    elif k > 1:
                        factors.append(f"{wrap}^{k}")
            pieces.append(_format_term(c, factors))
        text = pieces[0]
        for p in pieces[1:]:
            text += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return text

    def __str__(self):
        return self.format()

    def __repr__(self):
        return f"PolarizedPoly({self.nvars}, {self.format()!r})"


def _format_coeff(c) -> str:
    if isinstance(c, complex):
        if c.imag == 0:
            return repr(c.real)
        if c.real == 0:
            return f"{c.imag!r}*i"
        return f"({c.real!r}{'+' if c.imag >= 0 else '-'}{abs(c.imag)!r}*i)"
    if c.im == 0:
        return str(c.re)
    if c.re == 0:
        return str(c)
    return f"({c})"


def _format_term(c, factors: list[str]) -> str:
    if not factors:
        return _format_coeff(c)
    mono = "*".join(factors)
    if c == 1:
        return mono
    if c == -1:
        return f"-{mono}"
    return f"{_format_coeff(c)}*{mono}"


def _check_index(nvars: int, index: int):
    if not 0 <= index < nvars:
        raise UsageError(f"variable index {index} out of range for {nvars} variables")


def poly_sum(polys: Iterable[PolarizedPoly], nvars: int) -> PolarizedPoly:
    total = PolarizedPoly.zero(nvars)
    for p in polys:
        total = total + p
    return total
