"""Nondegeneracy invariants: the spans E_l, orders, Delta determinants,
degeneracy determinants and the generators of the degeneracy ideals.

Rows are addressed by *words*: a tuple ``(i_1, ..., i_l)`` of 1-based CR
field indices stands for ``L_{i_1} ... L_{i_l}`` applied to the gradient row
(rightmost field first). Non-decreasing words are exactly the ordered
monomials ``L^alpha``, enumerated in graded lexicographic order.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement
from typing import Sequence

from .errors import CapExceeded, UsageError, ValidationError
from .gaussian import I, is_zero
from .hypersurface import (RIGID, CRField, Hypersurface, SurfacePoint,
                           sample_points, validate_point)
from .linalg import DEFAULT_TOL, exact_det, exact_rank, float_rank, poly_det
from .poly import PolarizedPoly

DEFAULT_KMAX = 6
ROW_CAP = 2000
GENERATOR_CAP = 500

Word = tuple[int, ...]


class RowTower:
    """Memoised symbolic rows ``L_{w_1} ... L_{w_l} base`` for words w."""

    def __init__(self, fields: Sequence[CRField], base: Sequence[PolarizedPoly]):
        self.fields = tuple(fields)
        self._rows: dict[Word, list[PolarizedPoly]] = {(): list(base)}

    @property
    def nfields(self) -> int:
        return len(self.fields)

    @property
    def width(self) -> int:
        return len(self._rows[()])

    def row(self, word: Word) -> list[PolarizedPoly]:
        word = tuple(word)
        if word in self._rows:
            return self._rows[word]
        for i in word:
            if not 1 <= i <= self.nfields:
                raise UsageError(f"CR field index {i} out of range 1..{self.nfields}")
        inner = self.row(word[1:])
        out = self.fields[word[0] - 1].apply_row(inner)
        self._rows[word] = out
        return out

    def words(self, level: int) -> list[Word]:
        return list(combinations_with_replacement(range(1, self.nfields + 1), level))

    def count(self, max_level: int) -> int:
        m = self.nfields
        return sum(math.comb(m + j - 1, j) for j in range(max_level + 1))


def row_tower(H: Hypersurface) -> RowTower:
    # cached on the (frozen) hypersurface instance; purely a memo
    tower = H.__dict__.get("_row_tower")
    if tower is None:
        tower = RowTower(H.cr_fields, H.gradient)
        H.__dict__["_row_tower"] = tower
    return tower


@dataclass
class SpanReport:
    point: SurfacePoint
    dims: list[int]
    basis_rows: list[list[list]] = field(default_factory=list)
    basis_words: list[list[Word]] = field(default_factory=list)


@dataclass
class OrderResult:
    kind: str  # "nondegenerate" or "not-up-to"
    k: int
    report: SpanReport

    @property
    def order(self) -> int | None:
        return self.k if self.kind == "nondegenerate" else None

    def __str__(self):
        return f"Nondegenerate({self.k})" if self.order else f"NotUpTo({self.k})"


@dataclass
class DegDetPoly:
    rows_spec: list[Word]
    det: PolarizedPoly


def _check_cr_frame(H: Hypersurface, coords: Sequence, tol: float):
    rho_d = H.rho.wirtinger_d(H.distinguished, conjugated=True)
    if is_zero(rho_d.eval(list(coords)), tol):
        raise ValidationError(
            f"CR fields degenerate at this point: d rho/d conj({H.names[H.distinguished]}) = 0")


def _ensure_point(H: Hypersurface, q) -> SurfacePoint:
    if isinstance(q, SurfacePoint) and q.validated:
        return q
    return validate_point(H, list(q))


class _SpanBuilder:
    """Incremental span of evaluated rows (exact or float rank)."""

    def __init__(self, width: int, floaty: bool, tol: float):
        self.width, self.floaty, self.tol = width, floaty, tol
        self.basis: list[list] = []
        self.words: list[Word] = []

    def _rank(self, rows):
        return float_rank(rows, self.tol) if self.floaty else exact_rank(rows)

    def offer(self, word: Word, values: list) -> bool:
        if len(self.basis) == self.width:
            return False
        if all(is_zero(v, self.tol if self.floaty else 0.0) for v in values):
            return False
        if self._rank(self.basis + [values]) > len(self.basis):
            self.basis.append(values)
            self.words.append(word)
            return True
        return False

    @property
    def dim(self) -> int:
        return len(self.basis)


def span_levels(tower: RowTower, coords: Sequence, max_level: int, *, stop_when_full: bool,
                cap: int = ROW_CAP, tol: float = DEFAULT_TOL):
    """Dimensions of the spans of evaluated rows for levels 0..max_level."""
    if tower.count(max_level) > cap:
        raise CapExceeded(f"order too large for exact mode: {tower.count(max_level)} rows "
                          f"exceed the cap of {cap}")
    coords = list(coords)
    floaty = any(isinstance(c, complex) for c in coords) or any(
        p.is_float() for p in tower.row(()))
    builder = _SpanBuilder(tower.width, floaty, tol)
    dims, basis_rows, basis_words = [], [], []
    for level in range(max_level + 1):
        if not (stop_when_full and builder.dim == tower.width):
            for word in tower.words(level):
                builder.offer(word, [p.eval(coords) for p in tower.row(word)])
        dims.append(builder.dim)
        basis_rows.append([list(r) for r in builder.basis])
        basis_words.append(list(builder.words))
        if stop_when_full and builder.dim == tower.width:
            break
    return dims, basis_rows, basis_words


def e_space(H: Hypersurface, q, l: int, *, cap: int = ROW_CAP, tol: float = DEFAULT_TOL) -> SpanReport:
    """Dimensions of E_0(q), ..., E_l(q)."""
    if l < 0:
        raise UsageError("order must be non-negative")
    point = _ensure_point(H, q)
    _check_cr_frame(H, point.coords, tol)
    dims, rows, words = span_levels(row_tower(H), point.coords, l, stop_when_full=False,
                                    cap=cap, tol=tol)
    return SpanReport(point, dims, rows, words)


def _order_from_tower(tower: RowTower, point: SurfacePoint, kmax: int, cap: int, tol: float) -> OrderResult:
    if kmax < 1:
        raise UsageError("kmax must be at least 1")
    dims, rows, words = span_levels(tower, point.coords, kmax, stop_when_full=True, cap=cap, tol=tol)
    report = SpanReport(point, dims, rows, words)
    if dims[-1] == tower.width:
        return OrderResult("nondegenerate", len(dims) - 1, report)
    return OrderResult("not-up-to", kmax, report)


def nondegeneracy_order(H: Hypersurface, q, kmax: int = DEFAULT_KMAX, *, cap: int = ROW_CAP,
                        tol: float = DEFAULT_TOL) -> OrderResult:
    """Smallest k <= kmax with dim E_k(q) = N, else NotUpTo(kmax)."""
    point = _ensure_point(H, q)
    _check_cr_frame(H, point.coords, tol)
    return _order_from_tower(row_tower(H), point, kmax, cap, tol)


@dataclass
class GenericOrderResult:
    results: list[OrderResult]
    histogram: dict[str, int]
    generic_order: int | None
    min_order: int | None
    trials: int

    @property
    def claim(self) -> str:
        if self.generic_order is None:
            return f"no finite order found in {self.trials} trials"
        return (f"generic order {self.generic_order}; no counterexample in "
                f"{self.histogram.get(str(self.generic_order), 0)} of {self.trials} trials")


def _order_task(args):
    H, point, kmax, cap, tol = args
    return nondegeneracy_order(H, point, kmax, cap=cap, tol=tol)


def generic_order(H: Hypersurface, kmax: int = DEFAULT_KMAX, trials: int = 50, seed: int = 0,
                  points: Sequence | None = None, *, jobs: int = 1, cap: int = ROW_CAP,
                  tol: float = DEFAULT_TOL) -> GenericOrderResult:
    """Order at sampled (or supplied) points; reports the most common finite order."""
    if points is None:
        points = sample_points(H, trials, seed)
    points = [_ensure_point(H, p) for p in points]
    if not points:
        raise ValidationError("no points available")
    tasks = [(H, p, kmax, cap, tol) for p in points]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_order_task, tasks))
    else:
        results = [_order_task(t) for t in tasks]
    hist = Counter(str(r.order) if r.order else f"NotUpTo({kmax})" for r in results)
    finite = Counter(r.order for r in results if r.order)
    generic = min(finite, key=lambda k: (-finite[k], k)) if finite else None
    return GenericOrderResult(results, dict(sorted(hist.items())), generic,
                              min(finite) if finite else None, len(points))


def _require_delta_shape(H: Hypersurface):
    if not H.is_graph:
        raise ValidationError("Delta determinants require graph form")
    if H.nvars - 1 < 2:
        raise ValidationError("Delta determinants require CR dimension at least 2")


def delta_rows_spec(H: Hypersurface, indices: Sequence[int]) -> list[Word]:
    n = H.nvars - 1
    idx = tuple(indices)
    if not idx:
        raise UsageError("Delta needs at least one index")
    if any(not 1 <= i <= n for i in idx):
        raise UsageError(f"Delta indices must lie in 1..{n}")
    if list(idx) != sorted(idx):
        raise UsageError("Delta indices must be non-decreasing")
    return [()] + [(j,) for j in range(1, n)] + [idx]


def delta(H: Hypersurface, indices: Sequence[int], q=None):
    """``|rho_W; L_1 rho_W; ...; L_{n-1} rho_W; L_{i_1}...L_{i_l} rho_W|`` at q or symbolically."""
    _require_delta_shape(H)
    spec = delta_rows_spec(H, indices)
    tower = row_tower(H)
    rows = [tower.row(w) for w in spec]
    if q is None:
        return poly_det(rows)
    coords = list(q.coords if isinstance(q, SurfacePoint) else q)
    values = [[p.eval(coords) for p in r] for r in rows]
    if any(isinstance(v, complex) for r in values for v in r):
        import numpy as np
        return complex(np.linalg.det(np.array(values, dtype=complex)))
    return exact_det(values)


def default_deg_det_spec(nvars: int) -> list[Word]:
    """Gradient row followed by every first-order row."""
    return [()] + [(j,) for j in range(1, nvars)]


def second_order_deg_det_spec(nvars: int) -> list[Word]:
    """Last first-order row replaced by the pure second derivative in the last field."""
    n = nvars - 1
    return [()] + [(j,) for j in range(1, n)] + [(n, n)]


def deg_det(H: Hypersurface, rows_spec: Sequence[Sequence[int]] | None = None) -> DegDetPoly:
    spec = [tuple(w) for w in (rows_spec if rows_spec is not None else default_deg_det_spec(H.nvars))]
    if len(spec) != H.nvars:
        raise UsageError(f"row spec has {len(spec)} rows, need {H.nvars}")
    tower = row_tower(H)
    return DegDetPoly(spec, poly_det([tower.row(w) for w in spec]))


def row_order_sign(nvars: int) -> int:
    """Sign relating the default degeneracy determinant to ``(i/2) phi_{n conj n}``.

    The gradient row sits first and is ``(0, ..., 0, i/2)`` to leading order,
    so expanding along it picks up ``(-1)^(N-1)``.
    """
    return -1 if (nvars - 1) % 2 else 1


def leading_term_defect(H: Hypersurface) -> PolarizedPoly:
    """``deg_det - sign*(i/2)*phi_{n conj n}``; vanishes below degree 2 for normalized H."""
    if H.distinguished != H.nvars - 1 or not H.is_graph:
        raise ValidationError("needs graph form with the distinguished variable last")
    n = H.nvars - 2
    phi_nn = H.phi.wirtinger_d(n).wirtinger_d(n, conjugated=True)
    return deg_det(H).det - phi_nn * (I / 2) * row_order_sign(H.nvars)


def on_surface_reduce(H: Hypersurface, p: PolarizedPoly) -> PolarizedPoly:
    """Eliminate ``conj(w_d)`` using ``conj(w_d) = w_d - 2i*phi`` (rigid graphs)."""
    if H.form != RIGID:
        raise ValidationError("exact on-surface reduction unavailable; use point sampling")
    d = H.distinguished
    w = PolarizedPoly.var(H.nvars, d)
    return p.substitute(d, True, w - H.phi * (2 * I))


def vanishes_on(H: Hypersurface, p: PolarizedPoly) -> bool:
    return on_surface_reduce(H, p).is_zero()


def degeneracy_ideal(H: Hypersurface, k0: int, *, cap: int = GENERATOR_CAP,
                     row_cap: int = ROW_CAP) -> list[PolarizedPoly]:
    """Determinants of every N-row choice among the rows of order <= k0."""
    tower = row_tower(H)
    if tower.count(k0) > row_cap:
        raise CapExceeded(f"{tower.count(k0)} rows exceed the cap of {row_cap}")
    words = [w for level in range(k0 + 1) for w in tower.words(level)]
    n = H.nvars
    candidates = math.comb(len(words), n)
    if candidates > cap:
        raise CapExceeded(f"{candidates} candidate generators exceed the cap of {cap}")
    gens: list[PolarizedPoly] = []
    seen: set[PolarizedPoly] = set()
    for choice in combinations(words, n):
        rows = [tower.row(w) for w in choice]
        if any(all(p.is_zero() for p in r) for r in rows):
            continue
        g = poly_det(rows)
        if g.is_zero() or g in seen or -g in seen:
            continue
        seen.add(g)
        gens.append(g)
    return gens


def generators_vanish_at(gens: Sequence[PolarizedPoly], q, tol: float = 0.0) -> bool:
    coords = list(q.coords if isinstance(q, SurfacePoint) else q)
    return all(is_zero(g.eval(coords), tol) for g in gens)
