"""Candidate CR maps: composition with target defining functions, residual
checks, map nondegeneracy and the order-2 certificate at a normalized base
point."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import UsageError, ValidationError
from .gaussian import I, ZERO, GaussianRational, gr, is_zero, isqrt_fraction
from .hypersurface import GRAPH, RIGID, Hypersurface, SurfacePoint, validate_point
from .linalg import DEFAULT_TOL, exact_rank, float_rank
from .nondegen import (DEFAULT_KMAX, ROW_CAP, OrderResult, RowTower, _check_cr_frame,
                       _order_from_tower, on_surface_reduce)
from .poly import PolarizedPoly


@dataclass(frozen=True)
class Radical:
    """``base ** exponent`` for a holomorphic polynomial base and rational exponent."""

    base: PolarizedPoly
    exponent: Fraction

    def __post_init__(self):
        if not self.base.is_holomorphic():
            raise ValidationError("radical base must be holomorphic")
        if self.exponent <= 0:
            raise ValidationError("radical exponent must be positive")

    def power(self, k: int, conjugated: bool = False) -> PolarizedPoly:
        e = k * self.exponent
        if e.denominator != 1:
            raise ValidationError("map not expressible: fractional exponent survives composition "
                                  f"({k} * {self.exponent} = {e})")
        p = self.base ** int(e)
        return p.conjugate() if conjugated else p


Component = PolarizedPoly | Radical


@dataclass(frozen=True)
class MapJet:
    components: tuple
    source_nvars: int
    basepoint: SurfacePoint | None = None
    name: str = "F"

    def __post_init__(self):
        for c in self.components:
            base = c.base if isinstance(c, Radical) else c
            if base.nvars != self.source_nvars:
                raise UsageError(f"component over {base.nvars} variables, map source has "
                                 f"{self.source_nvars}")
            if not base.is_holomorphic():
                raise ValidationError(f"map {self.name} has a non-holomorphic component")

    @property
    def target_nvars(self) -> int:
        return len(self.components)

    @property
    def is_polynomial(self) -> bool:
        return all(isinstance(c, PolarizedPoly) for c in self.components)

    def polys(self) -> list[PolarizedPoly]:
        if not self.is_polynomial:
            raise ValidationError(f"map {self.name} has radical components; "
                                  "jet and nondegeneracy operations need polynomials")
        return list(self.components)

    def at(self, point: Sequence) -> list:
        return [c.eval(list(point)) for c in self.polys()]

    def jacobian_at(self, point: Sequence) -> list[list]:
        """``J[j][i] = d F_j / d z_i`` at ``point``."""
        return [[c.wirtinger_d(i).eval(list(point)) for i in range(self.source_nvars)]
                for c in self.polys()]

    def compose_linear(self, matrix: Sequence[Sequence]) -> "MapJet":
        """``F @ matrix`` in the row-vector convention: new_k = sum_j F_j m[j][k]."""
        comps = self.polys()
        n = len(comps)
        out = []
        for k in range(n):
            acc = PolarizedPoly.zero(self.source_nvars)
            for j in range(n):
                if matrix[j][k] != 0:
                    acc = acc + comps[j].scale(matrix[j][k])
            out.append(acc)
        return MapJet(tuple(out), self.source_nvars, self.basepoint, self.name)

    def precompose(self, images: Sequence[PolarizedPoly], basepoint=None) -> "MapJet":
        """``F(G(Z))`` for a holomorphic polynomial map G."""
        comps = [c.compose(list(images)) for c in self.polys()]
        return MapJet(tuple(comps), images[0].nvars, basepoint, self.name)


def compose_defining(F: MapJet, Mp: Hypersurface) -> PolarizedPoly:
    """``rho'(F, conj F)`` over the source variables."""
    if F.target_nvars != Mp.nvars:
        raise UsageError(f"map has {F.target_nvars} components, target lives in C^{Mp.nvars}")
    return pullback(Mp.rho, F)


def pullback(p: PolarizedPoly, F: MapJet) -> PolarizedPoly:
    n = p.nvars
    cache: dict[tuple[int, int], PolarizedPoly] = {}

    def power_of(slot: int, k: int) -> PolarizedPoly:
        key = (slot, k)
        if key not in cache:
            conj = slot >= n
            comp = F.components[slot - n if conj else slot]
            if isinstance(comp, Radical):
                cache[key] = comp.power(k, conj)
            else:
                cache[key] = (comp.conjugate() if conj else comp) ** k
        return cache[key]

    return p.compose_with(F.source_nvars, power_of)


def _leading(p: PolarizedPoly):
    # graded reverse lexicographic leading term
    def key(e):
        return (sum(e), tuple(-x for x in reversed(e)))
    e = max(p.terms, key=key)
    return e, p.terms[e]


def divide(f: PolarizedPoly, g: PolarizedPoly) -> tuple[PolarizedPoly, PolarizedPoly]:
    """Multivariate division by one polynomial; remainder 0 iff g divides f."""
    if g.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    n = f.nvars
    lg, cg = _leading(g)
    inv = (1 / cg) if isinstance(cg, complex) else cg.inverse()
    q, r, p = PolarizedPoly.zero(n), {}, f
    while not p.is_zero():
        lp, cp = _leading(p)
        if all(a >= b for a, b in zip(lp, lg)):
            t = PolarizedPoly.monomial(n, [a - b for a, b in zip(lp, lg)], cp * inv)
            q = q + t
            p = p - t * g
        else:
            r[lp] = cp
            p = p - PolarizedPoly.monomial(n, lp, cp)
    return q, PolarizedPoly(n, r)


def graph_series_reduce(M: Hypersurface, p: PolarizedPoly, order: int) -> PolarizedPoly:
    """Restrict p to a graph-form M through total degree ``order`` by solving
    ``conj(w_d) = w_d - 2i*phi`` as a truncated fixed point."""
    d = M.distinguished
    w = PolarizedPoly.var(M.nvars, d)
    phi = M.phi
    s = w
    for _ in range(order + 1):
        s = (w - phi.substitute(d, True, s) * (2 * I)).truncate(order)
    return p.substitute(d, True, s).truncate(order)


@dataclass
class MapResidual:
    mode: str
    composed: PolarizedPoly
    residual: PolarizedPoly
    vanishes: bool
    lowest_degree: int | None
    quotient: PolarizedPoly | None = None
    jet_order: int | None = None


def check_map(M: Hypersurface, Mp: Hypersurface, F: MapJet, jet_order: int = 8,
              tol: float = 0.0) -> MapResidual:
    """Does F send M into M'? Exact for rigid or general M, to ``jet_order`` for graphs."""
    composed = compose_defining(F, Mp)
    quotient = None
    if M.form == RIGID:
        mode = "rigid-substitution"
        residual = on_surface_reduce(M, composed)
    elif M.form == GRAPH:
        mode = "graph-series"
        residual = graph_series_reduce(M, composed, jet_order)
    else:
        mode = "ideal-division"
        quotient, residual = divide(composed, M.rho)
    if tol:
        residual = residual.chop(tol)
    low = residual.min_degree()
    return MapResidual(mode, composed, residual, residual.is_zero(),
                       None if residual.is_zero() else low, quotient,
                       jet_order if mode == "graph-series" else None)


def pulled_back_tower(M: Hypersurface, Mp: Hypersurface, F: MapJet) -> RowTower:
    if F.target_nvars != Mp.nvars:
        raise UsageError(f"map has {F.target_nvars} components, target lives in C^{Mp.nvars}")
    row = [pullback(g, F) for g in Mp.gradient]
    return RowTower(M.cr_fields, row)


def map_nondegeneracy_order(M: Hypersurface, Mp: Hypersurface, F: MapJet,
                            kmax: int = DEFAULT_KMAX, basepoint=None, *, cap: int = ROW_CAP,
                            tol: float = DEFAULT_TOL) -> OrderResult:
    F.polys()
    p0 = basepoint if basepoint is not None else F.basepoint
    if p0 is None:
        raise UsageError(f"map {F.name} has no basepoint")
    if not (isinstance(p0, SurfacePoint) and p0.validated):
        p0 = validate_point(M, list(p0.coords if isinstance(p0, SurfacePoint) else p0))
    validate_point(Mp, F.at(p0.coords), tol)
    _check_cr_frame(M, p0.coords, tol)
    return _order_from_tower(pulled_back_tower(M, Mp, F), p0, kmax, cap, tol)


@dataclass
class Certificate:
    rho_row_at_0: list
    li_rows_at_0: list[list]
    nu: list | None
    pair: tuple[int, int] | None
    lam: object
    sqrt_lam: object
    nu_n_product: object = None
    product_agreement: bool = True
    stack_rank: int | None = None
    checks: dict = field(default_factory=dict)
    verdict: bool = False
    message: str = ""
    all_nu: dict = field(default_factory=dict)


def _sqrt(lam):
    if isinstance(lam, GaussianRational) and lam.im == 0 and lam.re > 0:
        r = isqrt_fraction(lam.re)
        if r is not None:
            return gr(r)
    return complex(lam) ** 0.5


def _close(a, b, tol) -> bool:
    if isinstance(a, GaussianRational) and isinstance(b, GaussianRational):
        return a == b
    return abs(complex(a) - complex(b)) <= tol


def transversality_certificate(M: Hypersurface, Mp: Hypersurface, F: MapJet,
                         tol: float = DEFAULT_TOL) -> Certificate:
    """Rows of the pulled-back gradient at 0 and the second-order component nu_n."""
    n = M.nvars
    if Mp.nvars != n + 1:
        raise UsageError("target must have exactly one more dimension than the source")
    if M.distinguished != n - 1 or Mp.distinguished != n:
        raise ValidationError("normalized forms need the distinguished variables last")
    comps = F.polys()
    zero = [gr(0)] * n
    tower = pulled_back_tower(M, Mp, F)
    rho_row = [p.eval(zero) for p in tower.row(())]
    li_rows = [[p.eval(zero) for p in tower.row((i,))] for i in range(1, n)]
    lam = comps[n].wirtinger_d(n - 1).eval(zero)
    root = _sqrt(lam)
    floaty = isinstance(root, complex)

    expect_rw = [ZERO] * n + [I / 2]
    gradient_ok = all(_close(a, b, tol) for a, b in zip(rho_row, expect_rw))
    rows_ok = True
    for i, row in enumerate(li_rows):
        for j, v in enumerate(row):
            target = root if j == i else ZERO
            rows_ok = rows_ok and _close(v, target, tol)

    phi = Mp.phi
    all_nu, first, agreement = {}, None, True
    product_at_first = None
    for j0 in range(1, n):
        for k0 in range(j0, n):
            nu = [p.eval(zero) for p in tower.row((j0, k0))]
            third = (phi.wirtinger_d(j0 - 1, True).wirtinger_d(k0 - 1, True)
                     .wirtinger_d(n - 1).eval([gr(0)] * (n + 1)))
            d_j = comps[j0 - 1].wirtinger_d(j0 - 1).eval(zero)
            d_k = comps[k0 - 1].wirtinger_d(k0 - 1).eval(zero)
            product = third * d_j.conjugate() * d_k.conjugate()
            all_nu[(j0, k0)] = (nu, product)
            agreement = agreement and _close(nu[n - 1], product, tol)
            if first is None and not is_zero(nu[n - 1], tol if floaty else 0.0):
                first = (j0, k0)
                product_at_first = product

    nu_first = all_nu[first][0] if first else None
    stack_rank = None
    if first:
        stack = [rho_row] + li_rows + [nu_first]
        anyfloat = any(isinstance(v, complex) for r in stack for v in r)
        stack_rank = float_rank(stack, tol) if anyfloat else exact_rank(stack)
    nu_found = first is not None
    checks = {"gradient-row": gradient_ok, "cr-rows": rows_ok, "nu-nonzero": nu_found}
    verdict = nu_found and rows_ok and gradient_ok and stack_rank == n + 1
    if not nu_found:
        msg = "2-nondegeneracy hypothesis fails at 0: every nu_n vanishes"
    elif not (rows_ok and gradient_ok):
        msg = "inputs are not normalized: " + ", ".join(k for k, v in checks.items() if not v)
    else:
        msg = f"F is 2-nondegenerate at 0 (pair {first})"
    return Certificate(rho_row, li_rows, nu_first, first, lam, root, product_at_first,
                       agreement, stack_rank, checks, verdict, msg, all_nu)
