"""Real hypersurfaces given by a polarized defining polynomial.

Besides the container type this module builds the CR vector-field basis
(the antisymmetric 2x2 construction that pairs every slot with the
distinguished one), the holomorphic gradient row, point validation and
exact rational point samplers.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .errors import UsageError, ValidationError
from .gaussian import I, GaussianRational, gr, is_zero
from .poly import PolarizedPoly

GENERAL, GRAPH, RIGID = "general", "graph", "rigid-graph"

HALF_I = I / 2


def im_part(p: PolarizedPoly) -> PolarizedPoly:
    """``Im p`` as a polarized polynomial: ``(p - conj p) / 2i``."""
    return (p - p.conjugate()) * (-HALF_I)


def re_part(p: PolarizedPoly) -> PolarizedPoly:
    return (p + p.conjugate()) * Fraction(1, 2)


def abs_sq(p: PolarizedPoly) -> PolarizedPoly:
    return p * p.conjugate()


def graph_linear_part(nvars: int, d: int) -> PolarizedPoly:
    """``-Im w_d = (i/2)(w_d - conj w_d)``."""
    w = PolarizedPoly.var(nvars, d)
    return (w - w.conjugate()) * HALF_I


def classify_form(rho: PolarizedPoly, d: int, tol: float = 1e-12) -> str:
    phi = rho - graph_linear_part(rho.nvars, d)
    if phi.is_float():
        phi = phi.chop(tol)
    if phi.min_degree() != -1 and phi.min_degree() < 2:
        return GENERAL
    if phi.involves(d):
        return GRAPH
    return RIGID


@dataclass(frozen=True)
class CRField:
    """``sum_j coeff_j * d/d conj(z_slot_j)``."""

    coeffs: tuple[tuple[int, PolarizedPoly], ...]

    def apply(self, p: PolarizedPoly) -> PolarizedPoly:
        out = PolarizedPoly.zero(p.nvars)
        for slot, c in self.coeffs:
            dp = p.wirtinger_d(slot, conjugated=True)
            if not dp.is_zero() and not c.is_zero():
                out = out + c * dp
        return out

    def apply_row(self, row: Sequence[PolarizedPoly]) -> list[PolarizedPoly]:
        return [self.apply(p) for p in row]

    def at(self, point: Sequence) -> dict[int, object]:
        return {slot: c.eval(point) for slot, c in self.coeffs}

    def format(self, names: Sequence[str]) -> str:
        parts = []
        for slot, c in self.coeffs:
            if c.is_zero():
                continue
            parts.append(f"({c.format(names)})*d/d conj({names[slot]})")
        return " + ".join(parts) if parts else "0"


def apply_field(L: CRField, p: PolarizedPoly) -> PolarizedPoly:
    return L.apply(p)


@dataclass(frozen=True)
class SurfacePoint:
    coords: tuple
    validated: bool = False
    surface: str = ""

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)


@dataclass(frozen=True)
class Hypersurface:
    rho: PolarizedPoly
    names: tuple[str, ...]
    distinguished: int = -1
    name: str = "M"
    tol: float = 1e-12
    form: str = field(init=False)

    def __post_init__(self):
        n = self.rho.nvars
        if len(self.names) != n:
            raise UsageError(f"{len(self.names)} variable names for {n} variables")
        d = self.distinguished
        if d < 0:
            d += n
        if not 0 <= d < n:
            raise UsageError(f"distinguished index {self.distinguished} out of range")
        object.__setattr__(self, "distinguished", d)
        if not self.rho.is_real(self.tol if self.rho.is_float() else 0.0):
            raise ValidationError(f"defining function of {self.name} not real: "
                                  f"offending terms {_non_real_terms(self.rho, self.names)}")
        if self.rho.is_zero():
            raise ValidationError("defining function is identically zero")
        object.__setattr__(self, "form", classify_form(self.rho, d, self.tol))

    @property
    def nvars(self) -> int:
        return self.rho.nvars

    @property
    def phi(self) -> PolarizedPoly:
        """``rho + Im w_d`` (everything except the linear graph part)."""
        return self.rho - graph_linear_part(self.nvars, self.distinguished)

    @property
    def is_graph(self) -> bool:
        return self.form in (GRAPH, RIGID)

    @cached_property
    def cr_fields(self) -> tuple[CRField, ...]:
        return tuple(cr_basis(self))

    @cached_property
    def gradient(self) -> tuple[PolarizedPoly, ...]:
        return tuple(self.rho.gradient())

    def with_rho(self, rho: PolarizedPoly, name: str | None = None) -> "Hypersurface":
        return Hypersurface(rho, self.names, self.distinguished, name or self.name, self.tol)


def _non_real_terms(rho: PolarizedPoly, names) -> str:
    diff = rho - rho.conjugate()
    return diff.format(names)


def cr_basis(H: Hypersurface) -> list[CRField]:
    """N-1 fields ``2i(rho_{conj d} d/d conj z_k - rho_{conj k} d/d conj z_d)``, k != d."""
    n, d = H.nvars, H.distinguished
    rho_d = H.rho.wirtinger_d(d, conjugated=True)
    if rho_d.is_zero():
        raise ValidationError("distinguished variable does not control the surface")
    two_i = 2 * I
    fields = []
    for k in range(n):
        if k == d:
            continue
        rho_k = H.rho.wirtinger_d(k, conjugated=True)
        fields.append(CRField(((k, rho_d * two_i), (d, rho_k * (-two_i)))))
    return fields


def gradient_row(H: Hypersurface, q: Sequence | None = None):
    """Holomorphic gradient ``(d rho/d z_1, ..., d rho/d z_N)``, symbolic or at ``q``."""
    row = list(H.gradient)
    if q is None:
        return row
    return [p.eval(list(q)) for p in row]


def validate_point(H: Hypersurface, coords: Sequence, tol: float | None = None) -> SurfacePoint:
    coords = tuple(gr(c) if isinstance(c, (str, int, Fraction)) else c for c in coords)
    if len(coords) != H.nvars:
        raise UsageError(f"point has {len(coords)} coordinates, {H.name} lives in C^{H.nvars}")
    floaty = any(isinstance(c, complex) for c in coords) or H.rho.is_float()
    t = (1e-9 if tol is None else tol) if floaty else 0.0
    val = H.rho.eval(list(coords))
    if not is_zero(val, t):
        raise ValidationError(f"not on hypersurface {H.name}: rho = {val}")
    grad = gradient_row(H, coords)
    if all(is_zero(g, t) for g in grad):
        raise ValidationError(f"singular point of {H.name}: gradient vanishes")
    return SurfacePoint(coords, True, H.name)


def random_rational(rng: random.Random, height: int) -> Fraction:
    return Fraction(rng.randint(-height, height), rng.randint(1, height))


def random_gaussian(rng: random.Random, height: int) -> GaussianRational:
    return GaussianRational(random_rational(rng, height), random_rational(rng, height))


def tube_polynomial(nvars: int) -> PolarizedPoly:
    """``(Im z_1)^2 + ... + (Im z_{N-1})^2 - (Im z_N)^2``."""
    total = PolarizedPoly.zero(nvars)
    for j in range(nvars):
        sq = im_part(PolarizedPoly.var(nvars, j)) ** 2
        total = total - sq if j == nvars - 1 else total + sq
    return total


def is_light_cone_tube(H: Hypersurface) -> bool:
    t = tube_polynomial(H.nvars)
    return H.rho == t or H.rho == -t


def sample_points(H: Hypersurface, count: int, seed: int = 0, height: int = 5) -> list[SurfacePoint]:
    """Exact rational points: rigid graphs by solving for ``Im w_d``, the
    light-cone tube via rational points on the sphere."""
    rng = random.Random(seed)
    if H.form == RIGID:
        return [_rigid_sample(H, rng, height) for _ in range(count)]
    if is_light_cone_tube(H):
        return [_tube_sample(H, rng, height) for _ in range(count)]
    raise ValidationError("sampler requires rigid graph form")


def _rigid_sample(H: Hypersurface, rng: random.Random, height: int) -> SurfacePoint:
    n, d = H.nvars, H.distinguished
    coords = [random_gaussian(rng, height) for _ in range(n)]
    coords[d] = gr(0)
    value = H.phi.eval(coords)
    s = random_rational(rng, height)
    # rho = -Im w_d + phi = 0 with phi independent of w_d
    coords[d] = GaussianRational(s, value.re) if isinstance(value, GaussianRational) else complex(s, value.real)
    return validate_point(H, coords)


def _tube_sample(H: Hypersurface, rng: random.Random, height: int) -> SurfacePoint:
    n = H.nvars - 1
    t = [random_rational(rng, height) for _ in range(n - 1)]
    norm = sum(x * x for x in t)
    if n == 1:
        unit = [Fraction(rng.choice((-1, 1)))]
    else:
        unit = [2 * x / (norm + 1) for x in t] + [(norm - 1) / (norm + 1)]
    c = Fraction(rng.randint(1, height), rng.randint(1, height)) * rng.choice((-1, 1))
    ims = [c * u for u in unit] + [c]
    coords = [GaussianRational(random_rational(rng, height), y) for y in ims]
    return validate_point(H, coords)
