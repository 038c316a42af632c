"""Normalization of a source/target pair and a transversal map at a base point.

Exact arithmetic is used for translation, the linear straightening of the
gradient, the removal of mixed and holomorphic quadratic terms, and the
1-jet extraction. Square roots (the Hermitian congruence and ``sqrt(lam)``)
switch to binary64; polynomials touched by such a step carry ``complex``
coefficients from then on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NormalizationError, UsageError
from .gaussian import I, GaussianRational, gr, is_zero
from .hypersurface import Hypersurface, graph_linear_part, validate_point
from .linalg import DEFAULT_TOL, is_positive_definite_exact
from .mapping import MapJet
from .poly import PolarizedPoly

DD_INV_TOL = 1e-12


# --------------------------------------------------------------------------
# helpers

def _quadratic_blocks(phi: PolarizedPoly):
    """Split the degree-2 part into Hermitian, holomorphic and antiholomorphic pieces."""
    n = phi.nvars
    herm = np.zeros((n, n), dtype=object)
    herm[:, :] = gr(0)
    holo = {}
    for e, c in phi.homogeneous_part(2).terms.items():
        hol, anti = e[:n], e[n:]
        if sum(hol) == 1 and sum(anti) == 1:
            herm[hol.index(1), anti.index(1)] = c
        elif sum(hol) == 2:
            holo[e] = c
    return herm, holo


def _as_complex(m) -> np.ndarray:
    return np.array([[complex(x) for x in row] for row in m], dtype=complex)


def _symmetrize(rho: PolarizedPoly) -> PolarizedPoly:
    """Average a float defining function with its conjugate to remove roundoff."""
    if not rho.is_float():
        return rho
    return (rho + rho.conjugate()) * 0.5


def _exactify(m: np.ndarray):
    """Gaussian-rational copy of a matrix whose entries are all exact, else None."""
    out = []
    for row in m:
        r = []
        for x in row:
            if isinstance(x, GaussianRational):
                r.append(x)
            elif isinstance(x, (int,)):
                r.append(gr(x))
            else:
                return None
        out.append(r)
    return out


def _matrix_entries(m):
    """numpy complex matrix -> nested list, keeping exact zeros/ones exact."""
    out = []
    for row in np.asarray(m):
        r = []
        for x in row:
            if isinstance(x, GaussianRational):
                r.append(x)
            else:
                x = complex(x)
                if x == 0:
                    r.append(gr(0))
                elif x == 1:
                    r.append(gr(1))
                else:
                    r.append(x)
        out.append(r)
    return out


def hermitian_congruence(h: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, int]:
    """Rows P with ``P h P* = diag(1, ..., 1, 0, ..., 0)`` for positive semidefinite h.

    Symmetric pivoting picks the largest remaining diagonal value (earliest
    index on ties); the kernel directions are placed last. Returns (P, rank).
    """
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    remaining = [np.eye(n, dtype=complex)[i] for i in range(n)]
    chosen = []

    def form(u, v):
        return u @ h @ v.conj()

    while remaining:
        values = [form(v, v).real for v in remaining]
        best = max(range(len(remaining)), key=lambda i: (values[i], -i))
        if values[best] <= tol:
            break
        u = remaining.pop(best) / np.sqrt(values[best])
        remaining = [w - form(w, u) * u for w in remaining]
        chosen.append(u)
    rank = len(chosen)
    return np.array(chosen + remaining, dtype=complex).reshape(n, n), rank


def _inertia(h: np.ndarray, tol: float) -> tuple[int, int]:
    ev = np.linalg.eigvalsh(np.asarray(h, dtype=complex))
    return int(np.sum(ev > tol)), int(np.sum(ev < -tol))


# --------------------------------------------------------------------------
# graph normal form of a single hypersurface at a point

@dataclass
class SourceChange:
    """Holomorphic change ``Z = images(zeta)`` plus the positive factor applied to rho."""

    images: list[PolarizedPoly]
    names: tuple[str, ...]
    pivot: int
    sign: int
    multiplier: PolarizedPoly
    congruence: np.ndarray | None = None
    steps: list[str] = field(default_factory=list)

    def is_identity(self) -> bool:
        n = len(self.images)
        return (self.sign == 1 and all(self.images[j] == PolarizedPoly.var(n, j) for j in range(n))
                and self.multiplier == PolarizedPoly.const(n, 1))


def _compose_images(current: list[PolarizedPoly], step: list[PolarizedPoly]) -> list[PolarizedPoly]:
    return [c.compose(step) for c in current]


def _graph_normal_form(H: Hypersurface, point: Sequence, *, normalize_levi: bool,
                       tol: float = DEFAULT_TOL):
    n = H.nvars
    p = validate_point(H, list(point), tol)
    images = [PolarizedPoly.var(n, j) + p.coords[j] for j in range(n)]
    rho1 = H.rho.translate(p.coords)
    steps = []
    if any(not is_zero(x) for x in p.coords):
        steps.append("translate base point to 0")

    grad = [rho1.wirtinger_d(j).constant_term() for j in range(n)]
    d = H.distinguished
    if is_zero(grad[d], tol):
        d = max(range(n), key=lambda j: abs(complex(grad[j])))

    def straighten(rho):
        g = grad
        others = [k for k in range(n) if k != d]
        # old z_k = zeta_pos(k) for k != d; z_d solves -2i * sum g_j z_j = zeta_n
        lin = []
        for k in range(n):
            if k != d:
                lin.append(PolarizedPoly.var(n, others.index(k)))
            else:
                acc = PolarizedPoly.var(n, n - 1) * (I / 2)
                for j in others:
                    acc = acc - PolarizedPoly.var(n, others.index(j)) * g[j]
                lin.append(acc / g[d])
        return rho.compose(lin), lin

    sign = 1
    rho2, lin = straighten(rho1)
    # mixed terms against the distinguished variable: multiply by 1 + l
    herm, _ = _quadratic_blocks(rho2 - graph_linear_part(n, n - 1))
    ell = PolarizedPoly.zero(n)
    for j in range(n - 1):
        a = herm[j, n - 1]
        if not is_zero(a):
            c = a * (-2 * I)
            ell = ell + PolarizedPoly.var(n, j) * c + PolarizedPoly.var(n, j, True) * c.conjugate()
    h_nn = herm[n - 1, n - 1]
    if not is_zero(h_nn):
        c = h_nn * (-I)
        ell = ell + PolarizedPoly.var(n, n - 1) * c + PolarizedPoly.var(n, n - 1, True) * c.conjugate()
    multiplier = PolarizedPoly.const(n, 1) + ell
    rho3 = rho2 * multiplier
    if not ell.is_zero():
        steps.append("cancel quadratic terms mixed with the distinguished variable")

    # pure holomorphic quadratic terms: shear the distinguished variable
    _, holo = _quadratic_blocks(rho3 - graph_linear_part(n, n - 1))
    Q = PolarizedPoly(n, holo)
    shear = [PolarizedPoly.var(n, j) for j in range(n)]
    if not Q.is_zero():
        shear[n - 1] = shear[n - 1] + Q * (2 * I)
        steps.append("shear away holomorphic quadratic terms")
    rho4 = rho3.compose(shear)

    herm4, _ = _quadratic_blocks(rho4 - graph_linear_part(n, n - 1))
    levi = herm4[: n - 1, : n - 1]
    congruence = None
    if normalize_levi:
        exact = _exactify(levi)
        if exact is not None:
            pd = is_positive_definite_exact(exact)
            nd = is_positive_definite_exact([[-x for x in r] for r in exact])
        else:
            pos, neg = _inertia(_as_complex(levi), tol)
            pd, nd = pos == n - 1, neg == n - 1
        if not pd and not nd:
            raise NormalizationError("source not strictly pseudoconvex at p0: "
                                     "Levi form is not definite")
        if nd:
            # the other side is pseudoconvex: flip the sign of the defining function
            neg = Hypersurface(-H.rho, H.names, H.distinguished, H.name, H.tol)
            out, change = _graph_normal_form(neg, p.coords, normalize_levi=True, tol=tol)
            change.sign = -1
            change.steps.insert(0, "flip the sign of the defining function")
            return out, change
        rho5, images5, congruence = _apply_congruence(rho4, levi, n, tol)
        if congruence is not None:
            steps.append("congruence-normalize the Levi block to the identity")
    else:
        rho5, images5 = rho4, None

    full = _compose_images(images, lin)
    full = _compose_images(full, shear)
    if images5 is not None:
        full = _compose_images(full, images5)
    names = tuple(H.names[k] for k in range(n) if k != d) + (H.names[d],)
    out = Hypersurface(_symmetrize(rho5), names, n - 1, H.name, H.tol)
    change = SourceChange(full, names, d, sign, multiplier, congruence, steps)
    return out, change


def _apply_congruence(rho: PolarizedPoly, levi: np.ndarray, n: int, tol: float):
    exact = _exactify(levi)
    if exact is not None and all(exact[i][j] == (1 if i == j else 0)
                                 for i in range(n - 1) for j in range(n - 1)):
        return rho, None, None
    P, rank = hermitian_congruence(_as_complex(levi), tol)
    ext = np.eye(n, dtype=complex)
    ext[: n - 1, : n - 1] = P
    m = _matrix_entries(ext)
    images = []
    for j in range(n):
        h = PolarizedPoly.zero(n)
        for k in range(n):
            if m[k][j] != 0:
                h = h + PolarizedPoly.var(n, k).scale(m[k][j])
        images.append(h)
    return rho.compose(images), images, P


def normalize_source(M: Hypersurface, p0: Sequence, tol: float = DEFAULT_TOL):
    """Bring M to ``-Im z_n + sum |z_i|^2 + psi`` at p0; returns (M', change)."""
    return _graph_normal_form(M, p0, normalize_levi=True, tol=tol)


def normalize_target_form(Mp: Hypersurface, q0: Sequence, tol: float = DEFAULT_TOL):
    """Bring M' to ``-Im w_{n+1} + W U W* + phi`` at q0 (U left as is)."""
    return _graph_normal_form(Mp, q0, normalize_levi=False, tol=tol)


def source_psi(Ms: Hypersurface) -> PolarizedPoly:
    n = Ms.nvars
    model = graph_linear_part(n, n - 1)
    for j in range(n - 1):
        z = PolarizedPoly.var(n, j)
        model = model + z * z.conjugate()
    return Ms.rho - model


# --------------------------------------------------------------------------
# jet data and the coordinate change D

@dataclass
class JetData:
    lam: float
    A: np.ndarray
    B: np.ndarray
    b: np.ndarray
    U: np.ndarray
    flipped: bool
    target: Hypersurface
    map: MapJet
    lam_exact: object = None

    @property
    def n(self) -> int:
        return self.A.shape[1]


def _require_source_normal_form(M: Hypersurface, tol: float):
    n = M.nvars
    if not M.is_graph or M.distinguished != n - 1:
        raise NormalizationError("source not in normal form -Im z_n + |z'|^2 + O(3): run normalize_source first")
    psi = source_psi(M)
    low = psi.truncate(2)
    if low.max_abs_coeff() > tol:
        raise NormalizationError("source not in normal form: psi has terms of degree < 3")


def _target_quadric(Mp: Hypersurface, tol: float) -> np.ndarray:
    n1 = Mp.nvars
    if not Mp.is_graph or Mp.distinguished != n1 - 1:
        raise NormalizationError("target not in graph form -Im w_{n+1} + W U W* + O(3) at 0")
    phi = Mp.phi
    if phi.truncate(1).max_abs_coeff() > tol:
        raise NormalizationError("target not in graph form -Im w_{n+1} + W U W* + O(3) at 0")
    herm, holo = _quadratic_blocks(phi)
    if any(abs(complex(c)) > tol for c in holo.values()) or any(
            abs(complex(herm[j, n1 - 1])) > tol or abs(complex(herm[n1 - 1, j])) > tol
            for j in range(n1)):
        raise NormalizationError("target not in graph form: quadratic terms involve the "
                                 "distinguished variable or are not Hermitian")
    return herm[: n1 - 1, : n1 - 1]


def flip_orientation(Mp: Hypersurface, F: MapJet) -> tuple[Hypersurface, MapJet]:
    """Apply ``w_{n+1} -> -w_{n+1}`` to target and map, keeping ``-Im w_{n+1}`` leading."""
    n1 = Mp.nvars
    tau = [PolarizedPoly.var(n1, j) for j in range(n1)]
    tau[-1] = -tau[-1]
    rho = -(Mp.rho.compose(tau))
    comps = list(F.polys())
    comps[-1] = -comps[-1]
    return (Hypersurface(rho, Mp.names, Mp.distinguished, Mp.name, Mp.tol),
            MapJet(tuple(comps), F.source_nvars, F.basepoint, F.name))


def extract_jet(M: Hypersurface, Mp: Hypersurface, F: MapJet, tol: float = DEFAULT_TOL) -> JetData:
    n = M.nvars
    if Mp.nvars != n + 1 or F.target_nvars != n + 1:
        raise UsageError("target and map must have exactly one more dimension than the source")
    _require_source_normal_form(M, tol)
    _target_quadric(Mp, tol)
    zero = [gr(0)] * n
    if any(not is_zero(v, tol) for v in F.at(zero)):
        raise NormalizationError("map does not send 0 to 0")
    J = F.jacobian_at(zero)
    lam = J[n][n - 1]
    if abs(complex(lam)) <= tol:
        raise NormalizationError("map not CR-transversal at 0: lambda = 0")
    if abs(complex(lam).imag) > tol:
        raise NormalizationError("mapping identity violated at order 1: lambda not real")
    flipped = False
    if complex(lam).real < 0:
        Mp, F = flip_orientation(Mp, F)
        J = F.jacobian_at(zero)
        lam = J[n][n - 1]
        flipped = True
    U = _as_complex(_target_quadric(Mp, tol))
    A = np.array([[complex(J[j][i]) for j in range(n)] for i in range(n - 1)], dtype=complex)
    lam_exact = lam if isinstance(lam, GaussianRational) else None
    return JetData(float(complex(lam).real), A, A[:, : n - 1], A[:, n - 1], U, flipped, Mp, F,
                   lam_exact)


@dataclass
class HermitianReport:
    deviation: float
    rank_U: int
    positive: int
    negative: int
    branch: str


def verify_hermitian_identity(jet: JetData, tol: float = DEFAULT_TOL) -> HermitianReport:
    """Deviation of ``A U A* - lam I`` plus the rank/signature dichotomy for U."""
    n = jet.n
    dev = float(np.max(np.abs(jet.A @ jet.U @ jet.A.conj().T - jet.lam * np.eye(n - 1)))) if n > 1 else 0.0
    pos, neg = _inertia(jet.U, tol)
    rank = pos + neg
    if dev > tol:
        raise NormalizationError(f"map does not satisfy the order-2 mapping identity: "
                                 f"hermitian identity violated: AUA* != lambda I (deviation {dev:.3e})")
    if pos < n - 1:
        raise NormalizationError("U must have n-1 positive eigenvalues for AUA* = lambda I")
    if rank == n:
        branch = "levi-nondegenerate-target"
    elif rank == n - 1:
        branch = "levi-degenerate-target"
    else:
        raise NormalizationError(f"U has rank {rank}; expected n-1 or n")
    return HermitianReport(dev, rank, pos, neg, branch)


def diagonalize_U(U: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Congruence P with ``P U P* = diag(1, ..., 1, 0)``."""
    U = np.asarray(U, dtype=complex)
    n = U.shape[0]
    if np.max(np.abs(U - U.conj().T)) > tol:
        raise NormalizationError("U is not Hermitian")
    pos, neg = _inertia(U, tol)
    if neg:
        raise NormalizationError("U must be positive semidefinite (n-1 positive eigenvalues)")
    if pos == n:
        raise NormalizationError("U has rank n, not n-1: target is Levi-nondegenerate at q0")
    if pos != n - 1:
        raise NormalizationError(f"U has rank {pos}, not n-1")
    P, _ = hermitian_congruence(U, tol)
    target = np.diag([1.0] * (n - 1) + [0.0]).astype(complex)
    if np.max(np.abs(P @ U @ P.conj().T - target)) > tol:
        raise NormalizationError("congruence failed to reach diag(1, ..., 1, 0)")
    return P, target


def apply_target_congruence(jet: JetData, P: np.ndarray) -> JetData:
    """Change target coordinates by ``W~ = W~' P`` so that U becomes diagonal."""
    n = jet.n
    if np.array_equal(P, np.eye(n)):
        return jet
    ext = np.eye(n + 1, dtype=complex)
    ext[:n, :n] = P
    inv = np.linalg.inv(ext)
    rho = jet.target.rho.linear_change(_matrix_entries(ext))
    Mp = Hypersurface(_symmetrize(rho), jet.target.names, jet.target.distinguished, jet.target.name, jet.target.tol)
    F = jet.map.compose_linear(_matrix_entries(inv))
    A = jet.A @ np.linalg.inv(P)
    U = P @ jet.U @ P.conj().T
    return JetData(jet.lam, A, A[:, : n - 1], A[:, n - 1], U, jet.flipped, Mp, F, jet.lam_exact)


@dataclass
class CoordChange:
    matrix: np.ndarray
    inverse: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def product_deviation(self) -> float:
        k = self.matrix.shape[0]
        return float(np.max(np.abs(self.matrix @ self.inverse - np.eye(k))))


def build_D(jet: JetData) -> CoordChange:
    n = jet.n
    B, b, lam = jet.B, jet.b, jet.lam
    if n > 1 and abs(np.linalg.det(B)) <= DEFAULT_TOL:
        raise NormalizationError("leading block not invertible")
    root = np.sqrt(lam)
    c = -np.linalg.solve(B, b) if n > 1 else np.zeros(0, dtype=complex)
    d = -(B @ c) / root if n > 1 else np.zeros(0, dtype=complex)
    D = np.eye(n + 1, dtype=complex)
    Dinv = np.eye(n + 1, dtype=complex)
    D[: n - 1, : n - 1] = B.conj().T / root
    D[: n - 1, n - 1] = c
    Dinv[: n - 1, : n - 1] = B / root
    Dinv[: n - 1, n - 1] = d
    change = CoordChange(D, Dinv, c, d)
    if change.product_deviation() > DD_INV_TOL * max(1.0, float(np.max(np.abs(D))) ** 2):
        raise NormalizationError("D * D^-1 != I")
    return change


def levi_block_deviation(jet: JetData, change: CoordChange) -> float:
    n = jet.n
    K = np.eye(n, dtype=complex)
    K[: n - 1, : n - 1] = jet.B / np.sqrt(jet.lam)
    K[: n - 1, n - 1] = change.d
    mid = np.diag([1.0] * (n - 1) + [0.0]).astype(complex)
    return float(np.max(np.abs(K @ mid @ K.conj().T - mid)))


@dataclass
class NormalizationCertificate:
    deviations: dict
    passed: bool
    tol: float
    branch: str = "levi-degenerate-target"
    flipped: bool = False
    lam: float = 0.0

    def failing(self) -> list[str]:
        return [k for k, v in self.deviations.items()
                if v >= (DD_INV_TOL if k == "D*D^-1" else self.tol)]


def model_quadric(nvars: int, levi_rank: int) -> PolarizedPoly:
    out = graph_linear_part(nvars, nvars - 1)
    for j in range(levi_rank):
        w = PolarizedPoly.var(nvars, j)
        out = out + w * w.conjugate()
    return out


def apply_normalization(M: Hypersurface, Mp: Hypersurface, F: MapJet, jet: JetData,
                        change: CoordChange, tol: float = DEFAULT_TOL, *, strict: bool = True):
    """F~ = F D, rho~ = rho o D^-1, and the deviations of every normalized condition."""
    n = jet.n
    Ft = F.compose_linear(_matrix_entries(change.matrix))
    rho_t = Mp.rho.linear_change(_matrix_entries(change.inverse))
    Mt = Hypersurface(_symmetrize(rho_t), Mp.names, Mp.distinguished, Mp.name, max(Mp.tol, tol))
    zero = [gr(0)] * n
    J = np.array([[complex(x) for x in row] for row in Ft.jacobian_at(zero)])
    root = np.sqrt(jet.lam)
    dev = {}
    dev["hermitian-identity"] = float(np.max(np.abs(jet.A @ jet.U @ jet.A.conj().T - jet.lam * np.eye(n - 1)))) if n > 1 else 0.0
    low = (rho_t - model_quadric(n + 1, n - 1)).truncate(2)
    dev["target-quadric"] = low.max_abs_coeff()
    dev["levi-block"] = levi_block_deviation(jet, change)
    # J[j][i] = dF~_j / dz_i
    dev["tangential-jacobian"] = float(np.max(np.abs(J[: n - 1, : n - 1] - root * np.eye(n - 1)))) if n > 1 else 0.0
    dev["normal-row"] = float(np.max(np.abs(J[n - 1, : n - 1]))) if n > 1 else 0.0
    dev["transversal-row"] = float(np.max(np.abs(J[n, : n - 1]))) if n > 1 else 0.0
    dev["D*D^-1"] = change.product_deviation()
    cert = NormalizationCertificate(dev, True, tol, flipped=jet.flipped, lam=jet.lam)
    bad = cert.failing()
    cert.passed = not bad
    if bad and strict:
        raise NormalizationError("normalization certificate failed: " + ", ".join(
            f"{k} deviation {dev[k]:.3e}" for k in bad))
    return Mt, Ft, cert


# --------------------------------------------------------------------------
# full pipeline

@dataclass
class PipelineResult:
    branch: str
    source: Hypersurface
    source_change: SourceChange
    target: Hypersurface | None = None
    map: MapJet | None = None
    jet: JetData | None = None
    hermitian: HermitianReport | None = None
    congruence: np.ndarray | None = None
    change: CoordChange | None = None
    certificate: NormalizationCertificate | None = None


def _target_ready(Mp: Hypersurface, tol: float) -> bool:
    try:
        _target_quadric(Mp, tol)
    except NormalizationError:
        return False
    return True


def normalize_pair(M: Hypersurface, Mp: Hypersurface, F: MapJet, p0: Sequence | None = None,
                   tol: float = DEFAULT_TOL) -> PipelineResult:
    """Run source normalization, jet extraction, the Hermitian identity check,
    the target congruence and the change D, in that order."""
    if p0 is None:
        p0 = F.basepoint.coords if F.basepoint is not None else [gr(0)] * M.nvars
    Ms, change_s = normalize_source(M, p0, tol)
    F1 = F.precompose(change_s.images) if not change_s.is_identity() else F
    q0 = F1.at([gr(0)] * M.nvars)
    if any(not is_zero(v, tol) for v in q0) or not _target_ready(Mp, tol):
        raise NormalizationError("target must be in graph form at F(p0) = 0")
    jet = extract_jet(Ms, Mp, F1, tol)
    herm = verify_hermitian_identity(jet, tol)
    result = PipelineResult(herm.branch, Ms, change_s, jet.target, jet.map, jet, herm)
    if herm.branch == "levi-nondegenerate-target":
        return result
    P, _ = diagonalize_U(jet.U, tol)
    jet = apply_target_congruence(jet, P)
    D = build_D(jet)
    Mt, Ft, cert = apply_normalization(Ms, jet.target, jet.map, jet, D, tol)
    cert.branch = herm.branch
    result.jet, result.congruence, result.change = jet, P, D
    result.target, result.map, result.certificate = Mt, Ft, cert
    return result
