import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from instances import normalization_instance
from test_hypersurface import NAMES3, model, w
from test_mapping import heis, z
from crdegen.errors import NormalizationError
from crdegen.gaussian import I
from crdegen.hypersurface import Hypersurface, abs_sq, im_part
from crdegen.mapping import MapJet, check_map, divide
from crdegen.normalize import (DD_INV_TOL, CoordChange, JetData, apply_normalization, build_D,
                               diagonalize_U, extract_jet, flip_orientation,
                               hermitian_congruence, levi_block_deviation, normalize_pair,
                               normalize_source, source_psi, verify_hermitian_identity)
from crdegen.poly import PolarizedPoly as P


def jet(lam, A, U, n=2):
    A = np.array(A, dtype=complex)
    return JetData(lam, A, A[:, : n - 1], A[:, n - 1], np.array(U, dtype=complex), False, None, None)


# ---------------------------------------------------------------- extract_jet

def test_extract_linear_embedding():
    j = extract_jet(heis(), model(), MapJet((z(0), P.zero(2), z(1)), 2))
    assert j.lam == 1 and not j.flipped
    assert j.A.tolist() == [[1, 0]] and j.B.tolist() == [[1]] and j.b.tolist() == [0]
    assert np.array_equal(j.U, np.diag([1, 0]))


def test_extract_flip():
    j = extract_jet(heis(), model(), MapJet((z(0), P.zero(2), -z(1)), 2))
    assert j.flipped and j.lam == 1


def test_extract_lambda_two():
    j = extract_jet(heis(), model(), MapJet((z(0), P.zero(2), z(1) * 2 + z(0) ** 2), 2))
    assert j.lam == 2


def test_extract_errors():
    with pytest.raises(NormalizationError, match="not CR-transversal"):
        extract_jet(heis(), model(), MapJet((z(0), P.zero(2), z(0) ** 2), 2))
    with pytest.raises(NormalizationError, match="identity violated at order 1"):
        extract_jet(heis(), model(), MapJet((z(0), P.zero(2), z(1) * I), 2))
    with pytest.raises(NormalizationError, match="not in normal form"):
        M4 = Hypersurface(-im_part(z(1)) + abs_sq(z(0)) * 4, ("z1", "z2"))
        extract_jet(M4, model(), MapJet((z(0), P.zero(2), z(1)), 2))
    with pytest.raises(NormalizationError, match="does not send 0 to 0"):
        extract_jet(heis(), model(), MapJet((z(0), P.const(2, 1), z(1)), 2))


# ---------------------------------------------------------------- Hermitian identity

def test_hermitian_identity_examples():
    assert verify_hermitian_identity(jet(1, [[1, 0]], np.diag([1, 0]))).deviation == 0
    assert verify_hermitian_identity(jet(2, [[1, 0]], np.diag([2, 0]))).deviation == 0
    rep = verify_hermitian_identity(jet(1, [[1, 0]], np.diag([1, 1])))
    assert rep.rank_U == 2 and rep.branch == "levi-nondegenerate-target"


def test_hermitian_identity_violation():
    with pytest.raises(NormalizationError, match="order-2 mapping identity"):
        verify_hermitian_identity(jet(3, [[1, 0]], np.diag([1, 0])))


# ---------------------------------------------------------------- diagonalize_U

def test_diagonalize_examples():
    P_, D = diagonalize_U(np.diag([1, 1, 0]))
    assert np.allclose(P_, np.eye(3))
    P_, _ = diagonalize_U(np.diag([4, 0]))
    assert np.allclose(P_, np.diag([0.5, 1]))
    with pytest.raises(NormalizationError, match="rank n"):
        diagonalize_U(np.array([[2, 1], [1, 1]]))
    with pytest.raises(NormalizationError, match="semidefinite"):
        diagonalize_U(np.diag([1, -1, 0]))


@settings(max_examples=40)
@given(st.integers(0, 100_000), st.integers(2, 5))
def test_diagonalize_random_psd(seed, n):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, n - 1)) + 1j * rng.normal(size=(n, n - 1))
    U = X @ X.conj().T
    P_, D = diagonalize_U(U)
    assert np.max(np.abs(P_ @ U @ P_.conj().T - D)) < 1e-9
    assert np.allclose(D, np.diag([1.0] * (n - 1) + [0.0]))


def test_congruence_pivot_order():
    P_, rank = hermitian_congruence(np.diag([1.0, 4.0]))
    assert rank == 2
    assert np.allclose(P_, [[0, 0.5], [1, 0]])


# ---------------------------------------------------------------- build_D

def test_build_D_identity():
    D = build_D(jet(1, [[1, 0]], np.diag([1, 0])))
    assert np.allclose(D.matrix, np.eye(3)) and np.allclose(D.inverse, np.eye(3))


def test_build_D_shear():
    beta = 2 - 3j
    D = build_D(jet(1, [[1, beta]], np.diag([1, 0])))
    assert np.allclose(D.c, [-beta])
    assert np.allclose(D.matrix, [[1, -beta, 0], [0, 1, 0], [0, 0, 1]])
    assert np.allclose(D.inverse, [[1, beta, 0], [0, 1, 0], [0, 0, 1]])
    assert np.allclose(D.d, -(np.array([[1]]) @ D.c) / 1)


def test_build_D_scaled_block():
    j = jet(4, [[2, 0, 0], [0, 2, 0]], np.diag([1, 1, 0]), n=3)
    D = build_D(j)
    assert np.allclose(D.matrix, np.eye(4))


def test_build_D_singular():
    with pytest.raises(NormalizationError, match="not invertible"):
        build_D(jet(1, [[0, 1]], np.diag([1, 0])))


# ---------------------------------------------------------------- apply_normalization

def test_apply_on_normalized_fixture(fixture_doc):
    d = fixture_doc("pair.crs")
    M, Mp, F = d.hypersurface("heis"), d.hypersurface("model"), d.map_jet("F")
    j = extract_jet(M, Mp, F)
    _, _, cert = apply_normalization(M, j.target, j.map, j, build_D(j))
    assert cert.passed and all(v == 0 for v in cert.deviations.values())


def test_apply_removes_shear(fixture_doc):
    d = fixture_doc("pair.crs")
    M, Mp, F = d.hypersurface("heis"), d.hypersurface("sheared"), d.map_jet("G")
    j = extract_jet(M, Mp, F)
    change = build_D(j)
    _, Ft, cert = apply_normalization(M, j.target, j.map, j, change)
    assert Ft.jacobian_at([0, 0])[1][0] == 0
    # oracle: explicit matrix product of the Jacobian with D
    J = np.array([[complex(x) for x in row] for row in F.jacobian_at([0, 0])]).T
    assert np.allclose((J @ change.matrix)[0, 1], 0)
    assert cert.passed


def test_certificate_failure_names_condition(fixture_doc):
    d = fixture_doc("pair.crs")
    M, Mp, F = d.hypersurface("heis"), d.hypersurface("sheared"), d.map_jet("G")
    j = extract_jet(M, Mp, F)
    bogus = CoordChange(np.eye(3, dtype=complex), np.eye(3, dtype=complex), np.zeros(1), np.zeros(1))
    with pytest.raises(NormalizationError, match="normal-row"):
        apply_normalization(M, j.target, j.map, j, bogus)
    _, _, cert = apply_normalization(M, j.target, j.map, j, bogus, strict=False)
    assert not cert.passed and "normal-row" in cert.failing()


# ---------------------------------------------------------------- normalize_source

def test_source_identity_for_heisenberg():
    Ms, change = normalize_source(heis(), [0, 0])
    assert change.is_identity() and Ms.rho == heis().rho


def test_source_scaling():
    M4 = Hypersurface(-im_part(z(1)) + abs_sq(z(0)) * 4, ("z1", "z2"))
    Ms, change = normalize_source(M4, [0, 0])
    assert change.images[0] == z(0) * 0.5 or change.images[0].to_float() == (z(0) * 0.5).to_float()
    assert source_psi(Ms).is_zero()


def test_source_sign_flip():
    Mn = Hypersurface(-im_part(z(1)) - abs_sq(z(0)), ("z1", "z2"))
    Ms, change = normalize_source(Mn, [0, 0])
    assert change.sign == -1 and source_psi(Ms).is_zero()


def test_source_not_pseudoconvex():
    H = Hypersurface(-im_part(P.var(3, 2)) + abs_sq(P.var(3, 0)) - abs_sq(P.var(3, 1)), NAMES3)
    with pytest.raises(NormalizationError, match="not strictly pseudoconvex"):
        normalize_source(H, [0, 0, 0])


def _is_rescaling(Ms, M, change):
    pulled = M.rho.compose(change.images)
    if change.sign < 0:
        pulled = -pulled
    quot, rem = divide(Ms.rho, pulled)
    return rem.max_abs_coeff() < 1e-9 and abs(complex(quot.constant_term()) - 1) < 1e-9


def test_source_mixed_and_holomorphic_terms():
    rho = (-im_part(z(1)) + abs_sq(z(0)) * 2 + z(0) * z(1, True) + z(1) * z(0, True)
           + z(0) ** 2 * I - z(0, True) ** 2 * I + abs_sq(z(1)) * 3)
    M = Hypersurface(rho, ("z1", "z2"))
    Ms, change = normalize_source(M, [0, 0])
    psi = source_psi(Ms)
    assert psi.truncate(2).max_abs_coeff() < 1e-12
    assert _is_rescaling(Ms, M, change)


def test_source_radical_pair(fixture_doc):
    M = fixture_doc("radical_map.crs").hypersurface("M")
    Ms, change = normalize_source(M, [0, 1])
    psi = source_psi(Ms)
    assert not psi.is_zero()
    assert psi.truncate(2).max_abs_coeff() == 0
    assert _is_rescaling(Ms, M, change)
    # Taylor oracle: rho(0, 1 + h) has no constant or linear term in h
    h = P.var(2, 1)
    shifted = M.rho.compose([P.var(2, 0), h + 1])
    assert shifted.constant_term() == 0


# ---------------------------------------------------------------- invariants

def test_orientation_invariance(fixture_doc):
    d = fixture_doc("pair.crs")
    M, Mp, F = d.hypersurface("heis"), d.hypersurface("sheared"), d.map_jet("G")
    a = normalize_pair(M, Mp, F)
    Mt, Ft = flip_orientation(Mp, F)
    b = normalize_pair(M, Mt, Ft)
    assert a.jet.lam == b.jet.lam and b.jet.flipped and not a.jet.flipped
    assert a.certificate.passed == b.certificate.passed
    assert a.certificate.deviations == b.certificate.deviations


def test_nondegenerate_target_branch():
    Mq = Hypersurface(-im_part(w(2)) + abs_sq(w(0)) + abs_sq(w(1)), NAMES3)
    F = MapJet((z(0), P.zero(2), z(1)), 2)
    res = normalize_pair(heis(), Mq, F)
    assert res.branch == "levi-nondegenerate-target" and res.change is None


@settings(max_examples=15)
@given(st.integers(0, 100_000))
def test_randomized_pipeline(seed):
    M, Mp, F = normalization_instance(random.Random(seed))
    assert check_map(M, Mp, F).vanishes
    res = normalize_pair(M, Mp, F)
    cert = res.certificate
    assert cert.passed
    assert res.change.product_deviation() < DD_INV_TOL
    assert levi_block_deviation(res.jet, res.change) < 1e-9
    B = res.jet.B
    assert np.max(np.abs(B @ B.conj().T - res.jet.lam * np.eye(B.shape[0]))) < 1e-9
    assert np.allclose(res.change.d, -(B @ res.change.c) / np.sqrt(res.jet.lam))
