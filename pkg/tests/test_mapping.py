import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from instances import normalized_instance
from test_hypersurface import NAMES3, model, mxc, quadric, w
from crdegen.errors import UsageError, ValidationError
from crdegen.gaussian import I
from crdegen.hypersurface import Hypersurface, abs_sq, im_part, re_part
from crdegen.linalg import exact_rank
from crdegen.mapping import (MapJet, Radical, check_map, compose_defining, divide,
                             map_nondegeneracy_order, transversality_certificate)
from crdegen.poly import PolarizedPoly as P


def z(j, c=False, n=2):
    return P.var(n, j, c)


def heis():
    return Hypersurface(-im_part(z(1)) + abs_sq(z(0)), ("z1", "z2"))


def radical_pair(fixture_doc):
    d = fixture_doc("radical_map.crs")
    return d.hypersurface("M"), d.hypersurface("Mp"), d.map_jet("F")


# ---------------------------------------------------------------- composition

def test_radical_map_composition_is_source(fixture_doc):
    M, Mp, F = radical_pair(fixture_doc)
    assert compose_defining(F, Mp) == M.rho


def test_linear_embedding_composition():
    F = MapJet((z(0), P.zero(2), z(1)), 2)
    assert compose_defining(F, model()) == heis().rho


def test_stray_radical_rejected():
    tgt = Hypersurface(-im_part(w(2)) + abs_sq(w(0)) + re_part(w(1)), NAMES3)
    F = MapJet((z(0), Radical(1 - z(1), Fraction(1, 2)), z(1)), 2)
    with pytest.raises(ValidationError, match="fractional exponent survives"):
        compose_defining(F, tgt)


def test_radical_validation():
    with pytest.raises(ValidationError):
        Radical(z(0, True), Fraction(1, 2))
    with pytest.raises(ValidationError):
        MapJet((z(0, True), z(1), z(1)), 2)
    with pytest.raises(UsageError):
        MapJet((P.var(3, 0),), 2)


def test_radical_map_refuses_jets(fixture_doc):
    _, _, F = radical_pair(fixture_doc)
    with pytest.raises(ValidationError, match="radical"):
        F.polys()


# ---------------------------------------------------------------- check_map

def test_check_map_radical_pair(fixture_doc):
    M, Mp, F = radical_pair(fixture_doc)
    res = check_map(M, Mp, F)
    assert res.mode == "ideal-division" and res.vanishes and res.quotient == P.const(2, 1)


def test_check_map_linear_embedding():
    res = check_map(heis(), model(), MapJet((z(0), P.zero(2), z(1)), 2))
    assert res.mode == "rigid-substitution" and res.vanishes


def test_check_map_perturbed_degree_eight():
    res = check_map(heis(), model(), MapJet((z(0), z(0) ** 2, z(1)), 2))
    assert not res.vanishes
    assert res.lowest_degree == 8
    # oracle: |z1^2|^4 = z1^4 conj(z1)^4
    assert res.residual == (z(0) * z(0, True)) ** 4


def test_check_map_graph_series():
    rho = -im_part(z(1)) + abs_sq(z(0)) + abs_sq(z(1))
    M = Hypersurface(rho, ("z1", "z2"))
    assert M.form == "graph"
    ident = MapJet((z(0), z(1)), 2)
    assert check_map(M, M, ident, jet_order=6).vanishes
    bad = MapJet((z(0), z(1) + z(0) ** 3), 2)
    res = check_map(M, M, bad, jet_order=6)
    assert not res.vanishes and res.jet_order == 6


def test_divide_remainder_oracle():
    g = heis().rho
    q = z(0) * z(1, True) + 3
    f = g * q + z(0)
    quot, rem = divide(f, g)
    assert quot * g + rem == f
    assert not rem.is_zero()


def test_check_map_invariant_under_coordinate_change(fixture_doc):
    from crdegen.normalize import normalize_pair
    d = fixture_doc("pair.crs")
    M, Mp, F = d.hypersurface("heis"), d.hypersurface("sheared"), d.map_jet("G")
    res = normalize_pair(M, Mp, F)
    before = check_map(M, Mp, F).vanishes
    after = check_map(res.source, res.target, res.map, tol=1e-12).vanishes
    assert before == after is True
    perturbed = MapJet((z(0), z(0) + z(0) ** 2, z(1)), 2)
    assert not check_map(M, Mp, perturbed).vanishes


# ---------------------------------------------------------------- map nondegeneracy

def test_identity_on_quadric_is_order_one():
    ident = MapJet(tuple(P.var(3, j) for j in range(3)), 3)
    assert map_nondegeneracy_order(quadric(), quadric(), ident, 4, [0, 0, 0]).order == 1


def test_linear_embedding_not_up_to():
    F = MapJet((z(0), P.zero(2), z(1)), 2)
    assert str(map_nondegeneracy_order(heis(), model(), F, 6, [0, 0])) == "NotUpTo(6)"


def test_identity_on_mxc_not_up_to():
    ident = MapJet(tuple(P.var(3, j) for j in range(3)), 3)
    assert str(map_nondegeneracy_order(mxc(), mxc(), ident, 4, [0, 0, 0])) == "NotUpTo(4)"


def test_map_order_needs_target_point():
    F = MapJet((z(0), P.zero(2), z(1) + I), 2)
    with pytest.raises(ValidationError):
        map_nondegeneracy_order(heis(), model(), F, 3, [0, 0])


# ---------------------------------------------------------------- certificate

def _target(n1, phi):
    rho = -im_part(P.var(n1, n1 - 1)) + phi
    for j in range(n1 - 2):
        rho = rho + abs_sq(P.var(n1, j))
    return Hypersurface(rho, tuple(f"w{j + 1}" for j in range(n1)))


def test_certificate_unit_coefficient():
    # phi with phi_{1bar 1bar 2}(0) = 1: the term w2 conj(w1)^2 / 2 and its conjugate
    term = P.var(3, 1) * P.var(3, 0, True) ** 2 / 2
    Mp = _target(3, term + term.conjugate())
    F = MapJet((z(0), P.zero(2), z(1)), 2)
    cert = transversality_certificate(heis(), Mp, F)
    assert cert.verdict and cert.pair == (1, 1)
    assert cert.nu[1] == 1 and cert.nu_n_product == 1 and cert.product_agreement
    assert cert.rho_row_at_0 == [0, 0, I / 2]
    assert cert.li_rows_at_0 == [[1, 0, 0]]


def test_certificate_fails_without_third_derivative():
    F = MapJet((z(0), P.zero(2), z(1)), 2)
    cert = transversality_certificate(heis(), model(), F)
    assert not cert.verdict and cert.pair is None
    assert "2-nondegeneracy hypothesis fails" in cert.message


def test_certificate_two_lambda():
    # source C^3, target C^4 with phi_{2bar 2bar 3}(0) = 2; lambda = 4
    src = Hypersurface(-im_part(P.var(3, 2)) + abs_sq(P.var(3, 0)) + abs_sq(P.var(3, 1)),
                       ("z1", "z2", "z3"))
    term = P.var(4, 2) * P.var(4, 1, True) ** 2
    Mp = _target(4, term + term.conjugate())
    F = MapJet((P.var(3, 0) * 2, P.var(3, 1) * 2, P.zero(3), P.var(3, 2) * 4), 3)
    res = check_map(src, Mp, F)
    assert res.vanishes and res.composed == src.rho * 4
    cert = transversality_certificate(src, Mp, F)
    assert cert.lam == 4 and cert.sqrt_lam == 2
    assert cert.all_nu[(2, 2)][0][2] == 2 * cert.lam
    assert cert.verdict


def test_certificate_reports_unnormalized_inputs():
    F = MapJet((z(0) * 2, P.zero(2), z(1)), 2)
    term = P.var(3, 1) * P.var(3, 0, True) ** 2
    cert = transversality_certificate(heis(), _target(3, term + term.conjugate()), F)
    assert not cert.verdict and "not normalized" in cert.message


@settings(max_examples=20)
@given(st.integers(0, 100_000))
def test_product_formula_agreement(seed):
    M, Mp, F = normalized_instance(random.Random(seed))
    cert = transversality_certificate(M, Mp, F)
    for nu, product in cert.all_nu.values():
        assert nu[M.nvars - 1] == product
    if cert.pair is not None:
        assert cert.stack_rank == M.nvars + 1
        stack = [cert.rho_row_at_0] + cert.li_rows_at_0 + [cert.nu]
        assert exact_rank(stack) == M.nvars + 1
