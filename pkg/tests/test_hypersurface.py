import random

import pytest
from hypothesis import given, strategies as st

from conftest import random_gaussian
from crdegen.errors import UsageError, ValidationError
from crdegen.gaussian import I, gr
from crdegen.hypersurface import (GENERAL, GRAPH, RIGID, Hypersurface, abs_sq, apply_field,
                                  cr_basis, gradient_row, im_part, is_light_cone_tube,
                                  sample_points, tube_polynomial, validate_point)
from crdegen.nondegen import row_tower
from crdegen.poly import PolarizedPoly as P

NAMES3 = ("w1", "w2", "w3")


def w(j, c=False, n=3):
    return P.var(n, j, c)


def quadric():
    return Hypersurface(-im_part(w(2)) + abs_sq(w(0)) + abs_sq(w(1)), NAMES3)


def model():
    return Hypersurface(-im_part(w(2)) + abs_sq(w(0)) + abs_sq(w(1)) ** 2, NAMES3)


def mxc():
    return Hypersurface(-im_part(w(1)) + abs_sq(w(0)), NAMES3, distinguished=1)


def random_rigid(rng, nvars, degrees=(3, 4), height=5, terms=4):
    """-Im w_N + sum_{j<N-1}|w_j|^2 + random real phi of the given degrees, free of w_N."""
    n = nvars - 1
    phi = P.zero(nvars)
    for _ in range(terms):
        deg = rng.choice(degrees)
        e = [0] * (2 * nvars)
        for _ in range(deg):
            slot = rng.randrange(n) + rng.choice((0, nvars))
            e[slot] += 1
        m = P.monomial(nvars, e, random_gaussian(rng, height))
        phi = phi + m + m.conjugate()
    rho = -im_part(P.var(nvars, n))
    for j in range(n - 1):
        rho = rho + abs_sq(P.var(nvars, j))
    return Hypersurface(rho + phi, tuple(f"w{j + 1}" for j in range(nvars)))


def test_forms():
    assert quadric().form == RIGID
    assert mxc().form == RIGID
    tube = Hypersurface(tube_polynomial(3), ("z1", "z2", "z3"))
    assert tube.form == GENERAL and is_light_cone_tube(tube)
    graph = Hypersurface(-im_part(w(2)) + abs_sq(w(0)) + abs_sq(w(2)), NAMES3)
    assert graph.form == GRAPH


def test_reality_enforced():
    with pytest.raises(ValidationError, match="not real"):
        Hypersurface(w(0) * I, NAMES3)


def test_quadric_fields():
    L = cr_basis(quadric())
    assert len(L) == 2
    # Lambda_1 = d/dw1bar - 2i w1 d/dw3bar
    assert dict(L[0].coeffs) == {0: P.const(3, 1), 2: w(0) * (-2 * I)}


def test_model_second_field():
    L2 = cr_basis(model())[1]
    assert dict(L2.coeffs) == {1: P.const(3, 1), 2: w(1) ** 2 * w(1, True) * (-4 * I)}


def test_apply_field_examples():
    L1, L2 = cr_basis(model())
    assert apply_field(L1, w(0, True)) == P.const(3, 1)
    assert apply_field(L1, model().rho).is_zero()
    assert apply_field(L2, w(1) * w(1, True) ** 2 * 2) == w(1) * w(1, True) * 4


def test_distinguished_must_control():
    H = Hypersurface(-im_part(w(1)) + abs_sq(w(0)), NAMES3, distinguished=2)
    with pytest.raises(ValidationError, match="does not control"):
        cr_basis(H)


def test_gradient_rows():
    assert gradient_row(quadric(), [0, 0, 0]) == [0, 0, I / 2]
    row = gradient_row(model())
    assert row == [w(0, True), w(1) * w(1, True) ** 2 * 2, P.const(3, I / 2)]
    assert gradient_row(mxc())[2].is_zero()


def test_validate_point_examples():
    tube = Hypersurface(tube_polynomial(3), ("z1", "z2", "z3"))
    assert validate_point(tube, [3 * I, 4 * I, 5 * I]).validated
    with pytest.raises(ValidationError, match="singular point"):
        validate_point(tube, [0, 0, 0])
    assert validate_point(quadric(), [gr(1), gr(0), I]).validated
    with pytest.raises(ValidationError, match="not on hypersurface"):
        validate_point(quadric(), [gr(1), gr(0), gr(0)])
    with pytest.raises(UsageError):
        validate_point(quadric(), [0, 0])


def test_sampler_requires_rigid():
    graph = Hypersurface(-im_part(w(2)) + abs_sq(w(0)) + abs_sq(w(2)), NAMES3)
    with pytest.raises(ValidationError, match="rigid graph"):
        sample_points(graph, 3)


@pytest.mark.parametrize("make", [quadric, model, mxc])
def test_sampler_soundness(make):
    H = make()
    pts = sample_points(H, 20, seed=4)
    assert len(pts) == 20
    for p in pts:
        assert H.rho.eval(p.coords) == 0
        validate_point(H, p.coords)


def test_tube_sampler_soundness():
    tube = Hypersurface(tube_polynomial(3), ("z1", "z2", "z3"))
    for p in sample_points(tube, 30, seed=9):
        assert tube.rho.eval(p.coords) == 0


def test_sampler_deterministic():
    assert ([p.coords for p in sample_points(model(), 5, seed=2)]
            == [p.coords for p in sample_points(model(), 5, seed=2)])


@given(st.integers(0, 10_000), st.sampled_from([3, 4]))
def test_fields_annihilate_rho(seed, nvars):
    H = random_rigid(random.Random(seed), nvars)
    for L in cr_basis(H):
        assert apply_field(L, H.rho).is_zero()


@given(st.integers(0, 10_000))
def test_fields_annihilate_general_rho(seed):
    rng = random.Random(seed)
    H = random_rigid(rng, 3)
    # non-graph: multiply by a positive factor and add a w3-dependent real term
    bump = abs_sq(w(2)) * gr(rng.randint(1, 4))
    G = Hypersurface(H.rho * (1 + abs_sq(w(0))) + bump, NAMES3)
    for L in cr_basis(G):
        assert apply_field(L, G.rho).is_zero()


@given(st.integers(0, 10_000), st.sampled_from([3, 4]))
def test_unit_rows_at_zero(seed, nvars):
    H = random_rigid(random.Random(seed), nvars)
    tower = row_tower(H)
    zero = [0] * nvars
    for k in range(1, nvars - 1):
        row = [p.eval(zero) for p in tower.row((k,))]
        assert row == [int(j == k - 1) for j in range(nvars)]
        # leading-order structure: row minus unit row has no constant term
        for j, p in enumerate(tower.row((k,))):
            assert (p - int(j == k - 1)).constant_term() == 0
