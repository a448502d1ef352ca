import random

import pytest

from sgq.complexes import Window
from sgq.derham import affine_space
from sgq.errors import ActionNotLie
from sgq.hamiltonian import (
    HamiltonianDatum,
    bg_multiplicativity,
    cartan_model,
    equivariant_extension,
    equivariant_prequantization_check,
    extension_closed,
    find_primitive,
    gl1,
    gl1_cotangent_group,
    gl1_on_cotangent_line,
    gm2,
    gm_nonexactness,
    invariant_square_zero,
    moment_check,
)
from sgq.lie import sl2
from sgq.symplectic import shifted_cotangent


def test_moment_map_sign_and_constants():
    X = gl1_on_cotangent_line()
    assert moment_check(X, 1).passed
    assert not moment_check(X, -1).passed
    alg = X.D.algebra
    X.mu = [X.mu[0] + alg.scalar(5)]
    rep = moment_check(X, 1)
    assert rep.passed and "constants" in rep.details["note"]
    X.mu = [alg.zero()]
    rep = moment_check(X, 1)
    assert not rep.passed and rep.witness


def test_cartan_model_squares_to_zero_on_invariants():
    C = cartan_model(gl1_on_cotangent_line())
    assert invariant_square_zero(C, Window(-2, 4, 0, 4, 4)) > 0


def test_trivial_group_gives_de_rham():
    X = gl1_on_cotangent_line()
    X.action = [{}]
    C = cartan_model(X)
    x = C.algebra.gen("x")
    assert C.total(x) == C.E.d(x)


def test_extension_matches_moment_check():
    X = gl1_on_cotangent_line()
    C = cartan_model(X)
    assert extension_closed(C, 1) and not extension_closed(C, -1)
    assert C.algebra.is_zero(equivariant_extension(C, 1).weight_component(1)
                             - C.lift(X.mu[0]) * C.algebra.gen("t").scale(-1))


def test_random_perturbations_agree():
    rng = random.Random(11)
    base = gl1_on_cotangent_line()
    alg = base.D.algebra
    x, p = alg.gens("x", "p")
    for _ in range(25):
        mu = base.mu[0] + (x ** rng.randint(0, 2) * p ** rng.randint(0, 2)).scale(
            rng.choice([0, 0, 1, -1, 2]))
        act = {"x": x.scale(rng.choice([1, 1, 2])), "p": -p}
        X = HamiltonianDatum(base.D, base.omega, gl1(), [act], [mu], base.A, base.beta, ["x"])
        assert moment_check(X, 1).passed == extension_closed(cartan_model(X), 1)


def test_non_lie_action_rejected():
    S = shifted_cotangent(affine_space("x", "y"), 0)
    alg = S.algebra
    x, y = alg.gens("x", "y")
    g = sl2()
    act = [{"x": y}, {"y": x}, {"x": x * y}]
    X = HamiltonianDatum(S.D, S.omega, g, act, [alg.zero()] * 3)
    with pytest.raises(ActionNotLie):
        cartan_model(X)


@pytest.mark.parametrize("make", [gl1_on_cotangent_line, gl1_cotangent_group])
def test_equivariant_prequantization(make):
    rep = equivariant_prequantization_check(make())
    assert rep.passed
    assert all(rep.details["items"].values())


def test_prequantization_needs_curvature():
    X = gl1_on_cotangent_line()
    X.A = X.D.algebra.zero()
    rep = equivariant_prequantization_check(X)
    assert not rep.passed and not rep.details["items"]["curvature"]


def test_bg_identities():
    rep = bg_multiplicativity()
    assert rep.passed
    assert all(rep.details["identities"].values())
    assert rep.details["H_multiplicative_with_literal_sign"] is False
    flipped = bg_multiplicativity(omega_sign=1)
    assert not flipped.passed and not flipped.details["identities"]["H_multiplicative"]
    assert flipped.details["identities"]["H_closed"]


def test_bg_zero_pairing_is_degenerate():
    rep = bg_multiplicativity(0)
    assert rep.passed and rep.details["H_multiplicative_with_literal_sign"]


def test_gm2_primitives():
    D = gm2()
    x, y = D.gen("x"), D.gen("y")
    dx, dy = D.dd("x"), D.dd("y")
    eta = find_primitive(D, dx * dy, 2)
    assert eta is not None and D.d(eta) == dx * dy
    assert find_primitive(D, x ** -1 * dx * y ** -1 * dy, 3) is None
    rep = gm_nonexactness(4)
    assert rep.passed and rep.details["bound"] == 4

