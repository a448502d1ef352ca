import random
from fractions import Fraction

import pytest

from conftest import delta_oracle
from sgq.bv import (
    OddCotangent,
    bv_bracket,
    check_m1_prequantization,
    check_retract,
    kappa_is_grading,
    sdr_euler,
    sdr_severa,
    verify_bv_equivalence,
)
from sgq.complexes import Window
from sgq.errors import NotSemidensity, RouteFlagMismatch
from sgq.scenarios import function_monomials


@pytest.mark.parametrize("m", [1, 2, 3])
def test_laplacian_matches_coordinate_formula(m):
    cell = OddCotangent(m)
    for f in function_monomials(cell, 4):
        assert cell.laplacian_fn(f) == delta_oracle(cell, f)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_laplacian_squares_to_zero_and_equals_divergence(m):
    cell = OddCotangent(m)
    for f in function_monomials(cell, 4):
        assert not cell.laplacian_fn(cell.laplacian_fn(f))
        assert cell.divergence(f) == cell.laplacian_fn(f)


def test_worked_laplacian():
    cell = OddCotangent(2)
    x1, x2, p1, p2 = cell.A.gens("x1", "x2", "p1", "p2")
    assert cell.laplacian_fn(p1 * p2 * x1 * x2) == p2 * x2 - p1 * x1
    with pytest.raises(NotSemidensity):
        cell.laplacian(x1)


def test_bracket_is_canonical_pairing():
    cell = OddCotangent(2)
    x1, x2, p1, p2 = cell.A.gens("x1", "x2", "p1", "p2")
    assert bv_bracket(cell, x1, p1).constant_term() != 0
    assert not bv_bracket(cell, x1, p2)
    assert not bv_bracket(cell, x1, x2)
    assert not bv_bracket(cell, p1, p2)


def test_fourier_round_trip():
    cell = OddCotangent(2)
    Y = cell.Y
    for form in (Y.algebra.one(), Y.dd("x1"), Y.gen("x2") ** 2 * Y.dd("x1") * Y.dd("x2")):
        assert cell.odd_fourier_inverse(cell.odd_fourier(form)) == form


@pytest.mark.parametrize("m", [1, 2])
def test_retracts_satisfy_side_conditions(m):
    W = Window(-2, 2, 0, 4, 4)
    assert check_retract(sdr_severa(m, W)) == []
    assert check_retract(sdr_euler(m, W.with_(completed=True))) == []
    assert kappa_is_grading(m, W) == []


def test_route_flags():
    W = Window(-2, 2, 0, 4, 4)
    with pytest.raises(RouteFlagMismatch):
        sdr_euler(1, W)
    with pytest.raises(RouteFlagMismatch):
        sdr_severa(1, W.with_(completed=True))


@pytest.mark.parametrize("lam", [0, 1, -2, Fraction(3, 5)])
def test_severa_induces_lambda_delta(lam):
    assert verify_bv_equivalence(1, "severa", lam).passed


def test_euler_small_complex_is_point():
    rep = verify_bv_equivalence(1, "euler")
    assert rep.passed


def test_m1_prequantization_sign():
    cell = OddCotangent(1)
    A, D = cell.A, cell.D
    tail = A.gen("p") * D.dd("x")
    verdicts = {s: check_m1_prequantization(D, A.one(), [tail.scale(s)], cell.omega).passed
                for s in (1, -1)}
    assert verdicts == {1: False, -1: True}


def test_m1_routes_agree_on_random_tails():
    cell = OddCotangent(1)
    A, D = cell.A, cell.D
    x, p = A.gens("x", "p")
    rng = random.Random(7)
    for _ in range(30):
        c1, c2 = rng.randint(-2, 2), rng.randint(-2, 2)
        h1 = (p * D.dd("x")).scale(c1) + (x * D.dd("p")).scale(c2)
        rep = check_m1_prequantization(D, A.one(), [h1], cell.omega)
        assert rep.details["exp_route"] == rep.details["componentwise_route"]
