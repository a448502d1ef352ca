import pytest

from sgq.complexes import Window, betti
from sgq.derham import affine_space, classify_form
from sgq.errors import AlphaNotClosed, OddShift, UnsupportedShift
from sgq.symplectic import (
    FibrationDatum,
    check_lagrangian_fibration,
    check_nondegenerate,
    classifying_stack_tangent,
    cotangent_fibration,
    derived_critical_locus,
    function_cohomology,
    liouville_pullback_check,
    magnetic,
    parity_obstruction,
    shifted_cotangent,
    twisted_cotangent,
)


@pytest.mark.parametrize("n", [-1, 0, 1])
@pytest.mark.parametrize("m", [1, 2, 3])
def test_shifted_cotangent(n, m):
    S = shifted_cotangent(affine_space(*"xyz"[:m]), n)
    fc = classify_form(S.omega)
    assert (fc.p, fc.n) == (2, n)
    assert S.algebra.is_zero(S.D.d(S.lam) - S.omega)
    assert check_nondegenerate(S.D, S.omega, n).passed
    assert check_lagrangian_fibration(cotangent_fibration(S)).passed


def test_polarization_choices():
    S = shifted_cotangent(affine_space("x"), 0)
    assert check_lagrangian_fibration(FibrationDatum(S.D, S.omega, 0, ["p"])).passed
    rep = check_lagrangian_fibration(FibrationDatum(S.D, S.omega, 0, []))
    assert not rep.passed and rep.witness
    assert not check_nondegenerate(S.D, S.algebra.zero()).passed


def test_magnetic_deformation():
    M = magnetic(affine_space("x", "y"), lambda D: D.dd("x") * D.dd("y"))
    assert check_nondegenerate(M.D, M.omega, 0).passed
    assert check_lagrangian_fibration(cotangent_fibration(M)).passed


def test_magnetic_needs_closed_form():
    with pytest.raises(AlphaNotClosed):
        magnetic(affine_space("x", "y", "z"), lambda D: D.gen("x") * D.dd("y") * D.dd("z"))


def test_twisted_cotangent_shift_guard():
    with pytest.raises(UnsupportedShift):
        twisted_cotangent(affine_space("x"), 1, lambda D: D.algebra.zero())


@pytest.mark.parametrize("k,milnor", [(2, 1), (3, 2), (4, 3)])
def test_critical_locus_jacobian_ring(k, milnor):
    S = derived_critical_locus(affine_space("x"), lambda A: A.gen("x") ** k)
    H = betti(function_cohomology(S, Window()))
    assert {d: v for d, v in H.items() if v} == {0: milnor}


def test_critical_locus_of_zero_is_shifted_cotangent():
    S = derived_critical_locus(affine_space("x"), lambda A: A.zero())
    assert S.D.internal is None or S.algebra.is_zero(S.D.internal(S.algebra.gen("p")))


def test_parity_bsl2():
    dims = classifying_stack_tangent(3)
    rep = parity_obstruction(dims, None, 2)
    assert rep.passed and rep.details["virtual_dimension"] == -3
    assert not parity_obstruction(classifying_stack_tangent(2), None, 2).passed
    with pytest.raises(OddShift):
        parity_obstruction(dims, None, 1)


def test_parity_identity_on_cotangent():
    assert parity_obstruction({0: 2}, {0: 1}, 0).passed
    assert not parity_obstruction({0: 3}, {0: 1}, 0).passed


@pytest.mark.parametrize("alpha", [
    lambda D: D.d(D.gen("x") ** 3),
    lambda D: D.gen("x") * D.dd("y"),
    lambda D: D.algebra.zero(),
], ids=["exact", "xdy", "zero"])
def test_liouville_graph(alpha):
    assert liouville_pullback_check(affine_space("x", "y"), alpha).passed
