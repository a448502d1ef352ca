from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import derivations, elements, homogeneous, kernel_algebra, sl2_algebra
from sgq.errors import IllDefinedOnQuotient, NotInvertible
from sgq.graded import Derivation, GeneratorSpec, GradedAlgebra, graded_commutator, inverse

A = kernel_algebra()
Q = sl2_algebra()
MANY = settings(max_examples=300, deadline=None)

sl2_monos = st.tuples(*[st.integers(0, 3)] * 4)
sl2_elems = st.lists(st.tuples(sl2_monos, st.integers(-3, 3)), max_size=4).map(
    lambda t: Q.element(dict(t)))


@MANY
@given(homogeneous(A), homogeneous(A))
def test_koszul_symmetry(a, b):
    if not a or not b:
        return
    sign = -1 if (a.degree * b.degree) % 2 else 1
    assert a * b == (b * a).scale(sign)


@MANY
@given(elements(A), elements(A), elements(A))
def test_associativity(a, b, c):
    assert (a * b) * c == a * (b * c)


@MANY
@given(derivations(A), homogeneous(A), elements(A))
def test_leibniz(D, a, b):
    if not a:
        return
    sign = -1 if (D.degree * a.degree) % 2 else 1
    assert D(a * b) == D(a) * b + (a * D(b)).scale(sign)


@MANY
@given(sl2_elems, sl2_elems, sl2_elems)
def test_quotient_normal_form(a, b, c):
    for e in (a, b * c):
        assert Q.element(e.terms) == e
        assert all(not (m[0] and m[3]) for m in e.terms)
    assert (a * b) * c == a * (b * c)


def test_odd_square_is_zero():
    t = A.gen("t")
    assert not (t * t)
    assert A.gen("t") * A.gen("u") == -(A.gen("u") * A.gen("t"))


def test_laurent_inverse():
    x = A.gen("x")
    assert x * x ** -1 == A.one()
    assert inverse(x.scale(3)) == (x ** -1).scale(Fraction(1, 3))
    with pytest.raises(NotInvertible):
        A.gen("y") ** -1


def test_sl2_relation_rewrites():
    a, b, c, d = Q.gens("a", "b", "c", "d")
    assert a * d == Q.one() + b * c
    assert a * d - b * c == Q.one()


def test_derivation_must_respect_relation():
    with pytest.raises(IllDefinedOnQuotient):
        Derivation(Q, {"a": Q.one()}, 0)


def test_commutator_of_odd_derivations():
    B = GradedAlgebra([GeneratorSpec("x"), GeneratorSpec("dx", 1)])
    d = Derivation(B, {"x": B.gen("dx")}, 1)
    assert graded_commutator(d, d).is_zero
    x = B.gen("x")
    assert d(x ** 3) == (x ** 2 * B.gen("dx")).scale(3)


def test_rational_text_form():
    x = A.gen("x")
    assert str(x.scale(Fraction(-1, 2))) == "-1/2 * x"
