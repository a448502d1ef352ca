import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgq.complexes import (
    ChainMap,
    FiniteComplex,
    Window,
    betti,
    cohomology,
    identity_map,
    is_fiber_sequence,
    is_quasi_iso,
)
from sgq.errors import NotChainMap
from sgq.linalg import dense_nullspace, dense_rank, rational_det

small = st.integers(-4, 4).map(Fraction)
square = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n))


def perm_det(M):
    n = len(M)
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        prod = Fraction(1)
        for i in range(n):
            prod *= M[i][perm[i]]
        total += -prod if inv % 2 else prod
    return total


@settings(max_examples=200, deadline=None)
@given(square)
def test_det_matches_permutation_expansion(M):
    assert rational_det(M) == perm_det(M)
    assert (dense_rank(M) == len(M)) == (perm_det(M) != 0)


@settings(max_examples=200, deadline=None)
@given(square)
def test_nullspace_is_kernel(M):
    n = len(M[0])
    ker = dense_nullspace(M, n)
    assert len(ker) + dense_rank(M) == n
    for v in ker:
        vec = [v.get(j, 0) for j in range(n)] if isinstance(v, dict) else list(v)
        assert all(sum(M[i][j] * vec[j] for j in range(n)) == 0 for i in range(len(M)))


def circle():
    # triangle: vertices 0,1,2, edges 01,12,20; cochain degree 0 -> 1
    d0 = [[-1, 1, 0], [0, -1, 1], [1, 0, -1]]
    return FiniteComplex.from_matrices({0: 3, 1: 3}, {0: d0})


def test_circle_cohomology():
    C = circle()
    C.check_square_zero()
    assert {k: v for k, v in betti(cohomology(C)).items() if v} == {0: 1, 1: 1}


def test_identity_is_quasi_iso():
    C = circle()
    assert is_quasi_iso(identity_map(C), Window(0, 1)).passed


def test_zero_map_is_not_quasi_iso():
    C = circle()
    z = ChainMap.from_matrices(C, C, {0: [[0] * 3] * 3, 1: [[0] * 3] * 3})
    rep = is_quasi_iso(z, Window(0, 1))
    assert not rep.passed and rep.witness


def test_short_exact_sequence_is_fiber_sequence():
    A = FiniteComplex.from_matrices({0: 1}, {})
    B = FiniteComplex.from_matrices({0: 2}, {})
    C = FiniteComplex.from_matrices({0: 1}, {})
    f = ChainMap.from_matrices(A, B, {0: [[1], [0]]})
    g = ChainMap.from_matrices(B, C, {0: [[0, 1]]})
    assert is_fiber_sequence(f, g, Window(-1, 1)).passed
    g_bad = ChainMap.from_matrices(B, C, {0: [[0, 0]]})
    assert not is_fiber_sequence(f, g_bad, Window(-1, 1)).passed


def test_report_json_is_stable():
    rep = is_quasi_iso(identity_map(circle()), Window(0, 1), scenario="id")
    rep.millis = 17
    assert rep.to_json() == rep.to_json()
    assert "millis" not in rep.to_dict()
    assert rep.to_dict(timings=True)["millis"] == 17


def test_non_chain_map_rejected():
    C = circle()
    bad = ChainMap.from_matrices(C, C, {0: [[1, 0, 0], [0, 0, 0], [0, 0, 0]],
                                        1: [[0] * 3] * 3})
    with pytest.raises(NotChainMap):
        is_quasi_iso(bad, Window(0, 1))
