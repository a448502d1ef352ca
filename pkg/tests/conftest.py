import functools
import time

import pytest
from hypothesis import strategies as st

from sgq.graded import Derivation, GeneratorSpec, GradedAlgebra, SL2_RELATION

# x even deg 0 (invertible), y even deg 2, t odd deg 1, u odd deg -1
KERNEL_SPECS = [GeneratorSpec("x", 0, 0, True), GeneratorSpec("y", 2, 0),
                GeneratorSpec("t", 1, 0), GeneratorSpec("u", -1, 0)]


@pytest.fixture(scope="session")
def kernel():
    return GradedAlgebra(KERNEL_SPECS)


def kernel_algebra():
    return GradedAlgebra(KERNEL_SPECS)


def sl2_algebra():
    return GradedAlgebra([GeneratorSpec(n) for n in "abcd"], [SL2_RELATION])


coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=4)

# exponent tuples for (x, y, t, u); total |degree| stays within 6
monos = st.tuples(st.integers(-2, 2), st.integers(0, 2), st.integers(0, 1),
                  st.integers(0, 1))


def element_of(A, terms):
    return A.element({m: c for m, c in terms})


def elements(A):
    return st.lists(st.tuples(monos, coeffs), max_size=4).map(lambda t: element_of(A, t))


def homogeneous(A):
    """``c * m * f(x)``: a monomial times a Laurent polynomial in the degree-0 generator."""
    def build(args):
        m, f = args
        e = A.element({m: 1})
        poly = A.element({(k, 0, 0, 0): c for k, c in f}) if f else A.one()
        return e * poly
    return st.tuples(monos, st.lists(st.tuples(st.integers(-2, 2), coeffs), max_size=3)).map(build)


def derivations(A):
    """Random degree-1 derivations: x -> f t, y -> g t y, t -> h y, u -> k x."""
    def build(cs):
        x, y, t, u = (A.gen(n) for n in "xytu")
        vals = {"x": t.scale(cs[0]) * x ** 2, "y": (t * y).scale(cs[1]),
                "t": (y * x).scale(cs[2]), "u": x.scale(cs[3]) + (t * u).scale(cs[0])}
        return Derivation(A, vals, 1)
    return st.tuples(coeffs, coeffs, coeffs, coeffs).map(build)


def delta_oracle(cell, f):
    """sum_i d^2 f / dp_i dx_i on x^a p_S, left odd derivative, written out by hand."""
    A = cell.A
    out = {}
    xi = [A.index[x] for x in cell.xs]
    pi = [A.index[p] for p in cell.ps]
    for m, c in f.terms.items():
        for k in range(cell.m):
            a, s = m[xi[k]], m[pi[k]]
            if not a or not s:
                continue
            before = sum(m[pi[j]] for j in range(k))
            new = list(m)
            new[xi[k]] -= 1
            new[pi[k]] = 0
            key = tuple(new)
            out[key] = out.get(key, 0) + c * a * (-1) ** before
    return A.element(out)


# acceptance criteria: number -> (ok, note, seconds); printed after the run
CRITERIA: dict = {}


def criterion(number: int, title: str):
    """Record a pass/fail line for an acceptance test, including on errors."""
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                note = fn(*args, **kwargs)
            except BaseException as exc:
                CRITERIA[number] = (False, f"{title}: {type(exc).__name__}: {exc}",
                                    time.perf_counter() - t0)
                print(f"criterion {number:2d}: FAIL  {title}")
                raise
            CRITERIA[number] = (True, f"{title}: {note}", time.perf_counter() - t0)
            print(f"criterion {number:2d}: PASS  {title} ({note})")
        return run
    return wrap


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, note, secs = CRITERIA[n]
        terminalreporter.write_line(
            f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {note}  [{secs:.1f}s]")
