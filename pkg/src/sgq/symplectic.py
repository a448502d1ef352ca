"""Shifted cotangent cells, nondegeneracy, Lagrangian fibrations and twists."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .complexes import (
    FAIL,
    PASS,
    ChainMap,
    CheckReport,
    FiniteComplex,
    Window,
    cohomology,
    is_fiber_sequence,
    window_complex,
)
from .derham import AffineCell, DeRhamAlgebra, classify_form, dname, de_rham
from .errors import (
    AlphaNotClosed,
    NotTwoForm,
    OddShift,
    RelationalBaseUnsupported,
    TrivializationInvalid,
    UnsupportedShift,
)
from .graded import Derivation, Element, Morphism
from .linalg import leibniz_det


@dataclass
class SymplecticCell:
    D: DeRhamAlgebra
    n: int
    base: list
    fiber: list
    lam: Element
    omega: Element

    @property
    def algebra(self):
        return self.D.algebra


def fiber_names(base: Sequence[str]) -> list:
    if len(base) == 1:
        return ["p"]
    return [f"p{i + 1}" for i in range(len(base))]


def shifted_cotangent(base: AffineCell, n: int, internal: Mapping | None = None,
                      fibers: Sequence[str] | None = None) -> SymplecticCell:
    """``T*[n]`` of a free cell: fiber ``p_i`` of degree ``n - deg x_i``,
    ``lambda = sum p_i dx_i`` and ``omega = d lambda = sum dp_i dx_i``."""
    if base.relation is not None:
        raise RelationalBaseUnsupported("shifted cotangent needs a free base cell")
    xs = base.names
    ps = list(fibers) if fibers else fiber_names(xs)
    gens = list(base.generators) + [(p, n - d) for p, (_, d) in zip(ps, base.generators)]
    cell = AffineCell(gens, invertible=base.invertible, internal=dict(internal or {}),
                      name=f"T*[{n}]{base.name}")
    D = de_rham(cell)
    A = D.algebra
    lam = A.zero()
    for x, p in zip(xs, ps):
        lam = lam + A.gen(p) * D.dd(x)
    omega = D.d(lam)
    return SymplecticCell(D, n, list(xs), ps, lam, omega)


# -- omega# ------------------------------------------------------------------------------
def coordinate_contraction(D: DeRhamAlgebra, g: str) -> Derivation:
    """``iota_{d/dg}``: ``dg -> 1``, degree ``-(deg g + 1)``, weight -1."""
    A = D.algebra
    deg = A.degrees[A.index[g]]
    return Derivation(A, {dname(g): A.one()}, -(deg + 1), -1, name=f"iota_{g}", check=False)


def one_form_coefficients(D: DeRhamAlgebra, e: Element) -> dict:
    """``{g: f_g}`` with ``e = sum f_g dg`` (coefficients written on the left)."""
    A = D.algebra
    form_idx = {A.index[dname(g)]: g for g in D.base}
    out: dict = {}
    for m, c in e.terms.items():
        hits = [i for i in form_idx if m[i]]
        if len(hits) != 1 or m[hits[0]] != 1:
            raise NotTwoForm("expected a one-form", witness=e)
        i = hits[0]
        rest = list(m)
        rest[i] = 0
        # move dg to the right end past any later generators
        tail_odd = sum(m[j] for j in A.odd if j > i) % 2
        if tail_odd and i in A.odd:
            c = -c
        g = form_idx[i]
        out[g] = out.get(g, A.zero()) + A.element({tuple(rest): c})
    return {g: v for g, v in out.items() if v}


def omega_sharp(D: DeRhamAlgebra, omega: Element, rows: Sequence[str] | None = None,
                cols: Sequence[str] | None = None) -> list:
    """Matrix ``M[g][h]`` = coefficient of ``dh`` in ``iota_{d/dg} omega``."""
    rows = list(rows or D.base)
    cols = list(cols or D.base)
    A = D.algebra
    M = []
    for g in rows:
        coeffs = one_form_coefficients(D, coordinate_contraction(D, g)(omega))
        M.append([coeffs.get(h, A.zero()) for h in cols])
    return M


def _is_constant(e: Element) -> bool:
    return all(not any(m) for m in e.terms)


def _const(e: Element) -> Fraction:
    return e.constant_term()


def is_unit(e: Element) -> bool:
    """Unit of a Laurent polynomial ring: a single monomial in invertible generators."""
    if len(e.terms) != 1:
        return False
    (m,), = [tuple(e.terms)]
    A = e.algebra
    return all(not x or A.invertible[i] for i, x in enumerate(m))


def _check_two_form(omega: Element, n: int | None = None) -> None:
    if not omega:
        return
    fc = classify_form(omega)
    if fc.p != 2 or (n is not None and fc.n != n):
        raise NotTwoForm(f"expected a 2-form of degree {n}, got (p, n) = ({fc.p}, {fc.n})",
                         witness=omega)


def check_nondegenerate(D: DeRhamAlgebra, omega: Element, n: int | None = None,
                        scenario: str = "nondegenerate") -> CheckReport:
    _check_two_form(omega, n)
    A = D.algebra
    M = omega_sharp(D, omega)
    if not M:
        return CheckReport(scenario, PASS)
    det = leibniz_det(M, A.zero(), A.one())
    if is_unit(det):
        return CheckReport(scenario, PASS, details={"det": str(det)})
    return CheckReport(scenario, FAIL, witness=str(det), details={"det": str(det)})


# -- Lagrangian fibrations -----------------------------------------------------------------
@dataclass
class FibrationDatum:
    D: DeRhamAlgebra
    omega: Element
    n: int
    base: list  # generators pulled back from B
    trivialization: Element | None = None

    @property
    def fiber(self) -> list:
        return [g for g in self.D.base if g not in self.base]


def relative_restriction(D: DeRhamAlgebra, base: Sequence[str]) -> Morphism:
    """``DR(X) -> DR(X/B)``: kill the form generators of the base directions."""
    A = D.algebra
    return Morphism(A, A, {dname(b): A.zero() for b in base}, name="restrict")


def check_lagrangian_fibration(F: FibrationDatum, W: Window | None = None,
                               scenario: str = "lagrangian-fibration") -> CheckReport:
    W = W or Window()
    D, A = F.D, F.D.algebra
    _check_two_form(F.omega, F.n)
    rel = relative_restriction(D, F.base)(F.omega)
    if F.trivialization is not None:
        h = F.trivialization
        defect = rel - relative_restriction(D, F.base)(D.d(h))
        if not A.is_zero(defect):
            raise TrivializationInvalid("trivialization does not bound the relative form",
                                        witness=defect)
    elif not A.is_zero(rel):
        return CheckReport(scenario, FAIL, witness=str(rel), window=W,
                           details={"stage": "trivialization"})
    fib = F.fiber
    allg = list(D.base)
    M = omega_sharp(D, F.omega, rows=allg, cols=fib)  # T_X -> L_{X/B}[n]
    if all(_is_constant(e) for row in M for e in row):
        TXB = FiniteComplex.from_matrices({0: len(fib)}, {})
        TX = FiniteComplex.from_matrices({0: len(allg)}, {})
        L = FiniteComplex.from_matrices({0: len(fib)}, {})
        inc = [[1 if allg[i] == fib[j] else 0 for j in range(len(fib))]
               for i in range(len(allg))]
        sharp = [[_const(M[i][j]) for i in range(len(allg))] for j in range(len(fib))]
        f = ChainMap.from_matrices(TXB, TX, {0: inc})
        g = ChainMap.from_matrices(TX, L, {0: sharp})
        rep = is_fiber_sequence(f, g, W, scenario=scenario)
        rep.details["route"] = "constant"
        return rep
    # unit-determinant fallback: iso from base directions, zero on fibre directions
    iso = [M[allg.index(b)] for b in F.base]
    for fg in fib:
        row = M[allg.index(fg)]
        for e in row:
            if not A.is_zero(e):
                return CheckReport(scenario, FAIL, witness=str(e), window=W,
                                   details={"stage": "isotropy"})
    if len(iso) != len(fib):
        return CheckReport(scenario, FAIL, window=W, witness=f"rank {len(iso)} != {len(fib)}")
    det = leibniz_det(iso, A.zero(), A.one())
    ok = is_unit(det)
    return CheckReport(scenario, PASS if ok else FAIL, witness=None if ok else str(det),
                       window=W, details={"route": "determinant", "det": str(det)})


def cotangent_fibration(S: SymplecticCell) -> FibrationDatum:
    return FibrationDatum(S.D, S.omega, S.n, list(S.base))


# -- parity obstruction --------------------------------------------------------------------
def euler(dims: Mapping[int, int]) -> int:
    return sum((-1) ** (k % 2) * v for k, v in dims.items())


def parity_obstruction(dims: Mapping[int, int], fiber_dims: Mapping[int, int] | None, n: int,
                       scenario: str = "parity") -> CheckReport:
    """With ``fiber_dims``: pass iff ``chi(T_X) = 2 chi(T_{X/B})``.  Without: the
    query "is any Lagrangian fibration excluded", passing iff ``chi(T_X)`` is odd."""
    if n % 2:
        raise OddShift("the parity obstruction needs an even shift")
    chi = euler(dims)
    details = {"virtual_dimension": chi}
    if fiber_dims is None:
        obstructed = chi % 2 != 0
        details["obstructed"] = obstructed
        return CheckReport(scenario, PASS if obstructed else FAIL, details=details,
                           witness=None if obstructed else f"dim = {chi} is even")
    chi_f = euler(fiber_dims)
    details["fiber_dimension"] = chi_f
    ok = chi == 2 * chi_f
    return CheckReport(scenario, PASS if ok else FAIL, details=details,
                       witness=None if ok else f"{chi} != 2 * {chi_f}")


def classifying_stack_tangent(dim_g: int) -> dict:
    """Graded dimensions of ``T_{BG} = g[1]``."""
    return {-1: dim_g}


# -- twists --------------------------------------------------------------------------------
def magnetic(base: AffineCell, B_fn, n: int = 0) -> SymplecticCell:
    """``T*X`` with ``omega + pi^* B``; ``B_fn(D)`` builds the closed 2-form on the total space."""
    if n != 0:
        raise UnsupportedShift("magnetic deformation is supported for n = 0")
    S = shifted_cotangent(base, 0)
    B = B_fn(S.D)
    _check_two_form(B, 0)
    dB = S.D.d(B)
    if not S.algebra.is_zero(dB):
        raise AlphaNotClosed("B is not closed", witness=dB)
    return SymplecticCell(S.D, 0, S.base, S.fiber, S.lam, S.omega + B)


def derived_critical_locus(base: AffineCell, S_fn) -> SymplecticCell:
    """``T*[-1]X`` with ``del p_i = dS/dx_i``; ``S_fn(A)`` builds S in the cell algebra."""
    probe = de_rham(base)
    S = S_fn(probe.algebra)
    dS = probe.d(S)
    coeffs = one_form_coefficients(probe, dS) if dS else {}
    xs = base.names
    ps = fiber_names(xs)
    table = {x: coeffs.get(x) for x in xs}

    def make(x):
        c = table[x]
        return lambda A: _transport(c, A) if c is not None else A.zero()

    internal = {p: make(x) for x, p in zip(xs, ps)}
    return shifted_cotangent(base, -1, internal=internal)


def twisted_cotangent(base: AffineCell, n: int, form_fn) -> SymplecticCell:
    if n == 0:
        return magnetic(base, form_fn)
    if n == -1:
        return derived_critical_locus(base, form_fn)
    raise UnsupportedShift(f"twisted cotangent for n = {n} is not supported")


def _transport(e: Element, A) -> Element:
    """Re-express ``e`` in algebra ``A`` (generator names must exist there)."""
    src = e.algebra
    out = A.zero()
    for m, c in e.terms.items():
        term = A.scalar(c)
        for i, x in enumerate(m):
            if x:
                term = term * A.gen(src.names[i]) ** x
        out = out + term
    return out


def function_cohomology(S: SymplecticCell, W: Window) -> dict:
    """Cohomology of ``(O, del)`` on the weight-0 part of the window."""
    D = S.D
    Wf = W.with_(wmin=0, wmax=0)
    diff = D.internal if D.internal is not None else (lambda e: D.algebra.zero())
    C = window_complex(D.algebra, diff, Wf)
    return cohomology(C, Wf)


# -- Liouville graph -----------------------------------------------------------------------
def liouville_pullback_check(base: AffineCell, alpha_fn,
                             scenario: str = "liouville-graph") -> CheckReport:
    """Pull ``lambda`` back along the graph of ``alpha``; pass iff it returns ``alpha``."""
    DX = de_rham(base)
    alpha = alpha_fn(DX)
    if not alpha:
        n = 0
    else:
        fc = classify_form(alpha)
        if fc.p != 1:
            raise NotTwoForm("alpha must be a one-form", witness=alpha)
        n = fc.degree - 1
    S = shifted_cotangent(base, n)
    coeffs = one_form_coefficients(DX, alpha) if alpha else {}
    A, B = S.algebra, DX.algebra
    images = {}
    for x, p in zip(S.base, S.fiber):
        a = coeffs.get(x, B.zero())
        images[p] = a
        images[dname(p)] = DX.d(a)
    gamma = Morphism(A, B, images, name="graph")
    pulled = gamma(S.lam)
    ok = B.is_zero(pulled - alpha)
    omega_ok = B.is_zero(gamma(S.omega) - DX.d(alpha))
    details = {"pullback": str(pulled), "omega_pullback_is_d_alpha": omega_ok}
    return CheckReport(scenario, PASS if ok and omega_ok else FAIL,
                       witness=None if ok else str(pulled - alpha), details=details)
