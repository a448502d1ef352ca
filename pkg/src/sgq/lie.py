"""Finite-dimensional Lie algebras over Q by structure constants."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

from .complexes import FAIL, PASS, CheckReport, FiniteComplex, cohomology
from .errors import (
    DimensionMismatch,
    GradingNotIntegral,
    JacobiFails,
    NoRationalTriple,
    NotNilpotent,
    NotStabilizer,
    PairingDegenerateOnGm1,
    PairingNotInvariant,
)
from .linalg import Echelon, dense_nullspace, dense_rank, rational_det, solve

Vec = list  # dense list of Fractions


def _vec(v) -> list:
    return [Fraction(x) for x in v]


def _sparse(v) -> dict:
    return {i: x for i, x in enumerate(v) if x}


def _dense(d: dict, n: int) -> list:
    return [d.get(i, Fraction(0)) for i in range(n)]


def mat_mul(X, Y):
    return [[sum((X[i][k] * Y[k][j] for k in range(len(Y))), Fraction(0))
             for j in range(len(Y[0]))] for i in range(len(X))]


def mat_comm(X, Y):
    XY, YX = mat_mul(X, Y), mat_mul(Y, X)
    return [[XY[i][j] - YX[i][j] for j in range(len(X))] for i in range(len(X))]


def _flat(M) -> dict:
    n = len(M)
    return {i * n + j: M[i][j] for i in range(n) for j in range(n) if M[i][j]}


@dataclass
class LieAlgebraData:
    """Basis ``names``; ``consts[i][j]`` is ``[e_i, e_j]`` as a dense vector."""

    names: list
    consts: list
    pairing: list | None = None
    cartan: list = field(default_factory=list)  # indices spanning a Cartan subalgebra
    matrices: list | None = None  # defining representation, when built from matrices

    def __post_init__(self):
        self.dim = len(self.names)
        self.validate()

    # -- structure ----------------------------------------------------------------------
    def bracket(self, u: Sequence, v: Sequence) -> list:
        n = self.dim
        out = [Fraction(0)] * n
        for i, a in enumerate(u):
            if not a:
                continue
            for j, b in enumerate(v):
                if not b:
                    continue
                ab = a * b
                for k, c in enumerate(self.consts[i][j]):
                    if c:
                        out[k] += ab * c
        return out

    def basis_vector(self, i: int) -> list:
        v = [Fraction(0)] * self.dim
        v[i] = Fraction(1)
        return v

    def element(self, **coeffs) -> list:
        v = [Fraction(0)] * self.dim
        for name, c in coeffs.items():
            v[self.names.index(name)] = Fraction(c)
        return v

    def ad(self, x: Sequence) -> list:
        """Matrix of ``ad_x`` (columns = images of basis vectors)."""
        cols = [self.bracket(x, self.basis_vector(j)) for j in range(self.dim)]
        return [[cols[j][i] for j in range(self.dim)] for i in range(self.dim)]

    def killing(self) -> list:
        ads = [self.ad(self.basis_vector(i)) for i in range(self.dim)]
        n = self.dim
        return [[sum(mat_mul(ads[i], ads[j])[k][k] for k in range(n)) for j in range(n)]
                for i in range(n)]

    def pair(self, u: Sequence, v: Sequence) -> Fraction:
        P = self.pairing
        return sum((u[i] * P[i][j] * v[j] for i in range(self.dim) for j in range(self.dim)
                    if u[i] and v[j]), Fraction(0))

    def kappa(self, y: Sequence) -> list:
        """``<y, ->`` as a dual vector."""
        P = self.pairing
        return [sum((y[i] * P[i][j] for i in range(self.dim)), Fraction(0))
                for j in range(self.dim)]

    def validate(self) -> None:
        n = self.dim
        for i in range(n):
            for j in range(n):
                if any(a + b for a, b in zip(self.consts[i][j], self.consts[j][i])):
                    raise JacobiFails(f"bracket not antisymmetric on ({i}, {j})",
                                      witness=(self.names[i], self.names[j]))
        for i, j, k in product(range(n), repeat=3):
            if not (i < j < k):
                continue
            ei, ej, ek = (self.basis_vector(t) for t in (i, j, k))
            s = [a + b + c for a, b, c in zip(
                self.bracket(ei, self.bracket(ej, ek)),
                self.bracket(ej, self.bracket(ek, ei)),
                self.bracket(ek, self.bracket(ei, ej)))]
            if any(s):
                raise JacobiFails("Jacobi identity fails",
                                  witness=(self.names[i], self.names[j], self.names[k]))
        if self.pairing is not None:
            P = self.pairing
            if any(P[i][j] != P[j][i] for i in range(n) for j in range(n)):
                raise PairingNotInvariant("pairing is not symmetric")
            for i, j, k in product(range(n), repeat=3):
                ex, ey, ez = (self.basis_vector(t) for t in (i, j, k))
                if self.pair(self.bracket(ex, ey), ez) + self.pair(ey, self.bracket(ex, ez)):
                    raise PairingNotInvariant(
                        "pairing is not invariant",
                        witness=(self.names[i], self.names[j], self.names[k]))


def lie_algebra(names: Sequence[str], consts, pairing=None, cartan=()) -> LieAlgebraData:
    n = len(names)
    C = [[_vec(consts[i][j]) for j in range(n)] for i in range(n)]
    P = [[Fraction(x) for x in row] for row in pairing] if pairing is not None else None
    return LieAlgebraData(list(names), C, P, list(cartan))


def from_matrices(names: Sequence[str], mats: Sequence, pairing: str | None = "trace",
                  cartan=()) -> LieAlgebraData:
    """Structure constants of a matrix Lie algebra; pairing ``trace`` is ``tr(XY)``."""
    mats = [[[Fraction(x) for x in row] for row in M] for M in mats]
    cols = [_flat(M) for M in mats]
    n = len(mats)
    consts = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            c = solve(cols, _flat(mat_comm(mats[i], mats[j])))
            if c is None:
                raise JacobiFails(f"span not closed under commutator at ({names[i]}, {names[j]})")
            consts[i][j] = _dense(c, n)
    P = None
    if pairing == "trace":
        P = [[sum(mat_mul(mats[i], mats[j])[k][k] for k in range(len(mats[0])))
              for j in range(n)] for i in range(n)]
    g = LieAlgebraData(list(names), consts, P, list(cartan))
    g.matrices = mats
    return g


def unit(n: int, i: int, j: int) -> list:
    M = [[0] * n for _ in range(n)]
    M[i][j] = 1
    return M


def _diag(*xs) -> list:
    n = len(xs)
    return [[xs[i] if i == j else 0 for j in range(n)] for i in range(n)]


def sl2(pairing: str | None = "trace") -> LieAlgebraData:
    return from_matrices(["E", "H", "F"], [unit(2, 0, 1), _diag(1, -1), unit(2, 1, 0)],
                         pairing, cartan=[1])


def gl2(pairing: str | None = "trace") -> LieAlgebraData:
    return from_matrices(["E11", "E12", "E21", "E22"],
                         [unit(2, 0, 0), unit(2, 0, 1), unit(2, 1, 0), unit(2, 1, 1)],
                         pairing, cartan=[0, 3])


def sl3(pairing: str | None = "trace") -> LieAlgebraData:
    names, mats = [], []
    for i in range(3):
        for j in range(3):
            if i != j:
                names.append(f"E{i + 1}{j + 1}")
                mats.append(unit(3, i, j))
    names += ["H1", "H2"]
    mats += [_diag(1, -1, 0), _diag(0, 1, -1)]
    return from_matrices(names, mats, pairing, cartan=[6, 7])


def sp4(pairing: str | None = "trace") -> LieAlgebraData:
    """``X^T J + J X = 0`` for ``J = [[0, I], [-I, 0]]``: blocks ``[[A, B], [C, -A^T]]``."""
    names, mats = [], []

    def block(A, B, C):
        M = [[0] * 4 for _ in range(4)]
        for i in range(2):
            for j in range(2):
                M[i][j] = A[i][j]
                M[i][j + 2] = B[i][j]
                M[i + 2][j] = C[i][j]
                M[i + 2][j + 2] = -A[j][i]
        return M

    z = [[0, 0], [0, 0]]
    for i in range(2):
        for j in range(2):
            names.append(f"A{i + 1}{j + 1}")
            mats.append(block(unit(2, i, j), z, z))
    for (i, j) in ((0, 0), (0, 1), (1, 1)):
        S = unit(2, i, j)
        if i != j:
            S[j][i] = 1
        names.append(f"B{i + 1}{j + 1}")
        mats.append(block(z, S, z))
        names.append(f"C{i + 1}{j + 1}")
        mats.append(block(z, z, S))
    return from_matrices(names, mats, pairing, cartan=[0, 3])


def abelian(n: int) -> LieAlgebraData:
    zero = [[[0] * n for _ in range(n)] for _ in range(n)]
    return lie_algebra([f"t{i + 1}" for i in range(n)], zero,
                       pairing=[[int(i == j) for j in range(n)] for i in range(n)])


PRESETS = {"sl2": sl2, "gl2": gl2, "sl3": sl3, "sp4": sp4}


# -- subspaces ---------------------------------------------------------------------------
def span_basis(vectors: Sequence[Sequence]) -> list:
    e = Echelon()
    out = []
    for v in vectors:
        res, _ = e.add(_sparse(_vec(v)))
        if res:
            out.append(_vec(v))
    return out


def in_span(basis: Sequence[Sequence], v: Sequence) -> bool:
    e = Echelon()
    for b in basis:
        e.add(_sparse(b))
    return e.contains(_sparse(v))


def same_span(U, V) -> bool:
    return (len(span_basis(U)) == len(span_basis(V)) == len(span_basis(list(U) + list(V))))


@dataclass
class Subalgebra:
    parent: LieAlgebraData
    basis: list

    def __post_init__(self):
        self.basis = span_basis(self.basis)
        for u in self.basis:
            for v in self.basis:
                if not in_span(self.basis, self.parent.bracket(u, v)):
                    raise ValueError("subspace is not closed under the bracket")

    @property
    def dim(self) -> int:
        return len(self.basis)


def coad_matrix(g: LieAlgebraData, x: Sequence) -> list:
    """``coad_x: g -> g*``, ``y -> x([y, -])``; entry ``[i][j] = x([e_j, e_i])``."""
    n = g.dim
    M = [[Fraction(0)] * n for _ in range(n)]
    for j in range(n):
        for i in range(n):
            b = g.bracket(g.basis_vector(j), g.basis_vector(i))
            M[i][j] = sum((x[k] * b[k] for k in range(n)), Fraction(0))
    return M


def stabilizer(g: LieAlgebraData, x: Sequence) -> list:
    return dense_nullspace(coad_matrix(g, x), g.dim)


def _check_stabilizer(g, x, l: Subalgebra) -> None:
    if not same_span(l.basis, stabilizer(g, x)):
        raise NotStabilizer("l is not the stabilizer of x")


def coadjoint_exactness(g: LieAlgebraData, x: Sequence, l: Subalgebra,
                        scenario: str = "coadjoint") -> CheckReport:
    """Exactness of ``l -> g -> g* -> l*`` (inclusion, coad_x, restriction)."""
    _check_stabilizer(g, x, l)
    n, k = g.dim, l.dim
    inc = [[l.basis[j][i] for j in range(k)] for i in range(n)]
    coad = coad_matrix(g, x)
    res = [[l.basis[i][j] for j in range(n)] for i in range(k)]
    dims = {0: k, 1: n, 2: n, 3: k}
    C = FiniteComplex.from_matrices(dims, {0: inc, 1: coad, 2: res})
    C.check_square_zero()
    H = cohomology(C)
    bad = [d for d, grp in H.items() if grp.dimension]
    details = {"rank_coad": dense_rank(coad), "dim_l": k, "degenerate": k == n}
    if bad:
        return CheckReport(scenario, FAIL, witness=f"H^{bad[0]} != 0", details=details)
    return CheckReport(scenario, PASS, details=details)


def complement(U: Sequence[Sequence], V: Sequence[Sequence]) -> list:
    """Basis vectors among ``V`` extending ``U`` to a basis of ``U + V``."""
    e = Echelon()
    for u in U:
        e.add(_sparse(u))
    out = []
    for v in V:
        res, _ = e.add(_sparse(v))
        if res:
            out.append(list(v))
    return out


def levi_parabolic_check(g: LieAlgebraData, x: Sequence, l: Subalgebra, p: Subalgebra,
                         scenario: str = "levi-parabolic") -> CheckReport:
    """``coad_x: g/p -> (p/l)*`` is an isomorphism."""
    _check_stabilizer(g, x, l)
    for v in l.basis:
        if not in_span(p.basis, v):
            raise DimensionMismatch("l is not contained in p")
    gp = complement(p.basis, [g.basis_vector(i) for i in range(g.dim)])
    pl = complement(l.basis, p.basis)
    if len(gp) != len(pl):
        raise DimensionMismatch(f"dim g/p = {len(gp)} but dim p/l = {len(pl)}")
    M = [[sum((x[k] * b for k, b in enumerate(g.bracket(u, v))), Fraction(0)) for v in pl]
         for u in gp]
    det = rational_det(M) if M else Fraction(1)
    details = {"dim_g_mod_p": len(gp), "dim_p_mod_l": len(pl), "det": det}
    if det:
        return CheckReport(scenario, PASS, details=details)
    return CheckReport(scenario, FAIL, witness="pairing matrix is singular", details=details)


def borel(g: LieAlgebraData, positive: Sequence[str]) -> Subalgebra:
    vecs = [g.basis_vector(i) for i in g.cartan]
    vecs += [g.basis_vector(g.names.index(nm)) for nm in positive]
    return Subalgebra(g, vecs)


def cartan_subalgebra(g: LieAlgebraData) -> Subalgebra:
    return Subalgebra(g, [g.basis_vector(i) for i in g.cartan])


# -- sl2-triples and Slodowy data --------------------------------------------------------------
def _apply(M, v):
    return [sum((M[i][j] * v[j] for j in range(len(v))), Fraction(0)) for i in range(len(M))]


def is_nilpotent(g: LieAlgebraData, e: Sequence) -> bool:
    M = g.ad(e)
    P = M
    for _ in range(g.dim):
        P = mat_mul(P, M)
    return not any(any(r) for r in P)


def _solve_dense(cols: Sequence[Sequence], target: Sequence):
    c = solve([_sparse(col) for col in cols], _sparse(target))
    return None if c is None else _dense(c, len(cols))


def sl2_triple(g: LieAlgebraData, e: Sequence) -> tuple:
    """``(e, h, f)`` with ``[h, e] = 2e``, ``[h, f] = -2f``, ``[e, f] = h``.

    ``h`` is searched in the Cartan subalgebra first, then by the Morozov
    construction ``h = [e, z]`` with ``ad_e^2 z = -2e``.
    """
    e = _vec(e)
    if not any(e):
        raise NotNilpotent("e must be a nonzero nilpotent element")
    if not is_nilpotent(g, e):
        raise NotNilpotent("ad_e is not nilpotent", witness=e)
    n = g.dim
    basis = [g.basis_vector(i) for i in range(n)]
    candidates = []
    if g.cartan:
        cart = [g.basis_vector(i) for i in g.cartan]
        cols = [g.bracket(hb, e) for hb in cart]
        c = _solve_dense(cols, [2 * v for v in e])
        if c is not None:
            candidates.append([sum((c[k] * cart[k][i] for k in range(len(cart))), Fraction(0))
                               for i in range(n)])
    ade = g.ad(e)
    ade2 = mat_mul(ade, ade)
    z = _solve_dense([[ade2[i][j] for i in range(n)] for j in range(n)], [-2 * v for v in e])
    if z is not None:
        candidates.append(g.bracket(e, z))
    for h in candidates:
        # [e, f] = h and [h, f] = -2 f, jointly linear in f
        cols = []
        for j in range(n):
            ef = g.bracket(e, basis[j])
            hf = g.bracket(h, basis[j])
            cols.append(ef + [hf[i] + 2 * basis[j][i] for i in range(n)])
        f = _solve_dense(cols, list(h) + [Fraction(0)] * n)
        if f is not None:
            return e, h, f
    raise NoRationalTriple("no rational sl2-triple through e")


def ad_grading(g: LieAlgebraData, h: Sequence) -> dict:
    """Eigenspaces ``g(n)`` of ``ad_h``; raises unless ad_h is diagonalizable over Z."""
    n = g.dim
    M = g.ad(h)
    spaces = {}
    total = 0
    for lam in range(-2 * n, 2 * n + 1):
        S = [[M[i][j] - (lam if i == j else 0) for j in range(n)] for i in range(n)]
        ker = dense_nullspace(S, n)
        if ker:
            spaces[lam] = ker
            total += len(ker)
    if total != n:
        raise GradingNotIntegral("ad_h is not diagonalizable with integer eigenvalues")
    return spaces


def centralizer(g: LieAlgebraData, x: Sequence) -> list:
    return dense_nullspace(g.ad(x), g.dim)


@dataclass
class SlodowyData:
    grading: dict
    l: list
    m: list
    gf: list
    chi: list


def slodowy(g: LieAlgebraData, triple: tuple, scenario: str = "slodowy") -> CheckReport:
    e, h, f = triple
    if g.pairing is None:
        raise PairingNotInvariant("a nondegenerate invariant pairing is required")
    grading = ad_grading(g, h)
    chi = g.kappa(e)

    def chi_br(u, v):
        return sum((chi[k] * b for k, b in enumerate(g.bracket(u, v))), Fraction(0))

    gm1 = grading.get(-1, [])
    if gm1:
        Om = [[chi_br(u, v) for v in gm1] for u in gm1]
        if dense_rank(Om) != len(gm1):
            raise PairingDegenerateOnGm1("chi([-, -]) is degenerate on g(-1)")
    # greedy Lagrangian: repeatedly add the first vector of l-perp outside l
    l: list = []
    while 2 * len(l) < len(gm1):
        rows = [[chi_br(u, v) for v in gm1] for u in l]
        perp = dense_nullspace(rows, len(gm1)) if l else [
            [Fraction(int(i == j)) for j in range(len(gm1))] for i in range(len(gm1))]
        cand = [[sum((c[j] * gm1[j][i] for j in range(len(gm1))), Fraction(0))
                 for i in range(g.dim)] for c in perp]
        new = complement(l, cand)
        l.append(new[0])
    m = list(l)
    for lam, vecs in grading.items():
        if lam <= -2:
            m += vecs
    gf = centralizer(g, f)
    closed = all(in_span(m, g.bracket(u, v)) for u in m for v in m)
    character = all(chi_br(u, v) == 0 for u in m for v in m)
    lhs = g.dim - 2 * len(m)
    identity = lhs == len(gf)
    details = {"dim_g": g.dim, "dim_m": len(m), "dim_gf": len(gf), "dim_l": len(l),
               "grading": {k: len(v) for k, v in sorted(grading.items())},
               "m_closed": closed, "chi_character": character}
    ok = closed and character and identity
    wit = None if ok else f"dim g - 2 dim m = {lhs}, dim g^f = {len(gf)}"
    return CheckReport(scenario, PASS if ok else FAIL, witness=wit, details=details)
