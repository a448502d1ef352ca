"""Hamiltonian actions, the Cartan model and the multiplicative data on SL2."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .complexes import (
    FAIL,
    PASS,
    CheckReport,
    MixedComplex,
    Window,
    enumerate_monomials,
)
from .derham import (
    AffineCell,
    DeRhamAlgebra,
    de_rham,
    dname,
    maurer_cartan,
    matmul,
    sl2_cell,
    torus,
)
from .errors import ActionNotLie, NotSquareZero
from .graded import Derivation, Element, GeneratorSpec, Morphism, RewriteRule
from .lie import LieAlgebraData, lie_algebra
from .linalg import nullspace, solve
from .symplectic import (
    FibrationDatum,
    _transport,
    check_lagrangian_fibration,
    relative_restriction,
    shifted_cotangent,
)
from .derham import affine_space


def gl1() -> LieAlgebraData:
    return lie_algebra(["z"], [[[0]]], pairing=[[1]])


@dataclass
class HamiltonianDatum:
    """Action ``a(e_k) = sum_g action[k][g] d/dg`` on the cell of ``D``."""

    D: DeRhamAlgebra
    omega: Element
    g: LieAlgebraData
    action: list
    mu: list
    A: Element | None = None
    beta: list | None = None
    base: list = field(default_factory=list)
    n: int = 0

    def vector_field(self, k: int) -> Derivation:
        alg = self.D.algebra
        return Derivation(alg, dict(self.action[k]), 0, 0, name=f"a({self.g.names[k]})",
                          check=False)

    def contraction(self, k: int) -> Derivation:
        return self.D.contraction(self.action[k], degree=0, name=f"iota_a{k}")

    def lie_derivative(self, k: int) -> Derivation:
        return self.D.vector_field(self.action[k], degree=0)


def validate_action(X: HamiltonianDatum) -> None:
    """``a([e_i, e_j]) = [a(e_i), a(e_j)]`` on the base generators."""
    alg = X.D.algebra
    g = X.g
    fields = [X.vector_field(k) for k in range(g.dim)]
    for i in range(g.dim):
        for j in range(i + 1, g.dim):
            br = g.bracket(g.basis_vector(i), g.basis_vector(j))
            for name in X.D.base:
                x = alg.gen(name)
                lhs = fields[i](fields[j](x)) - fields[j](fields[i](x))
                rhs = alg.zero()
                for k, c in enumerate(br):
                    if c:
                        rhs = rhs + fields[k](x).scale(c)
                if not alg.is_zero(lhs - rhs):
                    raise ActionNotLie(f"a is not a Lie map on ({g.names[i]}, {g.names[j]})",
                                       witness=lhs - rhs)


def moment_check(X: HamiltonianDatum, sign: int = 1,
                 scenario: str = "moment-map") -> CheckReport:
    """``iota_{a(e_k)} omega = sign * d mu_k`` for every basis element."""
    alg = X.D.algebra
    for k in range(X.g.dim):
        lhs = X.contraction(k)(X.omega)
        defect = lhs - X.D.d(X.mu[k]).scale(sign)
        if not alg.is_zero(defect):
            return CheckReport(scenario, FAIL, witness=str(defect),
                               details={"basis": X.g.names[k], "sign": sign})
    return CheckReport(scenario, PASS, details={
        "sign": sign, "note": "mu is determined up to adding constants"})


# -- Cartan model ----------------------------------------------------------------------------
def t_names(g: LieAlgebraData) -> list:
    return ["t"] if g.dim == 1 else [f"t_{n}" for n in g.names]


@dataclass
class CartanModel:
    X: HamiltonianDatum
    E: DeRhamAlgebra
    ts: list
    internal: Derivation
    invariance: list  # derivations rho_a

    @property
    def algebra(self):
        return self.E.algebra

    def lift(self, e: Element) -> Element:
        return _transport(e, self.E.algebra)

    def total(self, e: Element) -> Element:
        return self.internal(e) + self.E.d(e)

    def mixed(self) -> MixedComplex:
        return MixedComplex(self.E.algebra, self.internal, {1: self.E.d}, name="cartan")


def cartan_model(X: HamiltonianDatum) -> CartanModel:
    """``DR(X) (x) Sym(g*[-2])`` with internal differential ``del + sum t_a iota_{a(e_a)}``.

    ``t_a`` has degree 2 and form weight 1, so the internal differential has weight 0.
    """
    validate_action(X)
    g = X.g
    ts = t_names(g)
    E = DeRhamAlgebra(X.D.cell, extra=[GeneratorSpec(t, 2, 1) for t in ts])
    B = E.algebra
    vals: dict = {}
    for k, t in enumerate(ts):
        for name, comp in X.action[k].items():
            key = dname(name)
            vals[key] = vals.get(key, B.zero()) + B.gen(t) * _transport(comp, B)
    if E.internal is not None:
        for name, v in E.internal.values.items():
            key = B.names[name]
            vals[key] = vals.get(key, B.zero()) + v
    internal = Derivation(B, vals, 1, 0, name="del+t.iota")
    rho = []
    for k in range(g.dim):
        comps = {name: _transport(c, B) for name, c in X.action[k].items()}
        L = E.vector_field(comps, degree=0)
        rvals = {B.names[i]: v for i, v in L.values.items()}
        for b, tb in enumerate(ts):
            v = B.zero()
            for c, tc in enumerate(ts):
                coef = g.consts[k][c][b]
                if coef:
                    v = v - B.gen(tc).scale(coef)
            if v:
                rvals[tb] = v
        rho.append(Derivation(B, rvals, 0, 0, name=f"rho{k}", check=False))
    return CartanModel(X, E, ts, internal, rho)


def invariant_square_zero(C: CartanModel, W: Window) -> int:
    """Check ``(internal + d)^2 = 0`` on invariant vectors of every window cell."""
    B = C.algebra
    cells: dict = {}
    for m in enumerate_monomials(B, W.N):
        k, w = B.mono_degree(m), B.mono_weight(m)
        if W.dmin <= k <= W.dmax and W.wmin <= w <= W.wmax:
            cells.setdefault((k, w), []).append(m)
    checked = 0
    for key in sorted(cells):
        monos = sorted(cells[key], reverse=True)
        # stacked invariance operators; columns are the images of each basis monomial
        cols = []
        for m in monos:
            e = B.element({m: 1})
            col = {}
            for r, rho in enumerate(C.invariance):
                for mm, c in rho(e).terms.items():
                    col[(r, mm)] = c
            cols.append(col)
        keys = sorted({kk for col in cols for kk in col})
        pos = {kk: i for i, kk in enumerate(keys)}
        for v in nullspace([{pos[kk]: c for kk, c in col.items()} for col in cols]):
            e = B.element({monos[j]: c for j, c in v.items()})
            sq = C.total(C.total(e))
            if not B.is_zero(sq):
                raise NotSquareZero("Cartan differential squares to nonzero on an invariant",
                                    witness=e)
            checked += 1
    return checked


def equivariant_extension(C: CartanModel, sign: int = 1) -> Element:
    """``omega - sign * sum mu_a t_a``."""
    B = C.algebra
    out = C.lift(C.X.omega)
    for k, t in enumerate(C.ts):
        out = out - (C.lift(C.X.mu[k]) * B.gen(t)).scale(sign)
    return out


def extension_closed(C: CartanModel, sign: int = 1) -> bool:
    return C.algebra.is_zero(C.total(equivariant_extension(C, sign)))


def equivariant_prequantization_check(X: HamiltonianDatum, sign: int = 1,
                                      W: Window | None = None,
                                      scenario: str = "equivariant-prequantization") -> CheckReport:
    """Single-chart shadow: (i) dA = omega, (ii) iota_a A + sign mu = beta,
    (iii) A vanishes on fibre directions, (iv) X -> B is a Lagrangian fibration."""
    alg = X.D.algebra
    items: dict = {}
    A = X.A if X.A is not None else alg.zero()
    beta = X.beta or [alg.zero()] * X.g.dim
    defect = X.D.d(A) - X.omega
    items["curvature"] = None if alg.is_zero(defect) else str(defect)
    bad = None
    for k in range(X.g.dim):
        v = X.contraction(k)(A) + X.mu[k].scale(sign) - beta[k]
        if not alg.is_zero(v):
            bad = f"{X.g.names[k]}: {v}"
            break
    items["moment"] = bad
    rel = relative_restriction(X.D, X.base)(A)
    items["fibre_flat"] = None if alg.is_zero(rel) else str(rel)
    fib = check_lagrangian_fibration(FibrationDatum(X.D, X.omega, X.n, list(X.base)), W)
    items["lagrangian"] = None if fib.passed else (fib.witness or "fail")
    failed = [k for k, v in items.items() if v is not None]
    details = {"items": {k: (v is None) for k, v in items.items()}}
    if failed:
        return CheckReport(scenario, FAIL, witness=f"{failed[0]}: {items[failed[0]]}",
                           details=details)
    return CheckReport(scenario, PASS, details=details)


def gl1_on_cotangent_line() -> HamiltonianDatum:
    """GL1 scaling ``x d/dx - p d/dp`` on ``T*A^1`` with Liouville data."""
    S = shifted_cotangent(affine_space("x"), 0)
    alg = S.algebra
    x, p = alg.gen("x"), alg.gen("p")
    return HamiltonianDatum(S.D, S.omega, gl1(), [{"x": x, "p": -p}], [-(x * p)],
                            A=S.lam, beta=[alg.zero()], base=["x"])


def gl1_cotangent_group() -> HamiltonianDatum:
    """Translation action of ``G_m`` on ``T*G_m``, trivial line bundle."""
    S = shifted_cotangent(torus("g"), 0)
    alg = S.algebra
    gg, p = alg.gen("g"), alg.gen("p")
    return HamiltonianDatum(S.D, S.omega, gl1(), [{"g": gg, "p": -p}], [-(gg * p)],
                            A=S.lam, beta=[alg.zero()], base=["g"])


# -- multiplicative data on SL2 ------------------------------------------------------------
def _sl2_power(k: int) -> DeRhamAlgebra:
    names = []
    rels = []
    for s in range(1, k + 1):
        a, b, c, d = (f"{v}{s}" for v in "abcd")
        names += [a, b, c, d]
        rels.append(RewriteRule({a: 1, d: 1}, [(1, {}), (1, {b: 1, c: 1})]))
    cell = AffineCell([(n, 0) for n in names], name=f"SL2^{k}")
    D = DeRhamAlgebra(cell, relations=rels)
    for n in D.algebra.names:
        if not D.algebra.is_zero(D.d(D.d(D.algebra.gen(n)))):
            raise AssertionError("d_dR does not square to zero")
    return D


def _mat(D: DeRhamAlgebra, s: int) -> list:
    g = lambda v: D.gen(f"{v}{s}")  # noqa: E731
    return [[g("a"), g("b")], [g("c"), g("d")]]


def _pullback(src: DeRhamAlgebra, tgt: DeRhamAlgebra, mats: Sequence, name: str) -> Morphism:
    """Morphism sending the i-th group factor of ``src`` to the matrix ``mats[i]``."""
    images = {}
    for s, M in enumerate(mats, start=1):
        for (r, c), v in zip(((0, 0), (0, 1), (1, 0), (1, 1)), "abcd"):
            gname = f"{v}{s}" if src.cell.relation is None else v
            images[gname] = M[r][c]
            images[dname(gname)] = tgt.d(M[r][c])
    return Morphism(src.algebra, tgt.algebra, images, name=name)


def _trace(M) -> Element:
    return M[0][0] + M[1][1]


def _map_matrix(phi: Morphism, M) -> list:
    return [[phi(e) for e in row] for row in M]


def bg_data(k=1, omega_sign: int = -1, h_scale=1):
    """``H = (k/6) tr(theta^3)`` and ``omega = omega_sign * (k/2) tr(p1* theta  p2* thetabar)``."""
    k = Fraction(k)
    G1 = de_rham(sl2_cell())
    G2 = _sl2_power(2)
    theta = maurer_cartan(G1, "left")
    thetab = maurer_cartan(G1, "right")
    H = _trace(matmul(theta, matmul(theta, theta))).scale(k * Fraction(h_scale) / 6)
    p1 = _pullback(G1, G2, [_mat(G2, 1)], "p1")
    p2 = _pullback(G1, G2, [_mat(G2, 2)], "p2")
    omega = _trace(matmul(_map_matrix(p1, theta), _map_matrix(p2, thetab)))
    omega = omega.scale(k * omega_sign / 2)
    return G1, G2, H, omega


def bg_multiplicativity(k=1, omega_sign: int = -1, h_scale=1,
                        scenario: str = "bg-sl2-multiplicative") -> CheckReport:
    G1, G2, H, omega = bg_data(k, omega_sign, h_scale)
    G3 = _sl2_power(3)
    g1, g2, g3 = (_mat(G3, s) for s in (1, 2, 3))
    m = _pullback(G1, G2, [matmul(_mat(G2, 1), _mat(G2, 2))], "m")
    p1 = _pullback(G1, G2, [_mat(G2, 1)], "p1")
    p2 = _pullback(G1, G2, [_mat(G2, 2)], "p2")
    m12 = _pullback(G2, G3, [matmul(g1, g2), g3], "m12")
    m23 = _pullback(G2, G3, [g1, matmul(g2, g3)], "m23")
    p12 = _pullback(G2, G3, [g1, g2], "p12")
    p23 = _pullback(G2, G3, [g2, g3], "p23")
    results: dict = {}
    cocycle = m23(omega) + p23(omega) - m12(omega) - p12(omega)
    results["omega_cocycle"] = cocycle
    mult = m(H) - p1(H) - p2(H) - G2.d(omega)
    results["H_multiplicative"] = mult
    results["H_closed"] = G1.d(H)
    ok = {name: e.algebra.is_zero(e) for name, e in results.items()}
    details = {"identities": ok, "omega_sign": omega_sign, "pairing_scale": Fraction(k)}
    if omega_sign == -1:
        lit = m(H) - p1(H) - p2(H) + G2.d(omega)
        details["H_multiplicative_with_literal_sign"] = G2.algebra.is_zero(lit)
    if all(ok.values()):
        return CheckReport(scenario, PASS, details=details)
    first = next(n for n, v in ok.items() if not v)
    return CheckReport(scenario, FAIL, witness=f"{first}: {results[first]}", details=details)


# -- G_m^2 ---------------------------------------------------------------------------------
def gm2() -> DeRhamAlgebra:
    return de_rham(torus("x", "y"))


def find_primitive(D: DeRhamAlgebra, form: Element, N: int) -> Element | None:
    """A Laurent one-form ``eta`` with exponents in ``[-N, N]`` and ``d eta = form``."""
    alg = D.algebra
    cands = []
    for i in range(-N, N + 1):
        for j in range(-N, N + 1):
            for g in D.base:
                cands.append(alg.monomial({"x": i, "y": j}) * D.dd(g))
    images = [D.d(c) for c in cands]
    keys = sorted({m for e in images for m in e.terms} | set(form.terms))
    pos = {m: i for i, m in enumerate(keys)}
    cols = [{pos[m]: c for m, c in e.terms.items()} for e in images]
    sol = solve(cols, {pos[m]: c for m, c in form.terms.items()})
    if sol is None:
        return None
    eta = alg.zero()
    for j, c in sol.items():
        eta = eta + cands[j].scale(c)
    return eta


def gm_nonexactness(N: int = 8, scenario: str = "gm2-nonexact") -> CheckReport:
    D = gm2()
    alg = D.algebra
    x, y = alg.gen("x"), alg.gen("y")
    dx, dy = D.dd("x"), D.dd("y")
    omega = (x ** -1 * dx) * (y ** -1 * dy)
    closed = alg.is_zero(D.d(omega))
    classes = {"dlog x ^ dlog y": omega, "dx ^ dy": dx * dy, "dlog x ^ dy": x ** -1 * dx * dy}
    found = {}
    for name, form in classes.items():
        prim = None
        for n in range(1, N + 1):
            prim = find_primitive(D, form, n)
            if prim is not None:
                break
        found[name] = None if prim is None else str(prim)
    ok = closed and found["dlog x ^ dlog y"] is None
    details = {"closed": closed, "bound": N, "primitives": found}
    return CheckReport(scenario, PASS if ok else FAIL,
                       witness=None if ok else str(found["dlog x ^ dlog y"]), details=details)
