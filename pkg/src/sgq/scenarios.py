"""Built-in verification scenarios."""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from .complexes import FAIL, PASS, CheckReport, Window, betti
from .errors import BadParameter, UnknownScenario


@dataclass(frozen=True)
class Param:
    name: str
    kind: str  # "int" | "rational" | "choice"
    default: object
    choices: tuple = ()
    lo: int | None = None
    hi: int | None = None

    def parse(self, text: str):
        if self.kind == "int":
            try:
                v = int(text)
            except ValueError:
                raise BadParameter(f"{self.name} expects an integer, got {text!r}") from None
            if (self.lo is not None and v < self.lo) or (self.hi is not None and v > self.hi):
                raise BadParameter(f"{self.name} must lie in [{self.lo}, {self.hi}], got {v}")
            return v
        if self.kind == "rational":
            try:
                return Fraction(text)
            except (ValueError, ZeroDivisionError):
                raise BadParameter(f"{self.name} expects a rational, got {text!r}") from None
        if text not in self.choices:
            raise BadParameter(f"{self.name} must be one of {', '.join(self.choices)}")
        return text

    def describe(self) -> str:
        if self.kind == "choice":
            return f"{self.name}={'|'.join(self.choices)} (default {self.default})"
        rng = ""
        if self.lo is not None:
            rng = f" in [{self.lo}, {self.hi}]"
        return f"{self.name}: {self.kind}{rng} (default {self.default})"


@dataclass
class Context:
    """Global run settings shared by all scenarios."""
    max_degree: int | None = None
    moment_sign: int = 1
    dmin: int | None = None
    dmax: int | None = None

    def window(self, W: Window) -> Window:
        kw = {k: v for k, v in (("N", self.max_degree), ("dmin", self.dmin),
                                ("dmax", self.dmax)) if v is not None}
        return W.with_(**kw) if kw else W


@dataclass
class Scenario:
    name: str
    description: str
    anchor: str
    runner: Callable[[dict, Context, Window], CheckReport]
    params: tuple = ()
    window: Window = field(default_factory=Window)

    def resolve(self, raw: Mapping[str, str]) -> dict:
        known = {p.name: p for p in self.params}
        out = {p.name: p.default for p in self.params}
        for k, v in raw.items():
            if k not in known:
                raise BadParameter(f"scenario {self.name} has no parameter {k!r}")
            out[k] = known[k].parse(v)
        return out

    def run(self, raw: Mapping[str, str] | None = None, ctx: Context | None = None) -> CheckReport:
        ctx = ctx or Context()
        params = self.resolve(raw or {})
        t0 = time.perf_counter()
        rep = self.runner(params, ctx, ctx.window(self.window))
        rep.millis = int((time.perf_counter() - t0) * 1000)
        rep.scenario = self.name
        rep.anchor = self.anchor
        if rep.window is None:
            rep.window = ctx.window(self.window)
        return rep


REGISTRY: dict = {}


def scenario(name: str, description: str, anchor: str, params=(), window: Window | None = None):
    def wrap(fn):
        REGISTRY[name] = Scenario(name, description, anchor, fn, tuple(params),
                                  window or Window())
        return fn
    return wrap


def list_scenarios() -> list:
    return [(s.name, s.description, s.anchor) for _, s in sorted(REGISTRY.items())]


def get(name: str) -> Scenario:
    try:
        return REGISTRY[name]
    except KeyError:
        raise UnknownScenario(f"unknown scenario {name!r}") from None


def _combine(name: str, parts: Mapping[str, CheckReport], W: Window | None = None) -> CheckReport:
    failed = [(k, r) for k, r in parts.items() if not r.passed]
    details = {k: r.verdict for k, r in parts.items()}
    if failed:
        k, r = failed[0]
        return CheckReport(name, r.verdict, witness=f"{k}: {r.witness}", window=W,
                           details=details)
    return CheckReport(name, PASS, window=W, details=details)


# -- shifted symplectic --------------------------------------------------------------------
def _degree_counts(A, names) -> dict:
    out: dict = {}
    for g in names:
        deg = A.degrees[A.index[g]]
        out[deg] = out.get(deg, 0) + 1
    return out


_M = Param("m", "int", 2, lo=1, hi=3)


@scenario("cotangent-fibration",
          "T*[n]A^m is symplectic and the projection to A^m is a Lagrangian fibration",
          "shifted cotangent bundle is fibred Lagrangian over its base",
          params=(Param("n", "int", 0, lo=-1, hi=1), _M))
def _cotangent(p, ctx, W):
    from .derham import affine_space
    from .symplectic import (check_lagrangian_fibration, check_nondegenerate,
                             cotangent_fibration, parity_obstruction, shifted_cotangent)
    names = ["x", "y", "z"][:p["m"]]
    S = shifted_cotangent(affine_space(*names), p["n"])
    parts = {"nondegenerate": check_nondegenerate(S.D, S.omega, p["n"]),
             "lagrangian": check_lagrangian_fibration(cotangent_fibration(S), W)}
    if p["n"] % 2 == 0 and parts["lagrangian"].passed:
        A = S.algebra
        parts["euler"] = parity_obstruction(_degree_counts(A, S.base + S.fiber),
                                            _degree_counts(A, S.fiber), p["n"])
    return _combine("cotangent-fibration", parts, W)


@scenario("magnetic",
          "T*A^m with omega + pi^*B for a random closed 2-form B stays fibred Lagrangian",
          "magnetic deformation of a cotangent bundle",
          params=(_M, Param("seed", "int", 0)))
def _magnetic(p, ctx, W):
    from .derham import affine_space
    from .symplectic import (check_lagrangian_fibration, check_nondegenerate,
                             cotangent_fibration, magnetic)
    names = ["x", "y", "z"][:p["m"]]
    rng = random.Random(p["seed"])

    def B(D):
        A = D.algebra
        prim = A.zero()
        for x in names:
            coeff = A.zero()
            for y in names:
                coeff = coeff + A.gen(y) ** rng.randint(0, 2) * A.scalar(rng.randint(-3, 3))
            prim = prim + coeff * D.dd(x)
        return D.d(prim)

    S = magnetic(affine_space(*names), B)
    return _combine("magnetic", {
        "nondegenerate": check_nondegenerate(S.D, S.omega, 0),
        "lagrangian": check_lagrangian_fibration(cotangent_fibration(S), W)}, W)


_POTENTIALS = {"quadratic": (2, 1), "cubic": (3, 2), "quartic": (4, 3)}


@scenario("derived-critical-locus",
          "functions on Crit(x^k/k) form the Koszul complex; H^0 has the Milnor dimension",
          "derived critical locus as a (-1)-shifted twisted cotangent",
          params=(Param("potential", "choice", "quadratic", tuple(_POTENTIALS)),))
def _crit(p, ctx, W):
    from .derham import affine_space
    from .symplectic import check_nondegenerate, derived_critical_locus, function_cohomology
    k, milnor = _POTENTIALS[p["potential"]]
    S = derived_critical_locus(affine_space("x"), lambda A: A.gen("x") ** k * Fraction(1, k))
    b = {d: v for d, v in betti(function_cohomology(S, W)).items() if v}
    nd = check_nondegenerate(S.D, S.omega, -1)
    ok = b == {0: milnor} and nd.passed
    return CheckReport("derived-critical-locus", PASS if ok else FAIL, window=W,
                       witness=None if ok else f"betti {b}",
                       details={"betti": b, "milnor": milnor})


@scenario("parity-bsl2",
          "T_{BSL2} = sl2[1] has odd Euler characteristic, so no Lagrangian fibration exists",
          "dim BSL2 = -dim sl2 = -3")
def _parity(p, ctx, W):
    from .lie import sl2
    from .symplectic import classifying_stack_tangent, parity_obstruction
    rep = parity_obstruction(classifying_stack_tangent(sl2().dim), None, 2)
    if rep.details["virtual_dimension"] != -3:
        rep.verdict = FAIL
        rep.witness = f"dim = {rep.details['virtual_dimension']}"
    return rep


_ALPHAS = {
    "exact": lambda D: D.d(D.gen("x") ** 3),
    "xdy": lambda D: D.gen("x") * D.dd("y"),
    "zero": lambda D: D.algebra.zero(),
}


@scenario("liouville-graph",
          "pulling the Liouville form back along the graph of alpha returns alpha",
          "tautological property of the Liouville one-form",
          params=(Param("alpha", "choice", "xdy", tuple(_ALPHAS)),))
def _liouville(p, ctx, W):
    from .derham import affine_space
    from .symplectic import liouville_pullback_check
    return liouville_pullback_check(affine_space("x", "y"), _ALPHAS[p["alpha"]])


# -- BV ------------------------------------------------------------------------------------
_BV_WINDOW = Window(-2, 2, 0, 6, 6)


def function_monomials(cell, N: int) -> list:
    """``x^a p^S`` with ``|a| <= N`` and ``S`` a subset of the odd coordinates."""
    A = cell.A
    out = []
    for a in itertools.product(range(N + 1), repeat=cell.m):
        if sum(a) > N:
            continue
        xa = A.one()
        for x, e in zip(cell.xs, a):
            xa = xa * A.gen(x) ** e
        for S in itertools.product((0, 1), repeat=cell.m):
            term = xa
            for q, s in zip(cell.ps, S):
                if s:
                    term = term * A.gen(q)
            out.append(term)
    return out


@scenario("bv-laplacian-square-zero",
          "Delta^2 = 0 on T*[-1]A^m and Delta agrees with the odd-Fourier divergence",
          "BV Laplacian is a square-zero second order operator",
          params=(_M,))
def _bv_square(p, ctx, W):
    from .bv import OddCotangent
    cell = OddCotangent(p["m"])
    A = cell.A
    monos = function_monomials(cell, W.N)
    for f in monos:
        sq = cell.laplacian_fn(cell.laplacian_fn(f))
        if not A.is_zero(sq):
            return CheckReport("", FAIL, witness=f"Delta^2({f}) = {sq}", window=W)
    for f in function_monomials(cell, min(W.N, 6)):
        a, b = cell.divergence(f), cell.laplacian_fn(f)
        if not A.is_zero(a - b):
            return CheckReport("", FAIL, witness=f"div({f}) = {a} but Delta = {b}", window=W)
    return CheckReport("", PASS, window=W, details={"monomials": len(monos)})


@scenario("bv-equivalence-euler",
          "Euler-grading retract of the (-1)-shifted de Rham complex onto functions",
          "de Rham complex of T*[-1]Y is quasi-isomorphic to its functions",
          params=(Param("m", "int", 1, lo=1, hi=2),), window=_BV_WINDOW.with_(completed=True))
def _bv_euler(p, ctx, W):
    from .bv import verify_bv_equivalence
    return verify_bv_equivalence(p["m"], "euler", 1, W.with_(completed=True))


@scenario("bv-equivalence-severa",
          "perturbing the Severa retract induces lambda * Delta on semidensities",
          "twisted de Rham complex of T*[-1]Y computes (semidensities, lambda Delta)",
          params=(Param("m", "int", 1, lo=1, hi=2), Param("lam", "rational", Fraction(1))),
          window=_BV_WINDOW)
def _bv_severa(p, ctx, W):
    from .bv import verify_bv_equivalence
    return verify_bv_equivalence(p["m"], "severa", p["lam"], W.with_(completed=False))


@scenario("m1-prequantization",
          "unit function with tail h1 = +-p dx solves (del + d + omega)(f exp h) = 0 on T*[-1]A^1",
          "(-1)-shifted prequantization of the odd cotangent line",
          params=(Param("h1", "choice", "minus", ("minus", "plus")),))
def _m1(p, ctx, W):
    from .bv import OddCotangent, check_m1_prequantization
    cell = OddCotangent(1)
    A, D = cell.A, cell.D
    s = -1 if p["h1"] == "minus" else 1
    h1 = (A.gen("p") * D.dd("x")).scale(s)
    return check_m1_prequantization(D, A.one(), [h1], cell.omega, W)


# -- Hamiltonian spaces --------------------------------------------------------------------
@scenario("moment-map",
          "GL1 scaling on T*A^1 with mu = -xp satisfies the moment map equation",
          "iota_a omega = sign * d mu; sign set by --moment-sign")
def _moment(p, ctx, W):
    from .hamiltonian import cartan_model, extension_closed, gl1_on_cotangent_line, moment_check
    X = gl1_on_cotangent_line()
    rep = moment_check(X, ctx.moment_sign)
    rep.details["extension_closed"] = extension_closed(cartan_model(X), ctx.moment_sign)
    return rep


_MODELS = ("cotangent-line", "cotangent-group")


@scenario("equivariant-prequantization",
          "Liouville connection on a GL1-Hamiltonian cotangent space: four single-chart conditions",
          "prequantum Hamiltonian space in one chart",
          params=(Param("model", "choice", "cotangent-line", _MODELS),))
def _eq_preq(p, ctx, W):
    from .hamiltonian import (equivariant_prequantization_check, gl1_cotangent_group,
                              gl1_on_cotangent_line)
    X = gl1_on_cotangent_line() if p["model"] == "cotangent-line" else gl1_cotangent_group()
    return equivariant_prequantization_check(X, ctx.moment_sign, W)


# -- Lie theory ----------------------------------------------------------------------------
@scenario("coadjoint-sl2",
          "orbit of kappa(h) in sl2*: l -> g -> g* -> l* exact and g/b = (b/l)*",
          "semisimple coadjoint orbits are Lagrangian over BL")
def _coad_sl2(p, ctx, W):
    from .lie import borel, cartan_subalgebra, coadjoint_exactness, levi_parabolic_check, sl2
    g = sl2()
    x = g.kappa(g.element(H=1))
    t = cartan_subalgebra(g)
    return _combine("coadjoint-sl2", {
        "exactness": coadjoint_exactness(g, x, t),
        "levi": levi_parabolic_check(g, x, t, borel(g, ["E"]))})


@scenario("coadjoint-sl3",
          "regular and subregular semisimple orbits in sl3*",
          "semisimple coadjoint orbits are Lagrangian over BL")
def _coad_sl3(p, ctx, W):
    from .lie import (Subalgebra, borel, cartan_subalgebra, coadjoint_exactness,
                      levi_parabolic_check, sl3, stabilizer)
    g = sl3()
    xr = g.kappa(g.element(H1=1, H2=3))
    xs = g.kappa(g.element(H1=1, H2=2))
    t = cartan_subalgebra(g)
    return _combine("coadjoint-sl3", {
        "exactness-regular": coadjoint_exactness(g, xr, t),
        "levi-regular": levi_parabolic_check(g, xr, t, borel(g, ["E12", "E23", "E13"])),
        "exactness-subregular": coadjoint_exactness(g, xs, Subalgebra(g, stabilizer(g, xs)))})


def _slodowy_runner(name: str, algebra: str, nilpotent: dict):
    def run(p, ctx, W):
        from .lie import PRESETS, sl2_triple, slodowy
        g = PRESETS[algebra]()
        return slodowy(g, sl2_triple(g, g.element(**nilpotent)), scenario=name)
    return run


for _name, _alg, _e, _desc in (
        ("slodowy-sl2-regular", "sl2", {"E": 1}, "regular nilpotent in sl2"),
        ("slodowy-sl3-regular", "sl3", {"E12": 1, "E23": 1}, "regular nilpotent in sl3"),
        ("slodowy-sl3-minimal", "sl3", {"E13": 1}, "minimal nilpotent in sl3")):
    scenario(_name, f"Slodowy slice data for the {_desc}: dim g - 2 dim m = dim g^f",
             "Slodowy slice as a Hamiltonian reduction")(_slodowy_runner(_name, _alg, _e))


# -- multiplicative data ---------------------------------------------------------------------
_PAIRINGS = {"trace": 1, "killing": 4, "zero": 0}


@scenario("bg-sl2-multiplicative",
          "the 2-shifted data (H, omega) on BSL2 satisfies the three simplicial identities",
          "2-shifted symplectic structure on BSL2",
          params=(Param("pairing", "choice", "trace", tuple(_PAIRINGS)),))
def _bg(p, ctx, W):
    from .hamiltonian import bg_multiplicativity
    rep = bg_multiplicativity(_PAIRINGS[p["pairing"]])
    rep.details["degenerate"] = p["pairing"] == "zero"
    return rep


@scenario("gm2-nonexact",
          "dx/x ^ dy/y on G_m^2 is closed with no Laurent primitive of exponent at most N",
          "the prequantization class on G_m^2 is not exact")
def _gm2(p, ctx, W):
    from .hamiltonian import gm_nonexactness
    rep = gm_nonexactness(W.N)
    rep.window = W
    return rep
