"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import json
import random
import subprocess
import sys
import time
from fractions import Fraction
from itertools import product

from conftest import criterion, delta_oracle, kernel_algebra, sl2_algebra
from sgq.bv import OddCotangent, check_m1_prequantization, verify_bv_equivalence
from sgq.cli import exit_code
from sgq.complexes import FAIL, INCONCLUSIVE, PASS, CheckReport, Window, betti, cohomology
from sgq.derham import affine_space, de_rham, de_rham_complex, sl2_cell, torus
from sgq.graded import Derivation
from sgq.hamiltonian import (
    HamiltonianDatum,
    bg_multiplicativity,
    cartan_model,
    equivariant_prequantization_check,
    extension_closed,
    find_primitive,
    gl1,
    gl1_on_cotangent_line,
    gm2,
    moment_check,
)
from sgq.lie import (
    Subalgebra,
    borel,
    cartan_subalgebra,
    coadjoint_exactness,
    levi_parabolic_check,
    sl2,
    sl2_triple,
    sl3,
    slodowy,
    stabilizer,
)
from sgq.scenarios import function_monomials
from sgq.symplectic import (
    check_lagrangian_fibration,
    check_nondegenerate,
    classifying_stack_tangent,
    cotangent_fibration,
    magnetic,
    parity_obstruction,
    shifted_cotangent,
)

CASES = 1000


# -- 1: kernel ---------------------------------------------------------------------------
def rand_mono(rng):
    return (rng.randint(-2, 2), rng.randint(0, 2), rng.randint(0, 1), rng.randint(0, 1))


def rand_coef(rng):
    return Fraction(rng.randint(-5, 5), rng.randint(1, 4))


def rand_element(A, rng):
    return A.element({rand_mono(rng): rand_coef(rng) for _ in range(rng.randint(0, 4))})


def rand_homogeneous(A, rng):
    poly = A.element({(rng.randint(-2, 2), 0, 0, 0): rand_coef(rng) for _ in range(3)})
    return A.element({rand_mono(rng): 1}) * (poly or A.one())


def rand_derivation(A, rng):
    x, y, t, u = A.gens("x", "y", "t", "u")
    c = [rand_coef(rng) for _ in range(4)]
    return Derivation(A, {"x": t.scale(c[0]) * x ** 2, "y": (t * y).scale(c[1]),
                          "t": (y * x).scale(c[2]), "u": x.scale(c[3])}, 1)


@criterion(1, "kernel soundness")
def test_kernel_soundness():
    A, Q = kernel_algebra(), sl2_algebra()
    rng = random.Random(20240601)
    counts = dict.fromkeys(["koszul", "assoc", "leibniz", "normal_form"], 0)
    for _ in range(CASES):
        a, b = rand_homogeneous(A, rng), rand_homogeneous(A, rng)
        if a and b:
            sign = -1 if (a.degree * b.degree) % 2 else 1
            assert a * b == (b * a).scale(sign)
        counts["koszul"] += 1
        a, b, c = (rand_element(A, rng) for _ in range(3))
        assert (a * b) * c == a * (b * c)
        counts["assoc"] += 1
        D, a, b = rand_derivation(A, rng), rand_homogeneous(A, rng), rand_element(A, rng)
        if a:
            sign = -1 if a.degree % 2 else 1
            assert D(a * b) == D(a) * b + (a * D(b)).scale(sign)
        counts["leibniz"] += 1
        e = Q.element({tuple(rng.randint(0, 3) for _ in range(4)): rng.randint(-3, 3)
                       for _ in range(3)})
        f = e * Q.element({tuple(rng.randint(0, 2) for _ in range(4)): 1})
        for g in (e, f):
            assert Q.element(g.terms) == g
            assert all(not (m[0] and m[3]) for m in g.terms)
        counts["normal_form"] += 1
    assert min(counts.values()) >= 1000
    return f"{CASES} cases per property"


# -- 2: de Rham --------------------------------------------------------------------------------
@criterion(2, "de Rham: d^2 = 0 and Poincare lemma")
def test_de_rham():
    cells = [affine_space("x"), affine_space("x", "y"), affine_space("x", "y", "z"),
             torus("x"), torus("x", "y"), sl2_cell(), sl2_cell("2")]
    for cell in cells:
        D = de_rham(cell)
        A = D.algebra
        for g in A.names:
            assert A.is_zero(D.d(D.d(A.gen(g))))
    for n in (-1, 0, 1):
        S = shifted_cotangent(affine_space("x", "y"), n)
        A = S.algebra
        assert all(A.is_zero(S.D.d(S.D.d(A.gen(g)))) for g in A.names)
    for m in (1, 2, 3):
        for N in (2, 6, 10):
            D = de_rham(affine_space(*"xyz"[:m]))
            W = Window(-1, m + 1, 0, m, N)
            b = betti(cohomology(de_rham_complex(D, W), W))
            assert {k: v for k, v in b.items() if v} == {0: 1}
    return f"{len(cells) + 3} cells, m <= 3, N <= 10"


# -- 3: parity -------------------------------------------------------------------------------
@criterion(3, "parity obstruction on BSL2")
def test_parity():
    rep = parity_obstruction(classifying_stack_tangent(sl2().dim), None, 2)
    assert rep.details["virtual_dimension"] == -3
    assert rep.passed and rep.details["obstructed"]
    return "dim = -3, no Lagrangian fibration"


# -- 4: BG data ------------------------------------------------------------------------------
@criterion(4, "BSL2 simplicial identities")
def test_bg():
    t0 = time.perf_counter()
    rep = bg_multiplicativity()
    secs = time.perf_counter() - t0
    assert rep.passed, rep.witness
    assert all(rep.details["identities"].values())
    assert secs <= 120
    return f"3 identities on SL2^2, SL2^3 in {secs:.2f}s (omega sign -1; literal sign fails m*H)"


# -- 5: G_m^2 --------------------------------------------------------------------------------
@criterion(5, "dlog x ^ dlog y not exact on G_m^2")
def test_gm2():
    D = gm2()
    x, y = D.gen("x"), D.gen("y")
    form = (x ** -1 * D.dd("x")) * (y ** -1 * D.dd("y"))
    assert D.algebra.is_zero(D.d(form))
    for N in range(1, 9):
        assert find_primitive(D, form, N) is None
    return "closed, no primitive for N = 1..8; beyond N = 8 inconclusive"


# -- 6: BV Laplacian -------------------------------------------------------------------------
@criterion(6, "BV Laplacian")
def test_bv_laplacian():
    rng = random.Random(6)
    for m in (1, 2, 3):
        cell = OddCotangent(m)
        for f in function_monomials(cell, 8):
            assert not cell.laplacian_fn(cell.laplacian_fn(f))
        basis = function_monomials(cell, 6)
        for f in basis:
            assert cell.divergence(f) == cell.laplacian_fn(f)
        for _ in range(100 if m == 3 else 34):
            f = sum((b.scale(rng.randint(-4, 4)) for b in rng.sample(basis, 5)), cell.A.zero())
            assert cell.laplacian(cell.density(f)) == cell.density(delta_oracle(cell, f))
    return "Delta^2 = 0 (N <= 8), div = Delta (N <= 6), coordinate formula on random f"


# -- 7: perturbation lemma -------------------------------------------------------------------
@criterion(7, "perturbation lemma: Severa and Euler routes")
def test_perturbation():
    W = Window(-2, 2, 0, 6, 6)
    for m in (1, 2):
        for lam in (Fraction(0), Fraction(1), Fraction(-2), Fraction(3, 5)):
            rep = verify_bv_equivalence(m, "severa", lam, W)
            assert rep.passed, rep.witness
        rep = verify_bv_equivalence(m, "euler", 1, W.with_(completed=True))
        assert rep.passed, rep.witness
        assert {k: v for k, v in rep.details["betti"].items() if v} == {0: 1}
    return "induced = lambda Delta for m <= 2, N = 6; Euler small side H = Q in degree 0"


# -- 8: (-1)-prequantization -----------------------------------------------------------------
@criterion(8, "(-1)-shifted prequantization")
def test_m1_prequantization():
    cell = OddCotangent(1)
    A, D = cell.A, cell.D
    x, p = A.gens("x", "p")
    dx, dp = D.dd("x"), D.dd("p")
    rng = random.Random(8)
    passing = 0
    for _ in range(100):
        f0 = A.scalar(rng.choice([1, 2, Fraction(-1, 3)]))
        h1 = (p * dx).scale(rng.choice([-1, -1, 1, 0, 2]))
        h1 = h1 + D.d(x ** rng.randint(0, 3) * p).scale(rng.randint(-2, 2))
        h1 = h1 + (x * dp).scale(rng.choice([0, 0, 1]))
        h2 = (x ** rng.randint(0, 2) * p * dx * dp).scale(rng.choice([0, 0, 1]))
        rep = check_m1_prequantization(D, f0, [h1, h2], cell.omega)
        assert rep.details["exp_route"] == rep.details["componentwise_route"]
        passing += rep.passed
    signs = [s for s in (1, -1)
             if check_m1_prequantization(D, A.one(), [(p * dx).scale(s)], cell.omega).passed]
    assert signs == [-1]
    assert 0 < passing < 100
    return f"routes agree on 100 inputs ({passing} pass); only h1 = -p dx passes"


# -- 9: Hamiltonian --------------------------------------------------------------------------
@criterion(9, "moment map and equivariant prequantization")
def test_hamiltonian():
    base = gl1_on_cotangent_line()
    alg = base.D.algebra
    x, p = alg.gens("x", "p")
    rng = random.Random(9)
    agree = passing = 0
    for _ in range(50):
        mu = base.mu[0].scale(rng.choice([1, 1, -1, 2])) + alg.scalar(rng.randint(-2, 2))
        mu = mu + (x ** rng.randint(0, 2) * p ** rng.randint(1, 2)).scale(
            rng.choice([0, 0, 1]))
        act = {"x": x.scale(rng.choice([1, 1, 2])), "p": -p}
        X = HamiltonianDatum(base.D, base.omega, gl1(), [act], [mu], base.A, base.beta, ["x"])
        ok = moment_check(X, 1).passed
        assert ok == extension_closed(cartan_model(X), 1)
        agree += 1
        passing += ok
    assert 0 < passing < agree
    rep = equivariant_prequantization_check(gl1_on_cotangent_line())
    assert rep.passed and all(rep.details["items"].values())
    return f"criteria agree on {agree} perturbations ({passing} pass); all four conditions hold"


# -- 10: Lie theory --------------------------------------------------------------------------
@criterion(10, "coadjoint orbits and Slodowy slices")
def test_lie():
    g2, g3 = sl2(), sl3()
    x = g2.kappa(g2.element(H=1))
    t2 = cartan_subalgebra(g2)
    assert coadjoint_exactness(g2, x, t2).passed
    assert levi_parabolic_check(g2, x, t2, borel(g2, ["E"])).passed
    xr = g3.kappa(g3.element(H1=1, H2=3))
    t3 = cartan_subalgebra(g3)
    assert coadjoint_exactness(g3, xr, t3).passed
    assert levi_parabolic_check(g3, xr, t3, borel(g3, ["E12", "E23", "E13"])).passed
    xs = g3.kappa(g3.element(H1=1, H2=2))
    assert coadjoint_exactness(g3, xs, Subalgebra(g3, stabilizer(g3, xs))).passed
    for g, e, dims in ((g2, {"E": 1}, (3, 1, 1)), (g3, {"E12": 1, "E23": 1}, (8, 3, 2)),
                       (g3, {"E13": 1}, (8, 2, 4))):
        rep = slodowy(g, sl2_triple(g, g.element(**e)))
        d = rep.details
        assert rep.passed and d["chi_character"] and d["m_closed"]
        assert (d["dim_g"], d["dim_m"], d["dim_gf"]) == dims
        assert d["dim_g"] - 2 * d["dim_m"] == d["dim_gf"]
    return "sl2, sl3 rank conditions; sl2-regular, sl3-regular, sl3-minimal slices"


# -- 11: fibrations --------------------------------------------------------------------------
def euler_identity(S) -> bool:
    A = S.algebra

    def counts(names):
        out = {}
        for g in names:
            d = A.degrees[A.index[g]]
            out[d] = out.get(d, 0) + 1
        return out

    return parity_obstruction(counts(S.base + S.fiber), counts(S.fiber), S.n).passed


@criterion(11, "Lagrangian fibration verdicts")
def test_fibrations():
    checked = 0
    for n in (-1, 0, 1):
        for m in (1, 2, 3):
            S = shifted_cotangent(affine_space(*"xyz"[:m]), n)
            assert check_nondegenerate(S.D, S.omega, n).passed
            assert check_lagrangian_fibration(cotangent_fibration(S)).passed
            if n % 2 == 0:
                assert euler_identity(S)
                checked += 1
    rng = random.Random(11)
    for k in range(10):
        names = "xyz"[:2 + k % 2]

        def B(D):
            A = D.algebra
            prim = A.zero()
            for v in names:
                coeff = sum((A.gen(w) ** rng.randint(0, 2) * A.scalar(rng.randint(-3, 3))
                             for w in names), A.zero())
                prim = prim + coeff * D.dd(v)
            return D.d(prim)

        S = magnetic(affine_space(*names), B)
        assert check_lagrangian_fibration(cotangent_fibration(S)).passed
        assert euler_identity(S)
        checked += 1
    return f"T*[n]A^m grid and 10 magnetic B; Euler identity on {checked} even passes"


# -- 12: CLI ---------------------------------------------------------------------------------
@criterion(12, "CLI determinism, exit codes and --all budget")
def test_cli():
    cmd = [sys.executable, "-m", "sgq", "verify", "--all", "--format", "json"]
    t0 = time.perf_counter()
    first = subprocess.run(cmd, capture_output=True, timeout=300)
    secs = time.perf_counter() - t0
    second = subprocess.run(cmd, capture_output=True, timeout=300)
    assert first.returncode == second.returncode == 0
    a, b = json.loads(first.stdout), json.loads(second.stdout)
    a["summary"]["wall_millis"] = b["summary"]["wall_millis"] = 0
    assert json.dumps(a, sort_keys=True, indent=2) == json.dumps(b, sort_keys=True, indent=2)
    assert secs < 300
    for k in range(5):
        for verdicts in product((PASS, FAIL, INCONCLUSIVE), repeat=k):
            want = 1 if FAIL in verdicts else 2 if INCONCLUSIVE in verdicts else 0
            assert exit_code([CheckReport("s", v) for v in verdicts]) == want
    bad = subprocess.run([sys.executable, "-m", "sgq", "verify", "nonsense"],
                         capture_output=True, timeout=60)
    assert bad.returncode == 3
    return f"byte-identical JSON, exit codes 0/1/2/3, verify --all in {secs:.1f}s"
