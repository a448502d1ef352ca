"""Odd cotangent bundles, the BV Laplacian and the two BV equivalence routes.

Semidensities on ``T*[-1]A^m`` are stored as forms ``f(x, p) dx_1 ... dx_m``
in the de Rham algebra of the odd cotangent cell, so the Severa retract and
the Laplacian act on the same algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .complexes import (
    FAIL,
    PASS,
    CheckReport,
    Window,
    betti,
    cohomology,
    default_filtration,
    enumerate_monomials,
    window_complex,
)
from .derham import affine_space, de_rham, dname
from .errors import (
    AlphaNotClosed,
    CertificateInvalid,
    Inhomogeneous,
    NotSemidensity,
    NotUnit,
    RouteFlagMismatch,
)
from .graded import Derivation, Element, Morphism
from .symplectic import shifted_cotangent

Op = Callable[[Element], Element]


def base_names(m: int) -> list:
    return ["x"] if m == 1 else [f"x{i + 1}" for i in range(m)]


class OddCotangent:
    """``T*[-1]A^m`` with its forms, volume ``dx_1 ... dx_m`` and coordinate derivatives."""

    def __init__(self, m: int):
        self.m = m
        self.xs = base_names(m)
        self.S = shifted_cotangent(affine_space(*self.xs), -1)
        self.ps = self.S.fiber
        self.D = self.S.D
        self.A = A = self.D.algebra
        self.omega = self.S.omega
        vol = A.one()
        for x in self.xs:
            vol = vol * self.D.dd(x)
        self.vol = vol
        self.Y = de_rham(affine_space(*self.xs))
        self.d_x = {x: Derivation(A, {x: A.one()}, 0, 0, name=f"d/d{x}") for x in self.xs}
        self.d_p = {p: Derivation(A, {p: A.one()}, 1, 0, name=f"d/d{p}") for p in self.ps}
        self._vol_mono = next(iter(vol.terms))
        self._form_idx = [A.index[dname(g)] for g in self.xs + self.ps]
        self._fourier_cache: dict = {}

    # -- semidensities ----------------------------------------------------------------------
    def is_semidensity(self, e: Element) -> bool:
        v = self._vol_mono
        return all(all(m[i] == v[i] for i in self._form_idx) for m in e.terms)

    def density(self, f: Element) -> Element:
        return f * self.vol

    def coefficient(self, e: Element) -> Element:
        """``f`` with ``e = f vol``."""
        if not self.is_semidensity(e):
            raise NotSemidensity("not of the form f(x, p) vol", witness=e)
        A = self.A
        out = {}
        for m, c in e.terms.items():
            f = tuple(0 if i in self._form_idx else x for i, x in enumerate(m))
            out[f] = c
        return A.element(out)

    def laplacian(self, e: Element) -> Element:
        """``Delta(f vol) = sum_i d/dp_i d/dx_i f vol`` with left odd derivatives."""
        if not self.is_semidensity(e):
            raise NotSemidensity("BV Laplacian acts on semidensities", witness=e)
        out = self.A.zero()
        for x, p in zip(self.xs, self.ps):
            out = out + self.d_p[p](self.d_x[x](e))
        return out

    def laplacian_fn(self, f: Element) -> Element:
        """Delta on the function (polyvector) ``f``."""
        return self.coefficient(self.laplacian(self.density(f)))

    # -- odd Fourier transform ----------------------------------------------------------------
    def _contract_vol(self, T: tuple):
        """``iota_{t_1} ... iota_{t_k} vol`` in DR(A^m): (sign, dx-subset)."""
        Y = self.Y
        hit = self._fourier_cache.get(T)
        if hit is not None:
            return hit
        e = Y.algebra.one()
        for x in self.xs:
            e = e * Y.dd(x)
        for t in reversed(T):
            e = Derivation(Y.algebra, {dname(t): Y.algebra.one()}, -1, -1, check=False)(e)
        (mono, c), = e.terms.items()
        self._fourier_cache[T] = (c, mono)
        return c, mono

    def odd_fourier(self, e: Element) -> Element:
        """DR(A^m) -> semidensities: ``x^a dx_S -> eps x^a p_{S^c} vol``."""
        Y, A = self.Y.algebra, self.A
        out = A.zero()
        for m, c in e.terms.items():
            xa = {x: m[Y.index[x]] for x in self.xs if m[Y.index[x]]}
            S = {x for x in self.xs if m[Y.index[dname(x)]]}
            T = tuple(x for x in self.xs if x not in S)
            eps, _ = self._contract_vol(T)
            f = A.monomial(xa)
            for x, p in zip(self.xs, self.ps):
                if x in T:
                    f = f * A.gen(p)
            out = out + (f * self.vol).scale(c * eps)
        return out

    def odd_fourier_inverse(self, e: Element) -> Element:
        """Semidensities -> DR(A^m): ``x^a p_T vol -> x^a iota_T vol``."""
        f = self.coefficient(e)
        Y, A = self.Y.algebra, self.A
        out = Y.zero()
        for m, c in f.terms.items():
            xa = {x: m[A.index[x]] for x in self.xs if m[A.index[x]]}
            T = tuple(x for x, p in zip(self.xs, self.ps) if m[A.index[p]])
            eps, mono = self._contract_vol(T)
            out = out + Y.monomial(xa) * Y.element({mono: eps}).scale(c)
        return out

    def divergence(self, v: Element) -> Element:
        """Polyvector ``v`` (a function of x, p) to ``F^{-1} d F`` of it."""
        form = self.odd_fourier_inverse(self.density(v))
        return self.coefficient(self.odd_fourier(self.Y.d(form)))


def bv_laplacian(cell: OddCotangent, e: Element) -> Element:
    return cell.laplacian(e)


def bv_bracket(cell: OddCotangent, f: Element, g: Element) -> Element:
    """Deviation of Delta from being a derivation (densities trivialized by vol)."""
    L = cell.laplacian_fn
    sign = -1 if (f.parity or 0) else 1
    return L(f * g) - L(f) * g - (f * L(g)).scale(sign)


# -- special deformation retracts ------------------------------------------------------------
@dataclass
class DeformationRetract:
    """``i p - id = dM h + h dM`` and ``p i = id``, plus side conditions."""

    dM: Op
    dN: Op
    i: Op
    p: Op
    h: Op
    big_basis: list = field(default_factory=list)
    small_basis: list = field(default_factory=list)
    name: str = "retract"


def check_retract(r: DeformationRetract) -> list:
    """Failed identities as ``(name, basis element, defect)``; empty when all hold."""
    bad = []
    for b in r.small_basis:
        for name, v in (("p i = id", r.p(r.i(b)) - b),
                        ("h i = 0", r.h(r.i(b))),
                        ("i chain", r.dM(r.i(b)) - r.i(r.dN(b)))):
            if v:
                bad.append((name, b, v))
    for b in r.big_basis:
        hb = r.h(b)
        checks = (
            ("homotopy", r.i(r.p(b)) - b - r.dM(hb) - r.h(r.dM(b))),
            ("h h = 0", r.h(hb)),
            ("p h = 0", r.p(hb)),
            ("p chain", r.p(r.dM(b)) - r.dN(r.p(b))),
        )
        for name, v in checks:
            if v:
                bad.append((name, b, v))
    return bad


def perturb(r: DeformationRetract, delta: Op, K: int, trunc: Op | None = None) -> DeformationRetract:
    """Homological perturbation with ``A = sum_{k<K} (delta h)^k delta``.

    Raises CertificateInvalid if ``(delta h)^K delta`` does not vanish on an
    input it is applied to.
    """
    tr = trunc or (lambda e: e)

    def A(x: Element) -> Element:
        y = tr(delta(x))
        acc = y
        for _ in range(K):
            y = tr(delta(r.h(y)))
            if not y:
                return acc
            acc = acc + y
        raise CertificateInvalid(f"(delta h)^{K} delta does not vanish", witness=x)

    def dM(x):
        return tr(r.dM(x) + delta(x))

    def dN(x):
        return r.dN(x) + r.p(A(r.i(x)))

    def i(x):
        ix = r.i(x)
        return ix + tr(r.h(A(ix)))

    def p(x):
        return r.p(x) + r.p(A(tr(r.h(x))))

    def h(x):
        hx = tr(r.h(x))
        return hx + tr(r.h(A(hx)))

    return DeformationRetract(dM, dN, i, p, h, r.big_basis, r.small_basis,
                              name=r.name + "'")


# -- the two routes ----------------------------------------------------------------------
def _basis(alg, W: Window, keep=None) -> list:
    out = []
    for m in enumerate_monomials(alg, W.N):
        k = alg.mono_degree(m)
        if W.dmin <= k <= W.dmax and (keep is None or keep(m)):
            out.append(alg.element({m: 1}))
    return out


def _truncator(N: int) -> Op:
    def trunc(e: Element) -> Element:
        if all(default_filtration(m) <= N for m in e.terms):
            return e
        return Element(e.algebra, {m: c for m, c in e.terms.items()
                                   if default_filtration(m) <= N})
    return trunc


def sdr_euler(m: int, W: Window, cell: OddCotangent | None = None) -> DeformationRetract:
    """Retract of ``(forms on T*[-1]A^m, d)`` onto ``(forms on A^m, d)`` along the
    fibre Euler field; ``h = -iota_e / lambda`` on fibre weight ``lambda > 0``."""
    if not W.completed:
        raise RouteFlagMismatch("the Euler retract is used on completed forms only")
    c = cell or OddCotangent(m)
    A, Y = c.A, c.Y.algebra
    trunc = _truncator(W.N)
    iota_e = Derivation(A, {dname(p): A.gen(p) for p in c.ps}, -1, -1, name="iota_e")
    fib = [A.index[p] for p in c.ps] + [A.index[dname(p)] for p in c.ps]
    incl = Morphism(Y, A, {}, name="i")
    proj = Morphism(A, Y, {}, name="p")

    def h(e: Element) -> Element:
        out: dict = {}
        for mono, coef in e.terms.items():
            lam = sum(mono[i] for i in fib)
            if not lam:
                continue
            for m2, c2 in iota_e(A.element({mono: 1})).terms.items():
                v = out.get(m2, 0) - coef * c2 / lam
                if v:
                    out[m2] = v
                else:
                    out.pop(m2, None)
        return trunc(Element(A, out))

    big = _basis(A, W)
    small = _basis(Y, W)
    return DeformationRetract(lambda e: trunc(c.D.d(e)), c.Y.d, incl, proj, h, big, small,
                              name="euler")


def _severa_parts(c: OddCotangent):
    A = c.A
    dx = {x: Derivation(A, {dname(x): A.one()}, -1, -1, check=False) for x in c.xs}
    dp = {p: Derivation(A, {dname(p): A.one()}, 0, -1, check=False) for p in c.ps}

    def Lam(e: Element) -> Element:
        out = A.zero()
        for x, p in zip(c.xs, c.ps):
            out = out + dx[x](dp[p](e))
        return out

    ax = [A.index[dname(x)] for x in c.xs]
    ap = [A.index[dname(p)] for p in c.ps]

    def kappa(mono) -> int:
        return sum(mono[a] + 1 - mono[b] for a, b in zip(ap, ax))

    return Lam, kappa


def sdr_severa(m: int, W: Window, cell: OddCotangent | None = None) -> DeformationRetract:
    """Retract of ``(polynomial forms, omega ^)`` onto semidensities (zero differential);
    ``h = -Lambda / kappa`` where ``omega Lambda + Lambda omega = kappa``."""
    if W.completed:
        raise RouteFlagMismatch("the Severa retract needs polynomial forms: "
                                "(id - d iota_pi) is not invertible on completed forms")
    c = cell or OddCotangent(m)
    A = c.A
    Lam, kappa = _severa_parts(c)
    omega = c.omega

    def h(e: Element) -> Element:
        out: dict = {}
        for mono, coef in e.terms.items():
            k = kappa(mono)
            if not k:
                continue
            for m2, c2 in Lam(A.element({mono: 1})).terms.items():
                v = out.get(m2, 0) - coef * c2 / k
                if v:
                    out[m2] = v
                else:
                    out.pop(m2, None)
        return Element(A, out)

    def proj(e: Element) -> Element:
        return Element(A, {mm: cc for mm, cc in e.terms.items() if kappa(mm) == 0})

    big = _basis(A, W)
    small = [b for b in big if kappa(next(iter(b.terms))) == 0]
    return DeformationRetract(lambda e: omega * e, lambda e: A.zero(), lambda e: e, proj, h,
                              big, small, name="severa")


def kappa_is_grading(m: int, W: Window) -> list:
    """Monomials where ``omega Lambda + Lambda omega`` is not ``kappa`` times identity."""
    c = OddCotangent(m)
    Lam, kappa = _severa_parts(c)
    bad = []
    for b in _basis(c.A, W):
        (mono,) = b.terms
        G = c.omega * Lam(b) + Lam(c.omega * b)
        if G != b.scale(kappa(mono)):
            bad.append(b)
    return bad


# The perturbed Severa differential comes out as lam^2 * SEVERA_SIGN * Delta; conjugating
# the small complex by c^(-deg), c = SEVERA_SIGN * lam, turns it into lam * Delta.
SEVERA_SIGN = -1


def verify_bv_equivalence(m: int, route: str, lam=1, W: Window | None = None,
                          scenario: str | None = None) -> CheckReport:
    lam = Fraction(lam)
    name = scenario or f"bv-equivalence-{route}"
    if route == "euler":
        W = W or Window(-2, 2, 0, 6, 6, completed=True)
        return _verify_euler(m, W, name)
    if route == "severa":
        W = W or Window(-2, 2, 0, 6, 6, completed=False)
        return _verify_severa(m, lam, W, name)
    raise ValueError(f"unknown route {route!r}")


def _first_failure(bad) -> str:
    name, b, v = bad[0]
    return f"{name} on {b}: {v}"


def _verify_euler(m: int, W: Window, name: str) -> CheckReport:
    c = OddCotangent(m)
    r = sdr_euler(m, W, c)
    bad = check_retract(r)
    if bad:
        return CheckReport(name, FAIL, witness=_first_failure(bad), window=W,
                           details={"stage": "retract"})
    trunc = _truncator(W.N)
    r2 = perturb(r, lambda e: trunc(c.omega * e), K=m + 1, trunc=trunc)
    bad = check_retract(r2)
    if bad:
        return CheckReport(name, FAIL, witness=_first_failure(bad), window=W,
                           details={"stage": "perturbed retract"})
    for b in r2.small_basis:
        diff = r2.dN(b) - c.Y.d(b)
        if diff:
            return CheckReport(name, FAIL, witness=f"induced d on {b}: {diff}", window=W)
    Wq = W.with_(wmax=max(W.wmax, W.N))
    big = window_complex(c.A, r2.dM, Wq)
    small = window_complex(c.Y.algebra, c.Y.d, Wq.with_(completed=False))
    inner = W.with_(dmin=W.dmin + 1, dmax=W.dmax - 1)
    hb, hs = betti(cohomology(big, inner)), betti(cohomology(small, inner))
    iota_e = Derivation(c.A, {dname(p): c.A.gen(p) for p in c.ps}, -1, -1, check=False)
    side = all(not r.p(c.omega * iota_e(c.omega * r.i(b))) for b in r.small_basis)
    ok = hb == hs and side
    return CheckReport(name, PASS if ok else FAIL, window=W,
                       witness=None if ok else f"H(big) = {hb}, H(small) = {hs}",
                       details={"betti": hs, "side_condition_pwhwi": side})


def _verify_severa(m: int, lam: Fraction, W: Window, name: str) -> CheckReport:
    c = OddCotangent(m)
    r = sdr_severa(m, W, c)
    bad = check_retract(r)
    if bad:
        return CheckReport(name, FAIL, witness=_first_failure(bad), window=W,
                           details={"stage": "retract"})
    K = W.N + 2 * m + 2
    r2 = perturb(r, lambda e: c.D.d(e).scale(lam), K=K)
    bad = check_retract(r2)
    if bad:
        return CheckReport(name, FAIL, witness=_first_failure(bad), window=W,
                           details={"stage": "perturbed retract"})
    scale = SEVERA_SIGN * lam
    for b in r2.small_basis:
        induced = r2.dN(b)
        if scale:
            induced = induced.scale(1 / scale)
        want = c.laplacian(b).scale(lam)
        if induced != want:
            return CheckReport(name, FAIL, window=W,
                               witness=f"induced d on {b}: {induced} != {want}")
    # cohomology of the small side and its transfer to the big side
    small_alg = c.A
    sd = window_complex(small_alg, lambda e: c.laplacian(e).scale(lam), W,
                        basis_filter=lambda mono: c.is_semidensity(small_alg.element({mono: 1})))
    H = cohomology(sd, W)
    for k, g in H.items():
        for v in g.basis:
            z = sd.element_of(k, v)
            if r2.dM(r2.i(z)):
                return CheckReport(name, FAIL, window=W, witness=f"i'({z}) is not a cocycle")
    return CheckReport(name, PASS, window=W,
                       details={"betti_semidensities": betti(H), "lambda": lam,
                                "rescale": scale})


# -- (-1)-shifted prequantization ---------------------------------------------------------
def _weight_truncate(e: Element, wmax: int) -> Element:
    A = e.algebra
    return Element(A, {m: c for m, c in e.terms.items() if A.mono_weight(m) <= wmax})


def check_m1_prequantization(D, f0: Element, hs: Sequence[Element], omega: Element,
                             W: Window | None = None,
                             scenario: str = "m1-prequantization") -> CheckReport:
    """Both routes: ``(del + d + omega)(f0 exp(sum h)) = 0`` weightwise, and the
    componentwise equations for ``f0`` and the ``h_p``."""
    W = W or Window()
    A = D.algebra
    if len(f0.terms) != 1:
        raise NotUnit("f0 must be a unit monomial", witness=f0)
    (m0,), = [tuple(f0.terms)]
    if any(e and not A.invertible[i] for i, e in enumerate(m0)):
        raise NotUnit("f0 must be a unit monomial", witness=f0)
    if omega:
        dw = D.total(omega)
        if not A.is_zero(dw):
            raise AlphaNotClosed("omega is not closed", witness=dw)
    hs = list(hs)
    for p, h in enumerate(hs, start=1):
        if h and h.homogeneity() != (0, p):
            raise Inhomogeneous(f"h_{p} must be a {p}-form of cohomological degree 0", witness=h)
    wmax = W.wmax
    inner = D.internal or (lambda e: A.zero())

    # route A: exponential repackaging
    h = sum(hs, A.zero())
    expo, term = A.one(), A.one()
    for k in range(1, wmax + 1):
        term = _weight_truncate(term * h, wmax).scale(Fraction(1, k))
        if not term:
            break
        expo = expo + term
    f = f0 * expo
    total = inner(f) + D.d(f) + omega * f
    defects_a = [w for w in range(wmax + 1) if not A.is_zero(total.weight_component(w))]

    # route B: componentwise
    finv = f0 ** -1
    eqs = [inner(f0), D.d(f0) * finv + inner(hs[0] if hs else A.zero())]
    for p in range(1, wmax):
        hp = hs[p - 1] if p - 1 < len(hs) else A.zero()
        hq = hs[p] if p < len(hs) else A.zero()
        eqs.append(D.d(hp) + omega.weight_component(p + 1) + inner(hq))
    defects_b = [k for k, e in enumerate(eqs) if not A.is_zero(e)]
    ok_a, ok_b = not defects_a, not defects_b
    details = {"exp_route": ok_a, "componentwise_route": ok_b,
               "routes_agree": ok_a == ok_b}
    if ok_a and ok_b:
        return CheckReport(scenario, PASS, window=W, details=details)
    wit = str(total.weight_component(defects_a[0])) if defects_a else str(eqs[defects_b[0]])
    return CheckReport(scenario, FAIL, witness=wit, window=W, details=details)
