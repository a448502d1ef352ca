"""Weight-graded mixed complexes, finite truncation windows and exact cohomology.

Two truncations of an infinite algebra-backed complex are supported.

* ``completed=True``: the quotient by everything of filtration > N.  Legal when
  every operator is filtration non-decreasing; it models product-type
  (completed) complexes such as realizations ``prod_n A(n)``.
* ``completed=False``: the smallest subcomplex containing all monomials of
  filtration <= N in the lowest degrees, closed under taking supports of
  images.  It models polynomial (direct-sum) complexes.

Filtration is the total exponent count ``sum |e_i|`` unless overridden.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .errors import NonZeroComposite, NotChainMap, NotSquareZero, WindowTooSmall
from .graded import Element, GradedAlgebra, format_rational
from .linalg import Echelon, nullspace

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass(frozen=True)
class Window:
    dmin: int = -4
    dmax: int = 4
    wmin: int = 0
    wmax: int = 6
    N: int = 8
    completed: bool = False

    def with_(self, **kw) -> "Window":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return {"dmin": self.dmin, "dmax": self.dmax, "wmin": self.wmin,
                "wmax": self.wmax, "N": self.N}


@dataclass
class CheckReport:
    scenario: str
    verdict: str
    witness: str | None = None
    window: Window | None = None
    millis: int | None = None
    anchor: str = ""
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_dict(self, timings: bool = False) -> dict:
        out = {"scenario": self.scenario, "verdict": self.verdict}
        if self.witness is not None:
            out["witness"] = self.witness
        out["window"] = self.window.to_dict() if self.window else None
        if timings:
            out["millis"] = self.millis
        if self.details:
            out["details"] = _jsonable(self.details)
        return out

    def to_json(self, timings: bool = False) -> str:
        return json.dumps(self.to_dict(timings), sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, Element):
        return str(obj)
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def verdict_of(ok: bool) -> str:
    return PASS if ok else FAIL


class timed:
    """Context manager filling ``report.millis``."""

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.millis = int((time.perf_counter() - self.t0) * 1000)
        return False


# ---------------------------------------------------------------------------------
class FiniteComplex:
    """Cochain complex of finite-dimensional Q-vector spaces.

    ``cells[k]`` lists basis labels in degree k (monomial tuples for
    algebra-backed complexes).  ``cols[k][j]`` is the image of basis vector j
    of degree k, as a sparse vector over the basis of degree k + 1.  Degrees
    in ``leaky`` had images escape the window.
    """

    def __init__(self, cells: Mapping[int, Sequence], cols: Mapping[int, Sequence[dict]],
                 algebra: GradedAlgebra | None = None, leaky: Iterable[int] = (),
                 computed: Iterable[int] | None = None, window: Window | None = None):
        self.cells = {k: list(v) for k, v in cells.items()}
        self.cols = {k: list(v) for k, v in cols.items()}
        self.algebra = algebra
        self.leaky = set(leaky)
        self.window = window
        self.computed = set(computed) if computed is not None else set(self.cols)
        self.index = {k: {lab: i for i, lab in enumerate(v)} for k, v in self.cells.items()}

    @classmethod
    def from_matrices(cls, dims: Mapping[int, int], maps: Mapping[int, Sequence[Sequence]]):
        """``maps[k]`` is a dense matrix with ``dims[k+1]`` rows and ``dims[k]`` columns."""
        cells = {k: list(range(n)) for k, n in dims.items()}
        cols = {}
        for k, n in dims.items():
            mat = maps.get(k)
            if mat is None:
                cols[k] = [{} for _ in range(n)]
            else:
                cols[k] = [{i: Fraction(row[j]) for i, row in enumerate(mat) if row[j]}
                           for j in range(n)]
        return cls(cells, cols, computed=dims.keys())

    @property
    def degrees(self) -> list:
        return sorted(self.cells)

    def dim(self, k: int) -> int:
        return len(self.cells.get(k, ()))

    def diff_cols(self, k: int) -> list:
        return self.cols.get(k) or [{} for _ in range(self.dim(k))]

    def element_of(self, k: int, vec: Mapping[int, Fraction]):
        """Render a vector in degree k (an Element when algebra-backed)."""
        if self.algebra is None:
            return {self.cells[k][i]: c for i, c in vec.items()}
        return self.algebra.element({self.cells[k][i]: c for i, c in vec.items()})

    def vector_of(self, k: int, e: Element) -> dict:
        idx = self.index.get(k, {})
        vec = {}
        for m, c in e.terms.items():
            if m not in idx:
                raise KeyError(m)
            vec[idx[m]] = c
        return vec

    def check_square_zero(self) -> None:
        for k in self.degrees:
            nxt = self.cols.get(k + 1)
            if nxt is None:
                continue
            for j, col in enumerate(self.diff_cols(k)):
                out: dict = {}
                for i, c in col.items():
                    for i2, c2 in nxt[i].items():
                        v = out.get(i2, 0) + c * c2
                        if v:
                            out[i2] = v
                        else:
                            out.pop(i2, None)
                if out:
                    raise NotSquareZero(f"d^2 != 0 in degree {k}",
                                        witness=self.element_of(k, {j: Fraction(1)}))


@dataclass
class CohomologyGroup:
    degree: int
    dimension: int
    basis: list  # sparse vectors over the cell basis
    reliable: bool = True


def cohomology(C: FiniteComplex, W: Window | None = None) -> dict:
    """Exact cohomology in every degree of ``W`` (all degrees of C by default).

    Degrees whose outgoing or incoming differential leaked out of the window,
    or whose outgoing differential was never computed, are marked unreliable.
    """
    if W is not None:
        degs = range(W.dmin, W.dmax + 1)
    else:
        degs = C.degrees
    out = {}
    for k in degs:
        n = C.dim(k)
        if n == 0:
            out[k] = CohomologyGroup(k, 0, [], reliable=k not in C.leaky)
            continue
        kernel = nullspace(C.diff_cols(k))
        image = Echelon()
        for col in C.diff_cols(k - 1) if C.dim(k - 1) else []:
            image.add(col)
        reps = []
        for v in kernel:
            res, _ = image.add(v)
            if res:
                reps.append(v)
        reliable = (k not in C.leaky and (k - 1) not in C.leaky and k in C.computed)
        out[k] = CohomologyGroup(k, len(reps), reps, reliable)
    _euler_audit(C)
    return out


def _euler_audit(C: FiniteComplex) -> None:
    """Rank-nullity audit: chi(C) = chi(H) for the finite complex as stored."""
    ranks = {k: Echelon() for k in C.degrees}
    rk = {}
    for k in C.degrees:
        e = ranks[k]
        for col in C.diff_cols(k):
            e.add(col)
        rk[k] = e.rank
    chi_c = sum((-1) ** (k % 2) * C.dim(k) for k in C.degrees)
    chi_h = sum((-1) ** (k % 2) * (C.dim(k) - rk[k] - rk.get(k - 1, 0)) for k in C.degrees)
    if chi_c != chi_h:
        raise AssertionError("Euler characteristic audit failed")


def betti(H: Mapping[int, CohomologyGroup]) -> dict:
    return {k: g.dimension for k, g in H.items()}


# ---------------------------------------------------------------------------------
def default_filtration(m: tuple) -> int:
    return sum(abs(e) for e in m)


_ENUM_CACHE: dict = {}


def enumerate_monomials(alg: GradedAlgebra, N: int, filtration=None) -> list:
    """All monomials with total exponent count ``sum |e_i| <= N``."""
    key = (id(alg), N, filtration)
    hit = _ENUM_CACHE.get(key)
    if hit is not None and hit[0] is alg:
        return hit[1]
    n = alg.ngens
    odd = set(alg.odd)
    out = []

    def rec(i, budget, acc):
        if i == n:
            out.append(tuple(acc))
            return
        if i in odd:
            choices = [0, 1]
        elif alg.invertible[i]:
            choices = range(-budget, budget + 1)
        else:
            choices = range(0, budget + 1)
        for e in choices:
            if abs(e) > budget:
                continue
            acc.append(e)
            rec(i + 1, budget - abs(e), acc)
            acc.pop()

    rec(0, N, [])
    # normal forms only: drop monomials divisible by a relation lhs
    if alg.has_relations:
        out = [m for m in out if alg._rewrite(m) == {m: Fraction(1)}]
    if filtration is not None:
        out = [m for m in out if filtration(m) <= N]
    _ENUM_CACHE[key] = (alg, out)
    return out


def window_complex(alg: GradedAlgebra, differential: Callable[[Element], Element],
                   W: Window, filtration: Callable | None = None,
                   basis_filter: Callable | None = None) -> FiniteComplex:
    """Truncate an algebra-backed complex to the window ``W``.

    Cells cover degrees ``W.dmin - 1 .. W.dmax + 1`` and weights
    ``W.wmin .. W.wmax``.
    """
    filt = filtration or default_filtration
    lo, hi = W.dmin - 1, W.dmax + 1
    cells: dict = {k: [] for k in range(lo, hi + 1)}
    for m in enumerate_monomials(alg, W.N):
        if filt(m) > W.N:
            continue
        k = alg.mono_degree(m)
        if k < lo or k > hi:
            continue
        w = alg.mono_weight(m)
        if w < W.wmin or w > W.wmax:
            continue
        if basis_filter is not None and not basis_filter(m):
            continue
        cells[k].append(m)
    for k in cells:
        cells[k].sort(reverse=True)
    leaky = set()
    cols: dict = {}
    index = {k: {m: i for i, m in enumerate(v)} for k, v in cells.items()}
    for k in range(lo, hi):
        cols[k] = []
        tgt_index = index[k + 1]
        for m in cells[k]:
            img = differential(alg.element({m: 1}))
            col = {}
            for m2, c in img.terms.items():
                w2 = alg.mono_weight(m2)
                f2 = filt(m2)
                if W.completed:
                    if w2 > W.wmax or f2 > W.N:
                        continue  # quotient by higher filtration
                    if f2 < filt(m) or w2 < alg.mono_weight(m):
                        leaky.update((k, k + 1))  # operator not monotone
                    if m2 not in tgt_index:
                        leaky.update((k, k + 1))
                        continue
                else:
                    if w2 > W.wmax or w2 < W.wmin or (basis_filter and not basis_filter(m2)):
                        leaky.update((k, k + 1))
                        continue
                    if m2 not in tgt_index:
                        if k + 1 > hi:
                            leaky.update((k, k + 1))
                            continue
                        tgt_index[m2] = len(cells[k + 1])
                        cells[k + 1].append(m2)
                col[tgt_index[m2]] = c
            cols[k].append(col)
    return FiniteComplex(cells, cols, algebra=alg, leaky=leaky,
                         computed=range(lo, hi), window=W)


# ---------------------------------------------------------------------------------
class MixedComplex:
    """Graded complex ``(A, internal)`` with weight-raising mixed maps.

    ``mixed[k]`` raises weight by k >= 1 and cohomological degree by 1.  All
    maps are callables on Elements of ``algebra``.
    """

    def __init__(self, algebra: GradedAlgebra, internal: Callable | None = None,
                 mixed: Mapping[int, Callable] | None = None, name: str = "M"):
        self.algebra = algebra
        self.internal = internal
        self.mixed = dict(mixed or {})
        self.name = name

    def total(self, e: Element) -> Element:
        out = self.internal(e) if self.internal else self.algebra.zero()
        for eps in self.mixed.values():
            out = out + eps(e)
        return out

    def square_zero_components(self, e: Element) -> dict:
        """Components of ``(d + eps)^2 e`` indexed by weight raise k."""
        alg = self.algebra
        ops = {0: self.internal} if self.internal else {}
        ops.update(self.mixed)
        out: dict = {}
        for i, A in ops.items():
            for j, B in ops.items():
                v = A(B(e))
                if v:
                    out[i + j] = out.get(i + j, alg.zero()) + v
        return {k: v for k, v in out.items() if not alg.is_zero(v)}


def realization(M: MixedComplex, W: Window, filtration=None) -> FiniteComplex:
    """Total complex ``prod_n A(n)`` with differential internal + sum of mixed maps, on W."""
    C = window_complex(M.algebra, M.total, W, filtration=filtration)
    if sum(len(v) for v in C.cells.values()) == 0:
        raise WindowTooSmall("window contains no basis elements")
    for k in range(W.dmin - 1, W.dmax + 1):
        for m in C.cells.get(k, ()):
            comps = M.square_zero_components(M.algebra.element({m: 1}))
            if comps:
                kk = min(comps)
                raise NotSquareZero(
                    f"(d + eps)^2 has a weight +{kk} component", witness=comps[kk])
    return C


# ---------------------------------------------------------------------------------
class ChainMap:
    """Degreewise linear maps between finite complexes (sparse columns)."""

    def __init__(self, source: FiniteComplex, target: FiniteComplex,
                 cols: Mapping[int, Sequence[dict]]):
        self.source = source
        self.target = target
        self.cols = {k: list(v) for k, v in cols.items()}

    @classmethod
    def from_function(cls, source: FiniteComplex, target: FiniteComplex, fn: Callable):
        cols = {}
        for k in source.degrees:
            cols[k] = []
            tidx = target.index.get(k, {})
            for m in source.cells[k]:
                img = fn(source.algebra.element({m: 1}))
                col = {}
                for m2, c in img.terms.items():
                    if m2 in tidx:
                        col[tidx[m2]] = c
                cols[k].append(col)
        return cls(source, target, cols)

    @classmethod
    def from_matrices(cls, source, target, maps: Mapping[int, Sequence[Sequence]]):
        cols = {}
        for k in source.degrees:
            mat = maps.get(k)
            n = source.dim(k)
            if mat is None:
                cols[k] = [{} for _ in range(n)]
            else:
                cols[k] = [{i: Fraction(r[j]) for i, r in enumerate(mat) if r[j]}
                           for j in range(n)]
        return cls(source, target, cols)

    def col(self, k: int, j: int) -> dict:
        c = self.cols.get(k)
        return c[j] if c else {}

    def apply(self, k: int, vec: Mapping[int, Fraction]) -> dict:
        out: dict = {}
        for j, c in vec.items():
            for i, v in self.col(k, j).items():
                nv = out.get(i, 0) + c * v
                if nv:
                    out[i] = nv
                else:
                    out.pop(i, None)
        return out


def _apply_cols(cols: Sequence[dict], vec: Mapping[int, Fraction]) -> dict:
    out: dict = {}
    for j, c in vec.items():
        for i, v in cols[j].items():
            nv = out.get(i, 0) + c * v
            if nv:
                out[i] = nv
            else:
                out.pop(i, None)
    return out


def _label(C: FiniteComplex, k: int, vec) -> str:
    e = C.element_of(k, vec)
    if isinstance(e, Element):
        return str(e)
    return json.dumps({str(a): format_rational(b) for a, b in e.items()}, sort_keys=True)


def is_quasi_iso(f: ChainMap, W: Window, scenario: str = "quasi-iso") -> CheckReport:
    """Pass iff f is a chain map inducing isomorphisms on H^k, k in [dmin, dmax]."""
    A, B = f.source, f.target
    degs = range(W.dmin, W.dmax + 1)
    for k in range(W.dmin - 1, W.dmax + 1):
        if k not in A.cells or (k + 1) not in A.cells or k not in A.computed:
            continue
        for j in range(A.dim(k)):
            lhs = _apply_cols(B.diff_cols(k), f.col(k, j)) if B.dim(k) else {}
            rhs = f.apply(k + 1, A.diff_cols(k)[j])
            diff = dict(lhs)
            for i, v in rhs.items():
                nv = diff.get(i, 0) - v
                if nv:
                    diff[i] = nv
                else:
                    diff.pop(i, None)
            if diff:
                raise NotChainMap(f"f does not commute with d in degree {k}",
                                  witness=_label(A, k, {j: Fraction(1)}))
    HA, HB = cohomology(A, W), cohomology(B, W)
    inconclusive = []
    for k in degs:
        ga, gb = HA[k], HB[k]
        if not (ga.reliable and gb.reliable):
            inconclusive.append(k)
            continue
        image = Echelon()
        for col in B.diff_cols(k - 1) if B.dim(k - 1) else []:
            image.add(col)
        base_rank = image.rank
        for v in ga.basis:
            res, _ = image.add(f.apply(k, v))
            if not res:
                return CheckReport(scenario, FAIL, witness=_label(A, k, v), window=W,
                                   details={"degree": k, "reason": "not injective on H"})
        if image.rank - base_rank != gb.dimension:
            for v in gb.basis:
                res, _ = image.add(v)
                if res:
                    return CheckReport(scenario, FAIL, witness=_label(B, k, v), window=W,
                                       details={"degree": k, "reason": "not surjective on H"})
    if inconclusive:
        return CheckReport(scenario, INCONCLUSIVE, window=W,
                           details={"leaky_degrees": inconclusive})
    return CheckReport(scenario, PASS, window=W,
                       details={"betti_source": betti(HA), "betti_target": betti(HB)})


def identity_map(C: FiniteComplex) -> ChainMap:
    return ChainMap(C, C, {k: [{j: Fraction(1)} for j in range(C.dim(k))] for k in C.degrees})


def is_fiber_sequence(f: ChainMap, g: ChainMap, W: Window,
                      scenario: str = "fiber-sequence") -> CheckReport:
    """Pass iff ``A -> fib(B -> C)`` is a quasi-isomorphism on W.

    Decided by acyclicity of the cone ``Cone^k = A^{k+1} + B^k + C^{k-1}``
    with ``d(a, b, c) = (-d a, f a + d b, g b - d c)``.
    """
    A, B, C = f.source, f.target, g.target
    if g.source is not B:
        raise ValueError("g must start where f ends")
    for k in A.degrees:
        for j in range(A.dim(k)):
            comp = g.apply(k, f.col(k, j))
            if comp:
                raise NonZeroComposite(f"g f != 0 in degree {k}",
                                       witness=_label(A, k, {j: Fraction(1)}))
    lo, hi = W.dmin - 1, W.dmax + 1
    cells, cols = {}, {}
    offsets = {}
    for k in range(lo, hi + 1):
        na, nb, nc = A.dim(k + 1), B.dim(k), C.dim(k - 1)
        offsets[k] = (0, na, na + nb)
        cells[k] = ([("A", k + 1, i) for i in range(na)] + [("B", k, i) for i in range(nb)]
                    + [("C", k - 1, i) for i in range(nc)])
    for k in range(lo, hi):
        oa, ob, oc = offsets[k + 1]
        col_list = []
        for (src, deg, i) in cells[k]:
            col: dict = {}
            if src == "A":
                for r, v in (A.diff_cols(deg)[i] if A.dim(deg) else {}).items():
                    col[oa + r] = -v
                for r, v in f.col(deg, i).items():
                    col[ob + r] = col.get(ob + r, 0) + v
            elif src == "B":
                for r, v in (B.diff_cols(deg)[i] if B.dim(deg) else {}).items():
                    col[ob + r] = col.get(ob + r, 0) + v
                for r, v in g.col(deg, i).items():
                    col[oc + r] = col.get(oc + r, 0) + v
            else:
                for r, v in (C.diff_cols(deg)[i] if C.dim(deg) else {}).items():
                    col[oc + r] = col.get(oc + r, 0) - v
            col_list.append({r: v for r, v in col.items() if v})
        cols[k] = col_list
    T = FiniteComplex(cells, cols, computed=range(lo, hi))
    T.check_square_zero()
    H = cohomology(T, W.with_(dmin=lo, dmax=hi - 1))
    for k in sorted(H):
        if H[k].dimension:
            vec = H[k].basis[0]
            wit = {str(T.cells[k][i]): format_rational(c) for i, c in vec.items()}
            return CheckReport(scenario, FAIL, witness=json.dumps(wit, sort_keys=True),
                               window=W, details={"degree": k, "dimension": H[k].dimension})
    return CheckReport(scenario, PASS, window=W)
