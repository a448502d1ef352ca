"""De Rham algebras of (shifted) affine cells."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .complexes import FiniteComplex, MixedComplex, Window, realization
from .errors import AlphaNotClosed, Inhomogeneous, NotInvertible, UnsupportedGroup
from .graded import (
    SL2_RELATION,
    Derivation,
    Element,
    GeneratorSpec,
    GradedAlgebra,
    Morphism,
    RewriteRule,
    attach_chart,
    graded_commutator,
)


@dataclass
class AffineCell:
    """Base generators ``(name, degree)``; ``invertible`` names Laurent generators.

    ``internal`` optionally gives the internal differential on base
    generators as callables ``algebra -> Element`` (evaluated once the
    de Rham algebra exists), e.g. ``{"p": lambda A: A.gen("x")}``.
    """

    generators: Sequence[tuple]
    invertible: frozenset = frozenset()
    relation: RewriteRule | None = None
    internal: Mapping[str, Callable] = field(default_factory=dict)
    name: str = "cell"

    def specs(self) -> list:
        return [GeneratorSpec(n, d, 0, n in self.invertible) for n, d in self.generators]

    @property
    def names(self) -> list:
        return [n for n, _ in self.generators]

    def functions(self) -> GradedAlgebra:
        return GradedAlgebra(self.specs(), [self.relation] if self.relation else [])


def affine_space(*names: str) -> AffineCell:
    return AffineCell([(n, 0) for n in names], name=f"A^{len(names)}")


def torus(*names: str) -> AffineCell:
    return AffineCell([(n, 0) for n in names], invertible=frozenset(names),
                      name=f"Gm^{len(names)}")


def sl2_cell(suffix: str = "") -> AffineCell:
    names = [n + suffix for n in "abcd"]
    rel = SL2_RELATION if not suffix else RewriteRule(
        {names[0]: 1, names[3]: 1}, [(1, {}), (1, {names[1]: 1, names[2]: 1})])
    return AffineCell([(n, 0) for n in names], relation=rel, name="SL2" + suffix)


def dname(g: str) -> str:
    return "d" + g


class DeRhamAlgebra:
    """``DR(cell)``: base generators, then one form generator ``dg`` per base
    generator (degree ``deg g + 1``, weight 1), then optional ``extra``
    generators that both differentials kill.
    """

    def __init__(self, cell: AffineCell, extra: Sequence[GeneratorSpec] = (),
                 relations: Sequence[RewriteRule] = ()):
        self.cell = cell
        self.base = list(cell.names)
        self.forms = [dname(g) for g in self.base]
        specs = cell.specs()
        specs += [GeneratorSpec(dname(n), d + 1, 1) for n, d in cell.generators]
        specs += list(extra)
        rels = list(relations)
        if cell.relation is not None:
            rels.insert(0, cell.relation)
        self.algebra = A = GradedAlgebra(specs, rels)
        self.d = Derivation(A, {g: A.gen(dname(g)) for g in self.base}, 1, 1,
                            name="d_dR", check=False)
        if rels:
            self._attach_charts()
        self.d._validate()
        self.internal = None
        if cell.internal:
            vals = {}
            for g, fn in cell.internal.items():
                v = fn(A)
                vals[g] = v
                vals[dname(g)] = -self.d(v)
            self.internal = Derivation(A, vals, 1, 0, name="del")

    def _attach_charts(self) -> None:
        """Chart for SL2-type factors: invert the first lhs generator, solve for the second."""
        A = self.algebra
        pairs = []
        for lhs, rhs in A._rules:
            i, j = [k for k, e in enumerate(lhs) if e]
            pairs.append((i, j, rhs))
        inv = {i for i, _, _ in pairs}
        elim = {A.names[j] for _, j, _ in pairs}
        elim |= {dname(n) for n in elim}
        T = GradedAlgebra([GeneratorSpec(s.name, s.degree, s.weight, s.invertible or k in inv)
                           for k, s in enumerate(A.specs) if s.name not in elim])
        dT = Derivation(T, {g: T.gen(dname(g)) for g in self.base if g in T.index},
                        1, 1, check=False)
        subs: dict = {}
        for i, j, rhs in pairs:
            val = T.zero()
            for m, c in rhs.items():
                term = T.scalar(c)
                for k, e in enumerate(m):
                    if e:
                        term = term * T.gen(A.names[k]) ** e
                val = val + term
            val = val * T.gen(A.names[i]) ** -1
            subs[A.names[j]] = val
            subs[dname(A.names[j])] = dT(val)
        attach_chart(A, Morphism(A, T, subs, name="chart"))

    # -- conveniences ---------------------------------------------------------------
    def gen(self, name: str) -> Element:
        return self.algebra.gen(name)

    def dd(self, g: str) -> Element:
        return self.algebra.gen(dname(g))

    def total(self, e: Element) -> Element:
        out = self.d(e)
        if self.internal is not None:
            out = out + self.internal(e)
        return out

    def contraction(self, v: Mapping[str, Element], degree: int | None = None,
                    name: str = "iota") -> Derivation:
        """``iota_v`` for ``v = sum v_g d/dg``; kills functions, ``dg -> v_g``."""
        A = self.algebra
        if degree is None:
            degree = _field_degree(A, v)
        return Derivation(A, {dname(g): val for g, val in v.items()}, degree - 1, -1,
                          name=name)

    def vector_field(self, v: Mapping[str, Element], degree: int | None = None) -> Derivation:
        """``L_v = [d_dR, iota_v]`` as a derivation of forms."""
        return graded_commutator(self.d, self.contraction(v, degree))

    def lie_derivative(self, v: Mapping[str, Element], e: Element,
                       degree: int | None = None) -> Element:
        iota = self.contraction(v, degree)
        sign = -1 if (iota.degree % 2) else 1
        return self.d(iota(e)) - iota(self.d(e)).scale(sign)

    def vector_from_function(self, v: Mapping[str, Element]) -> Mapping[str, Element]:
        return v


def _field_degree(A: GradedAlgebra, v: Mapping[str, Element]) -> int:
    for g, val in v.items():
        if val:
            deg = val.degree
            if deg is None:
                raise Inhomogeneous(f"component {g} of the vector field is inhomogeneous")
            return deg - A.degrees[A.index[g]]
    return 0


def de_rham(cell: AffineCell, extra: Sequence[GeneratorSpec] = ()) -> DeRhamAlgebra:
    D = DeRhamAlgebra(cell, extra)
    A = D.algebra
    for g in A.names:
        if not A.is_zero(D.d(D.d(A.gen(g)))):
            raise AssertionError("d_dR does not square to zero")
    return D


@dataclass(frozen=True)
class FormClass:
    p: int
    n: int
    tail: tuple = ()

    @property
    def degree(self) -> int:
        return self.p + self.n


def classify_form(e: Element) -> FormClass:
    h = e.homogeneity()
    if not h:
        raise Inhomogeneous("form is not bihomogeneous", witness=e)
    deg, wt = h
    return FormClass(wt, deg - wt)


def dlog(D: DeRhamAlgebra, f: Element) -> Element:
    A = D.algebra
    if len(f.terms) != 1:
        raise NotInvertible("dlog needs a unit monomial", witness=f)
    (m, c), = f.terms.items()
    out = A.zero()
    for i, e in enumerate(m):
        if not e:
            continue
        g = A.names[i]
        if not A.invertible[i]:
            raise NotInvertible(f"{g} is not invertible", witness=f)
        out = out + (D.dd(g) * A.gen(g) ** -1).scale(e)
    return out


def twisted_mixed(D: DeRhamAlgebra, alpha: Element) -> MixedComplex:
    """Mixed structure ``d_dR + alpha ^ (-)`` over the internal differential."""
    A = D.algebra
    if alpha:
        closed = D.total(alpha)
        if not A.is_zero(closed):
            raise AlphaNotClosed("alpha is not closed", witness=closed)

    def eps(e: Element) -> Element:
        return D.d(e) + alpha * e

    return MixedComplex(A, D.internal, {1: eps}, name="twisted")


def twisted_de_rham(D: DeRhamAlgebra, alpha: Element | None, W: Window,
                    filtration=None) -> FiniteComplex:
    if alpha is None:
        alpha = D.algebra.zero()
    return realization(twisted_mixed(D, alpha), W, filtration=filtration)


def de_rham_complex(D: DeRhamAlgebra, W: Window) -> FiniteComplex:
    return twisted_de_rham(D, None, W)


# -- Maurer-Cartan on SL2 ---------------------------------------------------------------
def group_matrix(D: DeRhamAlgebra) -> list:
    names = D.base
    if len(names) != 4 or D.cell.relation is None:
        raise UnsupportedGroup("Maurer-Cartan forms are implemented for SL2 only")
    a, b, c, d = (D.gen(n) for n in names)
    return [[a, b], [c, d]]


def matmul(X, Y) -> list:
    n, k, m = len(X), len(Y), len(Y[0])
    return [[sum((X[i][l] * Y[l][j] for l in range(k)), X[0][0].algebra.zero())
             for j in range(m)] for i in range(n)]


def adjugate(g) -> list:
    (a, b), (c, d) = g
    return [[d, -b], [-c, a]]


def maurer_cartan(D: DeRhamAlgebra, side: str = "left") -> list:
    """``g^{-1} dg`` (left) or ``dg g^{-1}`` (right), using the adjugate inverse."""
    g = group_matrix(D)
    dg = [[D.d(x) for x in row] for row in g]
    ginv = adjugate(g)
    if side == "left":
        return matmul(ginv, dg)
    if side == "right":
        return matmul(dg, ginv)
    raise ValueError(f"side must be left or right, not {side!r}")


def structure_equation_defect(D: DeRhamAlgebra, theta) -> list:
    """Entries of ``d theta + theta ^ theta``; all zero for the left form."""
    sq = matmul(theta, theta)
    return [[D.d(theta[i][j]) + sq[i][j] for j in range(2)] for i in range(2)]
