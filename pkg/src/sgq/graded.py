"""Exact graded-commutative algebra kernel.

Elements are sparse maps from exponent tuples to ``Fraction`` coefficients.
A monomial is stored in generator-list order; the Koszul sign of a product is
the parity of the number of odd-generator transpositions needed to sort it.
Derivations obey the left Leibniz rule

    D(ab) = D(a) b + (-1)^{|D||a|} a D(b).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import (
    AlgebraMismatch,
    DuplicateGenerator,
    IllDefinedOnQuotient,
    NonTerminatingRelation,
    NotInvertible,
    OddInvertibleGenerator,
)

Monomial = tuple  # tuple[int, ...], one exponent per generator


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    return Fraction(c)


def format_rational(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


@dataclass(frozen=True)
class GeneratorSpec:
    name: str
    degree: int = 0
    weight: int = 0
    invertible: bool = False

    @property
    def parity(self) -> int:
        return self.degree % 2


@dataclass(frozen=True)
class RewriteRule:
    """``lhs -> rhs``; ``lhs`` maps generator names to exponents, ``rhs`` is a
    list of ``(coefficient, {name: exponent})`` terms."""

    lhs: Mapping[str, int]
    rhs: Sequence[tuple] = field(default_factory=tuple)


class GradedAlgebra:
    """Finitely generated graded-commutative algebra over Q.

    Relations are monomial rewrite rules ``lhs -> rhs`` with quadratic
    left-hand sides in even, non-invertible generators.  Termination is
    certified against the lexicographic order on exponent vectors (generator
    list position first).  Several rules are allowed only when their
    left-hand sides and right-hand sides live on pairwise disjoint generator
    sets, which is how products such as SL2 x SL2 are built; such systems are
    trivially confluent.

    ``chart`` is an optional injective homomorphism into a relation-free
    algebra used for zero tests of elements whose normal form is not
    canonical (differential forms on a relational cell).
    """

    def __init__(self, specs: Sequence[GeneratorSpec], relations: Sequence[RewriteRule] = ()):
        names = [s.name for s in specs]
        seen = set()
        for n in names:
            if n in seen:
                raise DuplicateGenerator(f"duplicate generator {n!r}")
            seen.add(n)
        for s in specs:
            if s.invertible and s.parity:
                raise OddInvertibleGenerator(f"odd generator {s.name!r} cannot be invertible")
        self.specs = tuple(specs)
        self.names = tuple(names)
        self.index = {n: i for i, n in enumerate(names)}
        self.ngens = len(names)
        self.degrees = tuple(s.degree for s in specs)
        self.weights = tuple(s.weight for s in specs)
        self.odd = tuple(i for i, s in enumerate(specs) if s.parity)
        self._odd_set = frozenset(self.odd)
        self.invertible = tuple(s.invertible for s in specs)
        self.chart: Morphism | None = None
        self._rules = []
        self._rewrite_cache: dict = {}
        supports = []
        for rule in relations:
            lhs = self._exps(rule.lhs)
            if sum(lhs) != 2 or any(e < 0 for e in lhs):
                raise NonTerminatingRelation("left-hand side must be a quadratic monomial")
            for i, e in enumerate(lhs):
                if e and (i in self._odd_set or self.invertible[i]):
                    raise NonTerminatingRelation(
                        "left-hand side must involve even, non-invertible generators only")
            rhs = {}
            support = {i for i, e in enumerate(lhs) if e}
            for c, mono in rule.rhs:
                m = self._exps(mono)
                if not m < lhs:  # lexicographic, generator-list position first
                    raise NonTerminatingRelation(
                        f"rhs monomial {mono} is not smaller than the lhs")
                if any(e < 0 for e in m):
                    raise NonTerminatingRelation("rhs must be polynomial")
                support |= {i for i, e in enumerate(m) if e}
                rhs[m] = rhs.get(m, Fraction(0)) + _frac(c)
            rhs = {m: c for m, c in rhs.items() if c}
            for other in supports:
                if other & support:
                    raise NonTerminatingRelation("rules must act on disjoint generators")
            supports.append(support)
            self._rules.append((lhs, rhs))

    # -- construction helpers -------------------------------------------------
    def _exps(self, mono: Mapping[str, int]) -> Monomial:
        m = [0] * self.ngens
        for name, e in mono.items():
            if name not in self.index:
                raise KeyError(f"unknown generator {name!r}")
            m[self.index[name]] = e
        return tuple(m)

    @property
    def has_relations(self) -> bool:
        return bool(self._rules)

    def zero(self) -> "Element":
        return Element(self, {})

    def one(self) -> "Element":
        return self.scalar(1)

    def scalar(self, c) -> "Element":
        c = _frac(c)
        return Element(self, {(0,) * self.ngens: c} if c else {})

    def gen(self, name: str) -> "Element":
        m = [0] * self.ngens
        m[self.index[name]] = 1
        return Element(self, {tuple(m): Fraction(1)})

    def gens(self, *names: str) -> tuple:
        if not names:
            names = self.names
        return tuple(self.gen(n) for n in names)

    def monomial(self, mono: Mapping[str, int], coef=1) -> "Element":
        m = self._exps(mono)
        self._check_mono(m)
        return self.element({m: coef})

    def element(self, terms: Mapping[Monomial, object]) -> "Element":
        """Build an element from raw exponent tuples, normalizing relations."""
        clean = {}
        for m, c in terms.items():
            c = _frac(c)
            if c:
                clean[m] = clean.get(m, Fraction(0)) + c
        return Element(self, self._normalize(clean))

    def _check_mono(self, m: Monomial) -> None:
        for i, e in enumerate(m):
            if e < 0 and not self.invertible[i]:
                raise NotInvertible(f"negative power of {self.names[i]}")
            if e > 1 and i in self._odd_set:
                raise ValueError(f"odd generator {self.names[i]} squared")

    # -- grading ----------------------------------------------------------------
    def mono_degree(self, m: Monomial) -> int:
        return sum(e * d for e, d in zip(m, self.degrees))

    def mono_weight(self, m: Monomial) -> int:
        return sum(e * w for e, w in zip(m, self.weights))

    def mono_parity(self, m: Monomial) -> int:
        return sum(m[i] for i in self.odd) % 2

    # -- products -----------------------------------------------------------------
    def mono_mul(self, m1: Monomial, m2: Monomial):
        """Return ``(sign, m1*m2)``; sign is 0 when an odd generator repeats."""
        sign = 1
        if self.odd:
            count = 0
            for i in self.odd:
                if m2[i]:
                    if m1[i]:
                        return 0, None
                    for j in self.odd:
                        if j > i and m1[j]:
                            count += 1
            if count & 1:
                sign = -1
        return sign, tuple(a + b for a, b in zip(m1, m2))

    def _normalize(self, terms: dict) -> dict:
        if not self._rules:
            return {m: c for m, c in terms.items() if c}
        out: dict = {}
        for m, c in terms.items():
            if not c:
                continue
            for m2, c2 in self._rewrite(m).items():
                v = out.get(m2, Fraction(0)) + c * c2
                if v:
                    out[m2] = v
                else:
                    out.pop(m2, None)
        return out

    def _rewrite(self, m: Monomial) -> dict:
        hit = self._rewrite_cache.get(m)
        if hit is not None:
            return hit
        result = None
        for lhs, rhs in self._rules:
            if all(a >= b for a, b in zip(m, lhs)):
                rest = tuple(a - b for a, b in zip(m, lhs))
                acc: dict = {}
                # lhs generators are even, so no sign arises when splitting off lhs
                for r, c in rhs.items():
                    s, prod = self.mono_mul(r, rest)
                    if not s:
                        continue
                    for m2, c2 in self._rewrite(prod).items():
                        v = acc.get(m2, Fraction(0)) + s * c * c2
                        if v:
                            acc[m2] = v
                        else:
                            acc.pop(m2, None)
                result = acc
                break
        if result is None:
            result = {m: Fraction(1)}
        self._rewrite_cache[m] = result
        return result

    def mul_terms(self, t1: Mapping, t2: Mapping) -> dict:
        out: dict = {}
        mono_mul = self.mono_mul
        for m1, c1 in t1.items():
            for m2, c2 in t2.items():
                s, m = mono_mul(m1, m2)
                if not s:
                    continue
                v = out.get(m, 0) + (c1 * c2 if s > 0 else -c1 * c2)
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
        if self._rules:
            out = self._normalize(out)
        return out

    def is_zero(self, e: "Element") -> bool:
        """Zero test honoring the chart embedding when one is attached."""
        if e.is_zero:
            return True
        if self.chart is not None:
            return self.chart(e).is_zero
        return False

    def equal(self, a: "Element", b: "Element") -> bool:
        return self.is_zero(a - b)

    def __repr__(self) -> str:
        gens = ", ".join(f"{s.name}:{s.degree}/{s.weight}{'*' if s.invertible else ''}"
                         for s in self.specs)
        return f"GradedAlgebra({gens})"


def make_algebra(specs: Sequence[GeneratorSpec], relation: RewriteRule | None = None,
                 relations: Sequence[RewriteRule] = ()) -> GradedAlgebra:
    rels = list(relations)
    if relation is not None:
        rels.insert(0, relation)
    return GradedAlgebra(specs, rels)


SL2_RELATION = RewriteRule({"a": 1, "d": 1}, [(1, {}), (1, {"b": 1, "c": 1})])


class Element:
    """Canonical sparse sum of monomials with rational coefficients."""

    __slots__ = ("algebra", "terms", "_hom")

    def __init__(self, algebra: GradedAlgebra, terms: dict):
        self.algebra = algebra
        self.terms = terms
        self._hom = None

    # -- structure ---------------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.terms

    def _bidegrees(self):
        alg = self.algebra
        return {(alg.mono_degree(m), alg.mono_weight(m)) for m in self.terms}

    def homogeneity(self):
        """``(degree, weight)`` if homogeneous, else ``None``; zero gives ``None``."""
        if self._hom is None:
            bd = self._bidegrees()
            self._hom = next(iter(bd)) if len(bd) == 1 else False
        return self._hom or None

    @property
    def degree(self):
        h = self.homogeneity()
        return None if h is None else h[0]

    @property
    def weight(self):
        h = self.homogeneity()
        return None if h is None else h[1]

    @property
    def parity(self):
        ps = {self.algebra.mono_parity(m) for m in self.terms}
        if len(ps) > 1:
            return None
        return ps.pop() if ps else 0

    def weight_component(self, w: int) -> "Element":
        alg = self.algebra
        return Element(alg, {m: c for m, c in self.terms.items() if alg.mono_weight(m) == w})

    def weights(self) -> list:
        alg = self.algebra
        return sorted({alg.mono_weight(m) for m in self.terms})

    def coefficient(self, mono) -> Fraction:
        if isinstance(mono, Element):
            (mono,) = mono.terms
        return self.terms.get(mono, Fraction(0))

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.algebra.ngens, Fraction(0))

    def monomials(self) -> list:
        return sorted(self.terms, reverse=True)

    # -- arithmetic ----------------------------------------------------------------
    def _coerce(self, other) -> "Element":
        if isinstance(other, Element):
            if other.algebra is not self.algebra:
                raise AlgebraMismatch("elements live in different algebras")
            return other
        if isinstance(other, (int, Fraction)):
            return self.algebra.scalar(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return Element(self.algebra, out)

    __radd__ = __add__

    def __neg__(self):
        return Element(self.algebra, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Element":
        c = _frac(c)
        if not c:
            return self.algebra.zero()
        return Element(self.algebra, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Element(self.algebra, self.algebra.mul_terms(self.terms, other.terms))

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / _frac(other))
        return self * inverse(other)

    def __pow__(self, k: int):
        if k < 0:
            return inverse(self) ** (-k)
        result = self.algebra.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.algebra.scalar(other)
        if not isinstance(other, Element):
            return NotImplemented
        return other.algebra is self.algebra and self.terms == other.terms

    def __hash__(self):
        return hash((id(self.algebra), frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    # -- text ------------------------------------------------------------------------
    def mono_str(self, m: Monomial) -> str:
        parts = []
        for name, e in zip(self.algebra.names, m):
            if e == 1:
                parts.append(name)
            elif e:
                parts.append(f"{name}^{e}")
        return " ".join(parts)

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for m in self.monomials():
            c = self.terms[m]
            ms = self.mono_str(m)
            out.append(f"{format_rational(c)} * {ms}" if ms else format_rational(c))
        return " + ".join(out)

    def __repr__(self):
        return f"Element({self})"


def inverse(e: Element) -> Element:
    """Inverse of a unit: a nonzero scalar times a monomial in invertible generators."""
    if len(e.terms) != 1:
        raise NotInvertible(f"{e} is not a unit monomial")
    (m, c), = e.terms.items()
    alg = e.algebra
    for i, k in enumerate(m):
        if k and not alg.invertible[i]:
            raise NotInvertible(f"{e} involves non-invertible {alg.names[i]}")
    return Element(alg, {tuple(-k for k in m): 1 / c})


def multiply(a: Element, b: Element) -> Element:
    return a * b


# ---------------------------------------------------------------------------------
class Derivation:
    """Homogeneous derivation given by its values on generators."""

    def __init__(self, algebra: GradedAlgebra, values: Mapping[str, Element], degree: int,
                 weight: int = 0, name: str = "D", check: bool = True):
        self.algebra = algebra
        self.degree = degree
        self.weight = weight
        self.name = name
        vals = {}
        for g, v in values.items():
            if isinstance(v, (int, Fraction)):
                v = algebra.scalar(v)
            if v.algebra is not algebra:
                raise AlgebraMismatch(f"value of {name} on {g} lives elsewhere")
            if v:
                vals[algebra.index[g]] = v
        self.values = vals
        self._cache: dict = {}
        if check:
            self._validate()

    def _validate(self) -> None:
        alg = self.algebra
        for i, v in self.values.items():
            want = (alg.degrees[i] + self.degree, alg.weights[i] + self.weight)
            for m in v.terms:
                got = (alg.mono_degree(m), alg.mono_weight(m))
                if got != want:
                    raise ValueError(
                        f"{self.name}({alg.names[i]}) has bidegree {got}, expected {want}")
        for lhs, rhs in alg._rules:
            diff = self(Element(alg, {lhs: Fraction(1)})) - self(Element(alg, dict(rhs)))
            if not alg.is_zero(diff):
                raise IllDefinedOnQuotient(
                    f"{self.name} does not preserve the relation ideal", witness=diff)

    def value(self, name: str) -> Element:
        i = self.algebra.index[name]
        return self.values.get(i, self.algebra.zero())

    def _on_mono(self, m: Monomial) -> dict:
        hit = self._cache.get(m)
        if hit is not None:
            return hit
        alg = self.algebra
        n = alg.ngens
        acc: dict = {}
        zero = (0,) * n
        for i, e in enumerate(m):
            if not e or i not in self.values:
                continue
            prefix = m[:i] + (0,) * (n - i)
            suffix = (0,) * (i + 1) + m[i + 1:]
            base = list(zero)
            base[i] = e - 1
            factor = alg.mul_terms({tuple(base): Fraction(e)}, self.values[i].terms)
            sign = -1 if (self.degree % 2 and alg.mono_degree(prefix) % 2) else 1
            t = alg.mul_terms({prefix: Fraction(sign)}, factor)
            t = alg.mul_terms(t, {suffix: Fraction(1)})
            for mm, c in t.items():
                v = acc.get(mm, 0) + c
                if v:
                    acc[mm] = v
                else:
                    acc.pop(mm, None)
        self._cache[m] = acc
        return acc

    def __call__(self, a: Element) -> Element:
        if a.algebra is not self.algebra:
            raise AlgebraMismatch(f"{self.name} applied to a foreign element")
        out: dict = {}
        for m, c in a.terms.items():
            for mm, c2 in self._on_mono(m).items():
                v = out.get(mm, 0) + c * c2
                if v:
                    out[mm] = v
                else:
                    out.pop(mm, None)
        return Element(self.algebra, out)

    apply = __call__

    @property
    def is_zero(self) -> bool:
        return all(self.algebra.is_zero(v) for v in self.values.values())

    def __add__(self, other: "Derivation") -> "Derivation":
        if other.algebra is not self.algebra:
            raise AlgebraMismatch("derivations on different algebras")
        names = self.algebra.names
        vals = {}
        for i in set(self.values) | set(other.values):
            vals[names[i]] = self.value(names[i]) + other.value(names[i])
        return Derivation(self.algebra, vals, self.degree, self.weight,
                          name=f"({self.name}+{other.name})", check=False)

    def scale(self, c) -> "Derivation":
        names = self.algebra.names
        return Derivation(self.algebra, {names[i]: v.scale(c) for i, v in self.values.items()},
                          self.degree, self.weight, name=f"{c}*{self.name}", check=False)

    def __repr__(self):
        vals = ", ".join(f"{self.algebra.names[i]} -> {v}" for i, v in sorted(self.values.items()))
        return f"Derivation({self.name}; deg {self.degree}, wt {self.weight}; {vals})"


def apply_derivation(D: Derivation, a: Element) -> Element:
    return D(a)


def graded_commutator(D1: Derivation, D2: Derivation) -> Derivation:
    """``[D1, D2] = D1 D2 - (-1)^{|D1||D2|} D2 D1``, again a derivation."""
    if D1.algebra is not D2.algebra:
        raise AlgebraMismatch("derivations on different algebras")
    alg = D1.algebra
    sign = -1 if (D1.degree % 2 and D2.degree % 2) else 1
    vals = {}
    for name in alg.names:
        g = alg.gen(name)
        v = D1(D2(g)) - D2(D1(g)).scale(sign)
        if v:
            vals[name] = v
    return Derivation(alg, vals, D1.degree + D2.degree, D1.weight + D2.weight,
                      name=f"[{D1.name},{D2.name}]", check=False)


class Morphism:
    """Algebra homomorphism given by generator images (a pullback/substitution)."""

    def __init__(self, source: GradedAlgebra, target: GradedAlgebra,
                 images: Mapping[str, Element], name: str = "phi"):
        self.source = source
        self.target = target
        self.name = name
        imgs = []
        for g, spec in zip(source.names, source.specs):
            v = images.get(g)
            if v is None:
                v = target.gen(g) if g in target.index else target.zero()
            elif isinstance(v, (int, Fraction)):
                v = target.scalar(v)
            if v and v.parity not in (None, spec.parity):
                raise ValueError(f"image of {g} has the wrong parity")
            imgs.append(v)
        self.images = tuple(imgs)
        self._powers: dict = {}
        self._cache: dict = {}

    def _power(self, i: int, e: int) -> dict:
        key = (i, e)
        hit = self._powers.get(key)
        if hit is None:
            base = self.images[i]
            hit = (base ** e).terms
            self._powers[key] = hit
        return hit

    def _on_mono(self, m: Monomial) -> dict:
        hit = self._cache.get(m)
        if hit is not None:
            return hit
        tgt = self.target
        acc = {(0,) * tgt.ngens: Fraction(1)}
        for i, e in enumerate(m):
            if e:
                acc = tgt.mul_terms(acc, self._power(i, e))
                if not acc:
                    break
        self._cache[m] = acc
        return acc

    def __call__(self, a: Element) -> Element:
        if a.algebra is not self.source:
            raise AlgebraMismatch(f"{self.name} applied to a foreign element")
        out: dict = {}
        for m, c in a.terms.items():
            for mm, c2 in self._on_mono(m).items():
                v = out.get(mm, 0) + c * c2
                if v:
                    out[mm] = v
                else:
                    out.pop(mm, None)
        return Element(self.target, out)


def attach_chart(algebra: GradedAlgebra, chart: Morphism) -> None:
    if chart.source is not algebra or chart.target.has_relations:
        raise ValueError("a chart must map the algebra into a relation-free algebra")
    algebra.chart = chart


def free_specs(items: Iterable[tuple]) -> list:
    """``[(name, degree[, weight[, invertible]]), ...]`` to GeneratorSpecs."""
    return [GeneratorSpec(*it) for it in items]
