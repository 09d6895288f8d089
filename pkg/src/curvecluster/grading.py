"""Puncture grading of curve expressions and mod-2 forgetful reductions.

An arc between punctures i and j has degree e_i + e_j, loops have degree 0
and the vertex class at puncture i has degree -2 e_i.  Punctures are labelled
1..n and degree vectors are indexed accordingly.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Mapping, Sequence

from .lambda_lengths import (
    CurveAtom,
    CurveExpr,
    EdgeArc,
    EnvelopeArc,
    Loop,
    LoopConst,
    VertexClass,
    normal_monomial,
    rho,
)
from .surface import TaggedTriangulation, classify_flip, tagged_flip


@dataclass(frozen=True)
class MultiDegree:
    vector: tuple[int, ...]

    @classmethod
    def zero(cls, n: int) -> MultiDegree:
        return cls((0,) * n)

    @classmethod
    def unit(cls, n: int, p: int, c: int = 1) -> MultiDegree:
        if not 1 <= p <= n:
            raise IndexError(f"puncture {p} outside 1..{n}")
        return cls(tuple(c if i == p - 1 else 0 for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.vector)

    def __add__(self, other: MultiDegree) -> MultiDegree:
        if self.n != other.n:
            raise ValueError("degree vectors of different lengths")
        return MultiDegree(tuple(a + b for a, b in zip(self.vector, other.vector)))

    def __str__(self):
        return "[" + ", ".join(map(str, self.vector)) + "]"


@dataclass(frozen=True)
class Inhomogeneous:
    """Expression whose terms have different degrees."""

    degrees: tuple[MultiDegree, ...]

    def __str__(self):
        return "inhomogeneous"


def atom_degree(a: CurveAtom, n: int) -> MultiDegree:
    if isinstance(a, EdgeArc):
        i, j = a.ends
        return MultiDegree.unit(n, i) + MultiDegree.unit(n, j)
    if isinstance(a, VertexClass):
        return MultiDegree.unit(n, a.puncture, -2 * a.power)
    if isinstance(a, EnvelopeArc):
        return MultiDegree.unit(n, a.base, 2)
    if isinstance(a, (LoopConst, Loop)):
        return MultiDegree.zero(n)
    raise TypeError(f"not a curve atom: {a!r}")


def monomial_degree(mono: Sequence[CurveAtom], n: int) -> MultiDegree:
    d = MultiDegree.zero(n)
    for a in mono:
        d = d + atom_degree(a, n)
    return d


def degree(x: CurveExpr, n: int) -> MultiDegree | Inhomogeneous:
    """Common degree of all terms; the zero expression has degree 0."""
    degs = sorted({monomial_degree(mono, n) for mono in x.terms}, key=lambda d: d.vector)
    if not degs:
        return MultiDegree.zero(n)
    if len(degs) > 1:
        return Inhomogeneous(tuple(degs))
    return degs[0]


def project_degree(d: MultiDegree, i: int) -> int:
    """i-th component, 1-based."""
    if not 1 <= i <= d.n:
        raise IndexError(f"index {i} outside 1..{d.n}")
    return d.vector[i - 1]


def exchange_degrees(T: TaggedTriangulation, k: int):
    """Degrees of rho(alpha * alpha') and of each exchange monomial."""
    n = T.stats.n
    case = classify_flip(T, k)
    after = tagged_flip(T, k, check=False, classify=False)
    left = rho(T.arcs[k], "alpha") * rho(after.arcs[k], "alpha'")
    right = []
    for mono in case.monomials():
        term = CurveExpr.scalar(1)
        for e, power in mono.items():
            term = term * rho(T.arcs[e]) ** power
        right.append(degree(term, n))
    return degree(left, n), right


def check_homogeneous_exchange(T: TaggedTriangulation, k: int) -> bool:
    left, right = exchange_degrees(T, k)
    if isinstance(left, Inhomogeneous):
        return False
    return all(d == left for d in right)


def graded_products(generators: Sequence[CurveExpr], n: int, target: MultiDegree,
                    min_factors: int = 2) -> list[tuple[int, ...]]:
    """Index tuples of products of at least ``min_factors`` generators with the target degree.

    Generators must be homogeneous of positive total degree, which bounds the
    number of factors.
    """
    degs = []
    for g in generators:
        d = degree(g, n)
        if isinstance(d, Inhomogeneous) or sum(d.vector) <= 0:
            raise ValueError(f"generator {g} is not homogeneous of positive degree")
        degs.append(d)
    budget = sum(target.vector)
    smallest = min(sum(d.vector) for d in degs)
    out = []
    for size in range(min_factors, budget // smallest + 1):
        for combo in combinations_with_replacement(range(len(generators)), size):
            total = MultiDegree.zero(n)
            for i in combo:
                total = total + degs[i]
            if total == target:
                out.append(combo)
    return out


# -- mod-2 reduction after forgetting a puncture --------------------------------------

class MalformedFixture(ValueError):
    pass


@dataclass(frozen=True)
class ForgetFixture:
    """Puncture-skein resolutions and isotopies used to forget a puncture mod 2.

    ``skeins`` maps an atom pattern to its resolution; a term containing the
    pattern is replaced by the rest of the term times the resolution.
    ``isotopies`` identifies atoms that become isotopic once the puncture is
    forgotten.  Both are input data describing the geometry.
    """

    name: str
    forgotten: int
    skeins: tuple[tuple[tuple[CurveAtom, ...], CurveExpr], ...]
    isotopies: Mapping[CurveAtom, CurveAtom] = field(default_factory=dict)

    def __post_init__(self):
        for pattern, resolution in self.skeins:
            if not pattern:
                raise MalformedFixture(f"{self.name}: empty skein pattern")
            if not isinstance(resolution, CurveExpr):
                raise MalformedFixture(f"{self.name}: resolution must be a curve expression")
        for src, dst in self.isotopies.items():
            if dst in self.isotopies:
                raise MalformedFixture(f"{self.name}: isotopy chain through {dst}")
            if isinstance(src, VertexClass) or isinstance(dst, VertexClass):
                raise MalformedFixture(f"{self.name}: vertex classes are not isotopy classes")


def _units(mono) -> Counter:
    out: Counter = Counter()
    for a in mono:
        if isinstance(a, VertexClass):
            out[VertexClass(a.puncture, 1)] += a.power
        else:
            out[a] += 1
    return out


def _rebuild(units: Counter) -> tuple:
    atoms = []
    for a, c in units.items():
        if c == 0:
            continue
        if isinstance(a, VertexClass):
            atoms.append(VertexClass(a.puncture, c))
        else:
            atoms += [a] * c
    return normal_monomial(atoms)


def _apply_skeins(x: CurveExpr, fx: ForgetFixture) -> CurveExpr:
    out = CurveExpr()
    for mono, c in x.items():
        units = _units(mono)
        for pattern, resolution in fx.skeins:
            need = _units(pattern)
            if all(units[a] >= k for a, k in need.items()):
                rest_units = Counter(units)
                rest_units.subtract(need)
                rest = CurveExpr({_rebuild(rest_units): c})
                out = out + rest * resolution
                break
        else:
            out = out + CurveExpr({mono: c})
    return out


def _apply_isotopies(x: CurveExpr, fx: ForgetFixture) -> CurveExpr:
    out = CurveExpr()
    for mono, c in x.terms.items():
        out = out + CurveExpr({tuple(fx.isotopies.get(a, a) for a in mono): c})
    return out


def mod2_reduce(x: CurveExpr, fx: ForgetFixture, max_rounds: int = 32) -> CurveExpr:
    """Resolve declared crossings, identify declared isotopies, reduce mod 2."""
    cur = _apply_isotopies(x, fx).mod2()
    for _ in range(max_rounds):
        nxt = _apply_isotopies(_apply_skeins(cur, fx), fx).mod2()
        if nxt == cur:
            return cur
        cur = nxt
    raise MalformedFixture(f"{fx.name}: skein rewriting does not terminate")


def crossing_fixture() -> ForgetFixture:
    """Forget puncture 3.  Arcs a1 (1-3) and a2 (2-3) resolve at 3 into two
    arcs from 1 to 2 passing on either side of 3; they coincide once 3 is gone."""
    v = VertexClass(3)
    a1, a2 = EdgeArc("a1", (1, 3)), EdgeArc("a2", (2, 3))
    g1, g2 = EdgeArc("g1", (1, 2)), EdgeArc("g2", (1, 2))
    return ForgetFixture("crossing", 3, (((v, a1, a2), CurveExpr.atom(g1) + CurveExpr.atom(g2)),),
                         {g2: g1})


def self_arc_fixture() -> ForgetFixture:
    """Forget puncture 3.  An arc b with both ends at 3 resolves into two
    loops, one on each side; they coincide once 3 is gone."""
    v = VertexClass(3)
    b = EdgeArc("b", (3, 3))
    l1, l2 = Loop("l1"), Loop("l2")
    return ForgetFixture("self-arc", 3, (((v, b), CurveExpr.atom(l1) + CurveExpr.atom(l2)),),
                         {l2: l1})


def torus_fixture() -> ForgetFixture:
    """Twice-punctured torus with puncture 2 forgotten.  At the remaining
    vertex w=1 an ordinary arc b resolves into two loops of the same slope."""
    w = VertexClass(1)
    b = EdgeArc("b", (1, 1))
    g1, g2 = Loop("g1"), Loop("g2")
    return ForgetFixture("torus", 2, (((w, b), CurveExpr.atom(g1) + CurveExpr.atom(g2)),),
                         {g2: g1})


FORGET_FIXTURES = {
    "crossing": crossing_fixture,
    "self-arc": self_arc_fixture,
    "torus": torus_fixture,
}
