"""Lambda-length evaluation of curve expressions.

A ``LambdaCtx`` fixes a base triangulation without self-folded triangles and
one formal variable per base edge.  Arc values are cluster variables reached
by explicit flip words from the base seed; vertex classes are evaluated by the
corner-sum horocycle formula, never by mutation.

``ArcWalk`` follows a tagged flip word and, in parallel, the all-plain word
with the same underlying ordinary triangulations.  Comparing the two sides
checks that the notch-as-vertex-class map agrees with mutation.  The walk
also tracks lambda lengths by Ptolemy relations as an independent oracle.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence, Union

from .cluster import Seed, mutate_seed
from .exactmath import PolyRing, RationalFn
from .surface import (
    OrdinaryTriangulation,
    SurfaceError,
    TaggedArc,
    TaggedTriangulation,
    builtin,
    canonical_form,
    classify_flip,
    flip_trace,
    isomorphism,
    seed_of,
    tagged_flip,
)


class UnregisteredArc(KeyError):
    """An arc id without a flip word in the context."""


class UnsupportedAtom(ValueError):
    """An atom without a lambda value, e.g. a general loop."""


# -- curve expressions ---------------------------------------------------------

@dataclass(frozen=True)
class EdgeArc:
    arc: str
    ends: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "ends", tuple(sorted(self.ends)))

    def sort_key(self):
        return (0, self.arc, self.ends)

    def __str__(self):
        return f"[{self.arc}]"


@dataclass(frozen=True)
class VertexClass:
    puncture: int
    power: int = 1

    def sort_key(self):
        return (1, str(self.puncture), self.power)

    def __str__(self):
        return f"v{self.puncture}" if self.power == 1 else f"v{self.puncture}^{self.power}"


@dataclass(frozen=True)
class EnvelopeArc:
    """Loop at ``base`` cutting out a monogon around ``enclosed``."""

    base: int
    enclosed: int
    inner: str

    def sort_key(self):
        return (2, str(self.base), str(self.enclosed), self.inner)

    def __str__(self):
        return f"env({self.base},{self.enclosed};{self.inner})"


@dataclass(frozen=True)
class LoopConst:
    """Contractible loop (``around=None``) or peripheral loop around a puncture."""

    around: int | None = None

    def sort_key(self):
        return (3, "" if self.around is None else str(self.around))

    def __str__(self):
        return "O" if self.around is None else f"O{self.around}"


@dataclass(frozen=True)
class Loop:
    """Essential loop; carries a grade but no lambda value."""

    name: str

    def sort_key(self):
        return (4, self.name)

    def __str__(self):
        return self.name


CurveAtom = Union[EdgeArc, VertexClass, EnvelopeArc, LoopConst, Loop]
Monomial = tuple  # sorted tuple of atoms, vertex classes merged per puncture


def normal_monomial(atoms: Iterable[CurveAtom]) -> Monomial:
    powers: Counter = Counter()
    rest = []
    for a in atoms:
        if isinstance(a, VertexClass):
            powers[a.puncture] += a.power
        else:
            rest.append(a)
    rest += [VertexClass(p, k) for p, k in powers.items() if k]
    return tuple(sorted(rest, key=lambda a: a.sort_key()))


class CurveExpr:
    """Finite integer combination of atom monomials."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Iterable[CurveAtom], int] | None = None):
        acc: dict[Monomial, int] = {}
        for mono, c in (terms or {}).items():
            key = normal_monomial(mono)
            acc[key] = acc.get(key, 0) + c
        self.terms = {k: v for k, v in acc.items() if v}

    @classmethod
    def atom(cls, a: CurveAtom, coeff: int = 1) -> CurveExpr:
        return cls({(a,): coeff})

    @classmethod
    def scalar(cls, c: int) -> CurveExpr:
        return cls({(): c})

    @classmethod
    def product(cls, atoms: Iterable[CurveAtom], coeff: int = 1) -> CurveExpr:
        return cls({tuple(atoms): coeff})

    def _coerce(self, other) -> CurveExpr:
        if isinstance(other, CurveExpr):
            return other
        if isinstance(other, int):
            return CurveExpr.scalar(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self.terms)
        for k, v in other.terms.items():
            acc[k] = acc.get(k, 0) + v
        return CurveExpr(acc)

    __radd__ = __add__

    def __neg__(self):
        return CurveExpr({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc: dict = {}
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                key = normal_monomial(ka + kb)
                acc[key] = acc.get(key, 0) + va * vb
        return CurveExpr(acc)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> CurveExpr:
        if n < 0:
            raise ValueError("negative powers of curve expressions are undefined")
        out = CurveExpr.scalar(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: [a.sort_key() for a in kv[0]])

    def atoms(self) -> set:
        return {a for mono in self.terms for a in mono}

    def mod2(self) -> CurveExpr:
        return CurveExpr({k: v % 2 for k, v in self.terms.items()})

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono, c in self.items():
            body = "*".join(str(a) for a in mono)
            if not body:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{c}*{body}")
        return " + ".join(parts)

    def __repr__(self):
        return f"CurveExpr({self})"


def rho(a: TaggedArc, arc_id: str | None = None) -> CurveExpr:
    """Underlying arc times one vertex class per notched end."""
    arc_id = arc_id if arc_id is not None else f"e{a.edge}"
    atoms: list[CurveAtom] = [EdgeArc(arc_id, a.endpoints)]
    atoms += [VertexClass(p, k) for p, k in sorted(a.notch_counts().items())]
    return CurveExpr.product(atoms)


def unpunctured_monogon_resolution(v: int) -> CurveExpr:
    """Puncture-skein resolution of v times an arc bounding an empty monogon at v."""
    return CurveExpr.atom(LoopConst()) + CurveExpr.atom(LoopConst(v))


# -- context -------------------------------------------------------------------------

def _word_id(word: Sequence[int]) -> str:
    return ".".join(map(str, word)) or "-"


class LambdaCtx:
    """Base triangulation, horocycle table and arc path table."""

    def __init__(self, base: TaggedTriangulation | OrdinaryTriangulation, name: str = "",
                 horocycle_override: Mapping[int, RationalFn] | None = None):
        if isinstance(base, OrdinaryTriangulation):
            base = TaggedTriangulation(base)
        if base.base.self_folded:
            raise SurfaceError("lambda context needs a base without self-folded triangles")
        if base.notched:
            raise SurfaceError("lambda context needs an all-plain base")
        self.base = base
        self.name = name
        S = seed_of(base)
        self.seed = Seed(S.vars, S.matrix)
        self.ring: PolyRing = self.seed.ring
        self.paths: dict[str, tuple[tuple[int, ...], int]] = {}
        self._seeds: dict[tuple[int, ...], Seed] = {(): self.seed}
        self._tris: dict[tuple[int, ...], TaggedTriangulation] = {(): base}
        self._override = dict(horocycle_override or {})
        self._horo: dict[int, RationalFn] = {}

    def with_horocycle(self, p: int, value: RationalFn) -> LambdaCtx:
        """Copy with one horocycle entry replaced (negative controls)."""
        ctx = LambdaCtx(self.base, self.name, {**self._override, p: value})
        ctx.paths = dict(self.paths)
        ctx._seeds = self._seeds
        ctx._tris = self._tris
        return ctx

    def corrupted(self, p: int | None = None) -> LambdaCtx:
        p = self.base.punctures[0] if p is None else p
        return self.with_horocycle(p, self.horocycle(p) + 1)

    def edge_var(self, e: int) -> RationalFn:
        return self.seed.vars[self.base.index(e) - 1]

    @cached_property
    def corner_table(self) -> dict[int, list[tuple[int, int, int]]]:
        """puncture -> [(opposite edge, incoming side, outgoing side)]."""
        table: dict[int, list] = {p: [] for p in self.base.punctures}
        for t in self.base.base.triangles:
            for i in range(3):
                table[t.corners[i]].append(
                    (t.edges[(i + 1) % 3], t.edges[(i + 2) % 3], t.edges[i]))
        return {p: sorted(v) for p, v in table.items()}

    def horocycle(self, p: int) -> RationalFn:
        if p in self._override:
            return self._override[p]
        if p not in self._horo:
            if p not in self.corner_table:
                raise KeyError(f"no puncture {p}")
            total = RationalFn(self.ring.zero())
            for opp, a, b in self.corner_table[p]:
                total = total + self.edge_var(opp) / (self.edge_var(a) * self.edge_var(b))
            self._horo[p] = total
        return self._horo[p]

    # -- flip words in the all-plain world ------------------------------------

    def seed_after(self, word: Sequence[int]) -> Seed:
        word = tuple(word)
        if word not in self._seeds:
            prev = self.seed_after(word[:-1])
            T = self.triangulation_after(word[:-1])
            self._seeds[word] = mutate_seed(prev, T.index(word[-1]))
        return self._seeds[word]

    def triangulation_after(self, word: Sequence[int]) -> TaggedTriangulation:
        word = tuple(word)
        if word not in self._tris:
            prev = self.triangulation_after(word[:-1])
            self._tris[word] = tagged_flip(prev, word[-1], check=False, classify=False)
        return self._tris[word]

    def register(self, arc_id: str, word: Sequence[int], label: int) -> None:
        self.paths[arc_id] = (tuple(word), label)

    def edge_arc(self, word: Sequence[int], label: int) -> EdgeArc:
        """Register the arc with ``label`` after ``word`` and return its atom."""
        word = tuple(word)
        arc_id = f"{_word_id(word)}:{label}"
        self.register(arc_id, word, label)
        return EdgeArc(arc_id, self.triangulation_after(word).base.endpoints(label))

    def arc_value(self, arc_id: str) -> RationalFn:
        try:
            word, label = self.paths[arc_id]
        except KeyError:
            raise UnregisteredArc(arc_id) from None
        S = self.seed_after(word)
        return S.vars[self.triangulation_after(word).index(label) - 1]

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "triangles": [[list(t.edges), list(t.corners)] for t in self.base.base.triangles],
            "corner_table": {str(p): [list(c) for c in v] for p, v in self.corner_table.items()},
            "arc_paths": {k: {"word": list(w), "edge": e} for k, (w, e) in sorted(self.paths.items())},
        }


def evaluate(x: CurveExpr, ctx: LambdaCtx) -> RationalFn:
    total = RationalFn(ctx.ring.zero())
    for mono, c in x.items():
        val = RationalFn(ctx.ring.const(c))
        for a in mono:
            val = val * atom_value(a, ctx)
        total = total + val
    return total


def atom_value(a: CurveAtom, ctx: LambdaCtx) -> RationalFn:
    if isinstance(a, EdgeArc):
        return ctx.arc_value(a.arc)
    if isinstance(a, VertexClass):
        return ctx.horocycle(a.puncture) ** a.power
    if isinstance(a, EnvelopeArc):
        return ctx.horocycle(a.enclosed) * ctx.arc_value(a.inner) ** 2
    if isinstance(a, LoopConst):
        return RationalFn(ctx.ring.const(-2 if a.around is None else 2))
    raise UnsupportedAtom(f"no lambda value for {a}")


# -- walks ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ArcWalk:
    """A tagged flip word and the plain word with the same ordinary triangulations."""

    ctx: LambdaCtx
    tagged: TaggedTriangulation
    plain: TaggedTriangulation
    sigma: Mapping[int, int]  # tagged.base label -> plain.base label
    tagged_word: tuple[int, ...]
    plain_word: tuple[int, ...]
    seed: Seed
    lam: Mapping[int, RationalFn]  # Ptolemy lambda lengths on plain labels

    @classmethod
    def start(cls, ctx: LambdaCtx) -> ArcWalk:
        return cls(ctx, ctx.base, ctx.base, {e: e for e in ctx.base.edges}, (), (), ctx.seed,
                   {e: ctx.edge_var(e) for e in ctx.base.edges})

    def flip(self, k: int) -> ArcWalk:
        result, before, after = flip_trace(self.tagged, k)
        j = self.sigma[before.get(k, k)]
        t, u = self.plain.quad(j)
        _, a, b = t.edges
        _, c, d = u.edges
        lam = dict(self.lam)
        lam[j] = (lam[a] * lam[c] + lam[b] * lam[d]) / lam[j]
        sigma = {}
        for y, plain_label in self.sigma.items():
            x = before.get(y, y)
            sigma[after.get(x, x)] = plain_label
        return ArcWalk(
            self.ctx, result, self.ctx.triangulation_after(self.plain_word + (j,)), sigma,
            self.tagged_word + (k,), self.plain_word + (j,),
            mutate_seed(self.seed, self.tagged.index(k)), lam)

    def run(self, word: Iterable[int]) -> ArcWalk:
        w = self
        for k in word:
            w = w.flip(k)
        return w

    def plain_label(self, e: int) -> int:
        """Plain label of the ordinary arc underlying tagged arc e."""
        return self.sigma[self.tagged.underlying_edge(e)]

    def rho(self, e: int) -> CurveExpr:
        arc = self.tagged.arcs[e]
        atom = self.ctx.edge_arc(self.plain_word, self.plain_label(e))
        return rho(arc, atom.arc)

    def cluster_variable(self, e: int) -> RationalFn:
        return self.seed.vars[self.tagged.index(e) - 1]

    def evaluate_rho(self, e: int) -> RationalFn:
        return evaluate(self.rho(e), self.ctx)

    def ptolemy_failures(self) -> list[int]:
        """Plain labels whose Ptolemy lambda length disagrees with the seed."""
        bad = []
        loops = self.plain.base.self_folded
        for j in self.plain.edges:
            if j in loops:
                continue
            if self.lam[j] != self.ctx.arc_value(self.ctx.edge_arc(self.plain_word, j).arc):
                bad.append(j)
        return bad

    def monogon_checks(self) -> list[tuple[int, bool]]:
        """Loop lambda length against horocycle times the radius squared."""
        out = []
        for loop, (radius, jewel, w) in sorted(self.plain.base.self_folded.items()):
            inner = self.ctx.edge_arc(self.plain_word, radius)
            envelope = CurveExpr.atom(EnvelopeArc(w, jewel, inner.arc))
            out.append((loop, self.lam[loop] == evaluate(envelope, self.ctx)))
        return out


# -- anchors: reaching a given triangulation from a context base ----------------------------

def find_anchor(ctx: LambdaCtx, target: TaggedTriangulation, max_nodes: int = 20000):
    """Tagged word from the context base to a copy of ``target``.

    Returns ``(word, label_map)`` where label_map sends target edge labels to
    the labels of the reached triangulation.
    """
    goal = canonical_form(target)[0]
    start = ctx.base
    seen = {canonical_form(start)[0]: ()}
    queue = [((), start)]
    head = 0
    while head < len(queue):
        word, T = queue[head]
        head += 1
        if canonical_form(T)[0] == goal:
            emap, _ = isomorphism(target, T)
            return word, emap
        for k in T.edges:
            S = tagged_flip(T, k, check=False, classify=False)
            key = canonical_form(S)[0]
            if key not in seen:
                seen[key] = word + (k,)
                queue.append((word + (k,), S))
        if len(seen) > max_nodes:
            break
    raise LookupError("target triangulation not reached from the context base")


# -- exchange identities ---------------------------------------------------------------

@dataclass
class IdentityResult:
    case: str
    word: tuple[int, ...]
    edge: int
    ok: bool
    lhs: RationalFn
    rhs: RationalFn

    def line(self) -> str:
        status = "pass" if self.ok else "FAIL"
        text = f"{status} {self.case} word={_word_id(self.word)} edge={self.edge}"
        if not self.ok:
            text += f"\n  lhs = {self.lhs}\n  rhs = {self.rhs}"
        return text


def exchange_identity(walk: ArcWalk, k: int) -> IdentityResult:
    """Evaluate both sides of the exchange relation at k through rho."""
    case = classify_flip(walk.tagged, k)
    after = walk.flip(k)
    lhs = walk.evaluate_rho(k) * after.evaluate_rho(k)
    rhs = RationalFn(walk.ctx.ring.zero())
    for mono in case.monomials():
        term = RationalFn(walk.ctx.ring.one())
        for e, power in mono.items():
            term = term * walk.evaluate_rho(e) ** power
        rhs = rhs + term
    return IdentityResult(case.name, walk.tagged_word, k, lhs == rhs, lhs, rhs)


def verify_exchange_identity(T: TaggedTriangulation, k: int, ctx: LambdaCtx,
                             word: Sequence[int] | None = None) -> bool:
    """Exchange relation at edge k of T, evaluated via rho and horocycles.

    ``word`` is a tagged flip word from the context base reaching T; without
    it one is found by search.
    """
    if word is None:
        word, emap = find_anchor(ctx, T)
    else:
        reached = ArcWalk.start(ctx).run(word).tagged
        iso = isomorphism(T, reached)
        if iso is None:
            raise ValueError("word does not reach the given triangulation")
        emap = iso[0]
    walk = ArcWalk.start(ctx).run(word)
    return exchange_identity(walk, emap[k]).ok


# -- puncture-skein instances ------------------------------------------------------------

@dataclass(frozen=True)
class SkeinConfig:
    """Two arcs meeting at ``puncture`` and the resolutions of their product."""

    name: str
    puncture: int
    alpha: str
    beta: str
    resolutions: tuple[str, ...]


def verify_puncture_skein(cfg: SkeinConfig, ctx: LambdaCtx) -> bool:
    lhs = ctx.horocycle(cfg.puncture) * ctx.arc_value(cfg.alpha) * ctx.arc_value(cfg.beta)
    rhs = RationalFn(ctx.ring.zero())
    for g in cfg.resolutions:
        rhs = rhs + ctx.arc_value(g)
    return lhs == rhs


def _corners_at(ctx: LambdaCtx, p: int) -> list[tuple[int, int, int]]:
    """Corners at p in rotation order as (outgoing side, opposite, incoming side)."""
    tris = [t.rotated(i) for t in ctx.base.base.triangles for i in range(3) if t.corners[i] == p]
    if not tris:
        raise KeyError(f"no puncture {p}")
    order = [tris[0]]
    while len(order) < len(tris):
        last = order[-1]
        nxt = [t for t in tris if t.edges[0] == last.edges[2] and t is not last]
        order.append(nxt[0])
    return [t.edges for t in order]


def bigon_skein(ctx: LambdaCtx, p: int) -> SkeinConfig:
    """Degree-two puncture: its two arcs resolve into the two bigon sides."""
    corners = _corners_at(ctx, p)
    if len(corners) != 2:
        raise ValueError(f"puncture {p} has degree {len(corners)}, not 2")
    (r1, s1, _), (r2, s2, _) = corners
    arc = lambda e: ctx.edge_arc((), e).arc
    return SkeinConfig(f"bigon@{p}", p, arc(r1), arc(r2), (arc(s1), arc(s2)))


def fan_skein(ctx: LambdaCtx, p: int) -> SkeinConfig:
    """Degree-four puncture: opposite radii resolve into the two diagonals
    passing on either side of p, each reached by one flip."""
    corners = _corners_at(ctx, p)
    if len(corners) != 4:
        raise ValueError(f"puncture {p} has degree {len(corners)}, not 4")
    r = [c[0] for c in corners]
    arc = lambda word, e: ctx.edge_arc(word, e).arc
    return SkeinConfig(f"fan@{p}", p, arc((), r[0]), arc((), r[2]),
                       (arc((r[1],), r[1]), arc((r[3],), r[3])))


# -- context bases and fixtures ---------------------------------------------------------------

CONTEXT_BASES: dict[str, Callable[[], TaggedTriangulation]] = {
    "sigma_0_4": lambda: TaggedTriangulation(OrdinaryTriangulation.from_vertex_triples(
        [(1, 2, 3), (1, 3, 4), (1, 4, 2), (2, 4, 3)])),
    "sigma_0_5": lambda: TaggedTriangulation(OrdinaryTriangulation.from_vertex_triples(
        [(4, 1, 2), (4, 2, 3), (4, 3, 1), (5, 2, 1), (5, 3, 2), (5, 1, 3)])),
    "sigma_0_6": lambda: TaggedTriangulation(OrdinaryTriangulation.from_vertex_triples(
        [(5, 1, 2), (5, 2, 3), (5, 3, 4), (5, 4, 1),
         (6, 2, 1), (6, 3, 2), (6, 4, 3), (6, 1, 4)])),
    "sigma_1_1": lambda: builtin("sigma_1_1"),
    "sigma_1_2": lambda: builtin("sigma_1_2"),
}

BUILTIN_CONTEXT = {
    "sigma_0_4_twoB": "sigma_0_4",
    "sigma_0_4_D": "sigma_0_4",
    "sigma_0_5_CC": "sigma_0_5",
    "sigma_1_1": "sigma_1_1",
    "sigma_1_2": "sigma_1_2",
}


def context(name: str) -> LambdaCtx:
    return LambdaCtx(CONTEXT_BASES[name](), name)


@dataclass(frozen=True)
class CaseFixture:
    """Tagged word from a context base to a flip of the named case."""

    case: str
    base: str
    word: tuple[int, ...]
    edge: int


# Found by scripts/find_case_fixtures.py: shortest words to an instance with
# no notched puncture outside the dangles.  The last entry is the
# once-punctured torus, where all four quadrilateral sides are identified
# in pairs.
CASE_FIXTURES: tuple[CaseFixture, ...] = (
    CaseFixture('case1', 'sigma_0_4', (), 1),
    CaseFixture('case2', 'sigma_0_4', (1,), 2),
    CaseFixture('case4', 'sigma_0_4', (1, 2), 1),
    CaseFixture('case5', 'sigma_0_5', (3, 1, 4, 7), 1),
    CaseFixture('case6', 'sigma_0_5', (3, 1, 4, 7, 1), 7),
    CaseFixture('case7-I', 'sigma_0_5', (3, 4, 1, 6), 3),
    CaseFixture('case7-II', 'sigma_0_5', (3, 4, 1, 8), 3),
    CaseFixture('case8-I', 'sigma_0_4', (1, 2, 4), 1),
    CaseFixture('case8-II', 'sigma_0_4', (1, 2, 5), 1),
    CaseFixture('case9', 'sigma_0_6', (1, 2, 3, 5, 6, 1, 8, 9, 5), 1),
    CaseFixture('case10', 'sigma_0_5', (3, 1, 4, 6, 7, 1, 3), 7),
    CaseFixture('dangle-B', 'sigma_0_4', (1, 2), 2),
    CaseFixture('dangle-C', 'sigma_0_5', (3, 1, 4, 7, 1), 1),
    CaseFixture('dangle-D', 'sigma_0_4', (1, 2, 4, 1), 1),
    CaseFixture('case1', 'sigma_1_1', (), 1),
)


def run_case_fixture(fx: CaseFixture, ctx: LambdaCtx | None = None) -> IdentityResult:
    ctx = ctx or context(fx.base)
    walk = ArcWalk.start(ctx).run(fx.word)
    return exchange_identity(walk, fx.edge)


# -- suites ------------------------------------------------------------------------------------

@dataclass
class RhoReport:
    surface: str
    depth: int
    arcs_checked: int = 0
    failures: list[str] = field(default_factory=list)
    monogons_checked: int = 0
    identities: Counter = field(default_factory=Counter)
    identity_failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures and not self.identity_failures

    def lines(self) -> list[str]:
        out = [f"surface {self.surface} depth {self.depth}"]
        out.append(f"rho-iota arcs checked {self.arcs_checked} failures {len(self.failures)}")
        out.append(f"monogon checks {self.monogons_checked}")
        for case in sorted(self.identities):
            out.append(f"identity {case} checked {self.identities[case]}")
        out += [f"FAIL {f}" for f in self.failures + self.identity_failures]
        out.append("result " + ("pass" if self.ok else "fail"))
        return out


def anchored_walk(surface: str, ctx: LambdaCtx | None = None):
    """Walk from the context base to the builtin, and the builtin label map."""
    ctx = ctx or context(BUILTIN_CONTEXT[surface])
    word, emap = find_anchor(ctx, builtin(surface))
    return ArcWalk.start(ctx).run(word), emap


def rho_report(surface: str, depth: int, ctx: LambdaCtx | None = None,
               identities: bool = False) -> RhoReport:
    """Check rho against mutation for every arc within ``depth`` flips of a builtin.

    With ``identities`` the exchange relation of every flip is also evaluated.
    """
    walk0, emap = anchored_walk(surface, ctx)
    report = RhoReport(surface, depth)
    frontier = [(walk0, None)]
    for level in range(depth + 1):
        nxt = []
        for walk, last in frontier:
            for e in walk.tagged.edges:
                report.arcs_checked += 1
                if walk.evaluate_rho(e) != walk.cluster_variable(e):
                    report.failures.append(f"rho-iota word={_word_id(walk.tagged_word)} edge={e}")
            for j in walk.ptolemy_failures():
                report.failures.append(f"ptolemy word={_word_id(walk.plain_word)} edge={j}")
            for loop, ok in walk.monogon_checks():
                report.monogons_checked += 1
                if not ok:
                    report.failures.append(f"monogon word={_word_id(walk.plain_word)} loop={loop}")
            if identities and level < depth:
                for k in walk.tagged.edges:
                    res = exchange_identity(walk, k)
                    report.identities[res.case] += 1
                    if not res.ok:
                        report.identity_failures.append(res.line())
            if level < depth:
                nxt += [(walk.flip(k), k) for k in walk.tagged.edges if k != last]
        frontier = nxt
    return report


def phi_rho_equals_iota(surface: str, depth: int, ctx: LambdaCtx | None = None) -> bool:
    report = rho_report(surface, depth, ctx)
    return not report.failures
