"""Tagged triangulations of punctured surfaces built from puzzle pieces.

A tagged triangulation is stored as an ordinary ideal triangulation whose
edges and punctures carry stable integer labels, together with the set of
punctures at which every incident end is notched.  Self-folded triangles
become dangles: the radius keeps its label and the enclosing loop stands for
the radius notched at the enclosed puncture (the jewel).  Jewels are never in
the notched set; the other member of the dangle carries the notch instead.

Triangles are ccw triples of edge labels with the puncture at the start of
each side: side i runs from corner i to corner i+1.  Two occurrences of an
edge are glued with opposite orientation.

Every tagged flip is an ordinary flip of this representation, after swapping
the loop and radius labels of a self-folded triangle when the radius itself
is flipped.  The exchange matrix is assembled from the fixed puzzle-piece
minors, and each flip is first matched against a closed library of local
configurations.
"""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .cluster import ExchangeMatrix, Seed, mutate_matrix


class SurfaceError(ValueError):
    """Invalid triangulation data."""


class ExcludedSurface(SurfaceError):
    """The configuration lives on the excluded thrice-punctured sphere."""


class NotFlippable(SurfaceError):
    """The edge is the folded side of a self-folded triangle."""


class NoPattern(RuntimeError):
    """A flip neighborhood matched no entry of the case library."""


class Tag(enum.Enum):
    PLAIN = "plain"
    NOTCHED = "notched"


class PieceKind(enum.Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"


PIECE_MINORS: dict[PieceKind, tuple[tuple[int, ...], ...]] = {
    PieceKind.A: ((0, 1, -1), (-1, 0, 1), (1, -1, 0)),
    PieceKind.B: ((0, 1, -1, -1), (-1, 0, 1, 1), (1, -1, 0, 0), (1, -1, 0, 0)),
    PieceKind.C: (
        (0, 1, 1, -1, -1),
        (-1, 0, 0, 1, 1),
        (-1, 0, 0, 1, 1),
        (1, -1, -1, 0, 0),
        (1, -1, -1, 0, 0),
    ),
    PieceKind.D: (
        (0, 0, -1, -1, 1, 1),
        (0, 0, -1, -1, 1, 1),
        (1, 1, 0, 0, -1, -1),
        (1, 1, 0, 0, -1, -1),
        (-1, -1, 1, 1, 0, 0),
        (-1, -1, 1, 1, 0, 0),
    ),
}

SLOT_COUNT = {PieceKind.A: 3, PieceKind.B: 2, PieceKind.C: 1, PieceKind.D: 0}
_KIND_BY_LOOPS = {0: PieceKind.A, 1: PieceKind.B, 2: PieceKind.C, 3: PieceKind.D}


@dataclass(frozen=True)
class PuzzlePiece:
    """A piece with its edges in minor order: boundary slots, then dangle pairs."""

    kind: PieceKind
    edges: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        if len(self.edges) != len(PIECE_MINORS[self.kind]):
            raise SurfaceError(f"piece {self.kind.value} needs {len(PIECE_MINORS[self.kind])} edges")

    @property
    def slots(self) -> tuple[int, ...]:
        return self.edges[: SLOT_COUNT[self.kind]]

    @property
    def dangles(self) -> list[tuple[int, int]]:
        rest = self.edges[SLOT_COUNT[self.kind]:]
        return [(rest[i], rest[i + 1]) for i in range(0, len(rest), 2)]

    @property
    def minor(self) -> tuple[tuple[int, ...], ...]:
        return PIECE_MINORS[self.kind]


@dataclass(frozen=True)
class TaggedArc:
    edge: int
    endpoints: tuple[int, int]
    tags: tuple[Tag, Tag]

    def __post_init__(self):
        if self.endpoints[0] == self.endpoints[1] and self.tags[0] != self.tags[1]:
            raise SurfaceError(f"arc {self.edge} has both ends at one puncture with different tags")

    def notch_counts(self) -> Counter:
        """Number of notched ends at each puncture."""
        return Counter(p for p, t in zip(self.endpoints, self.tags) if t is Tag.NOTCHED)

    def is_plain(self) -> bool:
        return all(t is Tag.PLAIN for t in self.tags)


@dataclass(frozen=True)
class SurfaceStats:
    g: int
    n: int
    m: int
    t: int

    def as_dict(self) -> dict:
        return {"g": self.g, "n": self.n, "m": self.m, "t": self.t}


# -- ordinary triangulations ---------------------------------------------------

@dataclass(frozen=True)
class Tri:
    """A ccw triangle: side labels and the puncture at the start of each side."""

    edges: tuple[int, int, int]
    corners: tuple[int, int, int]

    def rotated(self, r: int) -> Tri:
        r %= 3
        return Tri(self.edges[r:] + self.edges[:r], self.corners[r:] + self.corners[:r])

    def normalized(self) -> Tri:
        return min((self.rotated(r) for r in range(3)), key=lambda t: (t.edges, t.corners))

    def is_self_folded(self) -> bool:
        return len(set(self.edges)) < 3


@dataclass(frozen=True)
class OrdinaryTriangulation:
    """Closed oriented surface glued from labelled ccw triangles."""

    triangles: tuple[Tri, ...]

    def __post_init__(self):
        tris = tuple(sorted((t.normalized() for t in self.triangles),
                            key=lambda t: (t.edges, t.corners)))
        object.__setattr__(self, "triangles", tris)
        self._validate()

    @classmethod
    def from_vertex_triples(cls, triples: Iterable[Sequence[int]]) -> OrdinaryTriangulation:
        """Simplicial triangulation from ccw vertex triples.

        Edges are numbered 1, 2, ... in sorted order of their vertex pairs.
        """
        triples = [tuple(t) for t in triples]
        pairs = sorted({tuple(sorted((t[i], t[(i + 1) % 3]))) for t in triples for i in range(3)})
        label = {p: i + 1 for i, p in enumerate(pairs)}
        return cls(tuple(
            Tri(tuple(label[tuple(sorted((t[i], t[(i + 1) % 3])))] for i in range(3)), t)
            for t in triples))

    @classmethod
    def from_triples(cls, triples: Iterable[tuple[Sequence[int], Sequence[int]]]
                     ) -> OrdinaryTriangulation:
        return cls(tuple(Tri(tuple(e), tuple(c)) for e, c in triples))

    # -- structure ------------------------------------------------------

    @cached_property
    def sides(self) -> dict[int, list[tuple[int, int]]]:
        """edge label -> [(triangle index, side index)] in scan order."""
        out: dict[int, list[tuple[int, int]]] = {}
        for ti, t in enumerate(self.triangles):
            for i, e in enumerate(t.edges):
                out.setdefault(e, []).append((ti, i))
        return out

    @property
    def edges(self) -> list[int]:
        return sorted(self.sides)

    @cached_property
    def punctures(self) -> list[int]:
        return sorted({p for t in self.triangles for p in t.corners})

    def twin(self, ti: int, i: int) -> tuple[int, int]:
        a, b = self.sides[self.triangles[ti].edges[i]]
        return b if a == (ti, i) else a

    def _validate(self) -> None:
        if not self.triangles:
            raise SurfaceError("empty triangulation")
        for e, occ in self.sides.items():
            if len(occ) != 2:
                raise SurfaceError(f"edge {e} occurs {len(occ)} times; a closed surface needs 2")
        for ti, t in enumerate(self.triangles):
            for i in range(3):
                tj, j = self.twin(ti, i)
                u = self.triangles[tj]
                if (t.corners[i], t.corners[(i + 1) % 3]) != (u.corners[(j + 1) % 3], u.corners[j]):
                    raise SurfaceError(f"corner labels disagree across edge {t.edges[i]}")
        # corners around one puncture must form one cycle
        cycles = self.corner_cycles()
        labels = [self.triangles[c[0][0]].corners[c[0][1]] for c in cycles]
        if len(set(labels)) != len(labels):
            raise SurfaceError("two distinct punctures share a label")
        for cyc, lab in zip(cycles, labels):
            if any(self.triangles[ti].corners[i] != lab for ti, i in cyc):
                raise SurfaceError("corner labels are inconsistent with the gluing")
        seen = {0}
        stack = [0]
        while stack:
            ti = stack.pop()
            for i in range(3):
                tj, _ = self.twin(ti, i)
                if tj not in seen:
                    seen.add(tj)
                    stack.append(tj)
        if len(seen) != len(self.triangles):
            raise SurfaceError("triangulation is disconnected")

    def corner_cycles(self) -> list[list[tuple[int, int]]]:
        """Corners grouped by puncture, each group in rotation order."""
        nxt = {}
        for ti in range(len(self.triangles)):
            for i in range(3):
                tj, j = self.twin(ti, i)
                nxt[(ti, i)] = (tj, (j + 1) % 3)
        seen = set()
        cycles = []
        for start in sorted(nxt):
            if start in seen:
                continue
            cyc = []
            c = start
            while c not in seen:
                seen.add(c)
                cyc.append(c)
                c = nxt[c]
            cycles.append(cyc)
        return cycles

    @cached_property
    def stats(self) -> SurfaceStats:
        n, m, t = len(self.punctures), len(self.sides), len(self.triangles)
        chi = n - m + t
        if chi % 2:
            raise SurfaceError("odd Euler characteristic")
        return SurfaceStats(g=(2 - chi) // 2, n=n, m=m, t=t)

    def endpoints(self, e: int) -> tuple[int, int]:
        ti, i = self.sides[e][0]
        t = self.triangles[ti]
        return t.corners[i], t.corners[(i + 1) % 3]

    def degree(self, p: int) -> int:
        return sum(1 for t in self.triangles for c in t.corners if c == p)

    @cached_property
    def self_folded(self) -> dict[int, tuple[int, int, int]]:
        """loop label -> (radius label, jewel, base puncture)."""
        out = {}
        for t in self.triangles:
            if not t.is_self_folded():
                continue
            counts = Counter(t.edges)
            (radius,) = [e for e, c in counts.items() if c == 2]
            (loop,) = [e for e, c in counts.items() if c == 1]
            i = t.edges.index(loop)
            base = t.corners[i]
            jewel = t.corners[(i + 2) % 3]
            out[loop] = (radius, jewel, base)
        return out

    @cached_property
    def radius_of(self) -> dict[int, int]:
        """radius label -> loop label."""
        return {r: l for l, (r, _, _) in self.self_folded.items()}

    def relabeled(self, edge_map: Mapping[int, int] | None = None,
                  puncture_map: Mapping[int, int] | None = None) -> OrdinaryTriangulation:
        em = edge_map or {}
        pm = puncture_map or {}
        return OrdinaryTriangulation(tuple(
            Tri(tuple(em.get(e, e) for e in t.edges), tuple(pm.get(p, p) for p in t.corners))
            for t in self.triangles))


def flip_ordinary(T: OrdinaryTriangulation, e: int) -> OrdinaryTriangulation:
    """Replace edge e by the other diagonal of its quadrilateral; the label stays e."""
    if e not in T.sides:
        raise KeyError(f"no edge {e}")
    (ti, i), (tj, j) = T.sides[e]
    if ti == tj:
        raise NotFlippable(f"edge {e} is the folded side of a self-folded triangle")
    t = T.triangles[ti].rotated(i)
    u = T.triangles[tj].rotated(j)
    _, a, b = t.edges
    p0, p1, p2 = t.corners
    _, c, d = u.edges
    q2 = u.corners[2]
    others = [x for k, x in enumerate(T.triangles) if k not in (ti, tj)]
    new1 = Tri((e, b, c), (q2, p2, p0))
    new2 = Tri((e, d, a), (p2, q2, p1))
    return OrdinaryTriangulation(tuple(others) + (new1, new2))


# -- tagged triangulations -----------------------------------------------------

@dataclass(frozen=True)
class FlipCase:
    """Result of matching a flip neighborhood against the case library.

    ``roles`` names the edges of the local picture: ``alpha`` is the flipped
    edge and ``e1``, ``e2``, ... follow the exchange relation in ``formula``,
    a pair of monomials given as role-name tuples.
    """

    name: str
    kinds: tuple[str, ...]
    roles: dict[str, int]
    formula: tuple[tuple[str, ...], tuple[str, ...]]

    def monomials(self) -> tuple[Counter, Counter]:
        return tuple(Counter(self.roles[r] for r in mono) for mono in self.formula)


@dataclass(frozen=True)
class TaggedTriangulation:
    """Ordinary triangulation plus the punctures whose ends are all notched."""

    base: OrdinaryTriangulation
    notched: frozenset[int] = frozenset()

    def __post_init__(self):
        notched = frozenset(self.notched)
        base = self.base
        unknown = notched - set(base.punctures)
        if unknown:
            raise SurfaceError(f"notched punctures {sorted(unknown)} do not exist")
        swap, notched = _jewel_swap(base, notched)
        if swap:
            base = base.relabeled(swap)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "notched", notched)
        st = base.stats
        if (st.g, st.n) == (0, 3):
            raise ExcludedSurface("the thrice-punctured sphere is excluded")
        if st.g == 0 and st.n < 3:
            raise ExcludedSurface("sphere with fewer than three punctures")
        if st.n == 1 and notched:
            raise SurfaceError("one-puncture surfaces are modelled in the all-plain component only")

    # -- arcs and tags ----------------------------------------------------

    @property
    def edges(self) -> list[int]:
        return self.base.edges

    @property
    def stats(self) -> SurfaceStats:
        return self.base.stats

    @property
    def punctures(self) -> list[int]:
        return self.base.punctures

    def index(self, e: int) -> int:
        """1-based matrix index of edge e."""
        return self.edges.index(e) + 1

    def _tag(self, p: int) -> Tag:
        return Tag.NOTCHED if p in self.notched else Tag.PLAIN

    @cached_property
    def arcs(self) -> dict[int, TaggedArc]:
        out = {}
        sf = self.base.self_folded
        for e in self.edges:
            if e in sf:
                radius, jewel, base = sf[e]
                out[e] = TaggedArc(e, (base, jewel), (self._tag(base), Tag.NOTCHED))
            elif e in self.base.radius_of:
                _, jewel, base = sf[self.base.radius_of[e]]
                out[e] = TaggedArc(e, (base, jewel), (self._tag(base), Tag.PLAIN))
            else:
                p, q = self.base.endpoints(e)
                out[e] = TaggedArc(e, (p, q), (self._tag(p), self._tag(q)))
        return out

    @property
    def jewels(self) -> set[int]:
        return {jewel for _, jewel, _ in self.base.self_folded.values()}

    def dangle_partner(self, e: int) -> int | None:
        sf = self.base.self_folded
        if e in sf:
            return sf[e][0]
        return self.base.radius_of.get(e)

    def underlying_edge(self, e: int) -> int:
        """Label whose ordinary arc underlies tagged arc e."""
        return self.base.self_folded[e][0] if e in self.base.self_folded else e

    # -- pieces ------------------------------------------------------------

    @cached_property
    def pieces(self) -> list[PuzzlePiece]:
        sf = self.base.self_folded
        out = []
        for t in self.base.triangles:
            if t.is_self_folded():
                continue
            loops = [e in sf for e in t.edges]
            kind = _KIND_BY_LOOPS[sum(loops)]
            if kind is PieceKind.A:
                r = t.edges.index(min(t.edges))
                out.append(PuzzlePiece(kind, t.rotated(r).edges))
            elif kind is PieceKind.B:
                s1, s2, loop = t.rotated(loops.index(True) + 1).edges
                out.append(PuzzlePiece(kind, (s1, s2, sf[loop][0], loop)))
            elif kind is PieceKind.C:
                s, l1, l2 = t.rotated(loops.index(False)).edges
                out.append(PuzzlePiece(kind, (s, sf[l1][0], l1, sf[l2][0], l2)))
            else:
                l1, l2, l3 = t.rotated(t.edges.index(min(t.edges))).edges
                # minor order lists the dangle pairs clockwise
                out.append(PuzzlePiece(kind, (sf[l1][0], l1, sf[l3][0], l3, sf[l2][0], l2)))
        return out

    @cached_property
    def gluing(self) -> list[tuple[tuple[int, int], tuple[int, int]]]:
        where: dict[int, list[tuple[int, int]]] = {}
        for pi, piece in enumerate(self.pieces):
            for si, e in enumerate(piece.slots):
                where.setdefault(e, []).append((pi, si))
        return sorted((a, b) for a, b in where.values())

    def piece_of_edge(self, e: int) -> list[int]:
        return [pi for pi, p in enumerate(self.pieces) if e in p.edges]

    def exchange_matrix(self) -> ExchangeMatrix:
        return exchange_matrix_of_pieces(self.pieces, self.edges)

    # -- flips ------------------------------------------------------------

    def quad(self, k: int):
        """Flip quadrilateral of a non-dangle edge: ((a, b), (c, d)) with
        triangles (k, a, b) and (k, c, d), both ccw."""
        (ti, i), (tj, j) = self.base.sides[k]
        t = self.base.triangles[ti].rotated(i)
        u = self.base.triangles[tj].rotated(j)
        return t, u

    def relabeled(self, edge_map: Mapping[int, int] | None = None,
                  puncture_map: Mapping[int, int] | None = None) -> TaggedTriangulation:
        pm = puncture_map or {}
        return TaggedTriangulation(self.base.relabeled(edge_map, puncture_map),
                                   frozenset(pm.get(p, p) for p in self.notched))

    def canonical_form(self) -> tuple:
        return canonical_form(self)[0]

    def to_json(self) -> dict:
        return triangulation_to_json(self)


def _jewel_swap(base: OrdinaryTriangulation, notched: frozenset[int]):
    """Label swap that keeps jewels plain, and the notched set after it."""
    swap = {}
    for loop, (radius, jewel, _) in base.self_folded.items():
        if jewel in notched:
            swap[loop], swap[radius] = radius, loop
            notched = notched - {jewel}
    return swap, notched


def exchange_matrix_of_pieces(pieces: Sequence[PuzzlePiece],
                              edges: Sequence[int] | None = None) -> ExchangeMatrix:
    """Sum of piece minors under the edge identification.

    Works for fragments too, e.g. a single piece with free boundary.
    """
    if edges is None:
        edges = sorted({e for p in pieces for e in p.edges})
    pos = {e: i for i, e in enumerate(edges)}
    m = len(edges)
    acc = [[0] * m for _ in range(m)]
    for p in pieces:
        minor = p.minor
        for a, ea in enumerate(p.edges):
            for b, eb in enumerate(p.edges):
                acc[pos[ea]][pos[eb]] += minor[a][b]
    return ExchangeMatrix(tuple(tuple(r) for r in acc))


def exchange_matrix(T: TaggedTriangulation) -> ExchangeMatrix:
    B = T.exchange_matrix()
    if B.max_abs() > 2:
        raise AssertionError(f"exchange matrix entry outside [-2, 2]: {B}")
    return B


def seed_of(T: TaggedTriangulation) -> Seed:
    """Initial seed with one variable ``e<label>`` per edge."""
    if not isinstance(T, TaggedTriangulation):
        raise SurfaceError("a seed needs a closed tagged triangulation")
    return Seed.initial(exchange_matrix(T), [f"e{e}" for e in T.edges])


def tau(T: OrdinaryTriangulation) -> TaggedTriangulation:
    """Tag every arc plainly; loops of self-folded triangles become notched radii."""
    return TaggedTriangulation(T, frozenset())


def _bigon_sides(t: Tri, u: Tri) -> list[int]:
    _, a, b = t.edges
    _, c, d = u.edges
    out = []
    if a == d:
        out.append(a)
    if b == c:
        out.append(b)
    return out


def classify_flip(T: TaggedTriangulation, k: int) -> FlipCase:
    """Match the neighborhood of edge k against the case library."""
    if k not in T.base.sides:
        raise KeyError(f"no edge {k}")
    sf = T.base.self_folded
    partner = T.dangle_partner(k)
    if partner is not None:
        loop = k if k in sf else partner
        host = T.piece_of_edge(loop)
        kind = T.pieces[host[0]].kind.value
        inverse = {"B": "case2", "C": "case5", "D": "case8-I"}[kind]
        after = tagged_flip(T, k, check=False, classify=False)
        back = classify_flip(after, k)
        if back.name != inverse:
            raise NoPattern(f"dangle flip of {k} in piece {kind} is not the inverse of {inverse}")
        return FlipCase(f"dangle-{kind}", (kind,), back.roles, back.formula)

    t, u = T.quad(k)
    if [e in sf for e in t.edges[1:]].count(True) > [e in sf for e in u.edges[1:]].count(True):
        t, u = u, t
    _, a, b = t.edges
    _, c, d = u.edges
    nt = sum(e in sf for e in (a, b))
    nu = sum(e in sf for e in (c, d))
    kinds = (_KIND_BY_LOOPS[nt].value, _KIND_BY_LOOPS[nu].value)
    bigons = _bigon_sides(t, u)
    opposite = {a: c, c: a, b: d, d: b}
    shared = {a, b} & {c, d}

    def E(x):  # a loop stands for its dangle pair
        return (sf[x][0], x) if x in sf else (x,)

    def roles_of(**named):
        out = {"alpha": k}
        for name, val in named.items():
            if isinstance(val, tuple):
                for i, v in enumerate(val):
                    out[name.split("_")[i]] = v
            else:
                out[name] = val
        return out

    if len(bigons) == 2:
        raise ExcludedSurface("three common edges between two triangles: thrice-punctured sphere")
    if (nt, nu) == (0, 0):
        if bigons:
            s = bigons[0]
            e1, e3 = (b, c) if s == a else (a, d)
            return FlipCase("case2", kinds, roles_of(e1=e1, e2=s, e3=e3),
                            (("e1",), ("e3",)))
        return FlipCase("case1", kinds, roles_of(e1=c, e2=d, e3=a, e4=b),
                        (("e1", "e3"), ("e2", "e4")))
    if (nt, nu) == (0, 1):
        loop = c if c in sf else d
        if bigons:
            (e1,) = [x for x in (a, b) if x not in bigons]
            return FlipCase("case5", kinds, roles_of(e1=e1, e3_e4=E(loop)),
                            (("e1",), ("e3", "e4")))
        e1 = opposite[loop]
        rest = [x for x in (a, b, c, d) if x not in (loop, e1)]
        return FlipCase("case4", kinds, roles_of(e1=e1, e2=rest[0], e3=rest[1], e4_e5=E(loop)),
                        (("e1", "e4", "e5"), ("e2", "e3")))
    if (nt, nu) == (0, 2) and not bigons:
        return FlipCase("case6", kinds, roles_of(e1=a, e3_e4=E(c), e2=b, e5_e6=E(d)),
                        (("e1", "e3", "e4"), ("e2", "e5", "e6")))
    if (nt, nu) == (1, 1):
        lt = a if a in sf else b
        lu = c if c in sf else d
        if bigons:
            return FlipCase("case8-I", kinds, roles_of(e1_e2=E(lt), e3_e4=E(lu)),
                            (("e1", "e2"), ("e3", "e4")))
        if shared:
            (s,) = shared
            return FlipCase("case8-II", kinds, roles_of(e1=s, e2_e3=E(lt), e4_e5=E(lu)),
                            (("e1", "e1"), ("e2", "e3", "e4", "e5")))
        if opposite[lt] == lu:
            s1, s2 = [x for x in (a, b, c, d) if x not in (lt, lu)]
            return FlipCase("case7-II", kinds, roles_of(e1=s1, e2=s2, e3_e4=E(lt), e5_e6=E(lu)),
                            (("e1", "e2"), ("e3", "e4", "e5", "e6")))
        return FlipCase("case7-I", kinds,
                        roles_of(e1=opposite[lt], e3_e4=E(lt), e2=opposite[lu], e5_e6=E(lu)),
                        (("e1", "e3", "e4"), ("e2", "e5", "e6")))
    if (nt, nu) == (1, 2) and not bigons:
        lt = a if a in sf else b
        s = b if lt == a else a
        return FlipCase("case9", kinds,
                        roles_of(e1=s, e4_e5=E(opposite[s]), e2_e3=E(lt), e6_e7=E(opposite[lt])),
                        (("e1", "e4", "e5"), ("e2", "e3", "e6", "e7")))
    if (nt, nu) == (2, 2) and not bigons:
        return FlipCase("case10", kinds,
                        roles_of(e1_e2=E(a), e5_e6=E(c), e3_e4=E(b), e7_e8=E(d)),
                        (("e1", "e2", "e5", "e6"), ("e3", "e4", "e7", "e8")))
    raise NoPattern(f"no library entry for pieces {kinds} with bigon sides {bigons} at edge {k}")


def tagged_flip(T: TaggedTriangulation, k: int, check: bool = True,
                classify: bool = True) -> TaggedTriangulation:
    """Flip tagged arc k; the label k is kept by the new arc.

    With ``check`` the result's exchange matrix is compared with matrix
    mutation of the input at k.
    """
    if classify:
        classify_flip(T, k)
    result, _, _ = flip_trace(T, k)
    if check:
        expected = mutate_matrix(exchange_matrix(T), T.index(k))
        got = exchange_matrix(result)
        if got != expected:
            raise AssertionError(f"flip of {k}: exchange matrix {got} != mutated {expected}")
    return result


def flip_trace(T: TaggedTriangulation, k: int):
    """Tagged flip with its label bookkeeping.

    Returns ``(result, before, after)``: ``before`` relabels T.base so that
    k sits on an ordinary flippable edge, the ordinary flip keeps labels, and
    ``after`` relabels the flipped triangulation into canonical form.
    """
    base = T.base
    notched = frozenset(T.notched)
    before = {}
    loop = base.radius_of.get(k)
    if loop is not None:
        # flipping the radius: trade labels so k sits on the loop, notch the jewel
        before = {k: loop, loop: k}
        base = base.relabeled(before)
        notched = notched | {T.base.self_folded[loop][1]}
    flipped = flip_ordinary(base, k)
    after, _ = _jewel_swap(flipped, notched)
    return TaggedTriangulation(flipped, notched), before, after


def flip_sequence(T: TaggedTriangulation, word: Iterable[int], check: bool = True
                  ) -> TaggedTriangulation:
    for k in word:
        T = tagged_flip(T, k, check=check)
    return T


# -- canonical forms -----------------------------------------------------------

def _traverse(T: TaggedTriangulation, root: int, rot: int):
    tris = T.base.triangles
    emap: dict[int, int] = {}
    pmap: dict[int, int] = {}
    order = []
    seen = {root}
    queue = [(root, rot)]
    head = 0
    while head < len(queue):
        ti, r = queue[head]
        head += 1
        t = tris[ti].rotated(r)
        row = []
        for i in range(3):
            e, p = t.edges[i], t.corners[i]
            emap.setdefault(e, len(emap) + 1)
            pmap.setdefault(p, len(pmap) + 1)
            row += [emap[e], pmap[p]]
        order.append(tuple(row))
        for i in range(3):
            tj, j = T.base.twin(ti, (i + r) % 3)
            if tj not in seen:
                seen.add(tj)
                queue.append((tj, j))
    key = (tuple(order), tuple(sorted(pmap[p] for p in T.notched)))
    return key, emap, pmap


def canonical_form(T: TaggedTriangulation):
    """Minimal rooted serialization with the relabeling that produces it."""
    best = None
    for ti in range(len(T.base.triangles)):
        for r in range(3):
            cand = _traverse(T, ti, r)
            if best is None or cand[0] < best[0]:
                best = cand
    return best


def isomorphism(S: TaggedTriangulation, T: TaggedTriangulation):
    """Label maps (edges, punctures) carrying S onto T, or None."""
    ks, es, ps = canonical_form(S)
    kt, et, pt = canonical_form(T)
    if ks != kt:
        return None
    inv_e = {v: k for k, v in et.items()}
    inv_p = {v: k for k, v in pt.items()}
    return ({e: inv_e[c] for e, c in es.items()}, {p: inv_p[c] for p, c in ps.items()})


# -- gluing puzzle pieces ----------------------------------------------------------

def _piece_triangles(piece: PuzzlePiece, loops: set[int]) -> list[tuple[int, ...]]:
    """Triangles (edge triples) of a piece given which dangle member is the loop."""
    pairs = []
    for x, y in piece.dangles:
        if (x in loops) == (y in loops):
            raise SurfaceError(f"dangle ({x},{y}) needs exactly one arc notched at its jewel")
        pairs.append((y, x) if x in loops else (x, y))  # (radius, loop)
    kind = piece.kind
    tris = [(loop, radius, radius) for radius, loop in pairs]
    L = [loop for _, loop in pairs]
    if kind is PieceKind.A:
        tris.append(piece.slots)
    elif kind is PieceKind.B:
        tris.append((piece.slots[0], piece.slots[1], L[0]))
    elif kind is PieceKind.C:
        tris.append((piece.slots[0], L[0], L[1]))
    else:
        tris.append((L[0], L[2], L[1]))
    return tris


def glue(pieces: Sequence[PuzzlePiece],
         matching: Sequence[tuple[tuple[int, int], tuple[int, int]]] | None = None,
         tags: Iterable[tuple[int, int, Tag | str]] = ()) -> TaggedTriangulation:
    """Assemble pieces into a validated tagged triangulation.

    Tags are ``(edge, end, tag)``.  For a dangle arc end 0 is the base and end
    1 the jewel; for a slot edge end 0 is where the edge starts along the ccw
    boundary of the first piece listing it.  Unlisted ends are plain.
    """
    pieces = [p if isinstance(p, PuzzlePiece) else PuzzlePiece(PieceKind(p[0]), tuple(p[1]))
              for p in pieces]
    if not pieces:
        raise SurfaceError("no pieces")
    if any(p.kind is PieceKind.D for p in pieces) and len(pieces) > 1:
        raise SurfaceError("piece D cannot be glued to other pieces")
    slots = [(pi, si) for pi, p in enumerate(pieces) for si in range(len(p.slots))]
    slot_edge = {(pi, si): pieces[pi].slots[si] for pi, si in slots}
    if matching is None:
        by_edge: dict[int, list] = {}
        for s in slots:
            by_edge.setdefault(slot_edge[s], []).append(s)
        matching = [tuple(v) for v in by_edge.values() if len(v) == 2]
    used: Counter = Counter()
    for pair in matching:
        if len(pair) != 2:
            raise SurfaceError(f"gluing {pair} is not a pair of slots")
        a, b = (tuple(x) for x in pair)
        for s in (a, b):
            if s not in slot_edge:
                raise SurfaceError(f"no slot {s}")
            used[s] += 1
        if slot_edge[a] != slot_edge[b]:
            raise SurfaceError(f"slots {a} and {b} carry different edges")
    for s in slots:
        if used[s] != 1:
            raise SurfaceError(f"slot {s} (edge {slot_edge[s]}) glued {used[s]} times")
    all_edges = [e for p in pieces for e in p.edges]
    internal = [e for p in pieces for pair in p.dangles for e in pair]
    counts = Counter(all_edges)
    for e in internal:
        if counts[e] != 1:
            raise SurfaceError(f"dangle edge {e} appears outside its piece")

    tag_of: dict[tuple[int, int], Tag] = {}
    for e, end, tg in tags:
        tag_of[(int(e), int(end))] = tg if isinstance(tg, Tag) else Tag(tg)
    loops = {e for e in internal if tag_of.get((e, 1), Tag.PLAIN) is Tag.NOTCHED}

    triples = []
    for p in pieces:
        triples += _piece_triangles(p, loops)
    base = _assign_punctures(triples)

    # translate end-indexed tags into notched punctures
    ends = _edge_ends(pieces, base, loops)
    by_puncture: dict[int, set[Tag]] = {}
    for e, (p0, p1) in ends.items():
        for end, p in ((0, p0), (1, p1)):
            if e in internal and end == 1:
                continue  # jewel ends already decided the loop
            by_puncture.setdefault(p, set()).add(tag_of.get((e, end), Tag.PLAIN))
    notched = set()
    jewels = {jewel for _, jewel, _ in base.self_folded.values()}
    for p, tg in by_puncture.items():
        if len(tg) > 1:
            raise SurfaceError(f"incompatible tags at puncture {p}")
        if Tag.NOTCHED in tg and p not in jewels:
            notched.add(p)
    return TaggedTriangulation(base, frozenset(notched))


def _assign_punctures(triples: Sequence[tuple[int, ...]]) -> OrdinaryTriangulation:
    """Label punctures 1..n by first appearance of their corners."""
    sides: dict[int, list[tuple[int, int]]] = {}
    for ti, t in enumerate(triples):
        for i, e in enumerate(t):
            sides.setdefault(e, []).append((ti, i))
    for e, occ in sides.items():
        if len(occ) != 2:
            raise SurfaceError(f"edge {e} is not glued on both sides")
    parent: dict[tuple[int, int], tuple[int, int]] = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            x = parent[x]
        return x

    for ti, t in enumerate(triples):
        for i in range(3):
            a, b = sides[t[i]]
            tj, j = b if a == (ti, i) else a
            ra, rb = find((ti, i)), find((tj, (j + 1) % 3))
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    label: dict[tuple[int, int], int] = {}
    corners = []
    for ti, t in enumerate(triples):
        row = []
        for i in range(3):
            r = find((ti, i))
            label.setdefault(r, len(label) + 1)
            row.append(label[r])
        corners.append(tuple(row))
    return OrdinaryTriangulation(tuple(Tri(tuple(t), c) for t, c in zip(triples, corners)))


def _edge_ends(pieces: Sequence[PuzzlePiece], base: OrdinaryTriangulation,
               loops: set[int]) -> dict[int, tuple[int, int]]:
    """Punctures at end 0 and end 1 of every edge, per the file convention."""
    sf = base.self_folded
    ends = {}
    for loop, (radius, jewel, b) in sf.items():
        ends[loop] = (b, jewel)
        ends[radius] = (b, jewel)
    for p in pieces:
        for e in p.slots:
            if e in ends:
                continue
            ti, i = base.sides[e][0]
            # the first piece listing e owns the first occurrence only if the
            # triangle order follows the piece order; look the side up directly
            for tj, j in base.sides[e]:
                t = base.triangles[tj]
                if _tri_belongs(t, p, sf):
                    ti, i = tj, j
                    break
            t = base.triangles[ti]
            ends[e] = (t.corners[i], t.corners[(i + 1) % 3])
    return ends


def _tri_belongs(t: Tri, piece: PuzzlePiece, sf) -> bool:
    if t.is_self_folded():
        return False
    return set(t.edges) <= set(piece.edges)


# -- file format -------------------------------------------------------------------

def triangulation_to_json(T: TaggedTriangulation) -> dict:
    pieces = T.pieces
    ends = _edge_ends(pieces, T.base, set(T.base.self_folded))
    tags = []
    arcs = T.arcs
    for e in T.edges:
        arc = arcs[e]
        if T.dangle_partner(e) is not None:
            tags.append([e, 0, arc.tags[0].value])
            tags.append([e, 1, arc.tags[1].value])
            continue
        for end, p in enumerate(ends[e]):
            tags.append([e, end, (Tag.NOTCHED if p in T.notched else Tag.PLAIN).value])
    return {
        "pieces": [{"kind": p.kind.value, "edges": list(p.edges)} for p in pieces],
        "gluings": [[list(a), list(b)] for a, b in T.gluing],
        "tags": tags,
        "stats": T.stats.as_dict(),
    }


def triangulation_from_json(data: Mapping) -> TaggedTriangulation:
    try:
        pieces = [PuzzlePiece(PieceKind(p["kind"]), tuple(p["edges"])) for p in data["pieces"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise SurfaceError(f"malformed pieces: {exc}") from None
    matching = data.get("gluings")
    if matching is not None:
        matching = [(tuple(a), tuple(b)) for a, b in matching]
    tags = [tuple(t) for t in data.get("tags", [])]
    return glue(pieces, matching, tags)


def dump_triangulation(T: TaggedTriangulation) -> str:
    return json.dumps(triangulation_to_json(T), indent=2) + "\n"


def load_triangulation(path: str) -> TaggedTriangulation:
    with open(path) as fh:
        return triangulation_from_json(json.load(fh))


# -- built-in surfaces ---------------------------------------------------------------

def _dangle_tags(*pairs: tuple[int, int]) -> list[tuple[int, int, str]]:
    # second member of each pair is the one notched at the jewel
    out = []
    for plain, notched in pairs:
        out += [(plain, 1, "plain"), (notched, 1, "notched")]
    return out


def _builtin_sigma_1_2() -> TaggedTriangulation:
    # once-punctured torus with edge 1 doubled into a bigon around a second puncture
    return glue([
        PuzzlePiece(PieceKind.A, (1, 2, 3)),
        PuzzlePiece(PieceKind.A, (4, 2, 3)),
        PuzzlePiece(PieceKind.A, (1, 5, 6)),
        PuzzlePiece(PieceKind.A, (4, 6, 5)),
    ])


BUILTINS = {
    "sigma_0_4_twoB": lambda: glue(
        [PuzzlePiece(PieceKind.B, (5, 6, 1, 2)), PuzzlePiece(PieceKind.B, (6, 5, 3, 4))],
        [((0, 0), (1, 1)), ((0, 1), (1, 0))],
        _dangle_tags((1, 2), (3, 4)),
    ),
    "sigma_0_4_D": lambda: glue(
        [PuzzlePiece(PieceKind.D, (1, 2, 3, 4, 5, 6))], [], _dangle_tags((1, 2), (3, 4), (5, 6))
    ),
    "sigma_0_5_CC": lambda: glue(
        [PuzzlePiece(PieceKind.C, (9, 1, 2, 3, 4)), PuzzlePiece(PieceKind.C, (9, 5, 6, 7, 8))],
        [((0, 0), (1, 0))],
        _dangle_tags((1, 2), (3, 4), (5, 6), (7, 8)),
    ),
    "sigma_1_1": lambda: glue(
        [PuzzlePiece(PieceKind.A, (1, 2, 3)), PuzzlePiece(PieceKind.A, (1, 2, 3))]
    ),
    "sigma_1_2": _builtin_sigma_1_2,
}


def builtin(name: str) -> TaggedTriangulation:
    try:
        make = BUILTINS[name]
    except KeyError:
        raise KeyError(f"unknown surface {name!r}; choose from {sorted(BUILTINS)}") from None
    return make()


def load_surface(spec: str) -> TaggedTriangulation:
    """A builtin name or a path to a triangulation file."""
    if spec in BUILTINS:
        return builtin(spec)
    return load_triangulation(spec)


def flip_neighborhood(T: TaggedTriangulation, depth: int) -> list[tuple[tuple[int, ...], TaggedTriangulation]]:
    """All (word, triangulation) reachable by at most ``depth`` flips, no immediate repeats."""
    out = [((), T)]
    frontier = [((), T)]
    for _ in range(depth):
        nxt = []
        for word, S in frontier:
            for k in S.edges:
                if word and word[-1] == k:
                    continue
                nxt.append((word + (k,), tagged_flip(S, k)))
        out += nxt
        frontier = nxt
    return out
