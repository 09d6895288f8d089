"""Seeds, mutation, exchange-graph exploration and Laurent checks.

Mutation directions are 1-based throughout, matching mutation words written
as ``1,2,1``.  Cluster variables are rational functions in the variables of
the initial seed.  A seed may also carry ``back_map``: each initial variable
rewritten in the seed's own cluster coordinates, where the ring's variable
names are reused as positional symbols for the current cluster.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .exactmath import (
    CoeffRing,
    LaurentPoly,
    PolyRing,
    RationalFn,
    parse_rational,
    rf_is_laurent,
    rf_substitute,
)

DEFAULT_NODE_CAP = 100_000


class LaurentViolation(AssertionError):
    """A cluster variable failed to be Laurent; signals an arithmetic fault."""


class SeedConflict(RuntimeError):
    """Two seeds share a cluster but their matrices disagree under the matching."""


@dataclass(frozen=True)
class ExchangeMatrix:
    """Skew-symmetric integer matrix, stored row-major."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        m = len(rows)
        for i, r in enumerate(rows):
            if len(r) != m:
                raise ValueError("exchange matrix must be square")
            if r[i] != 0:
                raise ValueError(f"nonzero diagonal entry at {i + 1}")
            for j in range(i):
                if r[j] != -rows[j][i]:
                    raise ValueError(f"not skew-symmetric at ({i + 1},{j + 1})")

    @classmethod
    def zeros(cls, m: int) -> ExchangeMatrix:
        return cls(tuple((0,) * m for _ in range(m)))

    @property
    def m(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.rows[i][j]

    def column(self, k: int) -> tuple[int, ...]:
        """Column k (1-based)."""
        return tuple(r[k - 1] for r in self.rows)

    def as_lists(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def max_abs(self) -> int:
        return max((abs(v) for r in self.rows for v in r), default=0)

    def permuted(self, perm: Sequence[int]) -> ExchangeMatrix:
        """Matrix with new[i][j] = old[perm[i]][perm[j]] (0-based perm)."""
        return ExchangeMatrix(tuple(tuple(self.rows[pi][pj] for pj in perm) for pi in perm))

    def __str__(self):
        return "[" + ",".join("[" + ",".join(map(str, r)) + "]" for r in self.rows) + "]"


def _check_index(k: int, m: int) -> None:
    if not isinstance(k, int) or not 1 <= k <= m:
        raise IndexError(f"mutation index {k} outside 1..{m}")


def mutate_matrix(B: ExchangeMatrix, k: int) -> ExchangeMatrix:
    """Matrix mutation in direction k (1-based)."""
    _check_index(k, B.m)
    c = k - 1
    rows = B.rows
    out = []
    for i, r in enumerate(rows):
        if i == c:
            out.append(tuple(-v for v in r))
            continue
        bik = r[c]
        new = []
        for j, bij in enumerate(r):
            if j == c:
                new.append(-bij)
            else:
                bkj = rows[c][j]
                new.append(bij + (abs(bik) * bkj + bik * abs(bkj)) // 2)
        out.append(tuple(new))
    return ExchangeMatrix(tuple(out))


@dataclass(frozen=True)
class Seed:
    """Cluster variables (in the initial variables) plus exchange matrix."""

    vars: tuple[RationalFn, ...]
    matrix: ExchangeMatrix
    back_map: tuple[RationalFn, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(RationalFn.lift(v) for v in self.vars))
        if len(self.vars) != self.matrix.m:
            raise ValueError("number of cluster variables differs from matrix size")
        for v in self.vars:
            if v.is_zero():
                raise ValueError("cluster variables must be nonzero")
        if self.back_map is not None:
            object.__setattr__(self, "back_map", tuple(RationalFn.lift(v) for v in self.back_map))

    @classmethod
    def initial(cls, matrix: ExchangeMatrix | Sequence[Sequence[int]],
                names: Sequence[str] | None = None,
                coeffs: CoeffRing = CoeffRing.Z) -> Seed:
        if not isinstance(matrix, ExchangeMatrix):
            matrix = ExchangeMatrix(tuple(tuple(r) for r in matrix))
        if names is None:
            names = [f"x{i + 1}" for i in range(matrix.m)]
        ring = PolyRing(tuple(names), coeffs)
        gens = [RationalFn(g) for g in ring.gens()]
        return cls(tuple(gens), matrix, tuple(gens))

    @property
    def m(self) -> int:
        return self.matrix.m

    @property
    def ring(self) -> PolyRing:
        return self.vars[0].ring

    def key(self) -> str:
        return seed_key(self)


def exchange_binomial(values: Sequence, column: Sequence[int], one):
    """Return the two monomials of the exchange relation for a matrix column."""
    plus, minus = one, one
    for v, b in zip(values, column):
        if b > 0:
            plus = plus * v ** b
        elif b < 0:
            minus = minus * v ** (-b)
    return plus, minus


def mutate_seed(S: Seed, k: int) -> Seed:
    """Mutate the seed in direction k (1-based) via the exchange relation."""
    _check_index(k, S.m)
    c = k - 1
    ring = S.ring
    col = S.matrix.column(k)
    one = RationalFn(ring.one())
    plus, minus = exchange_binomial(S.vars, col, one)
    new_var = (plus + minus) / S.vars[c]
    vars_ = S.vars[:c] + (new_var,) + S.vars[c + 1:]
    back = None
    if S.back_map is not None:
        sym = ring.gens()
        p, q = exchange_binomial(sym, col, ring.one())
        old_symbol = RationalFn(p + q, sym[c])
        assignment = {name: RationalFn(g) for name, g in zip(ring.variables, sym)}
        assignment[ring.variables[c]] = old_symbol
        back = tuple(rf_substitute(f, assignment) for f in S.back_map)
    return Seed(vars_, mutate_matrix(S.matrix, k), back)


def mutate_word(S: Seed, word: Iterable[int]) -> Seed:
    for k in word:
        S = mutate_seed(S, k)
    return S


def seed_key(S: Seed) -> str:
    """Sorted canonical serializations of the cluster variables."""
    return " ; ".join(sorted(str(v) for v in S.vars))


def laurent_expand(S0: Seed, word: Sequence[int]) -> list[LaurentPoly]:
    """Apply the word and return the final cluster as Laurent polynomials.

    Every variable produced along the way is checked; a non-Laurent one
    raises :class:`LaurentViolation`.
    """
    S = S0
    for step, k in enumerate(word):
        S = mutate_seed(S, k)
        v = S.vars[k - 1]
        if not rf_is_laurent(v):
            raise LaurentViolation(f"word {list(word[: step + 1])}: {v} is not Laurent")
    return [v.as_laurent() for v in S.vars]


def pruned_words(m: int, max_len: int) -> Iterable[tuple[int, ...]]:
    """All words of length <= max_len over 1..m without immediate repeats."""
    stack = [()]
    while stack:
        w = stack.pop()
        yield w
        if len(w) < max_len:
            for k in range(m, 0, -1):
                if not w or w[-1] != k:
                    stack.append(w + (k,))


@dataclass
class ExchangeGraph:
    """Seeds keyed by :func:`seed_key` with single-mutation edges."""

    nodes: dict[str, Seed] = field(default_factory=dict)
    distance: dict[str, int] = field(default_factory=dict)
    # each undirected edge once: (key_a, k_a, key_b, k_b), directions 1-based
    edges: list[tuple[str, int, str, int]] = field(default_factory=list)
    frontier: set[str] = field(default_factory=set)
    partial: bool = False
    root: str = ""

    def neighbors(self, key: str) -> dict[int, str]:
        out = {}
        for a, ka, b, kb in self.edges:
            if a == key:
                out[ka] = b
            if b == key:
                out[kb] = a
        return out

    def expanded(self) -> list[str]:
        return [k for k in self.nodes if k not in self.frontier]

    def to_dot(self) -> str:
        ids = {k: i for i, k in enumerate(self.nodes)}
        lines = ["graph exchange {"]
        for k, i in ids.items():
            shape = "box" if k in self.frontier else "ellipse"
            lines.append(f'  n{i} [label="{i}", shape={shape}];')
        for a, ka, b, kb in self.edges:
            lines.append(f'  n{ids[a]} -- n{ids[b]} [label="{ka}/{kb}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        ids = {k: i for i, k in enumerate(self.nodes)}
        return {
            "partial": self.partial,
            "nodes": [
                {
                    "id": i,
                    "key": k,
                    "distance": self.distance[k],
                    "frontier": k in self.frontier,
                    "matrix": self.nodes[k].matrix.as_lists(),
                }
                for k, i in ids.items()
            ],
            "edges": [[ids[a], ka, ids[b], kb] for a, ka, b, kb in self.edges],
        }


def _matching(new: Seed, old: Seed) -> list[int]:
    """perm with new.vars[i] == old.vars[perm[i]]."""
    pos = {str(v): j for j, v in enumerate(old.vars)}
    return [pos[str(v)] for v in new.vars]


def explore(S0: Seed, depth: int, node_cap: int = DEFAULT_NODE_CAP) -> ExchangeGraph:
    """Breadth-first exploration of the exchange graph up to ``depth``.

    Nodes closer than ``depth`` to the root are fully expanded; the rest are
    frontier.  When ``node_cap`` seeds have been stored the search stops and
    the graph is flagged partial.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    g = ExchangeGraph()
    root = seed_key(S0)
    g.root = root
    g.nodes[root] = S0
    g.distance[root] = 0
    seen_edges: set[frozenset] = set()
    # queue entries: key, direction leading back to the parent
    queue = deque([(root, None)])
    while queue:
        key, back = queue.popleft()
        d = g.distance[key]
        if d >= depth:
            g.frontier.add(key)
            continue
        S = g.nodes[key]
        for k in range(1, S.m + 1):
            if k == back:
                continue
            T = mutate_seed(S, k)
            tkey = seed_key(T)
            if tkey in g.nodes:
                stored = g.nodes[tkey]
                perm = _matching(T, stored)
                if stored.matrix.permuted(perm) != T.matrix:
                    raise SeedConflict(f"matrix mismatch for cluster {tkey}")
                kb = perm[k - 1] + 1
            else:
                if len(g.nodes) >= node_cap:
                    g.partial = True
                    g.frontier.add(key)
                    g.frontier.update(k2 for k2, _ in queue)
                    return g
                g.nodes[tkey] = T
                g.distance[tkey] = d + 1
                queue.append((tkey, k))
                kb = k
            edge = frozenset([(key, k), (tkey, kb)])
            if edge not in seen_edges:
                seen_edges.add(edge)
                g.edges.append((key, k, tkey, kb))
    return g


def upper_member_report(f: RationalFn, S0: Seed, depth: int,
                        node_cap: int = DEFAULT_NODE_CAP) -> list[tuple[str, bool]]:
    """Per-seed Laurent verdicts for f rewritten in each explored cluster."""
    g = explore(S0, depth, node_cap)
    names = S0.ring.variables
    out = []
    for key, S in g.nodes.items():
        if S.back_map is None:
            raise ValueError("upper membership needs seeds that track back_map")
        g_f = rf_substitute(f, dict(zip(names, S.back_map)))
        out.append((key, rf_is_laurent(g_f)))
    return out


def upper_member(f: RationalFn, S0: Seed, depth: int, node_cap: int = DEFAULT_NODE_CAP) -> bool:
    """Finite-depth necessary test for membership in the upper cluster algebra."""
    return all(ok for _, ok in upper_member_report(f, S0, depth, node_cap))


# -- seed files ---------------------------------------------------------------

def seed_to_json(S: Seed) -> dict:
    return {
        "m": S.m,
        "variables": list(S.ring.variables),
        "matrix": S.matrix.as_lists(),
        "vars": [str(v) for v in S.vars],
    }


def dump_seed(S: Seed) -> str:
    return json.dumps(seed_to_json(S), indent=2) + "\n"


def seed_from_json(data: dict, coeffs: CoeffRing = CoeffRing.Z) -> Seed:
    """Build a seed from the seed-file mapping.

    Without ``vars`` the seed is initial and tracks ``back_map``.
    """
    matrix = ExchangeMatrix(tuple(tuple(r) for r in data["matrix"]))
    m = data.get("m", matrix.m)
    if m != matrix.m:
        raise ValueError(f"m = {m} but the matrix is {matrix.m}x{matrix.m}")
    names = data.get("variables") or [f"x{i + 1}" for i in range(m)]
    if len(names) != m:
        raise ValueError("variable name count differs from m")
    S = Seed.initial(matrix, names, coeffs)
    if data.get("vars") is None:
        return S
    vars_ = [parse_rational(t, S.ring) for t in data["vars"]]
    if len(vars_) != m:
        raise ValueError("cluster variable count differs from m")
    if all(v == g for v, g in zip(vars_, S.vars)):
        return S
    return Seed(tuple(vars_), matrix, None)


def load_seed(path: str, coeffs: CoeffRing = CoeffRing.Z) -> Seed:
    with open(path) as fh:
        return seed_from_json(json.load(fh), coeffs)
