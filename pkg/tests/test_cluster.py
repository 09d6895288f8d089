import json

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from curvecluster.cluster import (
    ExchangeMatrix,
    LaurentViolation,
    Seed,
    SeedConflict,
    dump_seed,
    explore,
    laurent_expand,
    mutate_matrix,
    mutate_seed,
    mutate_word,
    pruned_words,
    seed_from_json,
    seed_to_json,
    upper_member,
)
from curvecluster.exactmath import RationalFn, parse_rational


@st.composite
def skew_matrices(draw, max_m=6, bound=3):
    m = draw(st.integers(min_value=1, max_value=max_m))
    rows = [[0] * m for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            b = draw(st.integers(min_value=-bound, max_value=bound))
            rows[i][j], rows[j][i] = b, -b
    return ExchangeMatrix(tuple(map(tuple, rows)))


def mutate_oracle(B, k):
    """Matrix mutation via b'_ij = b_ij + sgn(b_ik) max(b_ik b_kj, 0)."""
    c = k - 1
    m = B.m
    out = [[0] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            if c in (i, j):
                out[i][j] = -B[i, j]
            else:
                bik, bkj = B[i, c], B[c, j]
                sgn = (bik > 0) - (bik < 0)
                out[i][j] = B[i, j] + sgn * max(bik * bkj, 0)
    return out


def test_rejects_non_skew():
    with pytest.raises(ValueError):
        ExchangeMatrix(((0, 1), (1, 0)))


@given(skew_matrices(), st.data())
@settings(max_examples=100, deadline=None)
def test_mutation_matches_oracle_and_is_involutive(B, data):
    k = data.draw(st.integers(min_value=1, max_value=B.m))
    once = mutate_matrix(B, k)
    assert once.as_lists() == mutate_oracle(B, k)
    assert mutate_matrix(once, k) == B


def test_bad_index():
    B = ExchangeMatrix(((0, 1), (-1, 0)))
    with pytest.raises(IndexError):
        mutate_matrix(B, 3)


def test_a2_first_mutation():
    S = Seed.initial([[0, 1], [-1, 0]])
    T = mutate_seed(S, 1)
    assert T.vars[0] == parse_rational("(x2 + 1)/x1", S.ring)
    assert mutate_seed(T, 1).vars == S.vars


def test_a2_exchange_graph_is_pentagon():
    G = explore(Seed.initial([[0, 1], [-1, 0]]), depth=10)
    assert not G.partial and not G.frontier
    assert len(G.nodes) == 5 and len(G.edges) == 5
    assert all(len(set(G.neighbors(key).values())) == 2 for key in G.nodes)
    # brute force: the five cluster variables (x2+1)/x1 etc. by sympy
    x1, x2 = sympy.symbols("x1 x2")
    seq = [x1, x2]
    for _ in range(5):
        seq.append(sympy.cancel((seq[-1] + 1) / seq[-2]))
    assert sympy.simplify(seq[5] - x1) == 0 and sympy.simplify(seq[6] - x2) == 0
    names = {str(sympy.factor(v)) for v in seq[:5]}
    assert len(names) == 5


def test_pruned_words_count():
    words = list(pruned_words(3, 3))
    assert len(words) == 1 + 3 + 6 + 12
    assert all(a != b for w in words for a, b in zip(w, w[1:]))


def test_laurent_expand_torus():
    S = Seed.initial([[0, 2, -2], [-2, 0, 2], [2, -2, 0]])
    polys = laurent_expand(Seed(S.vars, S.matrix), [1, 2])
    assert str(polys[0]) == "x1^-1*x2^2 + x1^-1*x3^2"
    assert all(p is not None for p in polys)


def test_laurent_violation_on_non_cluster_seed():
    ring = Seed.initial([[0, 1], [-1, 0]]).ring
    bogus = Seed((RationalFn(ring.var("x1")) + 1, RationalFn(ring.var("x2"))),
                 ExchangeMatrix(((0, 1), (-1, 0))))
    with pytest.raises(LaurentViolation):
        laurent_expand(bogus, [1])


def test_upper_membership():
    S = Seed.initial([[0, 2, -2], [-2, 0, 2], [2, -2, 0]])
    cand = parse_rational("(x1^2 + x2^2 + x3^2)/(x1*x2*x3)", S.ring)
    assert upper_member(cand, S, 3)
    assert not upper_member(parse_rational("1/x1", S.ring), S, 1)


def test_explore_node_cap_marks_partial():
    S = Seed.initial([[0, 2, -2], [-2, 0, 2], [2, -2, 0]])
    G = explore(S, depth=5, node_cap=4)
    assert G.partial
    assert len(G.nodes) <= 4 + 3


def test_explore_is_deterministic():
    S = Seed.initial([[0, 1, 0], [-1, 0, 1], [0, -1, 0]])
    a = json.dumps(explore(S, 4).to_json(), sort_keys=True)
    b = json.dumps(explore(S, 4).to_json(), sort_keys=True)
    assert a == b


def test_seed_conflict_detected(monkeypatch):
    # the pentagon closes between the two distance-2 seeds; corrupt that edge
    import curvecluster.cluster as cl

    real, calls = cl.mutate_seed, []

    def fake(T, k):
        out = real(T, k)
        calls.append(k)
        if len(calls) <= 4:
            return out
        doubled = tuple(tuple(2 * b for b in row) for row in out.matrix.as_lists())
        return Seed(out.vars, ExchangeMatrix(doubled), out.back_map)

    monkeypatch.setattr(cl, "mutate_seed", fake)
    with pytest.raises(SeedConflict):
        cl.explore(Seed.initial([[0, 1], [-1, 0]]), 6)


def test_seed_json_roundtrip():
    S = mutate_word(Seed.initial([[0, 1, -1], [-1, 0, 1], [1, -1, 0]]), [1, 2])
    data = json.loads(dump_seed(S))
    T = seed_from_json(data)
    assert T.vars == S.vars and T.matrix == S.matrix
    assert seed_to_json(T) == data


@given(skew_matrices(max_m=4, bound=2), st.lists(st.integers(min_value=1, max_value=4), max_size=4))
@settings(max_examples=40, deadline=None)
def test_word_then_reverse_is_identity(B, word):
    word = [k for k in word if k <= B.m]
    S = Seed.initial(B)
    S = Seed(S.vars, S.matrix)
    T = mutate_word(mutate_word(S, word), list(reversed(word)))
    assert T.vars == S.vars and T.matrix == S.matrix
