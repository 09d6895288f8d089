import json
from collections import defaultdict

import pytest

from curvecluster.cluster import mutate_matrix
from curvecluster.surface import (
    BUILTINS,
    PIECE_MINORS,
    ExcludedSurface,
    OrdinaryTriangulation,
    PieceKind,
    PuzzlePiece,
    SurfaceError,
    Tag,
    TaggedTriangulation,
    builtin,
    canonical_form,
    classify_flip,
    dump_triangulation,
    flip_neighborhood,
    glue,
    isomorphism,
    load_surface,
    seed_of,
    tagged_flip,
    tau,
    triangulation_from_json,
)

P, A, B, C, D = PuzzlePiece, PieceKind.A, PieceKind.B, PieceKind.C, PieceKind.D

TWO_B = [
    [0, 0, 0, 0, 1, -1],
    [0, 0, 0, 0, 1, -1],
    [0, 0, 0, 0, -1, 1],
    [0, 0, 0, 0, -1, 1],
    [-1, -1, 1, 1, 0, 0],
    [1, 1, -1, -1, 0, 0],
]


@pytest.fixture(scope="module")
def neighborhoods():
    return {name: flip_neighborhood(builtin(name), 2) for name in BUILTINS}


def triangle_rule_matrix(T):
    """Exchange matrix from signed triangle adjacencies, radii read as their loops."""
    pi = {radius: loop for loop, (radius, _, _) in T.base.self_folded.items()}
    raw = defaultdict(int)
    for t in T.base.triangles:
        if t.is_self_folded():
            continue
        a, b, c = t.edges
        for x, y in ((a, b), (b, c), (c, a)):
            raw[x, y] += 1
            raw[y, x] -= 1
    E = T.edges
    return [[raw[pi.get(i, i), pi.get(j, j)] for j in E] for i in E]


def test_piece_minors():
    assert PIECE_MINORS[A] == ((0, 1, -1), (-1, 0, 1), (1, -1, 0))
    assert PIECE_MINORS[B] == ((0, 1, -1, -1), (-1, 0, 1, 1), (1, -1, 0, 0), (1, -1, 0, 0))
    assert PIECE_MINORS[C] == ((0, 1, 1, -1, -1), (-1, 0, 0, 1, 1), (-1, 0, 0, 1, 1),
                               (1, -1, -1, 0, 0), (1, -1, -1, 0, 0))
    assert PIECE_MINORS[D] == ((0, 0, -1, -1, 1, 1), (0, 0, -1, -1, 1, 1),
                               (1, 1, 0, 0, -1, -1), (1, 1, 0, 0, -1, -1),
                               (-1, -1, 1, 1, 0, 0), (-1, -1, 1, 1, 0, 0))


@pytest.mark.parametrize("name,stats", [
    ("sigma_0_4_twoB", (0, 4, 6, 4)),
    ("sigma_0_4_D", (0, 4, 6, 4)),
    ("sigma_0_5_CC", (0, 5, 9, 6)),
    ("sigma_1_1", (1, 1, 3, 2)),
    ("sigma_1_2", (1, 2, 6, 4)),
])
def test_builtin_stats(name, stats):
    st = builtin(name).stats
    assert (st.g, st.n, st.m, st.t) == stats
    assert st.m == 6 * st.g - 6 + 3 * st.n and st.t == 4 * st.g - 4 + 2 * st.n


def test_two_b_matrix_and_mutation_to_d():
    T = builtin("sigma_0_4_twoB")
    assert T.exchange_matrix().as_lists() == TWO_B
    assert mutate_matrix(T.exchange_matrix(), 6).as_lists() == [list(r) for r in PIECE_MINORS[D]]
    flipped = tagged_flip(T, 6)
    assert [p.kind for p in flipped.pieces] == [D]
    assert isomorphism(flipped, builtin("sigma_0_4_D")) is not None


def test_torus_matrix_and_seed():
    T = builtin("sigma_1_1")
    assert T.exchange_matrix().as_lists() == [[0, 2, -2], [-2, 0, 2], [2, -2, 0]]
    S = seed_of(T)
    assert S.m == 3 and S.matrix == T.exchange_matrix()


def test_piece_sum_matches_triangle_rule(neighborhoods):
    for name, items in neighborhoods.items():
        for word, T in items:
            assert T.exchange_matrix().as_lists() == triangle_rule_matrix(T), (name, word)


def test_flip_is_mutation_and_involution(neighborhoods):
    for name, items in neighborhoods.items():
        for word, T in items:
            key = canonical_form(T)[0]
            for k in T.edges:
                U = tagged_flip(T, k, check=True)
                assert all(abs(b) <= 2 for row in U.exchange_matrix().as_lists() for b in row)
                assert canonical_form(tagged_flip(U, k))[0] == key, (name, word, k)


def test_dangle_jewels_have_two_differently_tagged_ends(neighborhoods):
    for items in neighborhoods.values():
        for _, T in items:
            for j in T.jewels:
                ends = [(e, arc.tags[i]) for e, arc in T.arcs.items()
                        for i, p in enumerate(arc.endpoints) if p == j]
                assert len(ends) == 2
                assert {t for _, t in ends} == {Tag.PLAIN, Tag.NOTCHED}
                (e, _), (f, _) = ends
                assert T.arcs[e].tags[0] == T.arcs[f].tags[0]


def test_case_library_seen_near_builtins(neighborhoods):
    seen = set()
    for items in neighborhoods.values():
        for _, T in items:
            seen |= {classify_flip(T, k).name for k in T.edges}
    assert {"case1", "case2", "case4", "case5", "case6", "case7-I", "case8-I", "case8-II",
            "case10", "dangle-B", "dangle-C", "dangle-D"} <= seen


def test_case8_formula():
    case = classify_flip(builtin("sigma_0_4_twoB"), 6)
    assert case.name == "case8-I" and case.kinds == ("B", "B")
    left, right = case.monomials()
    assert sorted(left.elements()) == [1, 2] and sorted(right.elements()) == [3, 4]


def test_notching_a_puncture_keeps_the_matrix():
    T = builtin("sigma_1_2")
    N = TaggedTriangulation(T.base, frozenset({2}))
    assert N.exchange_matrix() == T.exchange_matrix()
    assert N.arcs[5].notch_counts() == {2: 1}
    with pytest.raises(SurfaceError):
        TaggedTriangulation(builtin("sigma_1_1").base, frozenset({1}))


def test_tau():
    plain = tau(builtin("sigma_1_2").base)
    assert all(a.is_plain() for a in plain.arcs.values())
    tagged_d = tau(builtin("sigma_0_4_D").base)
    assert [p.kind for p in tagged_d.pieces] == [D]
    assert sorted(e for e, a in tagged_d.arcs.items() if not a.is_plain()) == [2, 4, 6]
    assert tagged_d.exchange_matrix().as_lists() == [list(r) for r in PIECE_MINORS[D]]


def test_file_roundtrip(neighborhoods, tmp_path):
    for items in neighborhoods.values():
        for _, T in items[:20]:
            U = triangulation_from_json(json.loads(dump_triangulation(T)))
            assert U.edges == T.edges and U.exchange_matrix() == T.exchange_matrix()
            assert canonical_form(U)[0] == canonical_form(T)[0]
    path = tmp_path / "t.json"
    path.write_text(dump_triangulation(builtin("sigma_0_5_CC")))
    assert load_surface(str(path)).exchange_matrix() == builtin("sigma_0_5_CC").exchange_matrix()


def test_vertex_triples_constructor():
    tetra = OrdinaryTriangulation.from_vertex_triples([(1, 2, 3), (1, 3, 4), (1, 4, 2), (2, 4, 3)])
    st = tetra.stats
    assert (st.g, st.n, st.m, st.t) == (0, 4, 6, 4)
    assert all(tetra.degree(p) == 3 for p in tetra.punctures)


@pytest.mark.parametrize("make,exc", [
    (lambda: glue([P(A, (1, 2, 3))]), SurfaceError),
    (lambda: glue([P(A, (1, 2, 3)), P(A, (3, 2, 1))]), ExcludedSurface),
    (lambda: glue([P(D, (1, 2, 3, 4, 5, 6)), P(A, (7, 8, 9))]), SurfaceError),
    (lambda: glue([P(D, (1, 2, 3, 4, 5, 6))], [], []), SurfaceError),
    (lambda: P(A, (1, 2)), SurfaceError),
    (lambda: glue([P(A, (1, 2, 3)), P(A, (1, 2, 3))],
                  [((0, 0), (1, 1)), ((0, 1), (1, 0)), ((0, 2), (1, 2))]), SurfaceError),
    (lambda: glue([P(A, (1, 2, 3)), P(A, (4, 2, 3)), P(A, (1, 5, 6)), P(A, (4, 6, 5))],
                  None, [(1, 0, "notched")]), SurfaceError),
    (lambda: builtin("nope"), KeyError),
    (lambda: tagged_flip(builtin("sigma_1_1"), 7), KeyError),
])
def test_invalid_inputs(make, exc):
    with pytest.raises(exc):
        make()
