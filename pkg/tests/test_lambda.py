import pytest
from hypothesis import given, settings, strategies as st

from curvecluster.exactmath import parse_rational
from curvecluster.lambda_lengths import (
    CASE_FIXTURES,
    ArcWalk,
    CurveExpr,
    EdgeArc,
    EnvelopeArc,
    LambdaCtx,
    Loop,
    LoopConst,
    UnregisteredArc,
    UnsupportedAtom,
    VertexClass,
    bigon_skein,
    context,
    evaluate,
    fan_skein,
    phi_rho_equals_iota,
    rho,
    rho_report,
    run_case_fixture,
    unpunctured_monogon_resolution,
    verify_exchange_identity,
    verify_puncture_skein,
)
from curvecluster.surface import SurfaceError, Tag, TaggedArc, builtin, classify_flip, tagged_flip

PL, NO = Tag.PLAIN, Tag.NOTCHED


def q(text, ctx):
    return parse_rational(text, ctx.ring)


def test_torus_horocycle():
    ctx = context("sigma_1_1")
    assert ctx.horocycle(1) == q("2*(e1^2 + e2^2 + e3^2)/(e1*e2*e3)", ctx)


def test_fan_horocycle():
    # octahedron apex 5: radii 3, 6, 9, 11 and sides 1, 5, 8, 2 in rotation order
    ctx = context("sigma_0_6")
    ends = {e: set(ctx.base.base.endpoints(e)) for e in ctx.base.edges}
    assert [ends[e] for e in (3, 6, 9, 11)] == [{1, 5}, {2, 5}, {3, 5}, {4, 5}]
    assert [ends[e] for e in (1, 5, 8, 2)] == [{1, 2}, {2, 3}, {3, 4}, {1, 4}]
    expected = q("e1/(e3*e6) + e5/(e6*e9) + e8/(e9*e11) + e2/(e11*e3)", ctx)
    assert ctx.horocycle(5) == expected


def test_bigon_horocycle():
    # puncture 2 of the twice-punctured torus sits in a bigon with sides 1 and 4
    ctx = context("sigma_1_2")
    assert ctx.corner_table[2] == [(1, 5, 6), (4, 6, 5)]
    assert ctx.horocycle(2) == q("(e1 + e4)/(e5*e6)", ctx)


def test_arc_values():
    ctx = context("sigma_0_4")
    assert ctx.arc_value(ctx.edge_arc((), 1).arc) == q("e1", ctx)
    case = classify_flip(ctx.base, 1)
    r = {k: f"e{v}" for k, v in case.roles.items()}
    flipped = ctx.arc_value(ctx.edge_arc((1,), 1).arc)
    assert flipped == q(f"({r['e1']}*{r['e3']} + {r['e2']}*{r['e4']})/{r['alpha']}", ctx)
    assert ctx.arc_value(ctx.edge_arc((1, 1), 1).arc) == q("e1", ctx)
    with pytest.raises(UnregisteredArc):
        ctx.arc_value("nowhere")


def test_rho_of_tagged_arcs():
    assert rho(TaggedArc(4, (1, 2), (PL, PL))) == CurveExpr.atom(EdgeArc("e4", (1, 2)))
    assert rho(TaggedArc(4, (1, 2), (NO, PL))) == CurveExpr.product(
        [VertexClass(1), EdgeArc("e4", (1, 2))])
    assert rho(TaggedArc(4, (3, 3), (NO, NO))) == CurveExpr.product(
        [VertexClass(3, 2), EdgeArc("e4", (3, 3))])
    with pytest.raises(SurfaceError):
        TaggedArc(4, (3, 3), (NO, PL))


def test_constants_and_unsupported_atoms():
    ctx = context("sigma_0_4")
    assert evaluate(unpunctured_monogon_resolution(1), ctx).num.is_zero()
    assert evaluate(CurveExpr.atom(LoopConst()), ctx) == q("-2", ctx)
    assert evaluate(CurveExpr.atom(LoopConst(2)), ctx) == q("2", ctx)
    with pytest.raises(UnsupportedAtom):
        evaluate(CurveExpr.atom(Loop("gamma")), ctx)


def test_context_rejects_self_folded_base():
    with pytest.raises(SurfaceError):
        LambdaCtx(builtin("sigma_0_4_twoB"))


_CTX = context("sigma_1_2")
_POOL = [_CTX.edge_arc((), e) for e in _CTX.base.edges] + [
    VertexClass(1), VertexClass(2), VertexClass(2, -1), LoopConst(), LoopConst(1)]
monomials = st.lists(st.sampled_from(_POOL), min_size=0, max_size=3)
exprs = st.dictionaries(monomials.map(tuple), st.integers(-3, 3), max_size=3).map(CurveExpr)


@given(exprs, exprs)
@settings(max_examples=30, deadline=None)
def test_evaluate_is_a_ring_map(x, y):
    ex, ey = evaluate(x, _CTX), evaluate(y, _CTX)
    assert evaluate(x + y, _CTX) == ex + ey
    assert evaluate(x * y, _CTX) == ex * ey


@pytest.mark.parametrize("fx", CASE_FIXTURES, ids=lambda fx: f"{fx.case}-{fx.base}")
def test_case_fixture_identity(fx):
    ctx = context(fx.base)
    walk = ArcWalk.start(ctx).run(fx.word)
    assert classify_flip(walk.tagged, fx.edge).name == fx.case
    res = run_case_fixture(fx, ctx)
    assert res.ok, res.line()


def test_corrupted_horocycle_breaks_notched_fixtures():
    failing = {fx.case for fx in CASE_FIXTURES
               if not run_case_fixture(fx, context(fx.base).corrupted()).ok}
    # case1 involves no vertex class, so it cannot see the corruption
    assert failing == {fx.case for fx in CASE_FIXTURES} - {"case1"}


def test_verify_exchange_identity_with_and_without_word():
    fx = next(f for f in CASE_FIXTURES if f.case == "case8-II")
    ctx = context(fx.base)
    T = ArcWalk.start(ctx).run(fx.word).tagged
    assert verify_exchange_identity(T, fx.edge, ctx, word=fx.word)
    assert verify_exchange_identity(T, fx.edge, ctx)


def test_puncture_skeins():
    ctx = context("sigma_1_2")
    assert verify_puncture_skein(bigon_skein(ctx, 2), ctx)
    oct_ctx = context("sigma_0_6")
    for p in (5, 6):
        assert verify_puncture_skein(fan_skein(oct_ctx, p), oct_ctx)
    bad = oct_ctx.corrupted(5)
    assert not verify_puncture_skein(fan_skein(bad, 5), bad)
    with pytest.raises(ValueError):
        bigon_skein(ctx, 1)


def test_monogon_lemma_on_self_folded_walks():
    ctx = context("sigma_0_4")
    walk = ArcWalk.start(ctx).run((1, 2))
    checks = walk.monogon_checks()
    assert checks and all(ok for _, ok in checks)
    loop, _ = checks[0]
    radius, jewel, w = walk.plain.base.self_folded[loop]
    inner = ctx.edge_arc(walk.plain_word, radius)
    envelope = CurveExpr.atom(EnvelopeArc(w, jewel, inner.arc))
    assert evaluate(envelope, ctx) == ctx.horocycle(jewel) * ctx.arc_value(inner.arc) ** 2
    assert not walk.ptolemy_failures()


def test_walk_tracks_tagged_flips():
    ctx = context("sigma_0_4")
    walk = ArcWalk.start(ctx).run((1, 2, 4))
    T = ctx.base
    for k in (1, 2, 4):
        T = tagged_flip(T, k)
    assert walk.tagged == T


def test_phi_rho_equals_iota():
    assert phi_rho_equals_iota("sigma_0_4_twoB", 2)
    assert phi_rho_equals_iota("sigma_1_2", 1)
    assert phi_rho_equals_iota("sigma_1_1", 0)


def test_rho_report_negative_control():
    ctx = context("sigma_0_4")
    report = rho_report("sigma_0_4_twoB", 1, ctx.corrupted(1))
    assert not report.ok and report.failures
    assert report.lines()[-1] == "result fail"


def test_context_json_lists_corners_and_paths():
    ctx = context("sigma_1_1")
    ctx.edge_arc((1,), 1)
    data = ctx.to_json()
    assert data["corner_table"]["1"] and data["arc_paths"]["1:1"] == {"word": [1], "edge": 1}
