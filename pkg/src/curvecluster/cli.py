"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .cluster import (
    DEFAULT_NODE_CAP,
    LaurentViolation,
    Seed,
    dump_seed,
    explore,
    laurent_expand,
    load_seed,
    mutate_word,
    upper_member_report,
)
from .exactmath import CoeffRing, parse_rational
from .grading import degree
from .lambda_lengths import (
    BUILTIN_CONTEXT,
    CurveExpr,
    EdgeArc,
    EnvelopeArc,
    Loop,
    LoopConst,
    VertexClass,
    rho_report,
)
from .surface import BUILTINS, SurfaceError, load_surface, seed_of

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _word(text: str | None) -> list[int]:
    if not text:
        return []
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"bad word {text!r}; expected comma-separated integers") from None


def _surface(spec: str):
    try:
        return load_surface(spec)
    except FileNotFoundError:
        raise InputError(f"no such surface file or builtin: {spec}") from None
    except (SurfaceError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise InputError(f"invalid triangulation {spec}: {exc}") from None


def _seed(args) -> Seed:
    coeffs = CoeffRing(args.ring)
    if args.seed and args.surface:
        raise InputError("give either --seed or --surface, not both")
    if args.seed:
        try:
            return load_seed(args.seed, coeffs)
        except FileNotFoundError:
            raise InputError(f"no such seed file: {args.seed}") from None
        except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
            raise InputError(f"invalid seed file {args.seed}: {exc}") from None
    if args.surface:
        S = seed_of(_surface(args.surface))
        if coeffs is CoeffRing.Z:
            return S
        return Seed.initial(S.matrix, S.ring.variables, coeffs)
    raise InputError("one of --seed or --surface is required")


def _check_word(word: list[int], m: int) -> None:
    for k in word:
        if not 1 <= k <= m:
            raise InputError(f"mutation index {k} outside 1..{m}")


def cmd_matrix(args, out) -> int:
    T = _surface(args.surface)
    for row in T.exchange_matrix().as_lists():
        print(" ".join(str(x) for x in row), file=out)
    st = T.stats
    print(f"# g={st.g} n={st.n} m={st.m} t={st.t} edges={','.join(map(str, T.edges))}", file=out)
    return EXIT_OK


def cmd_mutate(args, out) -> int:
    S = _seed(args)
    word = _word(args.word)
    _check_word(word, S.m)
    out.write(dump_seed(mutate_word(S, word)))
    return EXIT_OK


def cmd_flipgraph(args, out) -> int:
    S = _seed(args)
    G = explore(S, args.depth, args.node_cap)
    data = G.to_json()
    if args.out:
        path = Path(args.out)
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
        path.with_suffix(".dot").write_text(G.to_dot())
    print(f"nodes {len(G.nodes)} edges {len(G.edges)} frontier {len(G.frontier)} "
          f"partial {str(G.partial).lower()}", file=out)
    return EXIT_OK


def cmd_laurent(args, out) -> int:
    S = _seed(args)
    word = _word(args.word)
    _check_word(word, S.m)
    try:
        polys = laurent_expand(S, word)
    except LaurentViolation as exc:
        print(f"laurent violation: {exc}", file=out)
        return EXIT_FAIL
    for i, p in enumerate(polys, 1):
        print(f"x{i} = {p}", file=out)
    return EXIT_OK


def cmd_upper(args, out) -> int:
    S = _seed(args)
    try:
        f = parse_rational(args.candidate, S.ring)
    except (ValueError, SyntaxError, KeyError, ZeroDivisionError) as exc:
        raise InputError(f"bad candidate {args.candidate!r}: {exc}") from None
    report = upper_member_report(f, S, args.depth, args.node_cap)
    for key, ok in sorted(report):
        print(f"{'laurent' if ok else 'not-laurent'}\t{key}", file=out)
    print("true" if all(ok for _, ok in report) else "false", file=out)
    return EXIT_OK


def cmd_verify_rho(args, out) -> int:
    if args.surface not in BUILTIN_CONTEXT:
        raise InputError(f"verify-rho needs a builtin surface: {sorted(BUILTIN_CONTEXT)}")
    report = rho_report(args.surface, args.depth, identities=True)
    for line in report.lines():
        print(line, file=out)
    return EXIT_OK if report.ok else EXIT_FAIL


def _atom(spec: dict):
    if "arc" in spec:
        return EdgeArc(str(spec["arc"]), tuple(spec["ends"]))
    if "vertex" in spec:
        return VertexClass(int(spec["vertex"]), int(spec.get("power", 1)))
    if "envelope" in spec:
        w, v, inner = spec["envelope"]
        return EnvelopeArc(int(w), int(v), str(inner))
    if "const" in spec:
        around = spec["const"]
        return LoopConst(None if around == "contractible" else int(around))
    if "loop" in spec:
        return Loop(str(spec["loop"]))
    raise ValueError(f"unknown atom {spec}")


def parse_expression_file(data: dict) -> tuple[int, list[tuple[str, CurveExpr]]]:
    """``{punctures: n, expressions: [{name, terms: [{coeff, atoms: [...]}]}]}``."""
    n = int(data["punctures"])
    exprs = []
    for item in data["expressions"]:
        x = CurveExpr()
        for term in item["terms"]:
            x = x + CurveExpr.product([_atom(a) for a in term["atoms"]], int(term.get("coeff", 1)))
        exprs.append((str(item.get("name", len(exprs) + 1)), x))
    return n, exprs


def cmd_grade(args, out) -> int:
    try:
        data = json.loads(Path(args.expressions).read_text())
        n, exprs = parse_expression_file(data)
        results = [(name, degree(x, n)) for name, x in exprs]
    except FileNotFoundError:
        raise InputError(f"no such expression file: {args.expressions}") from None
    except (ValueError, KeyError, TypeError, IndexError) as exc:
        raise InputError(f"invalid expression file: {exc}") from None
    for name, d in results:
        print(f"{name}\t{d}", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="curvecluster", description="Surface cluster algebra tools.")
    sub = ap.add_subparsers(dest="command", required=True)

    def seed_opts(p):
        p.add_argument("--seed", help="seed file (JSON)")
        p.add_argument("--surface", help=f"builtin ({', '.join(sorted(BUILTINS))}) or triangulation file")
        p.add_argument("--ring", choices=["z", "z2"], default="z")

    p = sub.add_parser("matrix", help="exchange matrix of a triangulation")
    p.add_argument("--surface", required=True)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("mutate", help="apply a mutation word to a seed")
    seed_opts(p)
    p.add_argument("--word", default="")
    p.set_defaults(func=cmd_mutate)

    p = sub.add_parser("flipgraph", help="explore the exchange graph to a depth")
    seed_opts(p)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP)
    p.set_defaults(func=cmd_flipgraph)

    p = sub.add_parser("laurent", help="Laurent expansion along a word")
    seed_opts(p)
    p.add_argument("--word", default="")
    p.set_defaults(func=cmd_laurent)

    p = sub.add_parser("upper", help="test Laurentness of a candidate in every seed to a depth")
    seed_opts(p)
    p.add_argument("--candidate", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP)
    p.set_defaults(func=cmd_upper)

    p = sub.add_parser("verify-rho", help="check rho against mutation and all exchange identities")
    p.add_argument("--surface", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.set_defaults(func=cmd_verify_rho)

    p = sub.add_parser("grade", help="degree vectors of curve expressions")
    p.add_argument("expressions", help="expression file (JSON)")
    p.set_defaults(func=cmd_grade)
    return ap


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    if getattr(args, "depth", 0) is not None and getattr(args, "depth", 0) < 0:
        print("error: depth must be non-negative", file=sys.stderr)
        return EXIT_INPUT
    if getattr(args, "node_cap", 1) < 1:
        print("error: node cap must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
