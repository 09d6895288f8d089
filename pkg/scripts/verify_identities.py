"""Run every case fixture and puncture skein, print one line each, and
write the per-context fixture files (base, corner table, arc paths,
identity list) to an output directory."""

import argparse
import json
from pathlib import Path

from curvecluster.lambda_lengths import (
    CASE_FIXTURES,
    bigon_skein,
    context,
    fan_skein,
    run_case_fixture,
    verify_puncture_skein,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="fixtures", help="directory for fixture JSON files")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    contexts = {}
    identities: dict[str, list] = {}
    failed = 0
    for fx in CASE_FIXTURES:
        ctx = contexts.setdefault(fx.base, context(fx.base))
        res = run_case_fixture(fx, ctx)
        failed += not res.ok
        print(f"{fx.base:10s} {res.line()}")
        identities.setdefault(fx.base, []).append(
            {"case": fx.case, "word": list(fx.word), "edge": fx.edge, "ok": res.ok})

    skeins = [("sigma_1_2", bigon_skein, 2), ("sigma_0_6", fan_skein, 5), ("sigma_0_6", fan_skein, 6)]
    for base, make, p in skeins:
        ctx = contexts.setdefault(base, context(base))
        cfg = make(ctx, p)
        ok = verify_puncture_skein(cfg, ctx)
        failed += not ok
        print(f"{base:10s} {'pass' if ok else 'FAIL'} skein {cfg.name}")
        identities.setdefault(base, []).append({"skein": cfg.name, "ok": ok})

    for base, ctx in sorted(contexts.items()):
        data = ctx.to_json()
        data["identities"] = identities.get(base, [])
        (out / f"{base}.json").write_text(json.dumps(data, indent=2) + "\n")
    print(f"{failed} failures; fixture files in {out}/")
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
