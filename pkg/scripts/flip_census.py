"""Count triangulations near each builtin surface and the flip cases met.

Triangulations are identified up to relabeling by canonical form; every
flip is checked against matrix mutation along the way.
"""

import argparse
import time
from collections import Counter

from curvecluster.surface import BUILTINS, builtin, canonical_form, classify_flip, tagged_flip


def census(name: str, depth: int):
    T0 = builtin(name)
    seen = {canonical_form(T0)[0]}
    layer = [T0]
    cases: Counter = Counter()
    for _ in range(depth + 1):
        nxt = []
        for T in layer:
            for k in T.edges:
                cases[classify_flip(T, k).name] += 1
                U = tagged_flip(T, k, check=True, classify=False)
                key = canonical_form(U)[0]
                if key not in seen:
                    seen.add(key)
                    nxt.append(U)
        layer = nxt
    return len(seen), cases


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--depth", type=int, default=3)
    ap.add_argument("surfaces", nargs="*", default=sorted(BUILTINS))
    args = ap.parse_args()
    for name in args.surfaces:
        start = time.perf_counter()
        classes, cases = census(name, args.depth)
        elapsed = time.perf_counter() - start
        print(f"{name}: {classes} classes within {args.depth + 1} flips ({elapsed:.1f}s)")
        for case, count in sorted(cases.items()):
            print(f"  {case:10s} {count}")


if __name__ == "__main__":
    main()
