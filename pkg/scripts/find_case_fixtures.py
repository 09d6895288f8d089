"""Search shortest flip words reaching each case of the flip library.

Prints CaseFixture literals for the lambda module.  An instance is accepted
only if no puncture outside the dangles is notched.
"""

import argparse

from curvecluster.lambda_lengths import CONTEXT_BASES, CaseFixture
from curvecluster.surface import canonical_form, classify_flip, tagged_flip

CASES = ["case1", "case2", "case4", "case5", "case6", "case7-I", "case7-II",
         "case8-I", "case8-II", "case9", "case10", "dangle-B", "dangle-C", "dangle-D"]


def search(base_name: str, wanted: set[str], max_nodes: int) -> dict[str, CaseFixture]:
    start = CONTEXT_BASES[base_name]()
    seen = {canonical_form(start)[0]}
    queue = [((), start)]
    found: dict[str, CaseFixture] = {}
    head = 0
    while head < len(queue) and len(seen) < max_nodes and wanted - set(found):
        word, T = queue[head]
        head += 1
        for k in T.edges:
            if not T.notched:
                name = classify_flip(T, k).name
                if name in wanted and name not in found:
                    found[name] = CaseFixture(name, base_name, word, k)
            S = tagged_flip(T, k, check=False, classify=False)
            key = canonical_form(S)[0]
            if key not in seen:
                seen.add(key)
                queue.append((word + (k,), S))
    return found


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-nodes", type=int, default=5000)
    args = ap.parse_args()
    remaining = set(CASES)
    fixtures = []
    for base in ["sigma_0_4", "sigma_1_2", "sigma_0_5", "sigma_0_6"]:
        found = search(base, remaining, args.max_nodes)
        fixtures += found.values()
        remaining -= set(found)
    for fx in sorted(fixtures, key=lambda f: CASES.index(f.case)):
        print(f"    CaseFixture({fx.case!r}, {fx.base!r}, {fx.word!r}, {fx.edge}),")
    if remaining:
        print("# not found:", sorted(remaining))


if __name__ == "__main__":
    main()
