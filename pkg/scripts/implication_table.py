"""Which constraint family implies which, at a given n.

    python scripts/implication_table.py --n 2

Rows are premises (always with normalization), columns are targets.
"""

import argparse
import sys
import time

from nsboxes.constraints import constraints_for, generate, implies

FAMILIES = ["full", "ab", "backward", "almost-backward", "pairwise-box", "per-party"]
PREMISES = FAMILIES + ["pairwise-box,ab"]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2)
    args = ap.parse_args(argv)
    width = max(map(len, PREMISES)) + 2
    print("premise \\ target".ljust(width) + " ".join(t[:8].rjust(9) for t in FAMILIES))
    start = time.time()
    for prem in PREMISES:
        a = constraints_for(prem.split(","), args.n)
        cells = []
        for target in FAMILIES:
            b = generate(target, args.n)
            cells.append(("yes" if implies(a, b, args.n).holds else "no").rjust(9))
        print(prem.ljust(width) + " ".join(cells))
    print(f"# n={args.n}, {time.time() - start:.1f}s", file=sys.stderr)


if __name__ == "__main__":
    main()
