"""Gap between the constructed attack and the LP-optimal single element, per hash.

    python scripts/lp_gap.py --n 2 --eps 1/10

CSV columns: f_hex, trivial_d, attack_d, lp_ab, lp_pairwise, lp_full.
"""

import argparse
import csv
import sys
from fractions import Fraction

from nsboxes.attack import HashFn, best_attack
from nsboxes.boxes import product_system
from nsboxes.lp import optimal_attack


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1)
    ap.add_argument("--eps", type=Fraction, default=Fraction(1, 10))
    args = ap.parse_args(argv)
    P = product_system(args.eps, args.n)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["f_hex", "trivial_d", "attack_d", "lp_ab", "lp_pairwise", "lp_full"])
    for code in range(1 << (1 << args.n)):
        f = HashFn.from_code(args.n, code)
        att = best_attack(P, f)
        lps = [optimal_attack(P, f, family=fam).d for fam in ("ab", ["pairwise-box", "ab"], "full")]
        out.writerow([f.hex, att.trivial_d, att.d, *lps])
        sys.stdout.flush()


if __name__ == "__main__":
    main()
