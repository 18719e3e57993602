"""Does a weight other than 1/2 help the optimal element?  Reported, not asserted.

    python scripts/p_sweep.py --n 1 --f identity --grid 1/10 1/4 1/3 1/2 2/3 3/4 9/10
"""

import argparse
import csv
import sys
from fractions import Fraction

from nsboxes.attack import HashFn
from nsboxes.boxes import product_system
from nsboxes.lp import sweep_p


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1)
    ap.add_argument("--eps", type=Fraction, default=Fraction(1, 10))
    ap.add_argument("--f", default="identity")
    ap.add_argument("--family", default="pairwise-box,ab")
    ap.add_argument("--grid", type=Fraction, nargs="+",
                    default=[Fraction(k, 10) for k in range(1, 10)])
    args = ap.parse_args(argv)
    P = product_system(args.eps, args.n)
    f = HashFn.parse(args.f, args.n)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["p", "d_opt"])
    for p, d in sweep_p(P, f, args.grid, family=args.family.split(",")):
        out.writerow([p, d])


if __name__ == "__main__":
    main()
