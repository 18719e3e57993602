"""Smallest attack distance over all one-bit hashes, against the bound constant.

    python scripts/theorem_sweep.py --n 1 2 --eps 1/20 1/10 1/5 23/100

Prints CSV: n, eps, min_d, c_eps (decimal, display only), margin, all_hold.
"""

import argparse
import csv
import sys
from fractions import Fraction

from nsboxes.attack import c_eps_bracket, scan_all_f


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--eps", type=Fraction, nargs="+",
                    default=[Fraction(k, 100) for k in (1, 5, 10, 15, 20, 23, 24)])
    ap.add_argument("--jobs", type=int, default=None)
    args = ap.parse_args(argv)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["n", "eps", "min_d", "min_f_hex", "c_eps", "margin", "all_hold"])
    for n in args.n:
        for eps in args.eps:
            res = scan_all_f(eps, n, jobs=args.jobs)
            low = res.min_row
            lo, _ = c_eps_bracket(eps)
            out.writerow([n, eps, low.d, low.f.hex, f"{float(lo):.9f}", f"{float(low.d - lo):.9f}", res.all_hold])


if __name__ == "__main__":
    main()
