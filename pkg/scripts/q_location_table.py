"""Table of the q-location Cramer-Rao ratio at the matched q-Gaussian over (q, alpha, n)."""

import argparse

from qcramer.inequalities import check_q_location_cr, lutwak_admissible
from qcramer.norms import Lp
from qcramer.qgaussian import QGaussianParams, as_density


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=float, nargs="+", default=[0.7, 0.9, 1.0, 1.2, 1.5, 3.0])
    ap.add_argument("--alpha", type=float, nargs="+", default=[1.5, 2.0, 3.0])
    ap.add_argument("--dim", type=int, nargs="+", default=[1, 2, 3])
    args = ap.parse_args()
    print(f"{'q':>5} {'alpha':>6} {'n':>2} {'ratio-1':>12}")
    for q in args.q:
        for alpha in args.alpha:
            for n in args.dim:
                if not lutwak_admissible(q, alpha, n):
                    print(f"{q:5.2f} {alpha:6.2f} {n:2d} {'inadmissible':>12}")
                    continue
                g = as_density(QGaussianParams(q, alpha, 1.0, n, Lp(2)))
                r = check_q_location_cr(g, q, alpha, Lp(2))
                print(f"{q:5.2f} {alpha:6.2f} {n:2d} {r.ratio - 1:12.2e}")


if __name__ == "__main__":
    main()
