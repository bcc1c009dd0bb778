"""Ratio of both general uncertainty relations for a Gaussian wave function as alpha varies."""

import argparse

import numpy as np

from qcramer.uncertainty import check_uncertainty_general, gauss_psi


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=float, default=1.0)
    ap.add_argument("--sigma", type=float, default=1.0)
    ap.add_argument("--steps", type=int, default=9)
    args = ap.parse_args()
    psi = gauss_psi(args.sigma)
    print(f"{'alpha':>6} {'ratio 1':>16} {'ratio 2':>16}")
    for alpha in np.linspace(1.2, 2.0, args.steps):
        r1, r2 = check_uncertainty_general(psi, float(alpha), args.q)
        print(f"{alpha:6.3f} {r1.ratio:16.12f} {r2.ratio:16.12f}")


if __name__ == "__main__":
    main()
