"""Dilate a Gaussian and watch the weak Euclidean form fail once M_{k/2} drops below one."""

import argparse

import numpy as np

from qcramer.uncertainty import check_uncertainty_euclidean, gauss_psi


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=float, default=0.9)
    args = ap.parse_args()
    print(f"{'sigma':>7} {'M_k2':>11} {'second':>10} {'weak':>10} premise")
    for sigma in np.geomspace(0.05, 20.0, 10):
        _, second, weak = check_uncertainty_euclidean(gauss_psi(float(sigma)), args.q, weak=True)
        print(f"{sigma:7.3f} {second.params['M_k2']:11.4e} {second.ratio:10.6f} {weak.ratio:10.6f} "
              f"{weak.params['premise_holds']}")


if __name__ == "__main__":
    main()
