"""Run the built-in Monte Carlo scenario suite and print the z-score of each slack."""

import argparse
import dataclasses
import time
import warnings

from qcramer.estimation import SUITE, Z_THRESHOLD, run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--budget", type=int, default=None, help="override every scenario's sample budget")
    args = ap.parse_args()
    worst = float("inf")
    for s in SUITE:
        if args.budget:
            s = dataclasses.replace(s, budget=args.budget)
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = run_scenario(s)
        z = res.diagnostics["z"]
        worst = min(worst, z)
        print(f"{s.family:32.32} {s.estimator:18.18} alpha={s.alpha:<5g} ratio={res.report.ratio:9.5f} "
              f"z={z:10.3g}{' *' if res.diagnostics['insufficient_budget'] else '  '} ({time.perf_counter() - t0:.2f} s)")
    print(f"min z = {worst:.2f}; violation below z = {Z_THRESHOLD:g}; * marks an insufficient budget")


if __name__ == "__main__":
    main()
