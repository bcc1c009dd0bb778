"""The ten acceptance criteria at their stated tolerances; one PASS/FAIL line each."""

import os
import subprocess
import sys
import time

import numpy as np
import pytest

from _acceptance import Criterion
from _fuzz import admissible_q, smooth_density
from qcramer.density import beta as beta_density
from qcramer.estimation import SUITE, Z_THRESHOLD, Scenario, run_scenario
from qcramer.extremal import extremal_search
from qcramer.inequalities import (beta_function_inequality, check_q_location_cr, lutwak_admissible,
                                  lutwak_chain_reports)
from qcramer.norms import Lp, WeightedLp, holder_check, holder_extremal
from qcramer.qgaussian import QGaussianParams, as_density
from qcramer.uncertainty import (check_uncertainty_euclidean, check_uncertainty_general, gauss_psi,
                                 heisenberg_check)


def test_criterion_01_q_location_saturation():
    with Criterion(1, "q-location Cramer-Rao saturated by the matched q-Gaussian") as c:
        t0 = time.perf_counter()
        worst, count = 0.0, 0
        for q in (0.7, 0.9, 1.0, 1.2, 1.5, 3.0):
            for alpha in (1.5, 2.0, 3.0):
                for n in (1, 2, 3):
                    if not lutwak_admissible(q, alpha, n):
                        continue
                    g = as_density(QGaussianParams(q, alpha, 1.0, n, Lp(2)))
                    r = check_q_location_cr(g, q, alpha, Lp(2))
                    worst = max(worst, abs(r.ratio - 1))
                    count += 1
                    assert abs(r.ratio - 1) < 1e-4, (q, alpha, n, r.ratio)
        elapsed = time.perf_counter() - t0
        c.detail = f"{count} tuples, max |ratio-1| = {worst:.2e}, {elapsed:.1f} s"
        assert elapsed < 60


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
def test_criterion_02_heisenberg(sigma):
    with Criterion(2, "Heisenberg reduction for Gaussian psi") as c:
        t0 = time.perf_counter()
        r = heisenberg_check(gauss_psi(sigma))
        elapsed = time.perf_counter() - t0
        assert r.lhs == pytest.approx(1 / (16 * np.pi**2), rel=1e-6)
        assert elapsed < 1.0
        c.detail = f"sigma={sigma:g}: rel err {abs(r.ratio - 1):.1e}, {elapsed:.3f} s"


def test_criterion_03_beta_function():
    with Criterion(3, "beta-function inequality") as c:
        vals = (1.1, 1.5, 2.0, 5.0, 10.0)
        ratios = [beta_function_inequality(a, b).ratio for a in vals for b in vals]
        assert len(ratios) == 25 and min(ratios) >= 1
        spot = beta_function_inequality(2.0, 2.0)
        assert spot.lhs == pytest.approx(1.0, rel=1e-14) and spot.rhs == pytest.approx(1 / 6, rel=1e-14)
        c.detail = f"min ratio {min(ratios):.4g}; (2,2): lhs={spot.lhs:.15g} rhs={spot.rhs:.15g}"


def _fuzz_norms(rng, count):
    for _ in range(count):
        n = int(rng.integers(1, 6))
        p = float(rng.uniform(1.1, 8.0))
        if rng.uniform() < 0.5:
            yield n, Lp(p)
        else:
            yield n, WeightedLp(p, tuple(rng.uniform(0.2, 5.0, n)))


def test_criterion_04_dual_vector():
    with Criterion(4, "dual-vector identities and gradient of the norm") as c:
        rng = np.random.default_rng(2024)
        e1 = e2 = e3 = 0.0
        total = 0
        for n, N in _fuzz_norms(rng, 200):
            x = rng.normal(size=(50, n)) * rng.uniform(0.1, 10.0, (50, 1))
            r = N.evaluate(x)
            xs = N.gradient(x)
            e1 = max(e1, float(np.max(np.abs(np.einsum("ij,ij->i", x, xs) - r) / r)))
            e2 = max(e2, float(np.max(np.abs(N.dual().evaluate(xs) - 1.0))))
            # fourth-order central stencil with a step relative to each coordinate, so it never
            # straddles the kink of |x_i|^p at zero (p close to 1 makes that kink sharp)
            h = 1e-3 * np.abs(x)
            fd = np.empty_like(x)
            for i in range(n):
                e = np.zeros_like(x)
                e[:, i] = h[:, i]
                fd[:, i] = (8 * (N.evaluate(x + e) - N.evaluate(x - e))
                            - (N.evaluate(x + 2 * e) - N.evaluate(x - 2 * e))) / (12 * h[:, i])
            e3 = max(e3, float(np.max(np.abs(fd - xs))))
            total += len(x)
        c.detail = f"{total} pairs: |x.x*-|x||/|x| {e1:.1e}, ||x*||_*-1 {e2:.1e}, grad vs FD {e3:.1e}"
        assert total == 10_000
        assert e1 < 1e-10 and e2 < 1e-10 and e3 < 1e-6


def test_criterion_05_holder():
    with Criterion(5, "generalized Holder inequality") as c:
        rng = np.random.default_rng(7)
        worst, worst_ext = np.inf, 0.0
        j = np.arange(1, 4)

        def field(n):
            cf, ph = rng.normal(size=(n, 3)), rng.uniform(0, 2 * np.pi, (n, 3))
            return lambda t: np.stack([(cf[i] * np.cos(t[:, :1] * j + ph[i])).sum(1) for i in range(n)], -1)

        for k in range(1000):
            n = int(rng.integers(1, 4))
            alpha = float(rng.uniform(1.1, 6.0))
            N = Lp(float(rng.uniform(1.1, 8.0))) if k % 2 else WeightedLp(float(rng.uniform(1.1, 8.0)),
                                                                         tuple(rng.uniform(0.3, 3.0, n)))
            a, b = rng.uniform(0.5, 3.0, 2)
            w = lambda t, a=a, b=b: t[:, 0] ** (a - 1) * (1 - t[:, 0]) ** (b - 1)  # noqa: E731
            X = field(n)
            r = holder_check(X, field(n), w, N, alpha, lo=[0.0], hi=[1.0], grid_nodes=64)
            worst = min(worst, r.ratio)
            if k < 100:
                e = holder_check(X, holder_extremal(X, N, alpha), w, N, alpha, lo=[0.0], hi=[1.0], grid_nodes=64)
                worst_ext = max(worst_ext, abs(e.ratio - 1))
        c.detail = f"min ratio {worst:.6g} over 1000 triples; extremal max |ratio-1| {worst_ext:.1e}"
        assert worst >= 1 - 1e-9
        assert worst_ext < 1e-6


def test_criterion_06_lutwak_chain_coherence():
    with Criterion(6, "Lutwak / moment-entropy / Stam coherence") as c:
        rng = np.random.default_rng(6)
        worst, gap = np.inf, 0.0
        for _ in range(100):
            alpha = float(rng.choice([1.5, 2.0, 3.0]))
            q = admissible_q(rng, alpha)
            reps = lutwak_chain_reports(smooth_density(rng, alpha), q, alpha)
            worst = min(worst, *(r.ratio for r in reps))
            gap = max(gap, abs(reps[0].ratio - reps[1].ratio * reps[2].ratio))
        sat = 0.0
        for q, alpha in ((0.7, 2.0), (1.0, 1.5), (1.3, 3.0), (2.0, 2.0)):
            for r in lutwak_chain_reports(as_density(QGaussianParams(q, alpha, 1.0, 1)), q, alpha):
                sat = max(sat, abs(r.ratio - 1))
        c.detail = f"min ratio {worst:.6g}, identity gap {gap:.1e}, max |ratio-1| at G {sat:.1e}"
        assert worst >= 1 - 1e-6 and gap < 1e-6 and sat < 1e-4


def test_criterion_07_extremal_search():
    with Criterion(7, "extremal search recovers the q-Gaussian") as c:
        t0 = time.perf_counter()
        r1 = extremal_search(1.0, 2.0)
        t1 = time.perf_counter() - t0
        t0 = time.perf_counter()
        r9 = extremal_search(0.9, 2.0)
        t9 = time.perf_counter() - t0
        c.detail = (f"q=1: L1 {r1.l1_distance:.1e}, |F-F_G| {abs(r1.objective - r1.g_objective):.1e}, {t1:.1f} s; "
                    f"q=0.9: L1 {r9.l1_distance:.1e}, {t9:.1f} s")
        assert r1.l1_distance < 1e-3 and abs(r1.objective - r1.g_objective) < 1e-6
        assert r9.l1_distance < 1e-2
        assert t1 < 120 and t9 < 120


def test_criterion_08_mc_harness():
    import warnings

    with Criterion(8, "Monte Carlo harness for the parametric bound") as c:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            eff = run_scenario(Scenario(budget=100_000))
            shr = run_scenario(Scenario(estimator="shrink:0.9", theta=(1.0,), budget=100_000))
            zs = [run_scenario(s).diagnostics["z"] for s in SUITE]
        d = eff.diagnostics
        assert abs(eff.report.lhs - eff.report.rhs) <= 3 * d["sigma"]
        assert shr.report.rhs == pytest.approx(0.9, abs=1e-6)  # |n + div B| = c
        assert shr.diagnostics["z"] >= Z_THRESHOLD
        assert len(zs) == 20 and min(zs) >= Z_THRESHOLD
        c.detail = (f"efficient z={d['z']:.2f}; shrink ratio {shr.report.ratio:.4f} z={shr.diagnostics['z']:.2f}; "
                    f"suite min z {min(zs):.2f}")


def test_criterion_09_uncertainty():
    with Criterion(9, "uncertainty relations: slack at alpha=1.5, saturation at alpha=2") as c:
        psi = gauss_psi(1.0)
        g1, g2 = check_uncertainty_general(psi, 1.5, 1.0)
        e1, e2, _ = check_uncertainty_euclidean(psi, 1.0)
        a1, a2 = check_uncertainty_general(psi, 2.0, 1.0)
        c.detail = (f"alpha=1.5 ratios {g1.ratio:.6f}, {g2.ratio:.6f}; alpha=2 |ratio-1| "
                    f"{max(abs(e1.ratio - 1), abs(e2.ratio - 1), abs(a1.ratio - 1), abs(a2.ratio - 1)):.1e}")
        assert g1.ratio >= 1 + 1e-3 and g2.ratio >= 1 + 1e-3
        for r in (e1, e2, a1, a2):
            assert abs(r.ratio - 1) < 1e-5


COMMANDS = [
    ["verify", "holder", "--alpha", "1.7", "--dim", "2", "--norm", "lp:3"],
    ["verify", "lutwak", "--q", "0.8", "--alpha", "3"],
    ["verify", "uncertainty-general", "--alpha", "1.5"],
    ["simulate", "--family", "gmix-location:w=0.4;0.6,mu=-1;1,sigma=0.6;0.8", "--escort-q", "0.9",
     "--budget", "100000"],
    ["minimize", "--q", "0.9", "--restarts", "2"],
]


def test_criterion_10_determinism(tmp_path):
    with Criterion(10, "byte-identical output across 1, 4, 8 threads") as c:
        grid = tmp_path / "grid.txt"
        grid.write_text("check = simulate\nbudget = 50000\ngrid.estimator = identity; shrink:0.8\n"
                        "grid.theta = 0; 1.5\n")
        cmds = COMMANDS + [["scan", str(grid)]]
        for cmd in cmds:
            outs = []
            for t in ("1", "4", "8"):
                env = dict(os.environ, QCRAMER_THREADS=t)
                r = subprocess.run([sys.executable, "-m", "qcramer.cli", *cmd, "--seed", "11"], env=env,
                                   capture_output=True, check=True)
                outs.append(r.stdout)
            assert outs[0] and outs[0] == outs[1] == outs[2], cmd
        c.detail = f"{len(cmds)} commands"
