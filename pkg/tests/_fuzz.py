"""Random smooth 1-D densities shared by the inequality and acceptance tests."""

import numpy as np

from qcramer.density import gaussian_mixture, student


def smooth_density(rng: np.random.Generator, alpha: float):
    """A Gaussian mixture (1-3 components) or a Student-t with finite alpha-moment."""
    if rng.uniform() < 0.2:
        nu = float(rng.uniform(alpha + 1.5, 20.0))
        return student(nu, float(rng.uniform(0.5, 2.0)))
    k = int(rng.integers(1, 4))
    w = rng.dirichlet(np.ones(k)) * 0.9 + 0.1 / k
    mu = rng.uniform(-2.0, 2.0, k)
    sg = rng.uniform(0.4, 1.5, k)
    return gaussian_mixture(w, mu[:, None], sg)


def admissible_q(rng: np.random.Generator, alpha: float, n: int = 1) -> float:
    """Admissible q with beta(q-1)+1 > 0, i.e. q > 1/alpha; below that phi is infinite for these tails."""
    lo = max((n - 1) / n, n / (n + alpha), 1 / alpha) + 0.05
    return float(rng.uniform(lo, 2.5))
