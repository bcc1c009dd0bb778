"""Deformed exponential/logarithm, escort densities, M_q and Renyi entropy power."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .density import Density
from .quadrature import DEFAULT, QuadratureConfig, QuadratureError

__all__ = [
    "DeformationIndex",
    "exp_q",
    "ln_q",
    "escort",
    "info_generating",
    "entropy_power",
    "shannon_entropy",
    "LIMIT_SWITCH",
]

LIMIT_SWITCH = 1e-8


@dataclass(frozen=True)
class DeformationIndex:
    q: float

    @property
    def q_bar(self) -> float:
        if self.q <= 0:
            raise ValueError("q_bar = 1/q needs q > 0")
        return 1.0 / self.q

    @property
    def q_star(self) -> float:
        return 2.0 - self.q

    def admissible(self, n: int, alpha: float) -> bool:
        """q > max{(n-1)/n, n/(n+alpha)}, the range where the q-Gaussian measures are finite."""
        return self.q > max((n - 1) / n, n / (n + alpha))


def _q(q) -> float:
    return float(q.q if isinstance(q, DeformationIndex) else q)


def exp_q(x, q):
    """(1 + (1-q) x)_+^(1/(1-q)); exp(x) at q = 1."""
    q = _q(q)
    x = np.asarray(x, dtype=float)
    if abs(1.0 - q) < LIMIT_SWITCH:
        out = np.exp(x)
    else:
        # exp(log1p(.)/(1-q)) keeps full precision as q -> 1
        t = (1.0 - q) * x
        e = 1.0 / (1.0 - q)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.where(t > -1.0, np.exp(np.log1p(np.maximum(t, -1.0)) * e), 0.0 if e > 0 else np.inf)
    return out[()] if out.ndim == 0 else out


def ln_q(x, q):
    """(x^(1-q) - 1)/(1-q); ln(x) at q = 1.  Defined for x > 0."""
    q = _q(q)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("ln_q is only defined for x > 0")
    if abs(1.0 - q) < LIMIT_SWITCH:
        out = np.log(x)
    else:
        out = np.expm1((1.0 - q) * np.log(x)) / (1.0 - q)
    return out[()] if out.ndim == 0 else out


def info_generating(g: Density, q: float, cfg: QuadratureConfig = DEFAULT, with_error: bool = False):
    """M_q[g] = int g^q dx."""
    if g.radial is not None:
        val, err = g.radial.integrate(lambda r, h, dl: h**q, cfg)
    else:
        with np.errstate(divide="ignore"):
            val, err = g.widened(q).integrate(lambda x, v, dv: np.where(v > 0, v, 0.0) ** q, cfg)
    if not np.isfinite(val) or val <= 0 or val > cfg.overflow:
        raise QuadratureError(f"M_{q:g} diverges or vanishes ({val!r})")
    return (val, err) if with_error else val


def escort(g: Density, order: float, cfg: QuadratureConfig = DEFAULT) -> Density:
    """The order-``order`` escort g^order / M_order[g], normalised by quadrature."""
    m = info_generating(g, order, cfg)
    return g.power(order, 1.0 / m)


def shannon_entropy(g: Density, cfg: QuadratureConfig = DEFAULT) -> float:
    def neg_g_log_g(v):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(v > 0, -v * np.log(np.where(v > 0, v, 1.0)), 0.0)

    if g.radial is not None:
        return g.radial.integrate(lambda r, h, dl: neg_g_log_g(h), cfg)[0]
    return g.integrate(lambda x, v, dv: neg_g_log_g(v), cfg)[0]


def entropy_power(g: Density, q: float, cfg: QuadratureConfig = DEFAULT) -> float:
    """N_q[g] = M_q[g]^(1/(1-q)); exp(Shannon entropy) at q = 1."""
    if abs(q - 1.0) < LIMIT_SWITCH:
        return float(np.exp(shannon_entropy(g, cfg)))
    m = info_generating(g, q, cfg)
    return float(m ** (1.0 / (1.0 - q)))
