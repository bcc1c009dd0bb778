"""Information functionals: moments, (beta, q)-Fisher information, and the
two-density parametric Fisher information with bias divergence.

Densities carrying a radial profile in the same norm reduce to one radial
integral; everything else goes through ``Density.integrate``.  For a norm N
the Fisher terms use the dual norm of the gradient.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .deformed import info_generating
from .density import AnalyticDensity, Density, GridDensity
from .norms import Lp, NormSpec
from .quadrature import DEFAULT, QuadratureConfig, QuadratureError, chunked_draws

__all__ = [
    "TINY",
    "SupportError",
    "NoisyDivergenceWarning",
    "moment",
    "ess_sup_norm",
    "phi_fisher",
    "i_fisher_q",
    "i_fisher_q_dual",
    "ParametricFamily",
    "location_family",
    "escort_family",
    "parametric_fisher",
    "expectation_theta",
    "DivergenceEstimate",
    "bias_divergence",
]

TINY = 1e-300


class SupportError(ValueError):
    """grad_theta f is nonzero where the weight density g vanishes."""

    def __init__(self, msg: str, witness=None):
        super().__init__(msg)
        self.witness = witness


class NoisyDivergenceWarning(UserWarning):
    pass


def _radial_in(g: Density, norm: NormSpec) -> bool:
    return g.radial is not None and g.radial.norm == norm


def moment(g: Density, alpha: float, norm: NormSpec = Lp(2), cfg: QuadratureConfig = DEFAULT,
           with_error: bool = False):
    """m_alpha[g] = int ||x||^alpha g(x) dx."""
    if alpha <= 0:
        raise ValueError("moment order must be positive")
    if np.isinf(alpha):
        v = ess_sup_norm(g, norm)
        return (v, 0.0) if with_error else v
    if _radial_in(g, norm):
        val, err = g.radial.integrate(lambda r, h, dl: r**alpha * h, cfg)
    else:
        val, err = g.integrate(lambda x, v, dv: norm.evaluate(x) ** alpha * v, cfg)
    if not np.isfinite(val) or val > cfg.overflow:
        raise QuadratureError(f"moment of order {alpha:g} diverges")
    return (val, err) if with_error else val


def ess_sup_norm(g: Density, norm: NormSpec = Lp(2)) -> float:
    """sup ||x|| over the support; finite only for compactly supported densities."""
    if isinstance(g, GridDensity):
        pts = g.points[g.values.ravel() > 0]
        return float(np.max(norm.evaluate(pts)))
    if not getattr(g, "compact", False):
        return np.inf
    if g.radial is not None and g.radial.norm == norm and np.isfinite(g.radial.r_max):
        return float(g.radial.r_max)
    # a convex function attains its max over a box at a corner
    corners = np.stack(np.meshgrid(*zip(g.lo, g.hi), indexing="ij"), -1).reshape(-1, g.dim)
    return float(np.max(norm.evaluate(corners)))


def _fisher_integrand(p: float, beta: float, dual: NormSpec, where: list):
    """g^(p - beta) ||grad g||_*^beta, i.e. g^p ||grad ln g||_*^beta without the 0/0."""
    e = p - beta

    def fn(x, v, dv):
        gn = dual.evaluate(dv)
        small = v < TINY
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.where(small, 0.0, np.where(small, 1.0, v) ** e * gn**beta)
        if e <= 0:
            bad = small & (gn > TINY)
            if np.any(bad):
                where.append(x[np.argmax(bad)])
        return out

    return fn


def phi_fisher(g: Density, beta: float, q: float = 1.0, norm: NormSpec = Lp(2), cfg: QuadratureConfig = DEFAULT,
               with_error: bool = False):
    """phi_{beta,q}[g] = int g^(beta(q-1)+1) ||grad ln g||_*^beta dx.

    Raises QuadratureError (with the offending point) when the integrand blows up
    at a zero of g.
    """
    p = beta * (q - 1.0) + 1.0
    if _radial_in(g, norm):
        # for g = h(||x||), ||grad ln g||_* = |h'/h|
        val, err = g.radial.integrate(lambda r, h, dl: h**p * np.abs(dl) ** beta, cfg)
    else:
        flagged: list = []
        val, err = g.widened(p).integrate(_fisher_integrand(p, beta, norm.dual(), flagged), cfg, need_grad=True)
        if flagged:
            raise QuadratureError(f"Fisher integrand diverges near a zero of g at x = {flagged[0].tolist()}")
    if not np.isfinite(val) or val > cfg.overflow:
        raise QuadratureError("Fisher information diverges")
    return (val, err) if with_error else val


def i_fisher_q(g: Density, beta: float, q: float = 1.0, norm: NormSpec = Lp(2), cfg: QuadratureConfig = DEFAULT,
               with_error: bool = False):
    """I_{beta,q}[g] = (q / M_q[g])^beta phi_{beta,q}[g]."""
    phi, ephi = phi_fisher(g, beta, q, norm, cfg, with_error=True)
    mq, emq = info_generating(g, q, cfg, with_error=True)
    val = (q / mq) ** beta * phi
    rel = (ephi / phi if phi else 0.0) + beta * emq / mq
    return (val, abs(val) * rel) if with_error else val


def i_fisher_q_dual(f: Density, beta: float, q: float = 1.0, norm: NormSpec = Lp(2),
                    cfg: QuadratureConfig = DEFAULT) -> float:
    """The same information written through f = g^q / M_q[g]:

    M_qbar[f]^beta E_qbar[f^(beta(1-qbar)) ||grad ln f||_*^beta], qbar = 1/q,
    where E_qbar is the expectation under f^qbar / M_qbar[f].
    """
    qb = 1.0 / q
    mqb = info_generating(f, qb, cfg)
    # E_qbar[...] = (1/M_qbar) int f^(qbar + beta(1-qbar)) ||grad ln f||^beta
    p = qb + beta * (1.0 - qb)
    if _radial_in(f, norm):
        val, _ = f.radial.integrate(lambda r, h, dl: h**p * np.abs(dl) ** beta, cfg)
    else:
        flagged: list = []
        val, _ = f.widened(p).integrate(_fisher_integrand(p, beta, norm.dual(), flagged), cfg, need_grad=True)
        if flagged:
            raise QuadratureError(f"Fisher integrand diverges near x = {flagged[0].tolist()}")
    return mqb ** (beta - 1.0) * val


# ------------------------------------------------------------- parametric


@dataclass
class ParametricFamily:
    """x -> f(x; theta) with theta in R^k.

    ``pdf(x, theta)`` maps ``(m, xdim)`` rows to ``(m,)``; ``grad_theta(x, theta)``
    to ``(m, k)`` (central differences if omitted).  ``box(theta)`` returns the
    integration box in x.  ``sampler(rng, size, theta)`` draws from f(.; theta).
    """

    pdf: Callable
    xdim: int
    theta_dim: int
    box: Callable
    grad_theta: Callable | None = None
    points: Callable | None = None
    sampler: Callable | None = None
    name: str = "family"
    compact: bool = False
    base: Density | None = None  # location families: f(x; theta) = base(x - theta)

    def gradient(self, x, theta) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, float))
        theta = np.atleast_1d(np.asarray(theta, float))
        if self.grad_theta is not None:
            return np.asarray(self.grad_theta(x, theta), float).reshape(len(x), self.theta_dim)
        return self.fd_gradient(x, theta)

    def fd_gradient(self, x, theta, step: float = 1e-6) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, float))
        theta = np.atleast_1d(np.asarray(theta, float))
        out = np.empty((len(x), self.theta_dim))
        h = step * (1.0 + np.abs(theta))
        for i in range(self.theta_dim):
            e = np.zeros(self.theta_dim)
            e[i] = h[i]
            out[:, i] = (self.pdf(x, theta + e) - self.pdf(x, theta - e)) / (2 * h[i])
        return out

    def at(self, theta, cfg: QuadratureConfig = DEFAULT, check: bool = True) -> AnalyticDensity:
        theta = np.atleast_1d(np.asarray(theta, float))
        lo, hi = self.box(theta)
        pts = self.points(theta) if self.points is not None else None
        return AnalyticDensity(lambda x: self.pdf(x, theta), self.xdim, lo=lo, hi=hi, points=pts,
                               name=f"{self.name}@{theta.tolist()}", check=check, cfg=cfg, compact=self.compact)

    def gradient_error(self, theta, x) -> float:
        """Largest relative gap between the analytic and finite-difference theta-gradients."""
        a = self.gradient(x, theta)
        b = self.fd_gradient(x, theta)
        scale = max(1e-12, float(np.max(np.abs(b))))
        return float(np.max(np.abs(a - b)) / scale)


def location_family(base: AnalyticDensity, name: str | None = None) -> ParametricFamily:
    """f(x; theta) = base(x - theta)."""
    n = base.dim

    def pdf(x, theta):
        return base.pdf(x - theta)

    def grad_theta(x, theta):
        return -base.grad(x - theta)

    def box(theta):
        return base.lo + theta, base.hi + theta

    pts = None
    if base.points is not None:
        bp = np.asarray(base.points, float)
        pts = lambda theta: bp + theta[0]  # noqa: E731
    sampler = None
    if getattr(base, "sampler", None) is not None:
        sampler = lambda rng, size, theta: base.sampler(rng, size) + theta  # noqa: E731
    return ParametricFamily(pdf, n, n, box, grad_theta=grad_theta, points=pts, sampler=sampler,
                            name=name or f"loc[{base.name}]", compact=getattr(base, "compact", False), base=base)


def escort_family(fam: ParametricFamily, order: float, cfg: QuadratureConfig = DEFAULT) -> ParametricFamily:
    """theta -> fam(.; theta)^order / M_order[fam; theta] with its theta-gradient."""
    cache: dict = {}

    def norms(theta):
        key = tuple(np.atleast_1d(theta).tolist())
        if key not in cache:
            d = fam.at(theta, cfg, check=False)
            m = d.integrate(lambda x, v, dv: v**order, cfg)[0]
            dm = np.array([
                d.integrate(lambda x, v, dv, i=i: _pow(v, order - 1.0) * order * fam.gradient(x, theta)[:, i], cfg)[0]
                for i in range(fam.theta_dim)
            ])
            cache[key] = (m, dm)
        return cache[key]

    def pdf(x, theta):
        m, _ = norms(theta)
        return fam.pdf(x, theta) ** order / m

    def grad_theta(x, theta):
        m, dm = norms(theta)
        v = fam.pdf(x, theta)
        gv = fam.gradient(x, theta)
        return (order * _pow(v, order - 1.0)[:, None] * gv) / m - (v**order / m**2)[:, None] * dm[None, :]

    base = None
    if fam.base is not None:
        m0 = info_generating(fam.base, order, cfg)
        base = fam.base.power(order, 1.0 / m0)
    return ParametricFamily(pdf, fam.xdim, fam.theta_dim, fam.box, grad_theta=grad_theta, points=fam.points,
                            name=f"escort{order:g}[{fam.name}]", compact=fam.compact, base=base)


def _pow(v, s):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(v > 0, np.where(v > 0, v, 1.0) ** s, 0.0)


def _support_witness(f: ParametricFamily, g: ParametricFamily, theta, dual: NormSpec):
    lo_f, hi_f = f.box(theta)
    per = 257 if f.xdim == 1 else (33 if f.xdim == 2 else 13)
    axes = [np.linspace(a, b, per) for a, b in zip(lo_f, hi_f)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, f.xdim)
    gv = g.pdf(pts, theta)
    gf = dual.evaluate(f.gradient(pts, theta))
    bad = (gv <= 0) & (gf > 1e-12)
    if np.any(bad):
        return pts[np.argmax(bad)]
    return None


def parametric_fisher(fam: ParametricFamily, g: ParametricFamily, theta, beta: float, norm: NormSpec = Lp(2),
                      cfg: QuadratureConfig = DEFAULT, with_error: bool = False):
    """I_beta[f|g; theta] = int ||grad_theta f / g||_*^beta g dx (norm acts on theta)."""
    theta = np.atleast_1d(np.asarray(theta, float))
    dual = norm.dual()
    w = _support_witness(fam, g, theta, dual)
    if w is not None:
        raise SupportError(f"grad_theta f != 0 where g = 0, e.g. x = {w.tolist()}", witness=w)
    gd = g.at(theta, cfg, check=False)

    def fn(x, v, dv):
        gf = fam.gradient(x, theta)
        gn = dual.evaluate(gf)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.where(v > TINY, gn**beta * _pow(v, 1.0 - beta), 0.0)
        return out

    val, err = gd.integrate(fn, cfg)
    if not np.isfinite(val):
        raise QuadratureError("parametric Fisher information diverges")
    return (val, err) if with_error else val


def expectation_theta(fam: ParametricFamily, fn, theta, cfg: QuadratureConfig = DEFAULT):
    """int fn(x) f(x; theta) dx by quadrature over the family's box; fn returns (m,) or (m, k)."""
    d = fam.at(theta, cfg, check=False)
    probe = np.asarray(fn(np.atleast_2d(0.5 * (d.lo + d.hi))))
    if probe.ndim == 1:
        return d.integrate(lambda x, v, dv: fn(x) * v, cfg)
    k = probe.shape[1]
    vals = [d.integrate(lambda x, v, dv, i=i: np.asarray(fn(x))[:, i] * v, cfg) for i in range(k)]
    return np.array([a for a, _ in vals]), np.array([b for _, b in vals])


# ---------------------------------------------------------------- bias


@dataclass
class DivergenceEstimate:
    value: float
    fd_error: float
    mc_error: float = 0.0
    noisy: bool = False


def _estimator_rows(est, x, k):
    out = np.asarray(est(x), float)
    return out.reshape(len(x), k)


def bias_divergence(fam: ParametricFamily, estimator, theta, cfg: QuadratureConfig = DEFAULT, method: str = "quad",
                    budget: int | None = None, seed: int | None = None, stream: int = 0, with_error: bool = False):
    """div_theta B_f(theta), B_f(theta) = E_f[theta_hat] - theta.

    Central differences with h = 1e-4 (1 + ||theta||) and one step-halving; the
    Richardson value (4 D(h/2) - D(h)) / 3 is returned, |D(h/2) - D(h)| is the
    error.  ``method='mc'`` evaluates E_f by sampling with common random numbers
    across theta-perturbations (the same seed and stream at every theta).
    """
    theta = np.atleast_1d(np.asarray(theta, float))
    k = fam.theta_dim
    h0 = 1e-4 * (1.0 + float(np.linalg.norm(theta)))
    if method == "mc":
        if fam.sampler is None:
            raise ValueError("Monte Carlo bias needs a family sampler")
        budget = budget or cfg.mc_samples
        seed = cfg.seed if seed is None else seed

        def draws(t):
            return chunked_draws(lambda rng, m: fam.sampler(rng, m, t), budget, seed, stream)

        def diff_quot(h):
            total = np.zeros(budget)
            for i in range(k):
                e = np.zeros(k)
                e[i] = h
                up = _estimator_rows(estimator, draws(theta + e), k)[:, i]
                dn = _estimator_rows(estimator, draws(theta - e), k)[:, i]
                total += (up - dn) / (2 * h) - 1.0
            return float(np.mean(total)), float(np.std(total, ddof=1) / np.sqrt(budget))

        d1, s1 = diff_quot(h0)
        d2, s2 = diff_quot(h0 / 2)
        mc_err = (4 * s2 + s1) / 3
    elif method == "quad":

        def diff_quot(h):
            total = 0.0
            for i in range(k):
                e = np.zeros(k)
                e[i] = h
                up = expectation_theta(fam, lambda x: _estimator_rows(estimator, x, k)[:, i], theta + e, cfg)[0]
                dn = expectation_theta(fam, lambda x: _estimator_rows(estimator, x, k)[:, i], theta - e, cfg)[0]
                total += (up - dn) / (2 * h) - 1.0
            return total

        d1, d2 = diff_quot(h0), diff_quot(h0 / 2)
        mc_err = 0.0
    else:
        raise ValueError(f"unknown method {method!r}")
    value = (4 * d2 - d1) / 3
    fd_err = abs(d2 - d1)
    noisy = mc_err > max(abs(value), fd_err, 1e-15)
    if noisy:
        warnings.warn(f"bias divergence dominated by Monte Carlo noise (se={mc_err:.3g})", NoisyDivergenceWarning,
                      stacklevel=2)
    est = DivergenceEstimate(float(value), float(fd_err), float(mc_err), bool(noisy))
    return est if with_error else est.value
