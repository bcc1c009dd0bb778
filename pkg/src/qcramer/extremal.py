"""Numerical minimisation of phi_{beta,q} over radial densities at a fixed moment.

A radial profile is h(r) = exp(s(r)) on [0, R], zero beyond, with s a
clamped cubic spline (s'(0) = 0) through K knot values v_0 = 0 >= v_1 >= ...
>= v_{K-1} = -L.  The increments are free nonnegative parameters d, mapped
to v_j = -L sum_{i<j} d_i / sum d, so the total drop is fixed and the tail
cannot be cut short to make the Fisher term vanish.

Normalisation and the moment constraint are handled exactly: phi scales as
c^(beta lam) and m_alpha as c^(-alpha) under g -> c^n g(c x), so the
objective

    F[h] = phi[g] (m_alpha[g] / target)^(beta lam / alpha),  g = h / int h,

is the Fisher information of the dilate of g whose moment equals target.
F is minimised by L-BFGS-B with an analytic gradient and random restarts.
Each restart is continued through an increasing sequence of drops L: with a
small L the tail carries weight, which keeps every knot in use; going
straight to a large L tends to strand the optimiser on profiles that fall
to -L early and stay flat, wasting half the knots.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize

from .density import AnalyticDensity, RadialProfile
from .norms import Lp, NormSpec, conjugate_exponent
from .qgaussian import InadmissibleError, QGaussianParams, baseline_measures, radial_profile
from .quadrature import DEFAULT, QuadratureConfig, quad1d
from .report import InequalityReport

__all__ = ["ExtremalConfig", "ExtremalResult", "SplineProfile", "extremal_search"]


@dataclass(frozen=True)
class ExtremalConfig:
    knots: int = 16
    drops: tuple = (4.0, 8.0, 12.0, 16.0, 20.0)  # continuation in L = log h(0) - log h(R)
    radius: float = 1.0  # R; irrelevant up to dilation
    nodes_per_cell: int = 24
    restarts: int = 6
    maxiter: int = 2000
    seed: int = 0
    objective_tol: float = 1e-6


@dataclass
class SplineProfile:
    """Knot values of log h on uniform knots over [0, R]."""

    radius: float
    values: np.ndarray

    @property
    def knots(self) -> np.ndarray:
        return np.linspace(0.0, self.radius, self.values.size)

    def spline(self) -> CubicSpline:
        return CubicSpline(self.knots, self.values, bc_type=((1, 0.0), "not-a-knot"))


@dataclass
class ExtremalResult:
    density: AnalyticDensity
    profile: SplineProfile
    dilation: float  # density(x) = dilation^n g(dilation x), g = h / int h
    objective: float
    g_objective: float
    l1_distance: float
    gamma: float
    converged: bool
    report: InequalityReport
    history: list = field(default_factory=list)


def _basis(knots: np.ndarray, r: np.ndarray):
    """Matrices B, D with s(r) = B v and s'(r) = D v for the clamped spline through v."""
    K = knots.size
    B = np.empty((r.size, K))
    D = np.empty((r.size, K))
    for j in range(K):
        e = np.zeros(K)
        e[j] = 1.0
        cs = CubicSpline(knots, e, bc_type=((1, 0.0), "not-a-knot"))
        B[:, j] = cs(r)
        D[:, j] = cs(r, 1)
    return B, D


class _Objective:
    def __init__(self, q, alpha, n, norm, target, ec: ExtremalConfig, drop: float):
        self.q, self.alpha, self.n = q, alpha, n
        self.beta = conjugate_exponent(alpha)
        self.p = self.beta * (q - 1.0) + 1.0
        self.lam = n * (q - 1.0) + 1.0
        self.expo = self.beta * self.lam / alpha
        self.surface = n * norm.unit_ball_volume(n)
        self.target = target
        self.L = drop
        K = ec.knots
        self.knots = np.linspace(0.0, ec.radius, K)
        t, w = np.polynomial.legendre.leggauss(ec.nodes_per_cell)
        a, b = self.knots[:-1], self.knots[1:]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        self.r = (mid[:, None] + half[:, None] * t[None]).ravel()
        self.w = (half[:, None] * w[None]).ravel()
        self.B, self.D = _basis(self.knots, self.r)
        # v = -L P d / sum(d), P[j, i] = 1 for i < j
        self.P = np.tril(np.ones((K, K - 1)), -1)
        self.rn = self.r ** (n - 1)
        self.ra = self.r ** (alpha + n - 1)

    def values(self, d):
        return -self.L * (self.P @ d) / d.sum()

    def parts(self, v):
        s, ds = self.B @ v, self.D @ v
        e = np.exp(s)
        A = np.sum(self.w * self.rn * e)
        Ma = np.sum(self.w * self.ra * e)
        ep = np.exp(self.p * s)
        ab = np.abs(ds)
        Phi = np.sum(self.w * self.rn * ep * ab**self.beta)
        return s, ds, e, A, Ma, ep, ab, Phi

    def log_f(self, v):
        _, _, _, A, Ma, _, _, Phi = self.parts(v)
        c = self.surface
        return (np.log(c) - self.p * np.log(c * A) + np.log(Phi)
                + self.expo * (np.log(Ma) - np.log(A) - np.log(self.target)))

    def __call__(self, d):
        d = np.asarray(d, float)
        v = self.values(d)
        s, ds, e, A, Ma, ep, ab, Phi = self.parts(v)
        c = self.surface
        val = (np.log(c) - self.p * np.log(c * A) + np.log(Phi)
               + self.expo * (np.log(Ma) - np.log(A) - np.log(self.target)))
        gA = self.w * self.rn * e / A
        gM = self.w * self.ra * e / Ma
        gPs = self.p * self.w * self.rn * ep * ab**self.beta / Phi
        gPd = self.beta * self.w * self.rn * ep * ab ** (self.beta - 1.0) * np.sign(ds) / Phi
        g_s = -(self.p + self.expo) * gA + gPs + self.expo * gM
        g_v = self.B.T @ g_s + self.D.T @ gPd
        S = d.sum()
        J = -self.L * (self.P / S - np.outer(self.P @ d, np.ones_like(d)) / S**2)
        return float(val), J.T @ g_v


def _spline_density(prof: SplineProfile, obj: _Objective, norm: NormSpec, n: int):
    """The dilate of h / int h whose alpha-moment equals the target."""
    cs = prof.spline()
    R = prof.radius
    _, _, _, A, Ma, _, _, _ = obj.parts(prof.values)
    mass = obj.surface * A
    c = (Ma / A / obj.target) ** (1.0 / obj.alpha)
    Rc = R / c

    def h(r):
        r = np.asarray(r, float)
        u = np.clip(c * r, 0.0, R)
        return np.where(c * r <= R, c**n * np.exp(cs(u)) / mass, 0.0)

    def dlogh(r):
        r = np.asarray(r, float)
        u = np.clip(c * r, 0.0, R)
        return np.where(c * r <= R, c * cs(u, 1), 0.0)

    rp = RadialProfile(h=h, dlogh=dlogh, norm=norm, dim=n, r_max=Rc, scale=Rc / 4)

    def pdf(x):
        return h(norm.evaluate(x))

    def grad(x):
        r = norm.evaluate(x)
        out = np.zeros_like(x)
        nz = (r > 0) & (r < Rc)
        if np.any(nz):
            out[nz] = (h(r[nz]) * dlogh(r[nz]))[:, None] * norm.gradient(x[nz])
        return out

    d = AnalyticDensity(pdf, n, grad=grad, radial=rp, name="extremal", check=False,
                        points=[0.0] if n == 1 else None, compact=True)
    return d, c


def _l1_radial(g: RadialProfile, G: RadialProfile, cfg: QuadratureConfig) -> float:
    R = min(g.r_max, G.r_max)
    n = g.dim
    inside = quad1d(lambda r: np.abs(g.h(r) - G.h(r)) * r ** (n - 1), 0.0, R, cfg)[0]
    out_g = quad1d(lambda r: g.h(r) * r ** (n - 1), R, g.r_max, cfg)[0] if g.r_max > R else 0.0
    if G.r_max > R:
        mass_in = quad1d(lambda r: G.h(r) * r ** (n - 1), 0.0, R, cfg)[0]
        out_G = 1.0 / G.surface - mass_in
    else:
        out_G = 0.0
    return G.surface * (inside + out_g + max(out_G, 0.0))


def extremal_search(q: float, alpha: float, n: int = 1, norm: NormSpec = Lp(2), target_moment: float = 1.0,
                    ec: ExtremalConfig = ExtremalConfig(), cfg: QuadratureConfig = DEFAULT) -> ExtremalResult:
    """Minimise phi_{beta,q} over radial spline densities with m_alpha = target_moment.

    Returns the best density, its objective, the objective of the matched
    q-Gaussian G_gamma (gamma = m_alpha[G_1] / target) and the L1 distance
    between the two.  ``converged`` is False when no restart reported success;
    the best point found is still returned.
    """
    if alpha <= 1:
        raise ValueError("alpha must exceed 1")
    if not q > max((n - 1) / n, n / (n + alpha)):
        raise InadmissibleError(f"(q={q}, alpha={alpha}, n={n}) is not admissible")
    if target_moment <= 0:
        raise ValueError("target moment must be positive")
    stages = [_Objective(q, alpha, n, norm, target_moment, ec, L) for L in ec.drops]
    obj = stages[-1]
    rng = np.random.default_rng(ec.seed)
    K = ec.knots
    bounds = [(1e-9, None)] * (K - 1)
    best, history, converged = None, [], False
    for k in range(ec.restarts):
        d = rng.uniform(0.5, 1.5, K - 1) if k else np.ones(K - 1)
        for stage in stages:
            res = minimize(stage, d, jac=True, method="L-BFGS-B", bounds=bounds,
                           options={"maxiter": ec.maxiter, "ftol": 1e-15, "gtol": 1e-11, "maxcor": 30})
            d = res.x
        history.append(float(np.exp(res.fun)))
        converged = converged or bool(res.success)
        if best is None or res.fun < best.fun:
            best = res
    prof = SplineProfile(ec.radius, obj.values(best.x))
    dens, c = _spline_density(prof, obj, norm, n)
    objective = float(np.exp(obj.log_f(prof.values)))
    p1 = QGaussianParams(q, alpha, 1.0, n, norm)
    gamma = baseline_measures(p1, cfg=cfg)["m_alpha"] / target_moment
    pg = p1.with_gamma(gamma)
    g_obj = baseline_measures(pg, cfg=cfg)["phi"]
    l1 = _l1_radial(dens.radial, radial_profile(pg, cfg), cfg)
    report = InequalityReport("extremal", objective, g_obj, ec.objective_tol,
                              {"q": q, "alpha": alpha, "n": n, "norm": norm.spec(), "target": target_moment,
                               "gamma": gamma, "l1_distance": l1, "knots": K, "restarts": ec.restarts,
                               "converged": converged},
                              saturation_tol=ec.objective_tol)
    return ExtremalResult(dens, prof, c, objective, g_obj, l1, gamma, converged, report, history)
