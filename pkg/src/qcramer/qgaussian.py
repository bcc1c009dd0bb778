"""Generalized q-Gaussians G(x) = exp_{2-q}(-gamma ||x||^alpha) / Z on R^n.

All normalising constants and baseline information measures are computed
by radial quadrature; for an arbitrary norm dx = n omega_n r^(n-1) dr with
omega_n the volume of the norm's unit ball.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np
from scipy.interpolate import PchipInterpolator

from .deformed import LIMIT_SWITCH, exp_q
from .density import AnalyticDensity, RadialProfile
from .norms import LinearMap, Lp, NormSpec, WeightedLp, conjugate_exponent, parse_norm
from .quadrature import DEFAULT, QuadratureConfig, QuadratureError, chunked_draws, quad1d

__all__ = [
    "QGaussianParams",
    "InadmissibleError",
    "density",
    "partition_function",
    "radial_profile",
    "as_density",
    "baseline_measures",
    "gamma_for_moment",
    "RadialSampler",
    "sample",
    "sample_directions",
    "parse_qgauss",
]


class InadmissibleError(ValueError):
    """Parameters for which the partition function or a measure diverges."""


@dataclass(frozen=True)
class QGaussianParams:
    q: float
    alpha: float = 2.0
    gamma: float = 1.0
    n: int = 1
    norm: NormSpec = Lp(2)

    def __post_init__(self):
        if self.alpha <= 0 or self.gamma <= 0:
            raise InadmissibleError("alpha and gamma must be positive")
        if self.n < 1:
            raise InadmissibleError("dimension must be >= 1")
        if not self.q > (self.n - self.alpha) / self.n:
            raise InadmissibleError(f"q = {self.q} <= (n - alpha)/n: partition function diverges")
        if self.norm.dim is not None and self.norm.dim != self.n:
            raise InadmissibleError("norm dimension does not match n")

    @property
    def q_star(self) -> float:
        return 2.0 - self.q

    @property
    def r_max(self) -> float:
        if self.q > 1 + LIMIT_SWITCH:
            return ((self.q - 1.0) * self.gamma) ** (-1.0 / self.alpha)
        return np.inf

    @property
    def scale(self) -> float:
        return self.gamma ** (-1.0 / self.alpha)

    @property
    def lam(self) -> float:
        return self.n * (self.q - 1.0) + 1.0

    def with_gamma(self, gamma: float) -> "QGaussianParams":
        return QGaussianParams(self.q, self.alpha, gamma, self.n, self.norm)

    def spec(self) -> str:
        return f"qgauss:q={self.q!r},alpha={self.alpha!r},gamma={self.gamma!r},n={self.n},norm={self.norm.spec()}"

    def key(self):
        return (self.q, self.alpha, self.gamma, self.n, self.norm.spec())


def _kernel(p: QGaussianParams, r):
    return exp_q(-p.gamma * np.asarray(r, float) ** p.alpha, p.q_star)


def _dlog_kernel(p: QGaussianParams, r):
    r = np.asarray(r, float)
    u = p.gamma * r**p.alpha
    base = 1.0 - (p.q - 1.0) * u
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(base > 0, -p.gamma * p.alpha * r ** (p.alpha - 1.0) / base, -np.inf)


def _raw_profile(p: QGaussianParams, c: float = 1.0) -> RadialProfile:
    return RadialProfile(
        h=lambda r: c * _kernel(p, r),
        dlogh=lambda r: _dlog_kernel(p, r),
        norm=p.norm,
        dim=p.n,
        r_max=p.r_max,
        scale=p.scale,
    )


def partition_function(p: QGaussianParams, cfg: QuadratureConfig = DEFAULT, with_error: bool = False):
    return _partition_cached(p.key(), p, cfg) if not with_error else _partition(p, cfg)


def _partition(p, cfg):
    z, err = _raw_profile(p).integrate(lambda r, h, dl: h, cfg)
    if not np.isfinite(z) or z <= 0:
        raise InadmissibleError(f"partition function diverges for {p}")
    return z, err


_Z_CACHE: dict = {}


def _partition_cached(key, p, cfg):
    k = (key, cfg)
    if k not in _Z_CACHE:
        _Z_CACHE[k] = _partition(p, cfg)[0]
    return _Z_CACHE[k]


def radial_profile(p: QGaussianParams, cfg: QuadratureConfig = DEFAULT) -> RadialProfile:
    return _raw_profile(p, 1.0 / partition_function(p, cfg))


def density(p: QGaussianParams, x, cfg: QuadratureConfig = DEFAULT):
    """G(x) for a single point ``(n,)`` or rows ``(m, n)``."""
    x = np.asarray(x, float)
    single = x.ndim == 1
    rows = np.atleast_2d(x)
    if rows.shape[-1] != p.n:
        raise ValueError("point dimension does not match n")
    out = _kernel(p, p.norm.evaluate(rows)) / partition_function(p, cfg)
    return float(out[0]) if single else out


def as_density(p: QGaussianParams, cfg: QuadratureConfig = DEFAULT, check: bool = False) -> AnalyticDensity:
    prof = radial_profile(p, cfg)
    norm = p.norm

    def pdf(x):
        return prof.h(norm.evaluate(x))

    def grad(x):
        r = norm.evaluate(x)
        out = np.zeros_like(x)
        nz = r > 0
        if np.any(nz):
            gn = norm.gradient(x[nz])
            with np.errstate(invalid="ignore"):
                fac = prof.h(r[nz]) * prof.dlogh(r[nz])
            out[nz] = np.where(np.isfinite(fac), fac, 0.0)[:, None] * gn
        return out

    d = AnalyticDensity(pdf, p.n, grad=grad, radial=prof, name=p.spec(), check=check, cfg=cfg,
                        points=[0.0] if p.n == 1 else None)
    d.params = p
    cache = []

    def sampler(rng, size):
        if not cache:
            cache.append(RadialSampler(p, cfg))
        return _draw(p, cache[0], rng, size)

    d.sampler = sampler
    return d


def gamma_for_moment(q: float, alpha: float, n: int, norm: NormSpec, target: float,
                     cfg: QuadratureConfig = DEFAULT) -> float:
    """The gamma for which m_alpha[G_gamma] equals ``target`` (m_alpha scales as 1/gamma)."""
    m1 = baseline_measures(QGaussianParams(q, alpha, 1.0, n, norm), cfg=cfg)["m_alpha"]
    return m1 / target


def baseline_measures(p: QGaussianParams, beta: float | None = None, cfg: QuadratureConfig = DEFAULT) -> dict:
    """m_alpha, M_q, N_q, phi_{beta,q}, I_{beta,q} of G by radial quadrature.

    Each entry has a companion ``<name>_err`` holding a relative error estimate.
    """
    if beta is None:
        beta = conjugate_exponent(p.alpha) if p.alpha > 1 else np.inf
    prof = radial_profile(p, cfg)
    q, a = p.q, p.alpha
    out = {}

    def put(name, val_err):
        v, e = val_err
        if not np.isfinite(v):
            raise InadmissibleError(f"{name} diverges for {p}")
        out[name] = v
        out[name + "_err"] = abs(e / v) if v else abs(e)

    if not q > p.n / (p.n + a):
        raise InadmissibleError(f"q = {q} <= n/(n+alpha): moment and M_q diverge")
    put("m_alpha", prof.integrate(lambda r, h, dl: r**a * h, cfg))
    put("M_q", prof.integrate(lambda r, h, dl: h**q, cfg))
    if abs(q - 1.0) < LIMIT_SWITCH:
        def ent(r, h, dl):
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(h > 0, -h * np.log(np.where(h > 0, h, 1.0)), 0.0)

        hval, herr = prof.integrate(ent, cfg)
        out["N_q"] = float(np.exp(hval))
        out["N_q_err"] = abs(herr)
    else:
        out["N_q"] = out["M_q"] ** (1.0 / (1.0 - q))
        out["N_q_err"] = out["M_q_err"] / abs(1.0 - q)
    if np.isfinite(beta):
        pw = beta * (q - 1.0) + 1.0
        put("phi", prof.integrate(lambda r, h, dl: h**pw * np.abs(dl) ** beta, cfg))
        out["I"] = (q / out["M_q"]) ** beta * out["phi"]
        out["I_err"] = out["phi_err"] + beta * out["M_q_err"]
    out["beta"] = beta
    return out


# ------------------------------------------------------------------ sampling


def sample_directions(norm: NormSpec, n: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Points on the unit sphere of ``norm`` distributed by the cone measure."""
    if isinstance(norm, Lp):
        p = norm.p
        if np.isinf(p):
            y = rng.uniform(-1.0, 1.0, size=(size, n))
        else:
            mag = rng.gamma(1.0 / p, 1.0, size=(size, n)) ** (1.0 / p)
            y = mag * rng.choice([-1.0, 1.0], size=(size, n))
        return y / norm.evaluate(y)[:, None]
    if isinstance(norm, WeightedLp):
        u = sample_directions(Lp(norm.p), n, rng, size)
        return u / norm.scales
    if isinstance(norm, LinearMap):
        u = sample_directions(norm.inner, n, rng, size)
        return np.linalg.solve(norm.A, u.T).T
    raise NotImplementedError(f"sampling not supported for {norm}")


class RadialSampler:
    """Inverse-CDF sampler for the radius, density proportional to r^(n-1) h(r).

    For unbounded support the table stops where the radial density drops
    below ``1e-16`` of its maximum; ``tail_mass`` bounds what is cut off.
    """

    TABLE = 4096

    def __init__(self, p: QGaussianParams, cfg: QuadratureConfig = DEFAULT):
        self.p = p
        n = p.n
        prof = _raw_profile(p)

        def rad(r):
            return r ** (n - 1) * prof.h(r)

        if np.isfinite(p.r_max):
            u = np.linspace(0.0, 1.0, self.TABLE + 1)
            grid = p.r_max * (1.0 - (1.0 - u) ** 2)
            self.tail_mass = 0.0
        else:
            s = p.scale
            probe = s * np.logspace(-3, 17, 4000)
            vals = rad(probe)
            peak = vals.max()
            above = np.nonzero(vals >= 1e-16 * peak)[0]
            R = probe[above[-1]]
            lin = np.linspace(0.0, min(4 * s, R), self.TABLE // 2 + 1)
            geo = np.geomspace(lin[-1], max(R, lin[-1] * 1.0001), self.TABLE // 2 + 1)[1:]
            grid = np.concatenate([lin, geo])
            total = quad1d(rad, 0.0, np.inf, cfg)[0]
            tail = quad1d(rad, R, np.inf, cfg)[0]
            self.tail_mass = tail / total
        t, w = np.polynomial.legendre.leggauss(8)
        a, b = grid[:-1], grid[1:]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        nodes = mid[:, None] + half[:, None] * t[None]
        cell = (half[:, None] * w[None] * rad(nodes)).sum(1)
        cdf = np.concatenate([[0.0], np.cumsum(cell)])
        cdf /= cdf[-1]
        keep = np.concatenate([[True], np.diff(cdf) > 0])
        self._inv = PchipInterpolator(cdf[keep], grid[keep])
        self._cdf = PchipInterpolator(grid[keep], cdf[keep])
        self.r_hi = grid[-1]

    def radius(self, u: np.ndarray) -> np.ndarray:
        return self._inv(u)

    def cdf(self, r: np.ndarray) -> np.ndarray:
        return self._cdf(np.clip(r, 0.0, self.r_hi))


def _draw(p: QGaussianParams, rs: RadialSampler, rng: np.random.Generator, size: int) -> np.ndarray:
    r = rs.radius(rng.uniform(size=size))
    u = sample_directions(p.norm, p.n, rng, size)
    return r[:, None] * u


def sample(p: QGaussianParams, count: int, seed: int, cfg: QuadratureConfig = DEFAULT) -> np.ndarray:
    """``count`` i.i.d. draws from G, shape ``(count, n)``; independent of thread count."""
    rs = RadialSampler(p, cfg)
    if count == 0:
        return np.empty((0, p.n))
    return chunked_draws(lambda rng, k: _draw(p, rs, rng, k), count, seed)


def parse_qgauss(text: str) -> QGaussianParams:
    """``qgauss:q=..,alpha=..,gamma=..,n=..,norm=<norm spec>`` (norm, if present, comes last)."""
    body = text.split(":", 1)[1] if text.startswith("qgauss:") else text
    norm = Lp(2)
    if "norm=" in body:
        body, _, ntext = body.partition("norm=")
        norm = parse_norm(ntext)
        body = body.rstrip(",")
    kv = {}
    for item in filter(None, body.split(",")):
        k, _, v = item.partition("=")
        kv[k.strip()] = v.strip()
    unknown = set(kv) - {"q", "alpha", "gamma", "n"}
    if unknown:
        raise ValueError(f"unknown qgauss keys: {sorted(unknown)}")
    if "q" not in kv:
        raise ValueError("qgauss spec needs q")
    n = int(kv.get("n", norm.dim or 1))
    return QGaussianParams(float(kv["q"]), float(kv.get("alpha", 2.0)), float(kv.get("gamma", 1.0)), n, norm)
