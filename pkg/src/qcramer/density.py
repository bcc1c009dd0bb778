"""Probability densities on R^n: analytic (callable) and grid-sampled.

Both kinds expose ``integrate(fn, cfg, need_grad)`` which evaluates
``int fn(x, g(x), grad g(x)) dx`` with an error estimate.  Analytic
densities that depend on x only through a norm may carry a
:class:`RadialProfile`; functionals that use the same norm then reduce to a
single radial integral via dx = n * omega_n * r^(n-1) dr.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.special import betaln

from .norms import Lp, NormSpec
from .quadrature import DEFAULT, QuadratureConfig, QuadratureError, box_integrate, quad1d

__all__ = [
    "RadialProfile",
    "Density",
    "AnalyticDensity",
    "GridDensity",
    "gaussian",
    "gaussian_mixture",
    "uniform",
    "beta",
    "student",
    "read_grid",
    "write_grid",
]

NORMALIZATION_TOL = 1e-6
GRID_MAX_DIM = 3


@dataclass(frozen=True)
class RadialProfile:
    """g(x) = h(||x||) with d/dr log h available in closed form."""

    h: Callable[[np.ndarray], np.ndarray]
    dlogh: Callable[[np.ndarray], np.ndarray]
    norm: NormSpec
    dim: int
    r_max: float = np.inf
    scale: float = 1.0

    @property
    def surface(self) -> float:
        """n * omega_n, the radial measure constant for this norm."""
        return self.dim * self.norm.unit_ball_volume(self.dim)

    def integrate(self, fn, cfg: QuadratureConfig = DEFAULT):
        """n omega_n int_0^r_max fn(r, h(r), dlogh(r)) r^(n-1) dr."""
        n = self.dim

        def radial(r):
            return fn(r, self.h(r), self.dlogh(r)) * r ** (n - 1)

        if np.isfinite(self.r_max):
            R = self.r_max

            # r = R (1 - u^2) removes the square-root type edge behaviour
            def sub(u):
                r = R * (1.0 - u * u)
                return radial(r) * 2.0 * R * u

            val, err = quad1d(sub, 0.0, 1.0, cfg)
        else:
            s = self.scale
            v1, e1 = quad1d(radial, 0.0, s, cfg)
            v2, e2 = quad1d(radial, s, 4 * s, cfg)
            v3, e3 = quad1d(radial, 4 * s, np.inf, cfg)
            val, err = v1 + v2 + v3, e1 + e2 + e3
        c = self.surface
        return c * val, c * err

    def power(self, s: float, c: float = 1.0) -> "RadialProfile":
        h, dl = self.h, self.dlogh
        return RadialProfile(
            h=lambda r: c * h(r) ** s,
            dlogh=lambda r: s * dl(r),
            norm=self.norm,
            dim=self.dim,
            r_max=self.r_max,
            scale=self.scale,
        )


class Density:
    dim: int
    name: str = "density"
    radial: RadialProfile | None = None

    def widened(self, s: float) -> "Density":
        return self

    def integrate(self, fn, cfg: QuadratureConfig = DEFAULT, need_grad: bool = False):
        raise NotImplementedError

    def power(self, s: float, c: float = 1.0) -> "Density":
        """The unnormalised function c * g^s as a density-like object."""
        raise NotImplementedError

    def mass(self, cfg: QuadratureConfig = DEFAULT) -> float:
        if self.radial is not None:
            return self.radial.integrate(lambda r, h, dl: h, cfg)[0]
        return self.integrate(lambda x, g, dg: g, cfg)[0]

    def _check_normalized(self, cfg: QuadratureConfig = DEFAULT) -> None:
        m = self.mass(cfg)
        if abs(m - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"{self.name}: integrates to {m!r}, not 1")


def _box_for_norm(norm: NormSpec, n: int, R: float):
    half = np.array([R * norm.dual().evaluate(e) for e in np.eye(n)])
    return -half, half


class AnalyticDensity(Density):
    """A density given by vectorised callables.

    ``pdf(x)`` maps an ``(m, n)`` array to ``(m,)``; ``grad(x)`` to ``(m, n)``.
    Without ``grad`` the gradient falls back to central differences.
    ``lo``/``hi`` bound the support or the truncation region.
    """

    def __init__(self, pdf, dim: int, grad=None, lo=None, hi=None, radial: RadialProfile | None = None,
                 points=None, name: str = "analytic", check: bool = True, cfg: QuadratureConfig = DEFAULT,
                 compact: bool = False):
        self.pdf = pdf
        self.dim = int(dim)
        self._grad = grad
        self.radial = radial
        self.points = points
        self.name = name
        self.compact = compact
        if lo is None or hi is None:
            if radial is None:
                raise ValueError("need a bounding box or a radial profile")
            R = radial.r_max if np.isfinite(radial.r_max) else _radial_truncation(radial, cfg.truncation)
            lo, hi = _box_for_norm(radial.norm, self.dim, R)
            self.compact = compact or np.isfinite(radial.r_max)
        self.lo = np.atleast_1d(np.asarray(lo, float))
        self.hi = np.atleast_1d(np.asarray(hi, float))
        if check and self.dim <= GRID_MAX_DIM:
            self._check_normalized(cfg)

    def __call__(self, x):
        return self.pdf(np.atleast_2d(np.asarray(x, float)))

    def grad(self, x):
        x = np.atleast_2d(np.asarray(x, float))
        if self._grad is not None:
            return self._grad(x)
        out = np.empty_like(x)
        step = 1e-6 * np.maximum(1.0, self.hi - self.lo)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = step[i]
            out[:, i] = (self.pdf(x + e) - self.pdf(x - e)) / (2 * step[i])
        return out

    def integrate(self, fn, cfg: QuadratureConfig = DEFAULT, need_grad: bool = False):
        def body(x):
            g = self.pdf(x)
            dg = self.grad(x) if need_grad else None
            return fn(x, g, dg)

        if self.dim == 1:
            return quad1d(lambda t: body(t[:, None]), self.lo[0], self.hi[0], cfg, points=self.points)
        if self.dim <= GRID_MAX_DIM:
            return box_integrate(body, self.lo, self.hi, cfg)
        return _mc_box(body, self.lo, self.hi, cfg)

    def widened(self, s: float) -> "AnalyticDensity":
        """Same density on a box large enough for integrands that behave like g^s."""
        if s >= 1 or self.compact:
            return self
        with np.errstate(divide="ignore", over="ignore"):
            lo, hi = _expand_box(lambda x: self.pdf(x) ** s, self.lo, self.hi, DEFAULT.truncation)
        out = AnalyticDensity(self.pdf, self.dim, grad=self._grad, lo=lo, hi=hi, radial=self.radial,
                              points=self.points, name=self.name, check=False, compact=self.compact)
        out.__dict__.update({k: v for k, v in self.__dict__.items() if k not in out.__dict__})
        return out

    def power(self, s: float, c: float = 1.0) -> "AnalyticDensity":
        pdf, gr = self.pdf, self.grad
        radial = self.radial.power(s, c) if self.radial is not None else None

        def pdf_s(x):
            return c * pdf(x) ** s

        def grad_s(x):
            g = pdf(x)
            with np.errstate(divide="ignore", invalid="ignore"):
                fac = np.where(g > 0, c * s * g ** (s - 1.0), 0.0)
            return fac[:, None] * gr(x)

        lo, hi = self.lo, self.hi
        if s < 1 and not self.compact:
            lo, hi = _expand_box(pdf_s, lo, hi, DEFAULT.truncation)
        return AnalyticDensity(pdf_s, self.dim, grad=grad_s, lo=lo, hi=hi, radial=radial, points=self.points,
                               name=f"{self.name}^{s:g}", check=False, compact=self.compact)


def _radial_truncation(radial: RadialProfile, rel: float) -> float:
    """Radius where the profile falls below ``rel`` times its value at the origin."""
    h0 = float(radial.h(np.array([0.0]))[0])
    r = radial.scale
    for _ in range(200):
        if float(radial.h(np.array([r]))[0]) < rel * h0:
            return r
        r *= 1.5
    raise QuadratureError("density tail too heavy to truncate")


def _expand_box(pdf, lo, hi, rel, max_iter=60):
    lo, hi = lo.copy(), hi.copy()
    n = lo.size
    for _ in range(max_iter):
        pts = np.stack(np.meshgrid(*[np.linspace(a, b, 9 if n > 1 else 33) for a, b in zip(lo, hi)],
                                   indexing="ij"), -1).reshape(-1, n)
        peak = float(np.max(pdf(pts)))
        on_face = np.any(np.isclose(pts, lo) | np.isclose(pts, hi), axis=1)
        if float(np.max(pdf(pts[on_face]))) <= rel * peak:
            return lo, hi
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        lo, hi = mid - 1.5 * half, mid + 1.5 * half
    raise QuadratureError("could not find a truncation box")


def _mc_box(body, lo, hi, cfg):
    from .quadrature import chunked_draws

    vol = float(np.prod(hi - lo))
    x = chunked_draws(lambda rng, k: rng.uniform(lo, hi, size=(k, lo.size)), cfg.mc_samples, cfg.seed)
    vals = body(x) * vol
    return float(np.mean(vals)), float(np.std(vals, ddof=1) / np.sqrt(len(vals)))


def _trapz_weights(axis: np.ndarray) -> np.ndarray:
    d = axis[1] - axis[0]
    w = np.full(axis.size, d)
    w[0] = w[-1] = d / 2
    return w


class GridDensity(Density):
    """Values on a uniform tensor grid (n <= 3), integrated by the trapezoid rule."""

    def __init__(self, axes, values, name: str = "grid", check: bool = True):
        axes = [np.asarray(a, float) for a in axes]
        values = np.asarray(values, float)
        if len(axes) > GRID_MAX_DIM:
            raise ValueError("grid densities are limited to n <= 3")
        if values.shape != tuple(a.size for a in axes):
            raise ValueError("values shape does not match the axes")
        for a in axes:
            d = np.diff(a)
            if a.size < 3 or not np.allclose(d, d[0], rtol=1e-9, atol=0):
                raise ValueError("grid axes must be uniform with at least 3 points")
        if np.any(values < 0):
            raise ValueError("density values must be nonnegative")
        self.axes = axes
        self.values = values
        self.dim = len(axes)
        self.name = name
        self.lo = np.array([a[0] for a in axes])
        self.hi = np.array([a[-1] for a in axes])
        if check:
            self._check_normalized()

    @property
    def points(self) -> np.ndarray:
        grids = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    @property
    def weights(self) -> np.ndarray:
        ws = np.meshgrid(*[_trapz_weights(a) for a in self.axes], indexing="ij")
        return np.prod(np.stack([w.ravel() for w in ws], -1), -1)

    def gradient(self) -> np.ndarray:
        gs = np.gradient(self.values, *self.axes, edge_order=1)
        if self.dim == 1:
            gs = [gs]
        return np.stack([g.ravel() for g in gs], axis=-1)

    def integrate(self, fn, cfg: QuadratureConfig = DEFAULT, need_grad: bool = False):
        x, w = self.points, self.weights
        g = self.values.ravel()
        dg = self.gradient() if need_grad else None
        vals = fn(x, g, dg)
        full = float(np.sum(w * vals))
        # every-other-point rule as a resolution error estimate
        sl = tuple(slice(None, None, 2) for _ in self.axes)
        idx = np.arange(g.size).reshape(self.values.shape)[sl].ravel()
        ws = np.meshgrid(*[_trapz_weights(a[::2]) for a in self.axes], indexing="ij")
        w2 = np.prod(np.stack([v.ravel() for v in ws], -1), -1)
        coarse = float(np.sum(w2 * vals[idx]))
        return full, abs(full - coarse)

    def power(self, s: float, c: float = 1.0) -> "GridDensity":
        return GridDensity(self.axes, c * self.values ** s, name=f"{self.name}^{s:g}", check=False)


# ---------------------------------------------------------------- builders


def gaussian(sigma: float = 1.0, n: int = 1, mean=None, norm: NormSpec | None = None) -> AnalyticDensity:
    """Isotropic Gaussian; radial about the origin when the mean is zero."""
    mean = np.zeros(n) if mean is None else np.asarray(mean, float)
    return gaussian_mixture([1.0], [mean], [sigma], norm=norm)


def gaussian_mixture(weights, means, sigmas, norm: NormSpec | None = None, name: str = "gmix") -> AnalyticDensity:
    w = np.asarray(weights, float)
    w = w / w.sum()
    mu = np.atleast_2d(np.asarray(means, float))
    if mu.shape[0] != w.size:
        mu = mu.T
    sg = np.asarray(sigmas, float)
    k, n = mu.shape
    const = w / (2 * np.pi * sg**2) ** (n / 2)

    def pdf(x):
        d2 = ((x[:, None, :] - mu[None]) ** 2).sum(-1)
        return (const * np.exp(-d2 / (2 * sg**2))).sum(-1)

    def grad(x):
        diff = x[:, None, :] - mu[None]
        d2 = (diff**2).sum(-1)
        e = const * np.exp(-d2 / (2 * sg**2)) / sg**2
        return -(e[..., None] * diff).sum(1)

    half = np.sqrt(2 * np.log(1 / DEFAULT.truncation)) + 0.5
    lo = (mu - half * sg[:, None]).min(0)
    hi = (mu + half * sg[:, None]).max(0)
    radial = None
    if k == 1 and np.all(mu == 0):
        s = float(sg[0])
        c0 = float(const[0])
        radial = RadialProfile(
            h=lambda r: c0 * np.exp(-(r**2) / (2 * s * s)),
            dlogh=lambda r: -r / (s * s),
            norm=Lp(2),
            dim=n,
            scale=s,
        )
    pts = np.unique(mu[:, 0]) if n == 1 else None
    return AnalyticDensity(pdf, n, grad=grad, lo=lo, hi=hi, radial=radial, points=pts, name=name)


def uniform(a: float = 0.0, b: float = 1.0) -> AnalyticDensity:
    c = 1.0 / (b - a)
    return AnalyticDensity(
        lambda x: np.where((x[:, 0] >= a) & (x[:, 0] <= b), c, 0.0),
        1,
        grad=lambda x: np.zeros_like(x),
        lo=[a],
        hi=[b],
        name=f"uniform[{a:g},{b:g}]",
        compact=True,
    )


def beta(a: float, b: float) -> AnalyticDensity:
    """Beta(a, b) on [0, 1]."""
    lb = betaln(a, b)

    def pdf(x):
        t = np.clip(x[:, 0], 0.0, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.exp((a - 1) * np.log(t) + (b - 1) * np.log1p(-t) - lb)
        return np.where((x[:, 0] > 0) & (x[:, 0] < 1), v, 0.0)

    def grad(x):
        t = x[:, 0]
        inside = (t > 0) & (t < 1)
        ts = np.where(inside, t, 0.5)
        d = pdf(ts[:, None]) * ((a - 1) / ts - (b - 1) / (1 - ts))
        return np.where(inside, d, 0.0)[:, None]

    return AnalyticDensity(pdf, 1, grad=grad, lo=[0.0], hi=[1.0], name=f"beta({a:g},{b:g})", compact=True)


def student(nu: float, scale: float = 1.0) -> AnalyticDensity:
    """Student-t with ``nu`` degrees of freedom (1-D)."""
    from scipy.special import gammaln

    lc = gammaln((nu + 1) / 2) - gammaln(nu / 2) - 0.5 * np.log(nu * np.pi) - np.log(scale)
    e = (nu + 1) / 2

    def pdf(x):
        z = x[:, 0] / scale
        return np.exp(lc - e * np.log1p(z * z / nu))

    def grad(x):
        z = x[:, 0] / scale
        return (pdf(x) * (-2 * e * z / (nu * (1 + z * z / nu))) / scale)[:, None]

    R = scale * np.sqrt(nu) * (DEFAULT.truncation ** (-1 / (2 * e)))
    radial = RadialProfile(
        h=lambda r: np.exp(lc - e * np.log1p((r / scale) ** 2 / nu)),
        dlogh=lambda r: -2 * e * (r / scale) / (nu * (1 + (r / scale) ** 2 / nu)) / scale,
        norm=Lp(2),
        dim=1,
        scale=scale,
    )
    return AnalyticDensity(pdf, 1, grad=grad, lo=[-R], hi=[R], radial=radial, points=[0.0], name=f"student({nu:g})")


# ---------------------------------------------------------------- grid files


def write_grid(path, axes, values, complex_values: bool = False) -> None:
    """Header ``dims n`` then ``axis <min> <max> <count>`` per axis, then values row-major."""
    axes = [np.asarray(a, float) for a in axes]
    lines = [f"dims {len(axes)}"]
    lines += [f"axis {float(a[0]):.17g} {float(a[-1]):.17g} {a.size}" for a in axes]
    v = np.asarray(values).ravel()
    if complex_values:
        flat = np.column_stack([v.real, v.imag]).ravel()
    else:
        flat = v.astype(float)
    lines.append(" ".join(format(float(t), ".17g") for t in flat))
    Path(path).write_text("\n".join(lines) + "\n")


def read_grid(path, complex_values: bool = False):
    tokens = Path(path).read_text().split()
    if len(tokens) < 2 or tokens[0] != "dims":
        raise ValueError("grid file must start with 'dims <n>'")
    n = int(tokens[1])
    pos = 2
    axes = []
    for _ in range(n):
        if tokens[pos] != "axis":
            raise ValueError("expected 'axis <min> <max> <count>'")
        lo, hi, cnt = float(tokens[pos + 1]), float(tokens[pos + 2]), int(tokens[pos + 3])
        axes.append(np.linspace(lo, hi, cnt))
        pos += 4
    shape = tuple(a.size for a in axes)
    raw = np.array(tokens[pos:], dtype=float)
    if complex_values:
        if raw.size != 2 * int(np.prod(shape)):
            raise ValueError("wrong number of complex values in grid file")
        vals = (raw[0::2] + 1j * raw[1::2]).reshape(shape)
    else:
        if raw.size != int(np.prod(shape)):
            raise ValueError("wrong number of values in grid file")
        vals = raw.reshape(shape)
    return axes, vals
