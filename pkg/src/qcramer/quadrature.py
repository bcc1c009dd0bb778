"""Integration back-ends and reproducible random streams.

Adaptive 1-D quadrature is scipy's QUADPACK wrapper; multi-dimensional
integrals use composite tensor-product Gauss-Legendre on a bounding box,
with the error estimated against a half-resolution rule.  Monte Carlo uses
counter-based streams (one seed sequence per chunk) so that results do not
depend on how chunks are scheduled across threads.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

THREADS_ENV = "QCRAMER_THREADS"
CHUNK = 1 << 15
GL_ORDER = 8


class QuadratureError(RuntimeError):
    """Quadrature failed to converge or the integral diverges."""


@dataclass(frozen=True)
class QuadratureConfig:
    scheme: str = "adaptive"  # adaptive | gauss | mc
    truncation: float = 1e-14  # relative density level defining the truncation box
    epsrel: float = 1e-11
    epsabs: float = 0.0
    limit: int = 1000
    grid_nodes: int = 384  # Gauss-Legendre nodes per axis for n >= 2
    mc_samples: int = 1 << 18
    seed: int = 0
    overflow: float = 1e300

    def with_(self, **kw) -> "QuadratureConfig":
        return replace(self, **kw)


DEFAULT = QuadratureConfig()


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Ordered map; results are identical for any thread count."""
    items = list(items)
    nt = thread_count()
    if nt == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=nt) as ex:
        return list(ex.map(fn, items))


def chunk_rng(seed: int, chunk: int, stream: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), int(chunk)))
    return np.random.Generator(np.random.PCG64(ss))


def chunked_draws(draw, count: int, seed: int, stream: int = 0) -> np.ndarray:
    """Concatenate ``draw(rng, size)`` over fixed-size chunks with per-chunk streams."""
    sizes = [min(CHUNK, count - s) for s in range(0, count, CHUNK)]
    parts = parallel_map(lambda i: draw(chunk_rng(seed, i, stream), sizes[i]), range(len(sizes)))
    if not parts:
        return np.empty((0,))
    return np.concatenate(parts, axis=0)


def quad1d(f, a: float, b: float, cfg: QuadratureConfig = DEFAULT, points=None):
    """Adaptive integral of a vectorised function of one variable."""

    def scalar(t):
        return float(f(np.array([t]))[0])

    kw = dict(epsabs=cfg.epsabs, epsrel=cfg.epsrel, limit=cfg.limit, full_output=1)
    if points is not None and np.isfinite(a) and np.isfinite(b):
        pts = [p for p in np.unique(points) if a < p < b]
        if pts:
            kw["points"] = pts
    if (points is not None) and not (np.isfinite(a) and np.isfinite(b)):
        # split at the breakpoints so the infinite pieces stay tail-only
        edges = [a] + [p for p in np.unique(points) if a < p < b] + [b]
        total, err = 0.0, 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            v, e = quad1d(f, lo, hi, cfg)
            total += v
            err += e
        return total, err
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        res = integrate.quad(scalar, a, b, **kw)
    val, err = res[0], res[1]
    if len(res) > 3 and "divergent" in str(res[3]):
        raise QuadratureError(f"integral probably divergent on [{a}, {b}]")
    if not np.isfinite(val) or abs(val) > cfg.overflow:
        raise QuadratureError(f"integral diverges on [{a}, {b}]")
    return val, err


def _gl_axis(lo: float, hi: float, nodes: int):
    panels = max(1, nodes // GL_ORDER)
    t, w = np.polynomial.legendre.leggauss(GL_ORDER)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    wx = (half[:, None] * w[None, :]).ravel()
    return x, wx


def box_rule(lo, hi, nodes: int):
    """Tensor-product composite Gauss-Legendre nodes and weights on a box."""
    lo = np.atleast_1d(np.asarray(lo, float))
    hi = np.atleast_1d(np.asarray(hi, float))
    axes = [_gl_axis(a, b, nodes) for a, b in zip(lo, hi)]
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    wgrids = np.meshgrid(*[a[1] for a in axes], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    w = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return pts, w


def box_integrate(f, lo, hi, cfg: QuadratureConfig = DEFAULT):
    """Integrate vectorised ``f(points) -> values`` over a box, with an error estimate."""
    pts, w = box_rule(lo, hi, cfg.grid_nodes)
    fine = float(np.sum(w * f(pts)))
    pts2, w2 = box_rule(lo, hi, max(GL_ORDER, cfg.grid_nodes // 2))
    coarse = float(np.sum(w2 * f(pts2)))
    if not np.isfinite(fine) or abs(fine) > cfg.overflow:
        raise QuadratureError("integral diverges on the truncation box")
    return fine, abs(fine - coarse)


def mc_integrate(f, sampler, logpdf, cfg: QuadratureConfig = DEFAULT, stream: int = 0):
    """Importance-sampling estimate of the integral of ``f`` with proposal ``sampler``."""
    x = chunked_draws(sampler, cfg.mc_samples, cfg.seed, stream)
    vals = f(x) / np.exp(logpdf(x))
    est = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / np.sqrt(len(vals)))
    return est, se
