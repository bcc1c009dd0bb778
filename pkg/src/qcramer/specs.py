"""Text grammars for densities and wave functions.

Density specs::

    gauss:sigma=1,n=1
    gmix:w=0.3;0.7,mu=-1;1,sigma=0.5;0.8        (1-D mixture, ';' separates components)
    uniform:a=0,b=1
    beta:a=2,b=3
    student:nu=5,scale=1
    qgauss:q=0.9,alpha=2,gamma=1,n=1,norm=lp:2   (norm last)
    grid:<path>                                   (grid density file)

Wave-function specs::

    gauss:sigma=1,n=1,mu=0,chirp=0,points=4096
    qgauss:q=0.9,gamma=1,n=1
    bump:width=1,n=1
    two-lobe:sigma=1,sep=4,n=1
    grid:<path>                                   (complex grid file)
"""

from __future__ import annotations

import numpy as np

from . import density as dens
from . import uncertainty as unc
from .qgaussian import as_density, parse_qgauss

__all__ = ["parse_kv", "parse_density", "parse_psi", "with_sampler"]


def parse_kv(body: str, allowed: dict, where: str) -> dict:
    """``k=v,k=v`` with types from ``allowed`` (name -> callable); unknown keys raise."""
    out = {}
    for item in filter(None, (t.strip() for t in body.split(","))):
        k, sep, v = item.partition("=")
        k = k.strip()
        if not sep:
            raise ValueError(f"{where}: expected key=value, got {item!r}")
        if k not in allowed:
            raise ValueError(f"{where}: unknown key {k!r} (allowed: {', '.join(sorted(allowed))})")
        out[k] = allowed[k](v.strip())
    return out


def _floats(text: str) -> list:
    return [float(t) for t in text.split(";")]


def with_sampler(d, sampler):
    d.sampler = sampler
    return d


def parse_density(text: str):
    kind, _, body = text.strip().partition(":")
    if kind == "qgauss":
        return as_density(parse_qgauss(text))
    if kind == "grid":
        axes, vals = dens.read_grid(body)
        return dens.GridDensity(axes, vals, name=text)
    if kind == "gauss":
        kv = parse_kv(body, {"sigma": float, "n": int}, "gauss")
        s, n = kv.get("sigma", 1.0), kv.get("n", 1)
        return with_sampler(dens.gaussian(s, n), lambda rng, size: rng.normal(0.0, s, (size, n)))
    if kind == "gmix":
        kv = parse_kv(body, {"w": _floats, "mu": _floats, "sigma": _floats}, "gmix")
        mu = kv.get("mu", [0.0])
        w = kv.get("w", [1.0] * len(mu))
        sg = kv.get("sigma", [1.0] * len(mu))
        if not len(w) == len(mu) == len(sg):
            raise ValueError("gmix: w, mu and sigma need the same number of components")
        d = dens.gaussian_mixture(w, np.array(mu)[:, None], sg)
        p = np.asarray(w, float) / np.sum(w)

        def draw(rng, size):
            c = rng.choice(len(p), size=size, p=p)
            return (np.asarray(mu)[c] + np.asarray(sg)[c] * rng.standard_normal(size))[:, None]

        return with_sampler(d, draw)
    if kind == "uniform":
        kv = parse_kv(body, {"a": float, "b": float}, "uniform")
        a, b = kv.get("a", 0.0), kv.get("b", 1.0)
        return with_sampler(dens.uniform(a, b), lambda rng, size: rng.uniform(a, b, (size, 1)))
    if kind == "beta":
        kv = parse_kv(body, {"a": float, "b": float}, "beta")
        a, b = kv.get("a", 2.0), kv.get("b", 2.0)
        return with_sampler(dens.beta(a, b), lambda rng, size: rng.beta(a, b, size)[:, None])
    if kind == "student":
        kv = parse_kv(body, {"nu": float, "scale": float}, "student")
        nu, sc = kv.get("nu", 5.0), kv.get("scale", 1.0)
        return with_sampler(dens.student(nu, sc), lambda rng, size: sc * rng.standard_t(nu, size)[:, None])
    raise ValueError(f"unknown density kind {kind!r}")


def parse_psi(text: str):
    kind, _, body = text.strip().partition(":")
    if kind == "grid":
        return unc.grid_psi(body)
    if kind == "gauss":
        kv = parse_kv(body, {"sigma": float, "n": int, "mu": float, "chirp": float, "points": int,
                             "extent": float}, "gauss")
        return unc.gauss_psi(**kv)
    if kind == "qgauss":
        kv = parse_kv(body, {"q": float, "gamma": float, "n": int, "points": int, "extent": float}, "qgauss")
        if "q" not in kv:
            raise ValueError("qgauss wave function needs q")
        return unc.qgauss_psi(**kv)
    if kind == "bump":
        return unc.bump_psi(**parse_kv(body, {"width": float, "n": int, "points": int}, "bump"))
    if kind == "two-lobe":
        kv = parse_kv(body, {"sigma": float, "sep": float, "n": int, "points": int, "extent": float}, "two-lobe")
        return unc.two_lobe_psi(**kv)
    raise ValueError(f"unknown wave-function kind {kind!r}")
