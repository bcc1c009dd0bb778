"""Norms on R^n with closed-form duals and gradients.

Three kinds are supported, all closed under duality:

* ``Lp(p)``                 ||x|| = (sum |x_i|^p)^(1/p), p in [1, inf]
* ``WeightedLp(p, w)``      ||x|| = (sum w_i |x_i|^p)^(1/p)
* ``LinearMap(A, inner)``   ||x|| = ||A x||_inner

Every function here accepts either a single vector of shape ``(n,)`` or a
stack of vectors of shape ``(m, n)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gammaln

__all__ = [
    "NormSpec",
    "Lp",
    "WeightedLp",
    "LinearMap",
    "NondifferentiableError",
    "conjugate_exponent",
    "parse_norm",
    "holder_extremal",
    "holder_check",
]

TIE_RTOL = 1e-12


class NondifferentiableError(ValueError):
    """The norm has no gradient at the requested point."""


def conjugate_exponent(p: float) -> float:
    """Hölder conjugate: 1/p + 1/p' = 1, with 1 <-> inf."""
    p = float(p)
    if p < 1:
        raise ValueError(f"exponent must be >= 1, got {p}")
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _fmt(v: float) -> str:
    return "inf" if np.isinf(v) else repr(float(v))


def _as_rows(x):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    return np.atleast_2d(x), single


def _lp_value(y: np.ndarray, p: float) -> np.ndarray:
    a = np.abs(y)
    if np.isinf(p):
        return a.max(axis=-1)
    if p == 1:
        return a.sum(axis=-1)
    # scale by the max entry to avoid overflow in |y|^p
    s = a.max(axis=-1, keepdims=True)
    safe = np.where(s > 0, s, 1.0)
    return safe[..., 0] * ((a / safe) ** p).sum(axis=-1) ** (1.0 / p)


def _lp_gradient(y: np.ndarray, p: float) -> np.ndarray:
    a = np.abs(y)
    norm = _lp_value(y, p)
    if np.any(norm == 0):
        raise NondifferentiableError("norm is not differentiable at x = 0")
    if p == 1:
        if np.any(a == 0):
            raise NondifferentiableError("L1 norm is not differentiable where a coordinate is zero")
        return np.sign(y)
    if np.isinf(p):
        top = a.max(axis=-1, keepdims=True)
        near = a >= top * (1 - TIE_RTOL)
        if np.any(near.sum(axis=-1) > 1):
            raise NondifferentiableError("Linf norm is not differentiable at a tied maximum")
        return np.where(near, np.sign(y), 0.0)
    ratio = a / norm[..., None]
    return np.sign(y) * ratio ** (p - 1.0)


@dataclass(frozen=True)
class NormSpec:
    """Base class; concrete norms are the three subclasses below."""

    def evaluate(self, x) -> np.ndarray | float:
        rows, single = _as_rows(x)
        self._check_dim(rows.shape[-1])
        out = self._value(rows)
        return float(out[0]) if single else out

    __call__ = evaluate

    def gradient(self, x) -> np.ndarray:
        rows, single = _as_rows(x)
        self._check_dim(rows.shape[-1])
        out = self._grad(rows)
        return out[0] if single else out

    def dual(self) -> "NormSpec":
        raise NotImplementedError

    def unit_ball_volume(self, n: int) -> float:
        raise NotImplementedError

    def spec(self) -> str:
        raise NotImplementedError

    @property
    def dim(self) -> int | None:
        return None

    @property
    def strictly_convex_dual(self) -> bool:
        raise NotImplementedError

    def _check_dim(self, n: int) -> None:
        d = self.dim
        if d is not None and d != n:
            raise ValueError(f"dimension mismatch: norm has dim {d}, vector has dim {n}")

    def _value(self, rows: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _grad(self, rows: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.spec()


@dataclass(frozen=True)
class Lp(NormSpec):
    p: float = 2.0

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"Lp norm needs p >= 1, got {self.p}")
        object.__setattr__(self, "p", float(self.p))

    def _value(self, rows):
        return _lp_value(rows, self.p)

    def _grad(self, rows):
        return _lp_gradient(rows, self.p)

    def dual(self):
        return Lp(conjugate_exponent(self.p))

    def unit_ball_volume(self, n: int) -> float:
        if np.isinf(self.p):
            return 2.0 ** n
        p = self.p
        return float(np.exp(n * (np.log(2.0) + gammaln(1 + 1 / p)) - gammaln(1 + n / p)))

    def spec(self):
        return f"lp:{_fmt(self.p)}"

    @property
    def strictly_convex_dual(self):
        return 1 < self.p < np.inf


@dataclass(frozen=True, eq=False)
class WeightedLp(NormSpec):
    """(sum w_i |x_i|^p)^(1/p).  For p = inf the weights act as scales: max w_i |x_i|."""

    p: float
    weights: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if not self.p >= 1:
            raise ValueError(f"weighted Lp norm needs p >= 1, got {self.p}")
        if w.size == 0 or np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and positive")
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "weights", tuple(w.tolist()))

    @property
    def scales(self) -> np.ndarray:
        w = np.asarray(self.weights)
        return w if np.isinf(self.p) else w ** (1.0 / self.p)

    @property
    def dim(self):
        return len(self.weights)

    def _value(self, rows):
        return _lp_value(rows * self.scales, self.p)

    def _grad(self, rows):
        s = self.scales
        return _lp_gradient(rows * s, self.p) * s

    def dual(self):
        p, s = self.p, self.scales
        pd = conjugate_exponent(p)
        inv = 1.0 / s
        w = inv if np.isinf(pd) else inv ** pd
        return WeightedLp(pd, tuple(w))

    def unit_ball_volume(self, n: int) -> float:
        if n != self.dim:
            raise ValueError("dimension mismatch")
        return Lp(self.p).unit_ball_volume(n) / float(np.prod(self.scales))

    def spec(self):
        return f"wlp:{_fmt(self.p)}:" + ",".join(repr(w) for w in self.weights)

    @property
    def strictly_convex_dual(self):
        return 1 < self.p < np.inf

    def __eq__(self, other):
        return isinstance(other, WeightedLp) and self.spec() == other.spec()

    def __hash__(self):
        return hash(self.spec())


@dataclass(frozen=True, eq=False)
class LinearMap(NormSpec):
    """||A x||_inner for an invertible matrix A."""

    A: np.ndarray
    inner: NormSpec = field(default_factory=Lp)
    source: str | None = None

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be a square matrix")
        if abs(np.linalg.det(A)) < 1e-300 or np.linalg.cond(A) > 1e14:
            raise ValueError("A must be invertible")
        if self.inner.dim is not None and self.inner.dim != A.shape[0]:
            raise ValueError("inner norm dimension does not match A")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    @property
    def dim(self):
        return self.A.shape[0]

    def _value(self, rows):
        return self.inner._value(rows @ self.A.T)

    def _grad(self, rows):
        return self.inner._grad(rows @ self.A.T) @ self.A

    def dual(self):
        return LinearMap(np.linalg.inv(self.A).T, self.inner.dual())

    def unit_ball_volume(self, n: int) -> float:
        return self.inner.unit_ball_volume(n) / abs(float(np.linalg.det(self.A)))

    def spec(self):
        if self.source is not None:
            mat = self.source
        else:
            mat = ";".join(",".join(repr(float(v)) for v in row) for row in self.A)
        return f"map:{mat}:{self.inner.spec()}"

    @property
    def strictly_convex_dual(self):
        return self.inner.strictly_convex_dual

    def __eq__(self, other):
        return (
            isinstance(other, LinearMap)
            and np.array_equal(self.A, other.A)
            and self.inner == other.inner
        )

    def __hash__(self):
        return hash((self.A.tobytes(), self.inner))


def _parse_exponent(tok: str) -> float:
    tok = tok.strip().lower()
    if tok in ("inf", "infinity", "max"):
        return np.inf
    return float(tok)


def parse_norm(text: str) -> NormSpec:
    """Parse the compact norm grammar.

    ``lp:<p>``                      e.g. ``lp:2``, ``lp:inf``
    ``wlp:<p>:<w1>,<w2>,...``       e.g. ``wlp:3:1.0,2.0``
    ``map:<matrix>:<inner norm>``   matrix is either a path to a whitespace
                                    separated text file or inline rows
                                    ``a,b;c,d``
    """
    text = text.strip()
    kind, _, rest = text.partition(":")
    kind = kind.lower()
    if kind == "lp":
        return Lp(_parse_exponent(rest))
    if kind == "wlp":
        p, _, w = rest.partition(":")
        if not w:
            raise ValueError(f"weighted norm needs weights: {text!r}")
        return WeightedLp(_parse_exponent(p), tuple(float(v) for v in w.split(",")))
    if kind == "map":
        mat, _, inner = rest.partition(":")
        if not inner:
            raise ValueError(f"linear-map norm needs an inner norm: {text!r}")
        if ";" in mat or "," in mat:
            A = np.array([[float(v) for v in row.split(",")] for row in mat.split(";")])
            return LinearMap(A, parse_norm(inner))
        A = np.atleast_2d(np.loadtxt(Path(mat), dtype=float))
        return LinearMap(A, parse_norm(inner), source=mat)
    raise ValueError(f"unknown norm kind in {text!r}")


# ------------------------------------------------------------ Hölder


def holder_extremal(X, norm: NormSpec, alpha: float, K: float = 1.0):
    """t -> K ||X(t)||^(alpha-1) grad ||X(t)||, zero where X(t) = 0."""

    def Y(t):
        x = np.atleast_2d(np.asarray(X(t), float))
        out = np.zeros_like(x)
        r = norm.evaluate(x)
        nz = r > 0
        if np.any(nz):
            out[nz] = K * (r[nz] ** (alpha - 1.0))[:, None] * norm.gradient(x[nz])
        return out

    return Y


def holder_check(X, Y, w, norm: NormSpec, alpha: float, nodes=None, lo=None, hi=None, grid_nodes: int = 256,
                 saturation_tol: float = 1e-6):
    """Both chains of the Hölder inequality for vector fields on a weighted domain.

    (int ||X||^a w)^(1/a) (int ||Y||_*^b w)^(1/b) >= int |X.Y| w >= |int X.Y w|

    The domain is either explicit ``nodes = (t, weights)`` (point masses) or a
    box ``[lo, hi]`` discretised by composite Gauss-Legendre; both sides use
    the same rule, so the inequality holds for the discrete measure exactly.
    The report's ``lhs``/``rhs`` are the outer chain; the middle term and the
    two partial ratios go in ``params``.
    """
    from .quadrature import box_rule
    from .report import InequalityReport

    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    if nodes is None:
        if lo is None or hi is None:
            raise ValueError("give nodes or a box")
        t, wt = box_rule(lo, hi, grid_nodes)
    else:
        t, wt = nodes
        t = np.asarray(t, float)
        t = t[:, None] if t.ndim == 1 else t
        wt = np.asarray(wt, float)
    ww = wt * np.asarray(w(t), float)
    if np.any(ww < 0):
        raise ValueError("weight must be nonnegative")
    x = np.atleast_2d(np.asarray(X(t), float))
    y = np.atleast_2d(np.asarray(Y(t), float))
    beta = conjugate_exponent(alpha)
    nx = norm.evaluate(x)
    ny = norm.dual().evaluate(y)
    a_side = float(np.sum(nx**alpha * ww)) ** (1.0 / alpha)
    if np.isinf(beta):
        b_side = float(np.max(ny[ww > 0])) if np.any(ww > 0) else 0.0
    else:
        b_side = float(np.sum(ny**beta * ww)) ** (1.0 / beta)
    dots = np.einsum("ij,ij->i", x, y)
    middle = float(np.sum(np.abs(dots) * ww))
    inner = abs(float(np.sum(dots * ww)))
    lhs = a_side * b_side
    if not np.all(np.isfinite([lhs, middle, inner])):
        raise ValueError("divergent Hölder integral")
    ratio_a = lhs / middle if middle else np.inf
    ratio_b = middle / inner if inner else np.inf
    return InequalityReport("holder", lhs, inner, numeric_error=1e-12,
                            params={"alpha": alpha, "beta": beta, "norm": norm.spec(), "middle": middle,
                                    "ratio_a": ratio_a, "ratio_b": ratio_b},
                            saturation_tol=saturation_tol)
