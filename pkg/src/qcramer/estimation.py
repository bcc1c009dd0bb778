"""Monte Carlo harness for the parametric Cramer-Rao bound

    E_g[||theta_hat - theta||^a]^(1/a) I_b[f|g; theta]^(1/b) >= |n + div_theta B_f(theta)|.

The moment side is sampled under g, the Fisher side is a quadrature and the
bias divergence is a finite difference of Monte Carlo biases under f with
common random numbers.  Each run reports standard errors and the z-score of
the slack; a run whose standard error exceeds 10% of the slack is flagged as
budget-limited.

Scenario file: ``key = value`` lines, ``#`` comments, keys as in ``Scenario``::

    family    = gauss-location:sigma=1
    weight    = uniform-location:a=0,b=1     # optional, default g = f
    estimator = shrink:0.9
    theta     = 1.0
    alpha     = 2
    q         = 0.9                          # optional: g = f^(1/q) / M_(1/q)[f]
    norm      = lp:2
    budget    = 100000
    seed      = 7

Families are location families ``<density kind>-location:<params>`` over the
density grammar (gauss, qgauss, beta, uniform, gmix, student).  Estimators:
``identity``, ``shrink:c`` (c x), ``shift:c`` (x + c).
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .density import AnalyticDensity
from .inequalities import _theta_moment
from .info_measures import (NoisyDivergenceWarning, ParametricFamily, bias_divergence, escort_family,
                            location_family, parametric_fisher)
from .norms import conjugate_exponent, parse_norm
from .qgaussian import InadmissibleError, QGaussianParams, as_density, parse_qgauss
from .quadrature import DEFAULT, QuadratureConfig, chunked_draws, parallel_map
from .report import InequalityReport
from .specs import parse_density

__all__ = [
    "Scenario",
    "ScenarioResult",
    "InsufficientBudgetWarning",
    "make_family",
    "make_estimator",
    "run_scenario",
    "scan",
    "read_scenario",
    "write_scenario",
    "Z_THRESHOLD",
    "SUITE",
]

Z_THRESHOLD = -3.0
BUDGET_FRACTION = 0.1
MOMENT_STREAM, BIAS_STREAM = 1, 2
TABLE_POINTS = 1 << 16


class InsufficientBudgetWarning(UserWarning):
    """Monte Carlo error exceeds 10% of the slack."""


@dataclass(frozen=True)
class Scenario:
    family: str = "gauss-location:sigma=1"
    weight: str | None = None
    estimator: str = "identity"
    theta: tuple = (0.0,)
    alpha: float = 2.0
    q: float | None = None
    norm: str = "lp:2"
    budget: int = 100_000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(float(t) for t in np.atleast_1d(self.theta)))
        if self.budget < 2:
            raise ValueError("budget must be at least 2")
        if not self.alpha >= 1:
            raise ValueError("alpha must be >= 1")
        if self.q is not None and not self.q > 0:
            raise ValueError("q must be positive")


@dataclass
class ScenarioResult:
    report: InequalityReport
    diagnostics: dict = field(default_factory=dict)


# ------------------------------------------------------------- registries


def _split_family(spec: str):
    head, _, body = spec.partition(":")
    if not head.endswith("-location"):
        raise ValueError(f"family {spec!r}: expected '<density>-location:<params>'")
    return head[: -len("-location")], body


def _base_density(kind: str, body: str) -> AnalyticDensity:
    d = parse_density(f"{kind}:{body}")
    if not isinstance(d, AnalyticDensity) or getattr(d, "sampler", None) is None:
        raise ValueError(f"density kind {kind!r} cannot be used as a sampled family")
    return d


def make_family(spec: str) -> ParametricFamily:
    kind, body = _split_family(spec)
    fam = location_family(_base_density(kind, body), name=spec)
    return fam


def _table_sampler(d: AnalyticDensity):
    """Inverse-CDF sampler from a tabulated 1-D density."""
    if d.dim != 1:
        raise ValueError("tabulated sampling is one-dimensional")
    x = np.linspace(d.lo[0], d.hi[0], TABLE_POINTS)
    v = d.pdf(x[:, None])
    c = np.concatenate([[0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(x))])
    c /= c[-1]
    keep = np.concatenate([[True], np.diff(c) > 0])

    def draw(rng, size):
        return np.interp(rng.random(size), c[keep], x[keep])[:, None]

    return draw


def _escort_sampler(spec: str, order: float, escorted_base: AnalyticDensity):
    kind, body = _split_family(spec)
    if kind == "gauss":
        s = parse_density(f"gauss:{body}")
        sig, n = float(s.radial.scale) / np.sqrt(order), s.dim
        return lambda rng, size: rng.normal(0.0, sig, (size, n))
    if kind == "qgauss":
        p = parse_qgauss(f"qgauss:{body}")
        pe = QGaussianParams(1.0 + (p.q - 1.0) / order, p.alpha, p.gamma * order, p.n, p.norm)
        return as_density(pe).sampler
    return _table_sampler(escorted_base)


def make_weight(s: Scenario, f_fam: ParametricFamily, cfg: QuadratureConfig = DEFAULT) -> ParametricFamily:
    if s.weight is not None and s.q is not None:
        raise ValueError("give either an explicit weight family or q, not both")
    if s.weight is not None:
        return make_family(s.weight)
    if s.q is None:
        return f_fam
    order = 1.0 / s.q
    g = escort_family(f_fam, order, cfg)
    base_draw = _escort_sampler(s.family, order, g.base)
    g.sampler = lambda rng, size, theta: base_draw(rng, size) + theta
    return g


def make_estimator(spec: str):
    name, _, arg = spec.partition(":")
    if name == "identity":
        if arg:
            raise ValueError("identity takes no argument")
        return lambda x: x
    if name in ("shrink", "shift"):
        try:
            c = float(arg)
        except ValueError:
            raise ValueError(f"estimator {spec!r} needs a numeric argument") from None
        return (lambda x: c * x) if name == "shrink" else (lambda x: x + c)
    raise ValueError(f"unknown estimator {spec!r}")


# ------------------------------------------------------------- running


def run_scenario(s: Scenario, cfg: QuadratureConfig = DEFAULT) -> ScenarioResult:
    f_fam = make_family(s.family)
    if len(s.theta) != f_fam.theta_dim:
        raise ValueError(f"theta has {len(s.theta)} components, the family needs {f_fam.theta_dim}")
    g_fam = make_weight(s, f_fam, cfg)
    est = make_estimator(s.estimator)
    norm = parse_norm(s.norm)
    theta = np.asarray(s.theta)
    n = f_fam.theta_dim
    alpha = s.alpha
    beta = conjugate_exponent(alpha)

    x = chunked_draws(lambda rng, m: g_fam.sampler(rng, m, theta), s.budget, s.seed, MOMENT_STREAM)
    dev = norm.evaluate(np.asarray(est(x), float).reshape(len(x), n) - theta)
    if np.isinf(alpha):
        mom_root, se_root = float(np.max(dev)), 0.0
        mom = mom_root
    else:
        vals = dev**alpha
        mom = float(np.mean(vals))
        se = float(np.std(vals, ddof=1) / np.sqrt(s.budget))
        mom_root = mom ** (1 / alpha)
        se_root = mom_root * se / (alpha * mom) if mom > 0 else 0.0

    fi, efi = parametric_fisher(f_fam, g_fam, theta, beta, norm, cfg, with_error=True)
    fi_root = fi ** (1 / beta)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NoisyDivergenceWarning)
        div = bias_divergence(f_fam, est, theta, cfg, method="mc", budget=s.budget, seed=s.seed, stream=BIAS_STREAM,
                              with_error=True)
    lhs = mom_root * fi_root
    rhs = abs(n + div.value)
    sig_l = fi_root * se_root + lhs * (efi / max(fi, 1e-300)) / beta
    sig_r = div.mc_error + div.fd_error
    sigma = float(np.hypot(sig_l, sig_r))
    slack = lhs - rhs
    z = slack / sigma if sigma > 0 else (np.inf if slack >= 0 else -np.inf)
    insufficient = sigma > BUDGET_FRACTION * abs(slack)
    if insufficient:
        warnings.warn(f"Monte Carlo error {sigma:.3g} exceeds {BUDGET_FRACTION:.0%} of the slack {slack:.3g}",
                      InsufficientBudgetWarning, stacklevel=2)
    mom_quad = None
    if np.isfinite(alpha) and f_fam.xdim <= 2:
        mom_quad = float(_theta_moment(g_fam, est, theta, alpha, norm, cfg)[0])
    diag = {
        "moment": mom,
        "moment_se": se_root if np.isinf(alpha) else float(np.std(vals, ddof=1) / np.sqrt(s.budget)),
        "moment_quad": mom_quad,
        "fisher": float(fi),
        "bias_divergence": div.value,
        "bias_se": div.mc_error,
        "bias_fd_error": div.fd_error,
        "sigma": sigma,
        "z": float(z),
        "insufficient_budget": bool(insufficient),
        "noisy_divergence": bool(div.noisy or caught),
    }
    params = dict(_echo(s), n=n, beta=beta, **diag)
    rep = InequalityReport("main-cr-mc", lhs, rhs, -Z_THRESHOLD * sigma / max(rhs, 1e-300), params)
    return ScenarioResult(rep, diag)


def _sc(family, **kw) -> Scenario:
    return Scenario(family=family, **kw)


# A fixed battery covering efficient, biased, mismatched-weight, escort and
# heavy-tailed cases in one and two dimensions.
SUITE = (
    _sc("gauss-location:sigma=1"),
    _sc("gauss-location:sigma=1", theta=(1.5,), alpha=3.0),
    _sc("gauss-location:sigma=1", estimator="shrink:0.9", theta=(1.0,)),
    _sc("gauss-location:sigma=2", estimator="shrink:0.5", theta=(2.0,)),
    _sc("gauss-location:sigma=1", estimator="shift:0.3"),
    _sc("gauss-location:sigma=1", weight="gauss-location:sigma=1.5"),
    _sc("gauss-location:sigma=1", q=0.9),
    _sc("gauss-location:sigma=1", q=1.2, alpha=1.5),
    _sc("qgauss-location:q=0.9,alpha=2,gamma=1"),
    _sc("qgauss-location:q=1.5,alpha=2,gamma=1", theta=(0.5,)),
    _sc("qgauss-location:q=0.9,alpha=2,gamma=1", q=0.9),
    _sc("student-location:nu=5,scale=1"),
    _sc("student-location:nu=8,scale=1", estimator="shrink:0.8", theta=(0.5,), alpha=1.5),
    _sc("gmix-location:w=0.4;0.6,mu=-1;1,sigma=0.6;0.8"),
    _sc("gmix-location:w=0.4;0.6,mu=-1;1,sigma=0.6;0.8", estimator="shrink:0.9", theta=(0.3,)),
    _sc("beta-location:a=2.5,b=3", weight="uniform-location:a=0,b=1", alpha=float("inf")),
    _sc("beta-location:a=3,b=3", weight="uniform-location:a=0,b=1", alpha=float("inf"), estimator="shift:0.1"),
    _sc("gauss-location:sigma=1,n=2", theta=(0.0, 0.0)),
    _sc("gauss-location:sigma=1,n=2", estimator="shrink:0.8", theta=(1.0, -1.0)),
    _sc("gauss-location:sigma=1", alpha=4.0, seed=3),
)


def _echo(s: Scenario) -> dict:
    d = asdict(s)
    d["theta"] = list(s.theta)
    return d


def scan(base: Scenario, grid: dict, cfg: QuadratureConfig = DEFAULT) -> list:
    """One row per tuple of the Cartesian product of ``grid`` (field -> values), in order.

    Failures are recorded in the row's ``error`` column; inadmissible
    parameters set ``inadmissible``.  Rows do not depend on the thread count.
    """
    names = list(grid)
    valid = {f.name for f in fields(Scenario)}
    bad = set(names) - valid
    if bad:
        raise ValueError(f"unknown scenario fields in grid: {sorted(bad)}")
    if not names:
        return []
    tuples = list(itertools.product(*(grid[k] for k in names)))

    def one(values):
        kw = dict(zip(names, values))
        row = {f"grid.{k}": (list(v) if isinstance(v, tuple) else v) for k, v in kw.items()}
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                res = run_scenario(replace(base, **kw), cfg)
            row.update(res.report.to_dict())
            row["inadmissible"] = False
            row["error"] = ""
        except InadmissibleError as e:
            row.update(inadmissible=True, error=str(e))
        except (ValueError, ArithmeticError, RuntimeError) as e:
            row.update(inadmissible=False, error=f"{type(e).__name__}: {e}")
        return row

    return parallel_map(one, tuples)


# ------------------------------------------------------------- files


def _parse_value(key: str, text: str):
    t = text.strip()
    if key in ("family", "estimator", "norm"):
        return t
    if key in ("weight", "q") and t.lower() in ("", "none"):
        return None
    if key == "weight":
        return t
    if key == "theta":
        return tuple(float(v) for v in t.split(","))
    if key in ("budget", "seed"):
        return int(t)
    if key == "alpha":
        return float("inf") if t.lower() in ("inf", "infinity") else float(t)
    return float(t)


def read_scenario(path) -> Scenario:
    kw = {}
    valid = {f.name for f in fields(Scenario)}
    for ln, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        k, sep, v = line.partition("=")
        k = k.strip()
        if not sep:
            raise ValueError(f"{path}:{ln}: expected 'key = value'")
        if k not in valid:
            raise ValueError(f"{path}:{ln}: unknown key {k!r}")
        if k in kw:
            raise ValueError(f"{path}:{ln}: duplicate key {k!r}")
        kw[k] = _parse_value(k, v)
    return Scenario(**kw)


def write_scenario(s: Scenario, path) -> None:
    lines = []
    for f in fields(Scenario):
        v = getattr(s, f.name)
        if v is None:
            continue
        if f.name == "theta":
            v = ",".join(repr(t) for t in v)
        lines.append(f"{f.name} = {v}")
    Path(path).write_text("\n".join(lines) + "\n")
