"""Checkers for the Cramér-Rao type inequalities; each returns an InequalityReport.

Conventions: ``alpha`` is the moment exponent and ``beta`` its Hölder
conjugate; the moment side uses the norm N and every Fisher term its dual.
Right-hand sides anchored at a q-Gaussian G are computed once per
(q, alpha, n, norm) at gamma = 1 and cached; the anchor is checked to be the
same at gamma = 2 and 4.
"""

from __future__ import annotations

import threading

import numpy as np
from scipy.special import betaln

from .deformed import entropy_power, escort, info_generating
from .density import AnalyticDensity, Density
from .info_measures import (
    ParametricFamily,
    SupportError,
    bias_divergence,
    escort_family,
    expectation_theta,
    i_fisher_q,
    i_fisher_q_dual,
    moment,
    parametric_fisher,
    phi_fisher,
    TINY,
    _pow,
)
from .norms import Lp, NormSpec, conjugate_exponent
from .qgaussian import InadmissibleError, QGaussianParams, baseline_measures
from .quadrature import DEFAULT, QuadratureConfig, quad1d
from .report import SATURATION_TOL, InequalityReport

__all__ = [
    "ConsistencyError",
    "BoundaryError",
    "lutwak_admissible",
    "lutwak_anchors",
    "check_main_cr",
    "q_fisher_parametric",
    "check_q_cr",
    "check_location_cr",
    "beta_function_inequality",
    "check_q_location_cr",
    "check_lutwak_cr",
    "check_moment_entropy",
    "check_stam",
    "lutwak_chain_reports",
]

DUAL_TOL = 1e-8
ANCHOR_GAMMAS = (1.0, 2.0, 4.0)
ANCHOR_TOL = 1e-6
ERROR_FLOOR = 1e-10
BOUNDARY_TOL = 1e-10


class ConsistencyError(AssertionError):
    """Two routes to the same quantity disagree beyond tolerance."""


class BoundaryError(ValueError):
    """A density that must vanish on the boundary of its support does not."""


def _rel(val, err):
    return abs(err / val) if val else abs(err)


def _nerr(*rels):
    return max(ERROR_FLOOR, float(sum(rels)))


# ------------------------------------------------------------- parametric bounds


def _theta_moment(g_fam: ParametricFamily, estimator, theta, alpha, norm, cfg):
    k = g_fam.theta_dim

    def fn(x):
        d = np.asarray(estimator(x), float).reshape(len(x), k) - theta
        return norm.evaluate(d) ** alpha

    return expectation_theta(g_fam, fn, theta, cfg)


def check_main_cr(fam: ParametricFamily, g_fam: ParametricFamily, estimator, theta, alpha: float,
                  norm: NormSpec = Lp(2), cfg: QuadratureConfig = DEFAULT,
                  saturation_tol: float = SATURATION_TOL) -> InequalityReport:
    """E_g[||theta_hat - theta||^a]^(1/a) I_b[f|g; theta]^(1/b) >= |n + div B_f(theta)|."""
    theta = np.atleast_1d(np.asarray(theta, float))
    beta = conjugate_exponent(alpha)
    mom, emom = _theta_moment(g_fam, estimator, theta, alpha, norm, cfg)
    fi, efi = parametric_fisher(fam, g_fam, theta, beta, norm, cfg, with_error=True)
    div = bias_divergence(fam, estimator, theta, cfg, with_error=True)
    n = fam.theta_dim
    lhs = mom ** (1 / alpha) * fi ** (1 / beta)
    rhs = abs(n + div.value)
    err = _nerr(_rel(mom, emom) / alpha, _rel(fi, efi) / beta, div.fd_error / max(rhs, 1e-300))
    return InequalityReport("main-cr", lhs, rhs, err,
                            {"alpha": alpha, "beta": beta, "theta": theta, "n": n, "norm": norm.spec(),
                             "family": fam.name, "weight": g_fam.name, "moment": mom, "fisher": fi,
                             "bias_divergence": div.value},
                            saturation_tol)


def q_fisher_parametric(g_fam: ParametricFamily, q: float, theta, beta: float, norm: NormSpec = Lp(2),
                        cfg: QuadratureConfig = DEFAULT, form: int = 1) -> float:
    """I_{beta,q}[f|g; theta] for f = g^q / M_q[g].

    form 1 works with g and grad ln(g^q / M_q[g]); form 2 with f, grad ln f,
    M_qbar[f] and qbar-expectations, qbar = 1/q.
    """
    theta = np.atleast_1d(np.asarray(theta, float))
    dual = norm.dual()
    k = g_fam.theta_dim
    if form == 1:
        gd = g_fam.at(theta, cfg, check=False).widened(q)
        mq = gd.integrate(lambda x, v, dv: _pow(v, q), cfg)[0]
        dmq = np.array([
            gd.integrate(lambda x, v, dv, i=i: q * _pow(v, q - 1.0) * g_fam.gradient(x, theta)[:, i], cfg)[0]
            for i in range(k)
        ])

        def fn(x, v, dv):
            with np.errstate(divide="ignore", invalid="ignore"):
                score = q * g_fam.gradient(x, theta) / np.where(v > TINY, v, 1.0)[:, None] - dmq[None, :] / mq
            val = _pow(v, beta * (q - 1.0) + 1.0) * dual.evaluate(score) ** beta
            return np.where(v > TINY, val, 0.0)

        return gd.integrate(fn, cfg)[0] / mq**beta
    if form == 2:
        qb = 1.0 / q
        f_fam = escort_family(g_fam, q, cfg)
        fd = f_fam.at(theta, cfg, check=False)
        fd = fd.widened(qb) if isinstance(fd, AnalyticDensity) else fd
        mqb = fd.integrate(lambda x, v, dv: _pow(v, qb), cfg)[0]

        def fn(x, v, dv):
            with np.errstate(divide="ignore", invalid="ignore"):
                score = f_fam.gradient(x, theta) / np.where(v > TINY, v, 1.0)[:, None]
            val = _pow(v, qb + beta * (1.0 - qb)) * dual.evaluate(score) ** beta
            return np.where(v > TINY, val, 0.0)

        # M_qbar^beta E_qbar[...] with E_qbar[h] = int f^qbar h / M_qbar
        return mqb ** (beta - 1.0) * fd.integrate(fn, cfg)[0]
    raise ValueError("form must be 1 or 2")


def check_q_cr(fam: ParametricFamily, q: float, estimator, theta, alpha: float, norm: NormSpec = Lp(2),
               cfg: QuadratureConfig = DEFAULT, saturation_tol: float = SATURATION_TOL, cross_check: bool = True):
    """Both escort forms of the q-Cramér-Rao inequality for g = ``fam`` and f = g^q / M_q[g].

    Form 1: E[||.||^a]^(1/a) I^(1/b) >= |n + div E_q[theta_hat - theta]|, plain moments under g.
    Form 2: E_qbar[||.||^a]^(1/a) I^(1/b) >= |n + div E[theta_hat - theta]|, qbar-moments under f.
    With ``cross_check`` both are compared with ``check_main_cr`` on the pair (f, g).
    """
    theta = np.atleast_1d(np.asarray(theta, float))
    beta = conjugate_exponent(alpha)
    n = fam.theta_dim
    f_fam = escort_family(fam, q, cfg)
    div = bias_divergence(f_fam, estimator, theta, cfg, with_error=True)
    rhs = abs(n + div.value)
    # form 1: moments under g directly
    m1, em1 = _theta_moment(fam, estimator, theta, alpha, norm, cfg)
    i1 = q_fisher_parametric(fam, q, theta, beta, norm, cfg, form=1)
    # form 2: moments under the qbar-escort of f
    g_back = escort_family(f_fam, 1.0 / q, cfg)
    m2, em2 = _theta_moment(g_back, estimator, theta, alpha, norm, cfg)
    i2 = q_fisher_parametric(fam, q, theta, beta, norm, cfg, form=2)
    err = _nerr(_rel(m1, em1) / alpha, div.fd_error / max(rhs, 1e-300))
    common = {"q": q, "alpha": alpha, "beta": beta, "theta": theta, "n": n, "norm": norm.spec(),
              "family": fam.name, "bias_divergence": div.value}
    r1 = InequalityReport("q-cr-1", m1 ** (1 / alpha) * i1 ** (1 / beta), rhs, err,
                          dict(common, moment=m1, fisher=i1), saturation_tol)
    r2 = InequalityReport("q-cr-2", m2 ** (1 / alpha) * i2 ** (1 / beta), rhs, err,
                          dict(common, moment=m2, fisher=i2), saturation_tol)
    if abs(r1.lhs / r2.lhs - 1) > DUAL_TOL:
        raise ConsistencyError(f"escort forms disagree: {r1.lhs!r} vs {r2.lhs!r}")
    if cross_check:
        main = check_main_cr(f_fam, fam, estimator, theta, alpha, norm, cfg)
        for r in (r1, r2):
            if abs(r.lhs / main.lhs - 1) > DUAL_TOL or abs(r.rhs - main.rhs) > DUAL_TOL * max(1.0, main.rhs):
                raise ConsistencyError(f"{r.name} disagrees with the general inequality on the escort pair")
    return r1, r2


# ------------------------------------------------------ location families


def _boundary_check(f: Density, tol: float = BOUNDARY_TOL):
    if not getattr(f, "compact", False) or not isinstance(f, AnalyticDensity):
        return
    n = f.dim
    per = 2 if n == 1 else 17
    axes = [np.linspace(a, b, per) for a, b in zip(f.lo, f.hi)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, n)
    face = np.any(np.isclose(pts, f.lo) | np.isclose(pts, f.hi), axis=1)
    vals = f.pdf(pts[face])
    if np.any(vals > tol):
        raise BoundaryError(f"{f.name} does not vanish on the boundary: f = {float(vals.max()):.3g} "
                            f"at {pts[face][np.argmax(vals)].tolist()}")


def _support_witness(f: Density, g: Density, dual: NormSpec):
    n = f.dim
    per = 257 if n == 1 else (33 if n == 2 else 13)
    axes = [np.linspace(a, b, per) for a, b in zip(f.lo, f.hi)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, n)
    inside = np.all((pts > f.lo) & (pts < f.hi), axis=1) if n > 1 else (pts[:, 0] > f.lo[0]) & (pts[:, 0] < f.hi[0])
    pts = pts[inside]
    bad = (g(pts) <= 0) & (dual.evaluate(f.grad(pts)) > 1e-12)
    return pts[np.argmax(bad)] if np.any(bad) else None


def _location_fisher(f: AnalyticDensity, g: Density, beta: float, norm: NormSpec, cfg: QuadratureConfig):
    """int ||grad f / g||_*^beta g dx, over g's box with f's box edges as breakpoints."""
    dual = norm.dual()
    w = _support_witness(f, g, dual)
    if w is not None:
        raise SupportError(f"grad f != 0 where g = 0, e.g. x = {w.tolist()}", witness=w)
    if f is g and g.radial is not None and g.radial.norm == norm:
        # ||grad g / g||_* = |h'/h| for a radial density
        return g.radial.integrate(lambda r, h, dl: h * np.abs(dl) ** beta, cfg)
    pts = None
    if g.dim == 1:
        extra = [f.lo[0], f.hi[0]] + list(np.atleast_1d(g.points if g.points is not None else []))
        extra += list(np.atleast_1d(f.points if f.points is not None else []))
        pts = np.unique(np.asarray(extra, float))
    view = AnalyticDensity(g.pdf, g.dim, lo=g.lo, hi=g.hi, points=pts, check=False, compact=True)

    def fn(x, v, dv):
        gn = dual.evaluate(f.grad(x))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return np.where(v > TINY, gn**beta * _pow(v, 1.0 - beta), 0.0)

    return view.integrate(fn, cfg)


def check_location_cr(f: AnalyticDensity, g: Density, alpha: float, norm: NormSpec = Lp(2),
                      cfg: QuadratureConfig = DEFAULT, saturation_tol: float = SATURATION_TOL) -> InequalityReport:
    """(int ||x||^a g)^(1/a) (int ||grad f / g||_*^b g)^(1/b) >= n.

    ``alpha = inf`` uses the essential sup of ||x|| over the support of g
    (then beta = 1).
    """
    _boundary_check(f)
    beta = conjugate_exponent(alpha) if np.isfinite(alpha) else 1.0
    mom, emom = moment(g, alpha, norm, cfg, with_error=True)
    fi, efi = _location_fisher(f, g, beta, norm, cfg)
    m_side = mom if np.isinf(alpha) else mom ** (1 / alpha)
    lhs = m_side * fi ** (1 / beta)
    err = _nerr(0.0 if np.isinf(alpha) else _rel(mom, emom) / alpha, _rel(fi, efi) / beta)
    return InequalityReport("location-cr", lhs, float(f.dim), err,
                            {"alpha": alpha, "beta": beta, "n": f.dim, "norm": norm.spec(), "f": f.name,
                             "g": g.name, "moment": mom, "fisher": fi},
                            saturation_tol)


def beta_function_inequality(a: float, b: float, cfg: QuadratureConfig = DEFAULT) -> InequalityReport:
    """(a-1) B(a-1, b) + (b-1) B(a, b-1) >= B(a, b) for a, b > 1.

    ``params['middle']`` holds B(a, b) int_0^1 |f'| for f the Beta(a, b)
    density, which sits between the two sides.
    """
    if not (a > 1 and b > 1):
        raise ValueError("the beta-function inequality needs a > 1 and b > 1")
    lhs = (a - 1) * np.exp(betaln(a - 1, b)) + (b - 1) * np.exp(betaln(a, b - 1))
    rhs = float(np.exp(betaln(a, b)))

    def abs_dfx(t):
        # B(a,b) f'(t) = t^(a-2) (1-t)^(b-2) ((a-1)(1-t) - (b-1) t)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.exp((a - 2) * np.log(t) + (b - 2) * np.log1p(-t)) * np.abs((a - 1) * (1 - t) - (b - 1) * t)
        return np.where((t > 0) & (t < 1), v, 0.0)

    mode = (a - 1) / (a + b - 2)
    middle = quad1d(abs_dfx, 0.0, 1.0, cfg, points=[mode])[0]
    return InequalityReport("beta-fn", float(lhs), rhs, 1e-13, {"a": a, "b": b, "middle": middle})


def check_q_location_cr(g: Density, q: float, alpha: float, norm: NormSpec = Lp(2), cfg: QuadratureConfig = DEFAULT,
                        saturation_tol: float = SATURATION_TOL, dual_tol: float = DUAL_TOL) -> InequalityReport:
    """m_a[g]^(1/a) I_{b,q}[g]^(1/b) >= n, with the f = g^q/M_q form cross-checked."""
    beta = conjugate_exponent(alpha)
    mom, emom = moment(g, alpha, norm, cfg, with_error=True)
    fi, efi = i_fisher_q(g, beta, q, norm, cfg, with_error=True)
    lhs = mom ** (1 / alpha) * fi ** (1 / beta)
    # qbar-form: moments under the qbar-escort of f, Fisher through f
    f = escort(g, q, cfg)
    mom_bar = moment(escort(f, 1.0 / q, cfg), alpha, norm, cfg)
    fi_bar = i_fisher_q_dual(f, beta, q, norm, cfg)
    lhs_bar = mom_bar ** (1 / alpha) * fi_bar ** (1 / beta)
    err = _nerr(_rel(mom, emom) / alpha, _rel(fi, efi) / beta)
    if abs(lhs_bar / lhs - 1) > max(dual_tol, 10 * err):
        raise ConsistencyError(f"qbar form {lhs_bar!r} differs from {lhs!r}")
    return InequalityReport("q-location-cr", lhs, float(g.dim), err,
                            {"q": q, "alpha": alpha, "beta": beta, "n": g.dim, "norm": norm.spec(), "g": g.name,
                             "moment": mom, "fisher": fi, "dual_lhs": lhs_bar},
                            saturation_tol)


# ------------------------------------------------------------- Lutwak chain


def lutwak_admissible(q: float, alpha: float, n: int) -> bool:
    return alpha > 1 and q > max((n - 1) / n, n / (n + alpha))


_ANCHORS: dict = {}
_ANCHOR_LOCK = threading.Lock()


def _anchor_values(q, alpha, n, norm, gamma, cfg):
    p = QGaussianParams(q, alpha, gamma, n, norm)
    bm = baseline_measures(p, conjugate_exponent(alpha), cfg)
    lam = p.lam
    beta = bm["beta"]
    m, phi, N = bm["m_alpha"], bm["phi"], bm["N_q"]
    return {
        "lutwak": m ** (1 / alpha) * phi ** (1 / (beta * lam)),
        "moment_entropy": m ** (1 / alpha) / N ** (1 / n),
        "stam": phi ** (1 / (beta * lam)) * N ** (1 / n),
        "err": bm["m_alpha_err"] + bm["phi_err"] + bm["N_q_err"],
    }


def lutwak_anchors(q: float, alpha: float, n: int, norm: NormSpec = Lp(2), cfg: QuadratureConfig = DEFAULT) -> dict:
    """G-valued right-hand sides at gamma = 1, with scale invariance over gamma in {1, 2, 4} asserted."""
    if not lutwak_admissible(q, alpha, n):
        raise InadmissibleError(f"(q={q}, alpha={alpha}, n={n}) outside q > max((n-1)/n, n/(n+alpha)), alpha > 1")
    key = (q, alpha, n, norm.spec(), cfg)
    with _ANCHOR_LOCK:
        hit = _ANCHORS.get(key)
    if hit is not None:
        return hit
    vals = [_anchor_values(q, alpha, n, norm, gm, cfg) for gm in ANCHOR_GAMMAS]
    ref = dict(vals[0])
    spread = 0.0
    for v in vals[1:]:
        for name in ("lutwak", "moment_entropy", "stam"):
            spread = max(spread, abs(v[name] / ref[name] - 1))
    if spread > ANCHOR_TOL:
        raise ConsistencyError(f"G anchors not scale invariant (spread {spread:.3g})")
    ref["scale_spread"] = spread
    with _ANCHOR_LOCK:
        _ANCHORS.setdefault(key, ref)
    return ref


def _g_measures(g: Density, q, alpha, norm, cfg):
    beta = conjugate_exponent(alpha)
    m, em = moment(g, alpha, norm, cfg, with_error=True)
    phi, ephi = phi_fisher(g, beta, q, norm, cfg, with_error=True)
    N = entropy_power(g, q, cfg)
    return {"m": m, "phi": phi, "N": N, "beta": beta, "err": _rel(m, em) + _rel(phi, ephi)}


def lutwak_chain_reports(g: Density, q: float, alpha: float, norm: NormSpec = Lp(2), cfg: QuadratureConfig = DEFAULT,
                     saturation_tol: float = SATURATION_TOL, identity_tol: float = 1e-6):
    """Lutwak-type, moment-entropy and Stam reports for g, sharing one set of integrals.

    The Lutwak ratio equals the product of the other two; that identity is asserted.
    """
    n = g.dim
    anc = lutwak_anchors(q, alpha, n, norm, cfg)
    gm = _g_measures(g, q, alpha, norm, cfg)
    lam = n * (q - 1.0) + 1.0
    beta = gm["beta"]
    m, phi, N = gm["m"], gm["phi"], gm["N"]
    err = _nerr(gm["err"], anc["err"])
    params = {"q": q, "alpha": alpha, "beta": beta, "n": n, "lambda": lam, "norm": norm.spec(), "g": g.name}
    lut = InequalityReport("lutwak", m ** (1 / alpha) * phi ** (1 / (beta * lam)), anc["lutwak"], err,
                           dict(params), saturation_tol)
    me = InequalityReport("moment-entropy", m ** (1 / alpha) / N ** (1 / n), anc["moment_entropy"], err,
                          dict(params), saturation_tol)
    st = InequalityReport("stam", phi ** (1 / (beta * lam)) * N ** (1 / n), anc["stam"], err,
                          dict(params), saturation_tol)
    gap = abs(lut.ratio - me.ratio * st.ratio)
    if gap > identity_tol:
        raise ConsistencyError(f"Lutwak ratio {lut.ratio!r} != moment-entropy x Stam {me.ratio * st.ratio!r}")
    st.params["identity_gap"] = gap
    return lut, me, st


def check_lutwak_cr(g: Density, q: float, alpha: float, norm: NormSpec = Lp(2), cfg: QuadratureConfig = DEFAULT,
                    saturation_tol: float = SATURATION_TOL) -> InequalityReport:
    """m_a[g]^(1/a) phi_{b,q}[g]^(1/(b lam)) >= the same at G, lam = n(q-1)+1."""
    return lutwak_chain_reports(g, q, alpha, norm, cfg, saturation_tol)[0]


def check_moment_entropy(g: Density, q: float, alpha: float, norm: NormSpec = Lp(2), cfg: QuadratureConfig = DEFAULT,
                         saturation_tol: float = SATURATION_TOL) -> InequalityReport:
    """m_a[g]^(1/a) / N_q[g]^(1/n) >= the same at G; needs only q > n/(n+a)."""
    n = g.dim
    if not q > n / (n + alpha):
        raise InadmissibleError(f"q = {q} <= n/(n+alpha)")
    p = QGaussianParams(q, alpha, 1.0, n, norm)
    bm = baseline_measures(p, np.inf, cfg)
    rhs = bm["m_alpha"] ** (1 / alpha) / bm["N_q"] ** (1 / n)
    m, em = moment(g, alpha, norm, cfg, with_error=True)
    N = entropy_power(g, q, cfg)
    return InequalityReport("moment-entropy", m ** (1 / alpha) / N ** (1 / n), rhs,
                            _nerr(_rel(m, em), bm["m_alpha_err"] + bm["N_q_err"]),
                            {"q": q, "alpha": alpha, "n": n, "norm": norm.spec(), "g": g.name}, saturation_tol)


def check_stam(g: Density, q: float, alpha: float, norm: NormSpec = Lp(2), cfg: QuadratureConfig = DEFAULT,
               saturation_tol: float = SATURATION_TOL) -> InequalityReport:
    """phi_{b,q}[g]^(1/(b lam)) N_q[g]^(1/n) >= the same at G."""
    return lutwak_chain_reports(g, q, alpha, norm, cfg, saturation_tol)[2]
