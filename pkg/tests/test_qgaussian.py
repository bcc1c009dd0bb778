import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats
from scipy.special import gammaln

from qcramer.norms import Lp
from qcramer.qgaussian import (InadmissibleError, QGaussianParams, as_density, baseline_measures, density,
                               gamma_for_moment, parse_qgauss, partition_function, sample)


def z_closed_form(q, gamma):
    """1-D, alpha = 2 partition function via Student-t / beta normalisers."""
    if q == 1:
        return np.sqrt(np.pi / gamma)
    if q < 1:
        e = 1 / (1 - q)
        return np.sqrt(np.pi / ((1 - q) * gamma)) * np.exp(gammaln(e - 0.5) - gammaln(e))
    e = 1 / (q - 1)
    return np.sqrt(np.pi / ((q - 1) * gamma)) * np.exp(gammaln(e + 1) - gammaln(e + 1.5))


def scipy_law(q, gamma):
    """The same 1-D alpha = 2 law as a scipy distribution (independent oracle)."""
    if q == 1:
        return stats.norm(scale=np.sqrt(1 / (2 * gamma)))
    if q < 1:
        nu = 2 / (1 - q) - 1
        return stats.t(nu, scale=np.sqrt(1 / (nu * (1 - q) * gamma)))
    a = 1 / (q - 1) + 1
    R = ((q - 1) * gamma) ** -0.5
    return stats.beta(a, a, loc=-R, scale=2 * R)


def test_density_examples():
    p = QGaussianParams(1.0, 2.0, 1.0, 1, Lp(2))
    assert density(p, np.array([0.0])) == pytest.approx(1 / np.sqrt(np.pi), rel=1e-10)
    p3 = QGaussianParams(3.0, 2.0, 1.0, 1, Lp(2))
    assert p3.r_max == pytest.approx(1 / np.sqrt(2))
    assert density(p3, np.array([0.71])) == 0.0 and density(p3, np.array([2.0])) == 0.0
    pq = QGaussianParams(0.8, 1.5, 2.0, 2, Lp(3))
    x = np.random.default_rng(0).normal(size=(50, 2))
    assert np.all(density(pq, x) <= density(pq, np.zeros(2)))


def test_partition_examples():
    assert partition_function(QGaussianParams(1.0, 2.0, 1.0, 1)) == pytest.approx(np.sqrt(np.pi), rel=1e-10)
    assert partition_function(QGaussianParams(3.0, 2.0, 1.0, 1)) == pytest.approx(np.pi / (2 * np.sqrt(2)), rel=1e-9)
    z = partition_function(QGaussianParams(1.0, 1.0, 1.0, 2, Lp(1)))
    direct = integrate.dblquad(lambda y, x: np.exp(-abs(x) - abs(y)), -40, 40, -40, 40, epsabs=1e-12)[0]
    assert z == pytest.approx(4.0, rel=1e-9) and direct == pytest.approx(z, rel=1e-8)


@pytest.mark.parametrize("q", [0.5, 0.8, 1.0, 1.3, 2.0, 3.0])
@pytest.mark.parametrize("gamma", [0.5, 2.0])
def test_partition_closed_forms(q, gamma):
    assert partition_function(QGaussianParams(q, 2.0, gamma, 1)) == pytest.approx(z_closed_form(q, gamma), rel=1e-8)


def test_inadmissible():
    with pytest.raises(InadmissibleError):
        QGaussianParams(-0.5, 1.0, 1.0, 1)  # needs q > (n - alpha)/n = 0
    with pytest.raises(InadmissibleError):
        baseline_measures(QGaussianParams(0.3, 2.0, 1.0, 1))  # M_q diverges for q <= n/(n+alpha)


def test_baseline_examples():
    b = baseline_measures(QGaussianParams(1.0, 2.0, 0.5, 1))
    assert b["m_alpha"] == pytest.approx(1.0, rel=1e-10)
    assert b["phi"] == pytest.approx(1.0, rel=1e-10)
    assert b["M_q"] == pytest.approx(1.0, rel=1e-12)
    p3 = QGaussianParams(3.0, 2.0, 1.0, 1)
    G = as_density(p3)
    R = p3.r_max
    direct = integrate.quad(lambda x: x * x * G.pdf(np.array([[x]]))[0], -R, R, epsabs=0, epsrel=1e-13)[0]
    assert baseline_measures(p3)["m_alpha"] == pytest.approx(direct, rel=1e-9)


@pytest.mark.parametrize("q", [0.6, 0.9, 1.0, 1.5, 3.0])
def test_moment_vs_scipy_law(q):
    law = scipy_law(q, 1.0)
    assert baseline_measures(QGaussianParams(q, 2.0, 1.0, 1))["m_alpha"] == pytest.approx(law.var(), rel=1e-8)


@pytest.mark.parametrize("q,alpha,n", [(0.8, 2.0, 2), (1.0, 1.5, 3), (1.4, 3.0, 2), (2.0, 2.0, 3)])
def test_nd_radial_vs_direct(q, alpha, n):
    """Radial reduction against a brute-force tensor quadrature of the density and moment."""
    from qcramer.quadrature import box_rule

    p = QGaussianParams(q, alpha, 1.0, n, Lp(2))
    G = as_density(p)
    R = min(p.r_max, 12.0 * p.scale) if q < 1 else min(p.r_max, 8.0 * p.scale)
    t, w = box_rule([-R] * n, [R] * n, 96 if n == 2 else 40)
    v = G.pdf(t)
    mass = float(np.sum(w * v))
    m = float(np.sum(w * v * np.linalg.norm(t, axis=1) ** alpha))
    tol = 2e-3 if (q < 1 or n == 3) else 1e-5  # coarse 40^3 tensor grid in 3-D
    assert mass == pytest.approx(1.0, rel=tol)
    assert m == pytest.approx(baseline_measures(p)["m_alpha"], rel=10 * tol)


@given(st.floats(0.55, 3.0), st.floats(1.2, 4.0), st.floats(0.3, 3.0), st.floats(0.2, 5.0))
@settings(max_examples=30)
def test_gamma_scaling(q, alpha, gamma, c):
    p = QGaussianParams(q, alpha, gamma, 1)
    if not q > 1 / (1 + alpha):
        return
    m1 = baseline_measures(p)["m_alpha"]
    m2 = baseline_measures(p.with_gamma(c * gamma))["m_alpha"]
    assert m2 == pytest.approx(m1 / c, rel=1e-8)


@given(st.floats(0.45, 3.0), st.floats(1.1, 4.0), st.integers(1, 3))
@settings(max_examples=40)
def test_q_location_saturation_property(q, alpha, n):
    if not q > max((n - 1) / n, n / (n + alpha)):
        return
    b = baseline_measures(QGaussianParams(q, alpha, 1.0, n))
    assert b["m_alpha"] ** (1 / alpha) * b["I"] ** (1 / b["beta"]) == pytest.approx(n, rel=1e-5)


def test_sampling_gaussian_variance():
    x = sample(QGaussianParams(1.0, 2.0, 0.5, 1), 100_000, seed=11)
    se = np.sqrt(2.0 / x.size)
    assert abs(x.var() - 1.0) < 4 * se


def test_sampling_compact_support():
    p = QGaussianParams(3.0, 2.0, 1.0, 1)
    x = sample(p, 20_000, seed=2)
    assert np.all(np.abs(x) <= p.r_max)


@pytest.mark.parametrize("q", [0.7, 1.0, 1.5, 3.0])
def test_sampling_ks(q):
    x = sample(QGaussianParams(q, 2.0, 1.0, 1), 100_000, seed=5)[:, 0]
    d = stats.kstest(x, scipy_law(q, 1.0).cdf).statistic
    assert d < 1.63 / np.sqrt(x.size)


def test_sampling_moment_2d_l3():
    p = QGaussianParams(0.9, 2.0, 1.0, 2, Lp(3))
    x = sample(p, 100_000, seed=9)
    r = Lp(3).evaluate(x) ** 2
    assert abs(r.mean() - baseline_measures(p)["m_alpha"]) < 3 * r.std() / np.sqrt(r.size)


def test_sampling_deterministic():
    p = QGaussianParams(0.8, 2.0, 1.0, 2)
    assert np.array_equal(sample(p, 70_000, seed=4), sample(p, 70_000, seed=4))


def test_parse_and_gamma_for_moment():
    p = parse_qgauss("qgauss:q=0.9,alpha=3,gamma=2,n=2,norm=lp:3")
    assert (p.q, p.alpha, p.gamma, p.n) == (0.9, 3.0, 2.0, 2) and p.norm == Lp(3)
    with pytest.raises(ValueError):
        parse_qgauss("qgauss:q=1,beta=2")
    g = gamma_for_moment(0.9, 2.0, 1, Lp(2), 2.5)
    assert baseline_measures(QGaussianParams(0.9, 2.0, g, 1))["m_alpha"] == pytest.approx(2.5, rel=1e-9)
