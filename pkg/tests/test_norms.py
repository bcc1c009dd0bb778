import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcramer.norms import (LinearMap, Lp, NondifferentiableError, WeightedLp, conjugate_exponent, holder_check,
                           holder_extremal, parse_norm)


@st.composite
def norms(draw, n=None):
    n = n or draw(st.integers(1, 4))
    p = draw(st.floats(1.1, 8.0))
    kind = draw(st.sampled_from(["lp", "wlp", "map"]))
    if kind == "lp":
        return Lp(p), n
    if kind == "wlp":
        w = draw(st.lists(st.floats(0.2, 5.0), min_size=n, max_size=n))
        return WeightedLp(p, tuple(w)), n
    seed = draw(st.integers(0, 2**31))
    A = np.eye(n) + 0.4 * np.random.default_rng(seed).normal(size=(n, n))
    return LinearMap(A, Lp(p)), n


vecs = st.lists(st.floats(-10, 10).filter(lambda v: abs(v) > 1e-3), min_size=4, max_size=4)


def test_evaluate_examples():
    x = np.array([1.0, -2.0, 3.0])
    assert Lp(1).evaluate(x) == pytest.approx(6.0)
    assert Lp(np.inf).evaluate(x) == pytest.approx(3.0)
    assert LinearMap(np.diag([2.0, 1.0]), Lp(2)).evaluate(np.array([1.0, 1.0])) == pytest.approx(np.sqrt(5))


def test_dual_examples():
    assert Lp(2).dual() == Lp(2)
    assert Lp(1).dual() == Lp(np.inf)
    assert Lp(3).dual().p == pytest.approx(1.5)
    assert conjugate_exponent(1) == np.inf and conjugate_exponent(np.inf) == 1


def test_gradient_examples():
    x = np.array([3.0, -4.0])
    assert np.allclose(Lp(2).gradient(x), x / 5)
    assert np.allclose(Lp(1).gradient(np.array([2.0, -3.0])), [1.0, -1.0])
    g = Lp(3).gradient(np.array([1.0, 1.0]))
    # x_i^2 / ||x||_3^2 = 2^(-2/3); then x.x* = 2^(1/3) = ||(1,1)||_3 and ||x*||_(3/2) = 1
    assert np.allclose(g, 2 ** (-2 / 3), rtol=1e-14)
    assert g.sum() == pytest.approx(2 ** (1 / 3), rel=1e-14)
    assert Lp(1.5).evaluate(g) == pytest.approx(1.0, rel=1e-14)


def test_nondifferentiable_points():
    with pytest.raises(NondifferentiableError):
        Lp(2).gradient(np.zeros(2))
    with pytest.raises(NondifferentiableError):
        Lp(1).gradient(np.array([0.0, 1.0]))
    with pytest.raises(NondifferentiableError):
        Lp(np.inf).gradient(np.array([2.0, -2.0]))


def test_parse_norm_roundtrip(tmp_path):
    for text in ("lp:2", "lp:inf", "wlp:3:1.0,2.0", "map:2,0;0,1:lp:2"):
        N = parse_norm(text)
        assert parse_norm(N.spec()).evaluate(np.array([0.3, -1.2])) == pytest.approx(N.evaluate(np.array([0.3, -1.2])))
    f = tmp_path / "A.txt"
    f.write_text("2 0\n0 1\n")
    assert parse_norm(f"map:{f}:lp:2").evaluate(np.array([1.0, 1.0])) == pytest.approx(np.sqrt(5))
    with pytest.raises(ValueError):
        parse_norm("frob:2")


@given(norms(), vecs, vecs, st.floats(-5, 5))
def test_axioms(Nn, x, y, c):
    N, n = Nn
    x, y = np.array(x[:n]), np.array(y[:n])
    assert N.evaluate(c * x) == pytest.approx(abs(c) * N.evaluate(x), rel=1e-12, abs=1e-12)
    assert N.evaluate(x + y) <= N.evaluate(x) + N.evaluate(y) + 1e-12
    assert N.evaluate(x) > 0 and N.evaluate(np.zeros(n)) == 0


@given(norms(), vecs)
def test_dual_of_dual(Nn, x):
    N, n = Nn
    x = np.array(x[:n])
    assert N.dual().dual().evaluate(x) == pytest.approx(N.evaluate(x), rel=1e-12)


@given(norms(), vecs, vecs)
def test_dual_is_support_function(Nn, y, w):
    N, n = Nn
    y, w = np.array(y[:n]), np.array(w[:n])
    D = N.dual()
    ext = D.gradient(y)  # maximiser of w.y over the unit ball of N
    assert N.evaluate(ext) == pytest.approx(1.0, abs=1e-10)
    assert ext @ y == pytest.approx(D.evaluate(y), rel=1e-10)
    assert abs(w @ y) <= N.evaluate(w) * D.evaluate(y) * (1 + 1e-12)


@given(norms(), vecs, st.floats(0.01, 100))
def test_gradient_zero_homogeneous(Nn, x, c):
    N, n = Nn
    x = np.array(x[:n])
    assert np.allclose(N.gradient(c * x), N.gradient(x), rtol=1e-10, atol=1e-12)


@given(st.floats(1.1, 8.0), vecs, st.integers(0, 2**31))
@settings(max_examples=50)
def test_dual_vector_uniqueness(p, x, seed):
    x = np.array(x)
    N = Lp(p)
    g = N.gradient(x)
    rng = np.random.default_rng(seed)
    for _ in range(20):
        u = g + 10.0 ** rng.uniform(-6, -1) * rng.normal(size=x.size)
        u /= N.dual().evaluate(u)
        # any other unit-dual-norm vector falls strictly short of ||x||
        if np.linalg.norm(u - g) > 1e-8:
            assert x @ u < N.evaluate(x)


def test_holder_extremal_saturates():
    X = lambda t: np.stack([np.sin(3 * t[:, 0]) + 0.2, np.cos(t[:, 0]) * t[:, 0]], -1)  # noqa: E731
    w = lambda t: 1.0 + 0.5 * t[:, 0] ** 2  # noqa: E731
    for N, a in ((Lp(2), 2.0), (Lp(3), 1.7), (WeightedLp(2.5, (1.0, 3.0)), 3.0)):
        r = holder_check(X, holder_extremal(X, N, a, K=2.5), w, N, a, lo=[-1.0], hi=[1.0])
        assert abs(r.ratio - 1) < 1e-6 and r.saturated


@given(st.integers(0, 2**31), st.sampled_from([1.5, 2.0, 3.0]))
@settings(max_examples=30, deadline=None)
def test_holder_extremal_unique_under_perturbation(seed, a):
    # strictly convex dual: moving Y off the extremal direction loses equality
    rng = np.random.default_rng(seed)
    c = rng.normal(size=(2, 3))
    X = lambda t: np.stack([(c[i] * np.cos(np.outer(t[:, 0], [1, 2, 3]))).sum(1) for i in (0, 1)], -1)  # noqa: E731
    N = Lp(float(rng.uniform(1.3, 4.0)))
    Y0 = holder_extremal(X, N, a)
    w = lambda t: np.ones(len(t))  # noqa: E731
    d = rng.normal(size=2)
    for eps in (1e-2, 1e-1):
        Y = lambda t: Y0(t) + eps * np.sin(t[:, :1] * 5 + d)  # noqa: E731
        r = holder_check(X, Y, w, N, a, lo=[-1.0], hi=[1.0])
        assert r.ratio > 1 + 1e-9


def test_holder_point_mass_l1():
    r = holder_check(lambda t: np.array([[1.0, 0.0]]), lambda t: np.array([[1.0, 1.0]]), lambda t: np.ones(len(t)),
                     Lp(1), 1.0, nodes=(np.array([0.0]), np.array([1.0])))
    assert r.lhs == pytest.approx(1.0) and r.rhs == pytest.approx(1.0)


def test_holder_random_smooth():
    rng = np.random.default_rng(3)
    c = rng.normal(size=(4, 3))
    X = lambda t: np.stack([(c[i] * np.cos(np.outer(t[:, 0], [1, 2, 3]))).sum(1) for i in (0, 1)], -1)  # noqa: E731
    Y = lambda t: np.stack([(c[i] * np.sin(np.outer(t[:, 0], [1, 2, 3]))).sum(1) for i in (2, 3)], -1)  # noqa: E731
    r = holder_check(X, Y, lambda t: np.ones(len(t)), Lp(2), 2.0, lo=[-1.0], hi=[1.0])
    assert r.ratio >= 1 and r.params["ratio_a"] >= 1 and r.params["ratio_b"] >= 1
