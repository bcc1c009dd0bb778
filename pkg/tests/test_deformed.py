import numpy as np
import pytest
from hypothesis import given, strategies as st

from qcramer.deformed import DeformationIndex, entropy_power, escort, exp_q, info_generating, ln_q
from qcramer.density import gaussian, gaussian_mixture, uniform
from qcramer.info_measures import moment


def test_exp_q_examples():
    assert exp_q(0.0, 0.3) == 1.0
    assert exp_q(0.0, 2.5) == 1.0
    assert exp_q(1.3, 1.0) == pytest.approx(np.exp(1.3), rel=1e-15)
    assert exp_q(-3.0, 0.0) == 0.0
    assert exp_q(1.0, 0.5) == pytest.approx(2.25, rel=1e-15)


def test_ln_q_examples():
    assert ln_q(1.0, 0.4) == 0.0
    assert ln_q(7.0, 1.0) == pytest.approx(np.log(7.0), rel=1e-15)
    assert ln_q(4.0, 0.5) == pytest.approx(2.0, rel=1e-15)
    with pytest.raises(ValueError):
        ln_q(0.0, 0.5)


def test_limit_switch_continuity():
    for x in (-0.5, 0.3, 2.0):
        assert exp_q(x, 1 + 1e-9) == pytest.approx(np.exp(x), rel=1e-8)
        assert exp_q(x, 1 + 1e-6) == pytest.approx(np.exp(x), rel=1e-5)


@given(st.floats(-6, 6), st.floats(0.05, 3.0))
def test_exp_ln_inverse(logx, q):
    # 1e-12 scaled by the condition number of exp_q at y = ln_q(x), which
    # blows up where 1 + (1-q) y is tiny (the q-log saturating at 1/(q-1))
    x = 10.0**logx
    y = ln_q(x, q)
    cond = abs(y) / abs(1 + (1 - q) * y) if abs(q - 1) > 1e-8 else abs(y)
    assert exp_q(y, q) == pytest.approx(x, rel=1e-12 * max(1.0, cond))


@given(st.floats(-5, 5), st.floats(0.0, 0.5), st.floats(-1.5, 3.0))
def test_exp_q_nondecreasing(x, dx, q):
    assert exp_q(x + dx, q) >= exp_q(x, q)


def test_deformation_index():
    d = DeformationIndex(0.8)
    assert d.q_bar == pytest.approx(1.25)
    assert d.q_star == pytest.approx(1.2)
    assert d.admissible(1, 2.0) and not DeformationIndex(0.3).admissible(1, 2.0)
    assert not DeformationIndex(0.5).admissible(2, 2.0)  # needs q > max(1/2, 1/2)
    assert DeformationIndex(0.51).admissible(2, 2.0)
    with pytest.raises(ValueError):
        DeformationIndex(-1.0).q_bar


def test_info_generating_examples():
    assert info_generating(gaussian(1.3), 1.0) == pytest.approx(1.0, abs=1e-10)
    assert info_generating(uniform(0, 1), 2.7) == pytest.approx(1.0, abs=1e-12)
    assert info_generating(gaussian(1.0), 2.0) == pytest.approx(1 / (2 * np.sqrt(np.pi)), rel=1e-10)


def test_escort_examples():
    u = escort(uniform(0, 1), 3.0)
    x = np.linspace(0.05, 0.95, 7)[:, None]
    assert np.allclose(u.pdf(x), 1.0, atol=1e-12)
    e = escort(gaussian(1.5), 2.0)
    assert moment(e, 2.0) == pytest.approx(1.5**2 / 2, rel=1e-9)


def test_escort_duality_and_normalisation():
    g = gaussian_mixture([0.3, 0.7], [[-1.0], [1.2]], [0.6, 0.9])
    x = np.linspace(-3, 3, 41)[:, None]
    for q in (0.7, 1.4, 2.0):
        f = escort(g, q)
        assert info_generating(f, 1.0) == pytest.approx(1.0, abs=1e-9)
        back = escort(f, 1 / q)
        assert np.allclose(back.pdf(x), g.pdf(x), rtol=1e-8, atol=1e-12)


def test_entropy_power_examples():
    assert entropy_power(uniform(0, 1), 0.5) == pytest.approx(1.0, rel=1e-12)
    assert entropy_power(uniform(0, 2), 2.0) == pytest.approx(2.0, rel=1e-12)
    assert entropy_power(gaussian(1.0), 1.0) == pytest.approx(np.sqrt(2 * np.pi * np.e), rel=1e-10)
    # Renyi limit approaches the Shannon value
    assert entropy_power(gaussian(1.0), 1 + 1e-5) == pytest.approx(np.sqrt(2 * np.pi * np.e), rel=1e-5)


def test_gaussian_renyi_closed_form():
    s = 0.7
    for q in (0.5, 2.0, 3.0):
        expect = np.sqrt(2 * np.pi * s * s) * q ** (-1 / (2 * (1 - q)))
        assert entropy_power(gaussian(s), q) == pytest.approx(expect, rel=1e-9)


def test_info_generating_log_convex():
    g = gaussian_mixture([0.5, 0.5], [[-1.0], [1.0]], [0.5, 0.8])
    qs = np.linspace(0.5, 3.0, 11)
    lm = np.log([info_generating(g, q) for q in qs])
    assert np.all(lm[2:] - 2 * lm[1:-1] + lm[:-2] >= -1e-8)
