import numpy as np
import pytest

from qcramer.extremal import ExtremalConfig, extremal_search
from qcramer.info_measures import moment, phi_fisher
from qcramer.qgaussian import InadmissibleError


@pytest.fixture(scope="module")
def gauss_run():
    return extremal_search(1.0, 2.0)


def test_recovers_gaussian(gauss_run):
    r = gauss_run
    # G at q = 1, alpha = 2 with unit second moment is N(0, 1): phi = 1
    assert r.g_objective == pytest.approx(1.0, rel=1e-10)
    assert abs(r.objective - r.g_objective) < 1e-6
    assert r.l1_distance < 1e-3
    assert r.converged


def test_result_density_is_consistent(gauss_run):
    d = gauss_run.density
    assert d.mass() == pytest.approx(1.0, rel=1e-8)
    assert moment(d, 2.0) == pytest.approx(1.0, rel=1e-8)
    assert phi_fisher(d, 2.0, 1.0) == pytest.approx(gauss_run.objective, rel=1e-6)


@pytest.mark.parametrize("q", [0.9, 1.2])
def test_q_gaussian_recovered(q):
    r = extremal_search(q, 2.0)
    assert r.l1_distance < 1e-2
    # G is the minimiser, so no spline may beat it beyond the optimiser tolerance
    assert r.objective >= r.g_objective * (1 - 1e-6)


def test_target_moment_scaling():
    r1 = extremal_search(1.0, 2.0, target_moment=1.0, ec=ExtremalConfig(restarts=2))
    r4 = extremal_search(1.0, 2.0, target_moment=4.0, ec=ExtremalConfig(restarts=2))
    # phi_{2,1} of N(0, s^2) is 1/s^2
    assert r4.g_objective == pytest.approx(0.25, rel=1e-10)
    assert r4.objective / r1.objective == pytest.approx(0.25, rel=1e-6)


def test_seed_determinism():
    ec = ExtremalConfig(restarts=2, seed=7)
    a, b = extremal_search(0.9, 2.0, ec=ec), extremal_search(0.9, 2.0, ec=ec)
    assert np.array_equal(a.profile.values, b.profile.values)


def test_domain_errors():
    with pytest.raises(ValueError):
        extremal_search(1.0, 1.0)
    with pytest.raises(InadmissibleError):
        extremal_search(0.3, 2.0)
    with pytest.raises(ValueError):
        extremal_search(1.0, 2.0, target_moment=0.0)
