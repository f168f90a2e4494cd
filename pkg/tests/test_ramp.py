import math
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qilab.ramp import (PerturbationWarning, RampConfig, b_kq, d_kernel, d_of_t,
                        oscillation_combination, overlap_edge_behaviour, ramp_profile, ramp_run,
                        small_t_coefficient)
from qilab.well import WellConfig

WEAK = WellConfig(0.1, 1.0)
# converged under panel and time-step halving (change 5e-13)
GOLDEN_DELTA_E = -8.05689647075e-4


@pytest.fixture(scope="module")
def weak_run():
    # |delta_e| / |E_KE| is about 0.46 here, so the size warning fires; both are O(V^2)
    with pytest.warns(PerturbationWarning, match="not small"):
        return ramp_run(RampConfig(1.0, WEAK))


def test_ramp_profile():
    assert ramp_profile(2.0, 0.0) == 1.0 and ramp_profile(2.0, 0.5) == 0.0
    assert ramp_profile(2.0, 0.25) == pytest.approx(0.5)
    assert ramp_profile(2.0, -1.0) == 1.0 and ramp_profile(2.0, 3.0) == 0.0


def test_b_kq_limits():
    assert b_kq(1.0, 1.0, 2.0, 0.0) == 0
    with pytest.raises(ValueError):
        b_kq(1.0, 1.0, 2.0, 1.5)
    t = 1e-4
    assert oscillation_combination(0.7, 1.0, 2.0, t) == pytest.approx(-0.7 * t * t, rel=1e-7)


@settings(max_examples=200, deadline=None)
@given(alpha=st.floats(0.1, 10.0), k=st.floats(0.01, 50.0), q=st.floats(0.01, 50.0),
       frac=st.floats(0.0, 1.0))
def test_oscillation_identity(alpha, k, q, frac):
    t = frac / alpha
    w = k + q
    lhs = oscillation_combination(alpha, k, q, t)
    rhs = -2 * alpha * 2 * math.sin(0.5 * w * t) ** 2 / w ** 2
    assert abs(lhs - rhs) <= 1e-14 * max(1.0, 2 * alpha / w ** 2)


def test_d_of_t_basic():
    rcfg = RampConfig(1.0, WEAK)
    ker = d_kernel(rcfg)
    assert d_of_t(rcfg, 0.0, ker) == 0.0
    vals = d_of_t(rcfg, np.linspace(0, 1, 11), ker)
    assert np.all(vals >= 0)
    free = RampConfig(1.0, WellConfig(0.1, 1.0, lam=0.0))
    assert np.all(d_of_t(free, np.linspace(0, 1, 5)) == 0)
    assert small_t_coefficient(ker) > 0


def test_overlap_vanishes_linearly_at_edge():
    ratios = overlap_edge_behaviour(WEAK)
    assert np.all(np.isfinite(ratios))
    # C/k settles to a constant: C = O(k), so dk/k C^2 converges
    assert np.allclose(ratios[:, 0], ratios[:, 1], rtol=1e-3)


def test_sign_chain_and_golden(weak_run):
    res = weak_run
    assert np.all(res.d_values >= 0)
    assert np.all(res.dEdt <= 0)
    assert res.delta_e < 0
    assert res.dEdt[0] == 0 and res.dEdt[-1] == 0
    assert res.delta_e == pytest.approx(GOLDEN_DELTA_E, rel=1e-6)
    assert list(res.summary()) == ["alpha", "delta_e", "e_ke", "post_ramp_eta_star",
                                   "post_ramp_violated"]


def test_post_ramp_violation(weak_run):
    post = weak_run.post_ramp
    assert post.a == pytest.approx(2.0)
    assert post.e_ke == pytest.approx(weak_run.e_ke + weak_run.delta_e)
    assert post.violated and post.eta < post.eta_star


@pytest.mark.slow
def test_refinement_changes_less_than_one_percent(weak_run):
    with pytest.warns(PerturbationWarning):
        fine = ramp_run(RampConfig(1.0, WEAK).refined(), e_ke=weak_run.e_ke)
    assert abs(fine.delta_e / weak_run.delta_e - 1) < 1e-2


@pytest.mark.filterwarnings("error::qilab.ramp.PerturbationWarning")
def test_sudden_limit():
    e = [ramp_run(RampConfig(alpha, WEAK), e_ke=-1.0).delta_e for alpha in (1.0, 10.0, 100.0)]
    # with E_KE = -1 no size warning is due; a sweep should be warning-free
    assert e[0] < e[1] < e[2] < 0
    assert abs(e[2]) < 1e-3 * abs(e[0])


def test_strong_coupling_warns():
    with pytest.warns(PerturbationWarning):
        ramp_run(RampConfig(10.0, WellConfig(1.0, 1.0), k_max=20.0), e_ke=-0.047)


def test_config_validation():
    with pytest.raises(ValueError):
        RampConfig(0.0, WEAK)
    with pytest.raises(ValueError):
        RampConfig(1.0, WEAK, n_times=200)
