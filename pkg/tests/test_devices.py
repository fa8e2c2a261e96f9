import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lumen_sim import devices as dv
from lumen_sim.devices import EOMParams, MRRParams, MZIParams, PhotodiodeParams

R09 = MRRParams(a=1.0, r1=0.9, r2=0.9)


def responsivity_oracle(lam, eta):
    # CODATA 2018 exact values
    return lam * 1.602176634e-19 * eta / (6.62607015e-34 * 299792458.0)


def test_responsivity_1550():
    r = dv.responsivity(PhotodiodeParams(lambda_=1550e-9, eta=1.0))
    assert abs(r - 1.2502) <= 1e-4
    assert r == pytest.approx(responsivity_oracle(1550e-9, 1.0), rel=1e-15)


def test_responsivity_1310():
    assert abs(dv.responsivity(PhotodiodeParams(lambda_=1310e-9, eta=0.8)) - 0.8453) <= 1e-4


def test_responsivity_dark_limit():
    r = [dv.responsivity(PhotodiodeParams(eta=e)) for e in (1e-3, 1e-6, 1e-9)]
    assert r[0] > r[1] > r[2] > 0
    assert r[2] < 2e-9
    with pytest.raises(ValueError):
        PhotodiodeParams(eta=0.0)


def test_photocurrent():
    assert dv.photocurrent(0.0, 1.2502) == 0.0
    assert dv.photocurrent(1e-3, 1.2502) == pytest.approx(1.2502e-3, rel=1e-15)
    assert dv.photocurrent(2e-3, 1.3) == 2 * dv.photocurrent(1e-3, 1.3)


def test_photocurrent_rejects_negative_power():
    with pytest.raises(ValueError):
        dv.photocurrent(-1e-3, 1.0)


@pytest.mark.parametrize("kw", [{"a": 1.5}, {"r1": 1.0}, {"r2": -0.1}])
def test_mrr_params_validated(kw):
    with pytest.raises(ValueError):
        MRRParams(**kw)


def test_mrr_spot_values():
    assert dv.mrr_through(0.0, R09) == 0.0
    assert dv.mrr_drop(0.0, R09) == 1.0
    r = 0.9
    assert abs(dv.mrr_through(math.pi, R09) - 4 * r**2 / (1 + r**2) ** 2) <= 1e-12
    assert abs(dv.mrr_through(math.pi, R09) - 0.98898) <= 1e-5
    assert dv.mrr_weight(0.0, R09) == -1.0
    assert abs(dv.mrr_weight(math.pi, R09) - 0.97796) <= 1e-4


def test_mrr_coupling_limits():
    # r is the self-coupling amplitude: r=0 routes everything through the ring to Drop
    assert dv.mrr_through(1.234, MRRParams(a=1.0, r1=0.0, r2=0.0)) == 0.0
    assert dv.mrr_drop(1.234, MRRParams(a=0.7, r1=0.0, r2=0.0)) == pytest.approx(0.7, rel=1e-15)
    # r -> 1 decouples the ring and the bus passes unchanged
    for r in (1 - 1e-7, 1 - 1e-9):
        assert dv.mrr_through(1.234, MRRParams(a=0.7, r1=r, r2=r)) == pytest.approx(1.0, abs=1e-5)


def test_mrr_lossy_leaks():
    m = MRRParams(a=0.99, r1=0.9, r2=0.9)
    assert dv.mrr_through(0.0, m) + dv.mrr_drop(0.0, m) < 1.0


def textbook_through(phi, a, r1, r2):
    # uncancelled closed form
    c = 2 * r1 * r2 * a * np.cos(phi)
    return (r2**2 * a**2 - 2 * r1 * r2 * a * np.cos(phi) + r1**2) / (1 - c + (r1 * r2 * a) ** 2)


@settings(max_examples=200)
@given(phi=st.floats(-10, 10), a=st.floats(0.5, 1.0), r1=st.floats(0, 0.99), r2=st.floats(0, 0.99))
def test_mrr_matches_textbook_form(phi, a, r1, r2):
    m = MRRParams(a=a, r1=r1, r2=r2)
    assert dv.mrr_through(phi, m) == pytest.approx(textbook_through(phi, a, r1, r2), abs=1e-10)


def test_mrr_lossless_energy_conservation_bulk():
    r = np.random.default_rng(0)
    n = 100_000
    phi = r.uniform(-2 * np.pi, 2 * np.pi, n)
    r1, r2 = r.uniform(0, 1, n) * 0.999, r.uniform(0, 1, n) * 0.999
    th = dv.mrr_through(phi, MRRParams(a=1.0, r1=0.9, r2=0.9))
    dr = dv.mrr_drop(phi, MRRParams(a=1.0, r1=0.9, r2=0.9))
    assert np.max(np.abs(th + dr - 1.0)) <= 1e-12
    worst = 0.0
    for i in range(0, n, 997):
        m = MRRParams(a=1.0, r1=float(r1[i]), r2=float(r2[i]))
        worst = max(worst, abs(dv.mrr_through(phi[i], m) + dv.mrr_drop(phi[i], m) - 1.0))
    assert worst <= 1e-12


@given(phi=st.floats(-20, 20), r1=st.floats(0, 0.99), r2=st.floats(0, 0.99), a=st.floats(1e-3, 1))
def test_mrr_bounds_and_periodicity(phi, r1, r2, a):
    m = MRRParams(a=a, r1=r1, r2=r2)
    th, dr = dv.mrr_through(phi, m), dv.mrr_drop(phi, m)
    assert -1e-15 <= th <= 1 + 1e-12 and -1e-15 <= dr <= 1 + 1e-12
    assert dv.mrr_weight(phi + 2 * np.pi, m) == pytest.approx(dv.mrr_weight(phi, m), abs=1e-12)


def test_mzi_spot_values():
    z = MZIParams()
    assert dv.mzi_weight(0.0, z) == 1.0
    assert dv.mzi_weight(math.pi, z) == pytest.approx(0.0, abs=1e-16)
    assert dv.mzi_weight(math.pi / 2, z) == pytest.approx(0.5, abs=1e-15)


def test_mzi_imbalance_limits_extinction():
    z = MZIParams(split_imbalance=0.05)
    assert dv.mzi_weight(math.pi, z) > 0.0
    assert dv.mzi_weight(0.0, z) < 1.0


def test_mzi_insertion_loss_scales():
    assert dv.mzi_weight(0.3, MZIParams(insertion_loss=0.5)) == pytest.approx(0.5 * dv.mzi_weight(0.3, MZIParams()))


def test_eom_spot_values():
    e = EOMParams(v_pi=8.0)
    assert dv.eom_activation(e.v_bias, e) == 1.0
    assert dv.eom_activation(e.v_bias - e.v_pi, e) == pytest.approx(0.0, abs=1e-16)
    assert dv.eom_activation(e.v_bias - e.v_pi / 2, e) == pytest.approx(0.5, abs=1e-15)


@given(st.floats(-30, 30))
def test_eom_range(v):
    y = dv.eom_activation(v, EOMParams())
    assert 0.0 <= y <= 1.0


def test_eom_gradient_matches_finite_difference():
    e = EOMParams(v_pi=8.0)
    v = np.linspace(-3.9, 3.9, 41)
    h = 1e-6
    fd = (dv.eom_activation(v + h, e) - dv.eom_activation(v - h, e)) / (2 * h)
    np.testing.assert_allclose(dv.eom_activation_grad(v, e), fd, atol=1e-8)


# calibration

def test_calibrate_mrr_resonance():
    phase, achieved, clipped = dv.calibrate(-1.0, dv.MRR, R09)
    assert phase == 0.0 and achieved == -1.0 and not clipped


def test_calibrate_mrr_out_of_range():
    _, achieved, clipped = dv.calibrate(1.0, dv.MRR, R09)
    assert clipped
    assert abs(achieved - 0.97796) <= 1e-4


def test_calibrate_mzi_half():
    phase, achieved, clipped = dv.calibrate(0.5, dv.MZI, MZIParams())
    plus, minus = phase
    assert plus == pytest.approx(math.pi / 2, abs=1e-9)
    assert minus == pytest.approx(math.pi, abs=1e-12)
    assert achieved == pytest.approx(0.5, abs=1e-9) and not clipped


@pytest.mark.parametrize("backend,params", [(dv.MRR, R09), (dv.MZI, MZIParams()),
                                            (dv.MRR, MRRParams(a=0.98, r1=0.9, r2=0.85)),
                                            (dv.MZI, MZIParams(split_imbalance=0.02, insertion_loss=0.9))])
def test_calibration_round_trip(backend, params):
    rng = np.random.default_rng(7)
    lim = dv.calibration_range(backend, params)
    t = rng.uniform(lim.w_min, lim.w_max, 10_000)
    res = dv.calibrate(t, backend, params)
    assert np.max(np.abs(res.achieved - t)) <= 1e-9
    assert not np.any(res.clipped)
    outside = np.array([lim.w_min - 0.1, lim.w_max + 0.1])
    assert np.all(dv.calibrate(outside, backend, params).clipped)


def test_calibrate_rejects_nonfinite():
    with pytest.raises(ValueError):
        dv.calibrate(np.nan, dv.MRR, R09)


def test_unknown_backend():
    with pytest.raises(ValueError):
        dv.check_backend("laser")
