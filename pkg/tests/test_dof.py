import json

import numpy as np
import pytest

from relaydof import dof
from relaydof import scheme_y as sy
from relaydof.channel import Topology, draw_realization
from relaydof.errors import ConfigError, SingularNoiseCov


def test_log_det_closed_form():
    # log2 det(2 I_2) / 2 = 1 bit per slot
    assert dof.log_det_rate(np.eye(2), np.eye(2), 1.0, slots=2) == pytest.approx(1.0)


def test_log_det_scalar():
    assert dof.log_det_rate([[2.0]], [[1.0]], 3.0) == pytest.approx(np.log2(13.0))


def test_log_det_interference_oracle():
    # scalar SINR oracle: P|h|^2 / (1 + P|g|^2)
    h, g, P = 1.5, 0.5, 10.0
    expected = np.log2(1 + P * h**2 / (1 + P * g**2))
    assert dof.log_det_rate([[h]], [[1.0]], P, h_interf=[[g]]) == pytest.approx(expected)


def test_rate_vanishes_at_low_power():
    assert dof.log_det_rate(np.eye(2), np.eye(2), 1e-12) < 1e-10


def test_rate_monotone_in_power(rng):
    h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    rates = [dof.log_det_rate(h, np.eye(2), P) for P in np.logspace(-2, 6, 20)]
    assert np.all(np.diff(rates) > 0)


def test_singular_noise_cov():
    with pytest.raises(SingularNoiseCov):
        dof.log_det_rate(np.eye(2), np.zeros((2, 2)), 1.0)


def test_round_sum_rate_needs_noise():
    ch = draw_realization(Topology(3, relay_antennas=2), 4, 0)
    res = sy.run_round(ch, 3, 2, 10.0, noise_on=False, rng=np.random.default_rng(0))
    with pytest.raises(SingularNoiseCov):
        dof.round_sum_rate(res)


def test_round_sum_rate_positive():
    ch = draw_realization(Topology(3, relay_antennas=2), 4, 0)
    res = sy.run_round(ch, 3, 2, 1e4, rng=np.random.default_rng(0))
    rep = dof.round_sum_rate(res)
    assert set(rep.user_rates) == {1, 2, 3}
    assert rep.sum_rate > 0


def test_fit_slope_exact_line():
    snr = np.arange(0, 50, 5.0)
    rates = 1.5 * snr / 10 * np.log2(10) + 2
    slope, err, k = dof.fit_slope(snr, rates)
    assert slope == pytest.approx(1.5)
    assert err == pytest.approx(0.0, abs=1e-12)
    assert k == 5


@pytest.mark.parametrize("kw,msg", [
    ({"trials": 199}, "200"),
    ({"snr_grid_db": [50, 55, 60]}, "20 dB"),
    ({"snr_grid_db": [50, 90]}, "3 points"),
    ({"snr_grid_db": [90, 70, 50]}, "increasing"),
])
def test_estimate_preconditions(kw, msg):
    with pytest.raises(ConfigError, match=msg):
        dof.estimate_dof("y", K=3, N=2, **kw)


@pytest.fixture(scope="module")
def small_estimate():
    return dof.estimate_dof("y", snr_grid_db=[20, 30, 40], trials=200, K=3, N=2, threads=1)


def test_csv_layout(small_estimate):
    lines = small_estimate.to_csv().splitlines()
    assert lines[0] == "snr_db,mean_rate,stderr"
    assert len(lines) == 4
    assert [float(r.split(",")[0]) for r in lines[1:]] == [20.0, 30.0, 40.0]


def test_json_keys(small_estimate):
    doc = json.loads(small_estimate.to_json())
    assert list(doc)[:4] == ["scheme", "params", "nominal_dof", "slope"]
    assert doc["nominal_dof"] == 1.5 and doc["aborted"] == 0 and doc["valid"]


def test_deterministic_and_thread_independent(small_estimate):
    again = dof.estimate_dof("y", snr_grid_db=[20, 30, 40], trials=200, K=3, N=2, threads=4)
    assert again.to_json() == small_estimate.to_json()
    assert again.to_csv() == small_estimate.to_csv()


def test_threads_env(monkeypatch):
    monkeypatch.setenv(dof.THREADS_ENV, "3")
    assert dof._threads(None) == 3
    assert dof._threads(2) == 2


@pytest.mark.slow
@pytest.mark.parametrize("scheme,kw,nominal", [
    ("y", {"K": 3, "N": 2}, 1.5),
    ("ic", {}, 4 / 3),
    ("x", {}, 1.6),
    ("dist_y", {}, 1.5),
])
def test_slope_spot_checks(scheme, kw, nominal):
    est = dof.estimate_dof(scheme, trials=200, **kw)
    assert abs(est.slope - nominal) <= 0.05
