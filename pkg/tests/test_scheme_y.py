import numpy as np
import pytest

from relaydof import scheme_y as sy
from relaydof.channel import RELAY, ChannelSet, Topology, draw_realization
from relaydof.errors import ConfigError

from conftest import cgauss


def y_channels(K, N=None, seed=0):
    N = K - 1 if N is None else N
    return draw_realization(Topology(K, relay_antennas=N), 2 * K - 2, seed)


def test_plan_k3():
    plan = sy.build_plan(3)
    assert len(plan) == 4
    expected = [({2, 3}, {1, RELAY}), ({1, 3}, {2, RELAY}), ({1, 2}, {3, RELAY}),
                ({RELAY}, {1, 2, 3})]
    for n, (src, dst) in enumerate(expected, start=1):
        assert plan.slot(n).sources == src
        assert plan.slot(n).destinations == dst


def test_plan_k4_has_two_relay_slots():
    plan = sy.build_plan(4)
    assert len(plan) == 6
    assert [plan.slot(n).sources for n in (5, 6)] == [{RELAY}, {RELAY}]


@pytest.mark.parametrize("K", range(3, 8))
def test_plan_half_duplex(K):
    plan = sy.build_plan(K)
    assert plan.check_half_duplex()
    assert all(not (s.sources & s.destinations) for s in plan.slots)


def test_plan_rejects_small_k():
    with pytest.raises(ConfigError):
        sy.build_plan(2)


def test_relay_zf_noise_off(rng):
    h = cgauss(rng, 2, 2)
    s = cgauss(rng, 2)
    np.testing.assert_allclose(sy.relay_zf_decode(h @ s, h), s, atol=1e-9)


def test_relay_zf_mse_at_high_power():
    rng = np.random.default_rng(3)
    P, err = 1e6, []
    for t in range(1000):
        ch = y_channels(3, seed=t)
        h = np.column_stack([ch.up(2, 1), ch.up(3, 1)])
        s = cgauss(rng, 2)
        y = h @ (np.sqrt(P) * s) + cgauss(rng, 2)
        err.append(np.mean(np.abs(sy.relay_zf_decode(y, h) / np.sqrt(P) - s) ** 2))
    assert np.mean(err) < 1e-4


def test_precoders_k3_null_user1():
    ch = y_channels(3, seed=1)
    beams = sy.build_relay_precoders(ch, 3, 2, 4)
    h1 = ch.down(1, 4)
    assert abs(h1 @ beams[(2, 3)]) < 1e-9 * np.linalg.norm(h1)
    assert abs(np.linalg.norm(beams[(2, 3)]) - 1) < 1e-12


def test_precoders_k4_null_two_users():
    ch = y_channels(4, seed=2)
    v = sy.build_relay_precoders(ch, 4, 3, 5)[(1, 2)]
    for j in (3, 4):
        assert abs(ch.down(j, 5) @ v) < 1e-9 * np.linalg.norm(ch.down(j, 5))


def test_k3_paired_precoders_share_direction():
    ch = y_channels(3, seed=5)
    beams = sy.build_relay_precoders(ch, 3, 2, 4)
    for a, b in [((2, 3), (3, 2)), ((1, 2), (2, 1)), ((1, 3), (3, 1))]:
        assert abs(abs(np.vdot(beams[a], beams[b])) - 1) < 1e-12
    dirs = np.column_stack([beams[(2, 3)], beams[(1, 3)], beams[(1, 2)]])
    assert np.linalg.matrix_rank(dirs[:, :2]) == 2


def test_precoders_reject_short_relay():
    with pytest.raises(ConfigError):
        sy.build_relay_precoders(y_channels(4, 2), 4, 2, 5)


def test_decode_user_k3_noise_off():
    ch = y_channels(3, seed=8)
    res = sy.run_round(ch, 3, 2, 100.0, noise_on=False, rng=np.random.default_rng(0))
    rep = res.reports[0]
    assert rep.desired == ((1, 2), (1, 3))
    assert rep.symbol_error < 1e-8
    assert rep.rank == 2


def test_k3_matches_hand_equations():
    ch = y_channels(3, seed=12)
    P = 4.0
    res = sy.run_round(ch, 3, 2, P, noise_on=False, genie_relay=True,
                       rng=np.random.default_rng(0))
    v = res.extras["precoders"][4]
    a = res.extras["relay_scale"][4]
    h = res.reports[0].h_eff  # rows: y1[1], y1[4] - self; normalised by sqrt(P)
    np.testing.assert_allclose(h[0], [ch.h(1, 2, 1), ch.h(1, 3, 1)], atol=1e-12)
    np.testing.assert_allclose(h[1], [a * ch.down(1, 4) @ v[(1, 2)], a * ch.down(1, 4) @ v[(1, 3)]],
                               atol=1e-12)


def test_decode_user_zero_side_info_is_noop():
    rng = np.random.default_rng(0)
    h_direct = cgauss(rng, 2)
    h_des = cgauss(rng, 1, 2)
    h_self = cgauss(rng, 1, 2)
    s = cgauss(rng, 2)
    y_direct = h_direct @ s
    y_relay = h_des @ s
    est, h_eff = sy.decode_user(1, 3, y_direct, y_relay, np.zeros(2), h_direct, h_des, h_self)
    np.testing.assert_allclose(est, s, atol=1e-12)
    assert h_eff.shape == (2, 2)


def test_k4_all_twelve_symbols():
    res = sy.run_round(y_channels(4, seed=3), 4, 3, 10.0, noise_on=False,
                       rng=np.random.default_rng(1))
    assert res.symbol_count == 12
    assert res.max_symbol_error() < 1e-8


def test_k5_twenty_symbols_eight_slots():
    res = sy.run_round(y_channels(5, seed=4), 5, 4, 10.0, noise_on=False,
                       rng=np.random.default_rng(1))
    assert (res.symbol_count, res.slot_count) == (20, 8)
    assert res.nominal_dof == 2.5
    assert res.max_symbol_error() < 1e-8


def test_n_too_small_rejected():
    with pytest.raises(ConfigError):
        sy.run_round(y_channels(4, 2), 4, 2, 1.0)


def test_wider_relay_uses_first_null_direction():
    ch = y_channels(4, N=5, seed=6)
    res = sy.run_round(ch, 4, 5, 10.0, noise_on=False, rng=np.random.default_rng(2))
    assert res.max_symbol_error() < 1e-8


def test_isolation_and_residual():
    res = sy.run_round(y_channels(4, seed=9), 4, 3, 1e4, noise_on=False,
                       rng=np.random.default_rng(3))
    assert res.extras["isolation"] <= 1e-16
    assert res.max_residual_interference() <= 1e-16


def test_genie_relay_power_split():
    K = 4
    res = sy.run_round(y_channels(K, seed=10), K, 3, 7.0, noise_on=False, genie_relay=True,
                       rng=np.random.default_rng(0))
    for a in res.extras["relay_scale"].values():
        assert a == pytest.approx(1 / np.sqrt(K * (K - 1)))


def test_decoding_independent_of_direct_channels():
    ch = y_channels(3, seed=11)
    fixed = sy.build_relay_precoders(ch, 3, 2, 4)
    other = draw_realization(ch.topology, 4, 99)
    mixed = ChannelSet(ch.topology, other.user_user, ch.user_relay, ch.relay_user)
    res = sy.run_round(mixed, 3, 2, 10.0, noise_on=False, rng=np.random.default_rng(4))
    for key, v in res.extras["precoders"][4].items():
        np.testing.assert_array_equal(v, fixed[key])
    assert res.max_symbol_error() < 1e-8
