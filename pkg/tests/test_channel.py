import numpy as np
import pytest

from relaydof.channel import (RELAY, ChannelSet, Slot, SlotPlan, Topology, complex_noise,
                              draw_realization, propagate)
from relaydof.errors import BadBand, HalfDuplexViolation


def fixed_channels(K=3, N=1, T=1, value=2 + 1j):
    topo = Topology(K, relay_antennas=N)
    uu = np.full((T, K, K), value, dtype=complex)
    ur = np.full((T, N, K), value, dtype=complex)
    ru = np.full((T, K, N), value, dtype=complex)
    return ChannelSet(topo, uu, ur, ru)


def test_topology_needs_one_relay_kind():
    with pytest.raises(ValueError):
        Topology(4)
    with pytest.raises(ValueError):
        Topology(4, relay_antennas=2, relay_count=3)
    with pytest.raises(ValueError):
        Topology(1, relay_antennas=1)
    assert Topology(3, relay_count=3).distributed


def test_draw_is_deterministic():
    topo = Topology(4, relay_antennas=2)
    a = draw_realization(topo, 3, 7)
    b = draw_realization(topo, 3, 7)
    np.testing.assert_array_equal(a.user_user, b.user_user)
    np.testing.assert_array_equal(a.user_relay, b.user_relay)
    np.testing.assert_array_equal(a.relay_user, b.relay_user)


def test_draw_respects_band():
    ch = draw_realization(Topology(5, relay_antennas=4), 200, 3, h_min=0.1, h_max=10)
    mags = ch.magnitudes()
    assert mags.size > 10**4
    assert mags.min() >= 0.1 and mags.max() <= 10


def test_band_sampling_matches_truncated_rayleigh():
    # |h|^2 ~ Exp(1) truncated to [h_min^2, h_max^2]; compare the conditional mean
    ch = draw_realization(Topology(6, relay_antennas=5), 400, 11, h_min=0.5, h_max=1.5)
    p = ch.magnitudes() ** 2
    lo, hi = 0.25, 2.25
    mean = (lo * np.exp(-lo) - hi * np.exp(-hi)) / (np.exp(-lo) - np.exp(-hi)) + 1
    assert abs(p.mean() - mean) < 0.01


@pytest.mark.parametrize("band", [(1.0, 1.0), (2.0, 1.0), (0.0, 1.0), (0.1, np.inf)])
def test_bad_band(band):
    with pytest.raises(BadBand):
        draw_realization(Topology(3, relay_antennas=2), 1, 0, *band)


def test_channels_read_only():
    ch = draw_realization(Topology(3, relay_antennas=2), 2, 0)
    with pytest.raises(ValueError):
        ch.user_user[0, 0, 0] = 1.0


def test_json_roundtrip():
    ch = draw_realization(Topology(4, relay_count=3), 3, 5)
    back = ChannelSet.from_json(ch.to_json())
    np.testing.assert_array_equal(back.relay_user, ch.relay_user)
    np.testing.assert_array_equal(back.user_relay, ch.user_relay)
    assert back.topology == ch.topology and back.seed == 5


def test_slot_rejects_overlap():
    with pytest.raises(HalfDuplexViolation):
        Slot({1, 2}, {2, RELAY})


def test_propagate_single_link():
    ch = fixed_channels()
    plan = SlotPlan.from_sets([({1}, {2})])
    out = propagate(1, plan, {1: np.array(1.0)}, ch)
    assert set(out) == {2}
    assert out[2] == 2 + 1j


def test_propagate_two_term_sum():
    ch = draw_realization(Topology(3, relay_antennas=2), 1, 1)
    plan = SlotPlan.from_sets([({1, 2}, {3})])
    x1, x2 = 0.3 - 0.1j, -0.7j
    y = propagate(1, plan, {1: x1, 2: x2}, ch)[3]
    assert y == pytest.approx(ch.h(3, 1, 1) * x1 + ch.h(3, 2, 1) * x2, abs=1e-15)


def test_propagate_relay_both_directions():
    ch = draw_realization(Topology(3, relay_antennas=2), 2, 4)
    plan = SlotPlan.from_sets([({1, 2}, {3, RELAY}), ({RELAY}, {1, 2, 3})])
    up = propagate(1, plan, {1: 1.0, 2: 2.0}, ch)[RELAY]
    np.testing.assert_allclose(up, ch.up(1, 1) + 2 * ch.up(2, 1))
    x = np.array([1.0, -1j])
    down = propagate(2, plan, {RELAY: x}, ch)
    assert down[2] == pytest.approx(ch.down(2, 2) @ x)


def test_propagate_rejects_non_sources():
    ch = fixed_channels()
    plan = SlotPlan.from_sets([({1}, {2})])
    with pytest.raises(ValueError):
        propagate(1, plan, {3: 1.0}, ch)


def test_propagate_power_check():
    ch = fixed_channels()
    plan = SlotPlan.from_sets([({1}, {2})])
    propagate(1, plan, {1: np.array(2.0)}, ch, power=4.0)
    with pytest.raises(ValueError):
        propagate(1, plan, {1: np.array(2.01)}, ch, power=4.0)


def test_half_duplex_violation_in_propagate():
    ch = fixed_channels()
    bad = SlotPlan((Slot.__new__(Slot),))
    object.__setattr__(bad.slots[0], "sources", frozenset({1}))
    object.__setattr__(bad.slots[0], "destinations", frozenset({1, 2}))
    with pytest.raises(HalfDuplexViolation):
        propagate(1, bad, {1: 1.0}, ch)


def test_noise_off_linearity(rng):
    ch = draw_realization(Topology(4, relay_antennas=2), 1, 9)
    plan = SlotPlan.from_sets([({1, 2}, {3, 4, RELAY})])
    x, xp = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    a, b = 0.5 - 2j, 1.5
    lhs = propagate(1, plan, {1: a * x[0] + b * xp[0], 2: a * x[1] + b * xp[1]}, ch)
    y1 = propagate(1, plan, {1: x[0], 2: x[1]}, ch)
    y2 = propagate(1, plan, {1: xp[0], 2: xp[1]}, ch)
    for node in lhs:
        np.testing.assert_allclose(lhs[node], a * y1[node] + b * y2[node], atol=1e-12)


def test_noise_variance(rng):
    ch = fixed_channels(value=1.0)
    plan = SlotPlan.from_sets([({1}, {2})])
    y = propagate(1, plan, {1: np.zeros(10**5)}, ch, noise_on=True, rng=rng)[2]
    assert 0.97 <= np.mean(np.abs(y) ** 2) <= 1.03
    assert 0.97 <= np.mean(np.abs(complex_noise(rng, 10**5)) ** 2) <= 1.03
