import numpy as np
import pytest

from relaydof.channel import RELAY, SlotPlan, Topology, draw_realization
from relaydof.errors import RankDeficient
from relaydof.signals import SignalSpace, noise_capacity, normalize_power, zf_solve


def test_tracked_receive_matches_numeric(rng):
    ch = draw_realization(Topology(3, relay_antennas=2), 1, 2)
    plan = SlotPlan.from_sets([({1, 2}, {3, RELAY})])
    space = SignalSpace([(3, 1), (3, 2)], noise_capacity(plan, 2))
    rx = space.receive(1, plan, {1: space.symbol((3, 1)), 2: space.symbol((3, 2))}, ch)
    s, w = space.draw(rng)
    y3 = space.evaluate(rx[3], s, w)
    expected = ch.h(3, 1, 1) * s[0] + ch.h(3, 2, 1) * s[1]
    noise = space.noise_part(rx[3]) @ w
    assert y3 == pytest.approx(expected + noise)
    assert space.used_noise() == 3


def test_noise_off_space_has_no_noise_columns():
    space = SignalSpace([(1, 2)], 10, noise_on=False)
    assert space.size == 1
    assert not space.noise((3,)).any()


def test_noise_capacity_guard():
    space = SignalSpace([(1, 2)], 1)
    space.noise()
    with pytest.raises(RuntimeError):
        space.noise()


def test_normalize_power():
    x = np.array([[3.0, 0.0], [0.0, 4.0]])
    y, a = normalize_power(x, 2.0)
    assert np.sum(np.abs(y) ** 2) == pytest.approx(2.0)
    assert a == pytest.approx(np.sqrt(2) / 5)


def test_zf_solve_tall_system(rng):
    h = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    s = np.array([1 - 1j, 0.5])
    np.testing.assert_allclose(zf_solve(h, h @ s), s, atol=1e-12)


def test_zf_solve_rank_deficient():
    with pytest.raises(RankDeficient):
        zf_solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.ones(2))
