import numpy as np
import pytest

from relaydof.channel import Topology, draw_realization


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def cgauss(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def channels_for(K=None, N=None, R=None, slots=1, seed=0):
    topo = Topology(K, relay_antennas=N) if R is None else Topology(K, relay_count=R)
    return draw_realization(topo, slots, seed)
