"""Network topology, channel realizations and half-duplex slot propagation.

Nodes are users ``1..K`` and the relay, named :data:`RELAY`. A set of
distributed single-antenna relays is modelled as one relay node whose
"antennas" are the individual relays; the schemes that use it keep every
relay's processing local to its own row.

Slots and users are 1-based in every public accessor, matching the usual
``h_{k,l}[n]`` indexing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Hashable, Mapping

import numpy as np

from .errors import BadBand, HalfDuplexViolation

RELAY = "R"

DEFAULT_H_MIN = 0.05
DEFAULT_H_MAX = 20.0


@dataclass(frozen=True)
class Topology:
    """K single-antenna users plus either one N-antenna relay or R single-antenna relays."""

    num_users: int
    relay_antennas: int | None = None
    relay_count: int | None = None

    def __post_init__(self):
        if self.num_users < 2:
            raise ValueError(f"need at least 2 users, got {self.num_users}")
        if (self.relay_antennas is None) == (self.relay_count is None):
            raise ValueError("set exactly one of relay_antennas / relay_count")
        if self.relay_dims < 1:
            raise ValueError("relay needs at least one antenna")

    @property
    def distributed(self) -> bool:
        return self.relay_count is not None

    @property
    def relay_dims(self) -> int:
        return self.relay_count if self.distributed else self.relay_antennas


@dataclass(frozen=True)
class Slot:
    sources: frozenset
    destinations: frozenset

    def __post_init__(self):
        object.__setattr__(self, "sources", frozenset(self.sources))
        object.__setattr__(self, "destinations", frozenset(self.destinations))
        both = self.sources & self.destinations
        if both:
            raise HalfDuplexViolation(f"nodes {sorted(map(str, both))} both transmit and receive")


@dataclass(frozen=True)
class SlotPlan:
    """Ordered half-duplex schedule; ``slot(n)`` is 1-based."""

    slots: tuple[Slot, ...]

    def __len__(self):
        return len(self.slots)

    def slot(self, n: int) -> Slot:
        if not 1 <= n <= len(self.slots):
            raise IndexError(f"slot {n} outside 1..{len(self.slots)}")
        return self.slots[n - 1]

    @classmethod
    def from_sets(cls, pairs) -> "SlotPlan":
        return cls(tuple(Slot(s, d) for s, d in pairs))

    def check_half_duplex(self) -> bool:
        return all(not (s.sources & s.destinations) for s in self.slots)


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """All coefficients of one network realization.

    Attributes
    ----------
    user_user : (T, K, K) complex
        ``user_user[n-1, k-1, l-1] = h_{k,l}[n]`` (user l to user k). The
        diagonal is drawn but never used.
    user_relay : (T, N, K) complex
        Column ``l-1`` of slice ``n-1`` is the uplink vector ``h_{R,l}[n]``.
    relay_user : (T, K, N) complex
        Row ``k-1`` of slice ``n-1`` is the downlink row ``h*_{k,R}[n]``,
        applied directly as ``y_k = row @ x_R``.
    """

    topology: Topology
    user_user: np.ndarray
    user_relay: np.ndarray
    relay_user: np.ndarray
    seed: int | None = field(default=None)

    def __post_init__(self):
        K, N = self.topology.num_users, self.topology.relay_dims
        T = self.user_user.shape[0]
        expected = {
            "user_user": (T, K, K),
            "user_relay": (T, N, K),
            "relay_user": (T, K, N),
        }
        for name, shape in expected.items():
            arr = np.array(getattr(self, name), dtype=complex)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def slot_count(self) -> int:
        return self.user_user.shape[0]

    @property
    def num_users(self) -> int:
        return self.topology.num_users

    def h(self, k: int, l: int, n: int) -> complex:
        """Direct coefficient from user ``l`` to user ``k`` in slot ``n``."""
        return complex(self.user_user[n - 1, k - 1, l - 1])

    def up(self, l: int, n: int) -> np.ndarray:
        """Uplink vector from user ``l`` to the relay in slot ``n``."""
        return self.user_relay[n - 1, :, l - 1]

    def down(self, k: int, n: int) -> np.ndarray:
        """Downlink row from the relay to user ``k`` in slot ``n``."""
        return self.relay_user[n - 1, k - 1, :]

    def magnitudes(self) -> np.ndarray:
        return np.abs(np.concatenate([
            self.user_user.ravel(), self.user_relay.ravel(), self.relay_user.ravel()
        ]))

    # -- JSON replay ------------------------------------------------------

    def to_dict(self) -> dict:
        def pairs(a):
            return np.stack([a.real, a.imag], axis=-1).tolist()

        return {
            "num_users": self.topology.num_users,
            "relay_antennas": self.topology.relay_antennas,
            "relay_count": self.topology.relay_count,
            "slot_count": self.slot_count,
            "seed": self.seed,
            "user_user": pairs(self.user_user),
            "user_relay": pairs(self.user_relay),
            "relay_user": pairs(self.relay_user),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ChannelSet":
        def arr(x):
            a = np.asarray(x, dtype=float)
            return a[..., 0] + 1j * a[..., 1]

        topo = Topology(doc["num_users"], doc.get("relay_antennas"), doc.get("relay_count"))
        return cls(topo, arr(doc["user_user"]), arr(doc["user_relay"]),
                   arr(doc["relay_user"]), seed=doc.get("seed"))

    @classmethod
    def from_json(cls, text: str) -> "ChannelSet":
        return cls.from_dict(json.loads(text))


def _banded_gaussian(rng: np.random.Generator, shape, h_min: float, h_max: float) -> np.ndarray:
    # CN(0,1) conditioned on h_min <= |h| <= h_max. |h|^2 is Exp(1), so the
    # conditional law is sampled exactly through the truncated inverse CDF.
    u = rng.random(shape)
    lo, hi = np.exp(-h_min**2), np.exp(-h_max**2)
    mag = np.sqrt(-np.log(lo - u * (lo - hi)))
    mag = np.clip(mag, h_min, h_max)
    phase = rng.uniform(0.0, 2.0 * np.pi, shape)
    return mag * np.exp(1j * phase)


def draw_realization(topology: Topology, slot_count: int, rng_seed,
                     h_min: float = DEFAULT_H_MIN, h_max: float = DEFAULT_H_MAX) -> ChannelSet:
    """Draw independent per-slot, per-link coefficients with magnitudes in ``[h_min, h_max]``.

    ``rng_seed`` may be an int, a sequence of ints or a ``SeedSequence``;
    equal seeds give identical realizations.
    """
    if not (0.0 < h_min < h_max < np.inf):
        raise BadBand(f"need 0 < h_min < h_max < inf, got [{h_min}, {h_max}]")
    if slot_count < 1:
        raise ValueError("slot_count must be positive")
    rng = np.random.default_rng(rng_seed)
    K, N, T = topology.num_users, topology.relay_dims, slot_count
    uu = _banded_gaussian(rng, (T, K, K), h_min, h_max)
    ur = _banded_gaussian(rng, (T, N, K), h_min, h_max)
    ru = _banded_gaussian(rng, (T, K, N), h_min, h_max)
    seed = rng_seed if isinstance(rng_seed, int) else None
    return ChannelSet(topology, uu, ur, ru, seed=seed)


def complex_noise(rng: np.random.Generator, shape) -> np.ndarray:
    """Unit-variance circularly-symmetric complex Gaussian samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def propagate(slot: int, plan: SlotPlan, tx_signals: Mapping[Hashable, np.ndarray],
              channels: ChannelSet, noise_on: bool = False,
              rng: np.random.Generator | None = None,
              power: float | None = None) -> dict:
    """Received signals of every destination node in slot ``slot``.

    User signals have any trailing shape ``S``; the relay signal has shape
    ``(N,) + S``. Each destination gets the channel-weighted sum of all
    transmissions, plus fresh ``CN(0, 1)`` noise when ``noise_on``. Nodes
    outside the destination set are absent from the result.

    If ``power`` is given, every user sample must satisfy ``|x|^2 <= P(1+1e-6)``
    and every relay sample ``||x||^2 <= P(1+1e-6)``.
    """
    s = plan.slot(slot)
    if s.sources & s.destinations:
        raise HalfDuplexViolation(f"slot {slot} schedules a node on both sides")
    stray = set(tx_signals) - s.sources
    if stray:
        raise ValueError(f"nodes {sorted(map(str, stray))} are not sources in slot {slot}")
    if noise_on and rng is None:
        raise ValueError("noise_on requires an rng")

    tx = {node: np.asarray(x, dtype=complex) for node, x in tx_signals.items()}
    trailing = None
    for node, x in tx.items():
        t = x.shape[1:] if node == RELAY else x.shape
        if node == RELAY and x.shape[0] != channels.topology.relay_dims:
            raise ValueError(f"relay signal needs {channels.topology.relay_dims} rows")
        if trailing is not None and t != trailing:
            raise ValueError("transmit signals disagree on sample shape")
        trailing = t
    if trailing is None:
        trailing = ()

    if power is not None:
        limit = power * (1.0 + 1e-6)
        for node, x in tx.items():
            p = np.sum(np.abs(x) ** 2, axis=0) if node == RELAY else np.abs(x) ** 2
            if np.any(p > limit):
                raise ValueError(f"node {node} exceeds transmit power {power}")

    out = {}
    for dst in s.destinations:
        if dst == RELAY:
            y = np.zeros((channels.topology.relay_dims,) + trailing, dtype=complex)
            for src, x in tx.items():
                if src != RELAY:
                    y += np.multiply.outer(channels.up(src, slot), x)
        else:
            y = np.zeros(trailing, dtype=complex)
            for src, x in tx.items():
                if src == RELAY:
                    y = y + np.tensordot(channels.down(dst, slot), x, axes=1)
                else:
                    y = y + channels.h(dst, src, slot) * x
        if noise_on:
            y = y + complex_noise(rng, y.shape)
        out[dst] = y
    return out
