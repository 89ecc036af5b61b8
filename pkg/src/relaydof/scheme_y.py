"""K-user fully-connected Y channel with an N-antenna relay (N >= K-1).

Phase one (slots 1..K): in slot k every other user sends its symbol for user
k; user k and the relay listen, and the relay zero-forces the K-1 symbols.
Phase two (slots K+1..2K-2): the relay broadcasts all K(K-1) symbols, each on
a beam that is invisible to the K-2 users that neither sent nor want it.
User j then cancels its own symbols and solves a (K-1)x(K-1) system built
from its phase-one equation and the K-2 relay equations.

K(K-1) symbols in 2K-2 slots gives K/2 symbols per slot.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .channel import RELAY, ChannelSet, SlotPlan
from .errors import ConfigError
from .signals import (RoundResult, SignalSpace, make_report, noise_capacity,
                      normalize_power, zf_solve)


def messages(K: int) -> list[tuple[int, int]]:
    """All ordered pairs ``(i, j)``: user j sends ``s_{i,j}`` to user i."""
    return [(i, j) for i in range(1, K + 1) for j in range(1, K + 1) if i != j]


def build_plan(K: int) -> SlotPlan:
    if K < 3:
        raise ConfigError(f"Y channel scheme needs K >= 3, got {K}")
    users = set(range(1, K + 1))
    pairs = [(users - {k}, {k, RELAY}) for k in range(1, K + 1)]
    pairs += [({RELAY}, users)] * (K - 2)
    return SlotPlan.from_sets(pairs)


def relay_zf_decode(y_r, h_r, tol: linalg.Tolerance = linalg.DEFAULT_TOL) -> np.ndarray:
    """Zero-force the K-1 uplink symbols from the relay's N-dim observation.

    ``h_r`` is the N x (K-1) matrix of uplink vectors. Trailing axes of
    ``y_r`` are carried through, so tracked coefficient rows work too.
    """
    return zf_solve(h_r, y_r, tol)


def build_relay_precoders(channels: ChannelSet, K: int, N: int, n: int,
                          tol: linalg.Tolerance = linalg.DEFAULT_TOL) -> dict:
    """Unit-norm beams ``v_{l,k}[n]`` with ``h*_{i,R}[n] v_{l,k}[n] = 0`` for ``i`` not in {l, k}.

    For N > K-1 the null space is wider than one direction and the first
    basis column is used.
    """
    if N < K - 1:
        raise ConfigError(f"relay needs N >= K-1 = {K - 1} antennas, got {N}")
    out = {}
    for pair in messages(K):
        rest = [i for i in range(1, K + 1) if i not in pair]
        rows = np.array([channels.down(i, n) for i in rest])
        out[pair] = linalg.null_space(rows, tol)[:, 0]
    return out


def user_equations(y_direct, y_relay, own_symbols, h_tilde_self):
    """Stack user j's phase-one equation with its self-cancelled relay equations.

    ``y_relay`` has one entry per phase-two slot; ``h_tilde_self[t]`` holds
    the effective coefficients of the user's own K-1 symbols in that slot.
    Inputs may carry a trailing axis.
    """
    y_direct = np.asarray(y_direct)
    cleaned = np.asarray(y_relay) - np.tensordot(h_tilde_self, own_symbols, axes=1)
    return np.concatenate([y_direct[None], cleaned], axis=0)


def decode_user(j: int, K: int, y_direct, y_relay, own_symbols, h_direct,
                h_tilde_desired, h_tilde_self):
    """Recover the K-1 symbols ``s_{j,l}`` at user ``j``.

    Parameters
    ----------
    y_direct : complex
        Observation in slot ``j``.
    y_relay : (K-2,) complex
        Observations in the relay slots.
    own_symbols : (K-1,) complex
        Symbols ``s_{l,j}`` the user transmitted, ordered by ``l``.
    h_direct : (K-1,) complex
        Received amplitudes of ``s_{j,l}`` in slot ``j``.
    h_tilde_desired, h_tilde_self : (K-2, K-1) complex
        Effective relay-to-user amplitudes of desired and own symbols.

    Returns
    -------
    estimates : (K-1,) complex
    h_eff : (K-1, K-1) complex
        The stacked effective channel.
    """
    stacked = user_equations(y_direct, y_relay, own_symbols, h_tilde_self)
    h_eff = np.vstack([np.asarray(h_direct)[None], np.asarray(h_tilde_desired)])
    return zf_solve(h_eff, stacked), h_eff


def run_round(channels: ChannelSet, K: int, N: int, P: float, noise_on: bool = True,
              rng: np.random.Generator | None = None, genie_relay: bool = False,
              tol: linalg.Tolerance = linalg.DEFAULT_TOL) -> RoundResult:
    """Run one full exchange and decode at every user.

    With ``genie_relay`` the relay forwards exact symbols; otherwise it
    forwards its zero-forcing estimates, noise included.
    """
    if K < 3:
        raise ConfigError(f"Y channel scheme needs K >= 3, got {K}")
    if N < K - 1:
        raise ConfigError(f"relay needs N >= K-1 = {K - 1} antennas, got {N}")
    topo = channels.topology
    if topo.distributed or topo.num_users != K or topo.relay_dims != N:
        raise ConfigError("channel topology does not match (K, N)")
    plan = build_plan(K)
    if channels.slot_count < len(plan):
        raise ConfigError(f"need {len(plan)} slots of channel, got {channels.slot_count}")
    rng = np.random.default_rng() if rng is None else rng

    space = SignalSpace(messages(K), noise_capacity(plan, N), noise_on)
    amp = np.sqrt(P)
    users = range(1, K + 1)
    direct = {}
    relay_est = {}

    for k in users:
        senders = [l for l in users if l != k]
        tx = {l: amp * space.symbol((k, l)) for l in senders}
        rx = space.receive(k, plan, tx, channels)
        direct[k] = rx[k]
        if genie_relay:
            est = np.array([amp * space.symbol((k, l)) for l in senders])
        else:
            h_r = np.column_stack([channels.up(l, k) for l in senders])
            est = relay_zf_decode(rx[RELAY], h_r, tol)
        for idx, l in enumerate(senders):
            relay_est[(k, l)] = est[idx]

    relay_rx = {j: [] for j in users}
    precoders = {}
    scales = {}
    isolation = 0.0
    for n in range(K + 1, 2 * K - 1):
        beams = build_relay_precoders(channels, K, N, n, tol)
        precoders[n] = beams
        x = sum(np.multiply.outer(beams[p], relay_est[p]) for p in messages(K))
        x, scales[n] = normalize_power(x, P)
        rx = space.receive(n, plan, {RELAY: x}, channels)
        for j in users:
            relay_rx[j].append(rx[j])
            want = sum(abs(space.coef(rx[j], (j, l))) ** 2 for l in users if l != j)
            foreign = sum(abs(space.coef(rx[j], p)) ** 2 for p in messages(K) if j not in p)
            isolation = max(isolation, foreign / want)

    s, w = space.draw(rng)
    reports = []
    for j in users:
        others = [l for l in users if l != j]
        desired = [(j, l) for l in others]
        own = [(l, j) for l in others]
        rows_relay = np.array(relay_rx[j])
        h_direct = np.array([space.coef(direct[j], d) for d in desired])
        h_des = np.array([[space.coef(r, d) for d in desired] for r in rows_relay])
        h_self = np.array([[space.coef(r, o) for o in own] for r in rows_relay])

        own_basis = np.array([space.symbol(o) for o in own])
        rows = user_equations(direct[j], rows_relay, own_basis, h_self)

        y_direct = space.evaluate(direct[j], s, w)
        y_relay = space.evaluate(rows_relay, s, w)
        own_vals = np.array([s[space.index[o]] for o in own])
        est, _ = decode_user(j, K, y_direct, y_relay, own_vals, h_direct, h_des, h_self)
        reports.append(make_report(j, desired, (), rows, space, P, est, s))

    return RoundResult("y", plan, reports, P, space,
                       extras={"precoders": precoders, "relay_scale": scales,
                               "isolation": isolation, "K": K, "N": N})
