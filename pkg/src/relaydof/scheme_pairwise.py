"""Four-user schemes with a two-antenna relay.

Variants
--------
``IC_nullspace``
    Two-pair two-way interference channel (pairs 1-3 and 2-4). Users 1, 2
    send forward, users 3, 4 send backward, then the relay broadcasts all
    four symbols with each beam nulled at the one user that has no side
    information about it. Each user stacks its backward/forward observation
    with its self-cancelled relay observation and zero-forces a 2x2 system.
``IC_alignment``
    Same message set with schedule {1,3} then {2,4}. Relay beams are chosen
    so the relay slot reproduces, at each user, the exact interference
    combination that user overheard earlier; subtracting the (scaled)
    recording leaves a scalar observation of the desired symbol.
``IC_af``
    ``IC_nullspace`` with amplify-and-forward relaying through the uplink
    zero-forcing matrices.
``X_channel``
    Users 1, 2 exchange one symbol with each of users 3, 4 (8 symbols,
    5 slots) using targeted relay beams that either vanish at a user or
    replay an interference shape the user recorded earlier.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .channel import RELAY, ChannelSet, SlotPlan
from .errors import ConfigError
from .signals import (RoundResult, SignalSpace, make_report, noise_capacity,
                      normalize_power, zf_solve)

VARIANTS = ("IC_nullspace", "IC_alignment", "IC_af", "X_channel")
K = 4
N = 2

_IC_MASK = frozenset({(2, 1), (4, 1), (1, 2), (3, 2), (2, 3), (4, 3), (1, 4), (3, 4)})
_X_MASK = frozenset({(2, 1), (1, 2), (3, 4), (4, 3)})

# slot -> {sender: symbol}
_UPLINK = {
    "IC_nullspace": {1: {1: (3, 1), 2: (4, 2)}, 2: {3: (1, 3), 4: (2, 4)}},
    "IC_alignment": {1: {1: (3, 1), 3: (1, 3)}, 2: {2: (4, 2), 4: (2, 4)}},
    "X_channel": {1: {1: (3, 1), 2: (3, 2)}, 2: {1: (4, 1), 2: (4, 2)},
                  3: {3: (1, 3), 4: (1, 4)}, 4: {3: (2, 3), 4: (2, 4)}},
}
_UPLINK["IC_af"] = _UPLINK["IC_nullspace"]

# X channel: symbol -> (user the beam must miss, user that must see the
# recorded shape, (k, l, n) of the recorded coefficient h_{k,l}[n])
X_TARGETS = {
    (3, 1): (2, 4, (4, 1, 1)),
    (3, 2): (1, 4, (4, 2, 1)),
    (4, 1): (2, 3, (3, 1, 2)),
    (4, 2): (1, 3, (3, 2, 2)),
    (1, 3): (4, 2, (2, 3, 3)),
    (1, 4): (3, 2, (2, 4, 3)),
    (2, 3): (4, 1, (1, 3, 4)),
    (2, 4): (3, 1, (1, 4, 4)),
}

# IC alignment: symbol -> (the two listeners, the slot whose direct
# coefficients the beam must replay)
IC_ALIGN_TARGETS = {
    (3, 1): ((2, 4), 1),
    (1, 3): ((2, 4), 1),
    (4, 2): ((1, 3), 2),
    (2, 4): ((1, 3), 2),
}


def _check_variant(variant: str) -> None:
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}; choose from {', '.join(VARIANTS)}")


def null_message_mask(variant: str) -> frozenset:
    """Messages ``W_{i,j}`` that are empty for ``variant``."""
    _check_variant(variant)
    return _X_MASK if variant == "X_channel" else _IC_MASK


def messages(variant: str) -> list[tuple[int, int]]:
    """Active symbols in transmission order."""
    _check_variant(variant)
    return [sym for slot in sorted(_UPLINK[variant]) for sym in _UPLINK[variant][slot].values()]


def uplink_schedule(variant: str) -> dict:
    """``{slot: {sender: symbol}}`` for the user-transmit slots."""
    _check_variant(variant)
    return {n: dict(m) for n, m in _UPLINK[variant].items()}


def relay_slot(variant: str) -> int:
    _check_variant(variant)
    return 5 if variant == "X_channel" else 3


def build_plan(variant: str) -> SlotPlan:
    _check_variant(variant)
    users = set(range(1, K + 1))
    pairs = []
    for slot in sorted(_UPLINK[variant]):
        senders = set(_UPLINK[variant][slot])
        pairs.append((senders, (users - senders) | {RELAY}))
    pairs.append(({RELAY}, users))
    return SlotPlan.from_sets(pairs)


# -- precoders -------------------------------------------------------------

def ic_build_precoders(channels: ChannelSet, slot: int = 3,
                       tol: linalg.Tolerance = linalg.DEFAULT_TOL) -> dict:
    """Unit-norm beams, each orthogonal to the one user ignorant of its symbol.

    ``v_{4,2}`` misses user 1, ``v_{3,1}`` user 2, ``v_{2,4}`` user 3 and
    ``v_{1,3}`` user 4.
    """
    blind = {(4, 2): 1, (3, 1): 2, (2, 4): 3, (1, 3): 4}
    return {sym: linalg.null_space(channels.down(u, slot), tol)[:, 0]
            for sym, u in blind.items()}


def ic_alignment_precoders(channels: ChannelSet, slot: int = 3,
                           tol: linalg.Tolerance = linalg.DEFAULT_TOL) -> dict:
    """Beams that replay the earlier interference shapes.

    For ``s_{i,j}`` overheard in slot ``t`` by users ``a`` and ``b``:
    ``[h*_{a,R}; h*_{b,R}] v_{i,j} = [h_{a,j}[t]; h_{b,j}[t]]``.
    """
    out = {}
    for (i, j), ((a, b), t) in IC_ALIGN_TARGETS.items():
        rows = np.array([channels.down(a, slot), channels.down(b, slot)])
        rhs = np.array([channels.h(a, j, t), channels.h(b, j, t)])
        out[(i, j)] = linalg.solve(rows, rhs, tol)
    return out


def x_build_precoders(channels: ChannelSet, slot: int = 5,
                      tol: linalg.Tolerance = linalg.DEFAULT_TOL) -> dict:
    """Targeted beams: zero at the blind user, the recorded coefficient at the aligned user."""
    out = {}
    for sym, (blind, aligned, (k, l, n)) in X_TARGETS.items():
        rows = np.array([channels.down(blind, slot), channels.down(aligned, slot)])
        rhs = np.array([0.0, channels.h(k, l, n)])
        out[sym] = linalg.solve(rows, rhs, tol)
    return out


def uplink_zf_matrix(channels: ChannelSet, variant: str, slot: int,
                     tol: linalg.Tolerance = linalg.DEFAULT_TOL) -> np.ndarray:
    """``U[n]``: inverse of the 2x2 uplink channel of ``slot``, rows ordered by sender."""
    senders = sorted(_UPLINK[variant][slot])
    h = np.column_stack([channels.up(u, slot) for u in senders])
    return linalg.solve(h, np.eye(N), tol)


# -- relay transmit --------------------------------------------------------

def df_transmit(estimates: dict, precoders: dict) -> np.ndarray:
    """``sum_k v_k s_k``; estimates may be scalars or tracked rows."""
    return sum(np.multiply.outer(precoders[k], estimates[k]) for k in precoders)


def ic_af_transmit(y_r1, y_r2, u1, u2, precoders: dict) -> np.ndarray:
    """Amplify-and-forward relay signal ``[v31 v42] U1 y_R[1] + [v13 v24] U2 y_R[2]``."""
    b1 = np.column_stack([precoders[(3, 1)], precoders[(4, 2)]])
    b2 = np.column_stack([precoders[(1, 3)], precoders[(2, 4)]])
    return np.tensordot(b1 @ u1, y_r1, axes=1) + np.tensordot(b2 @ u2, y_r2, axes=1)


# -- decoding --------------------------------------------------------------

def clean(y_relay, own, c_self, y_recorded=None, alpha: float = 0.0):
    """``y_relay - c_self . own - alpha * y_recorded``.

    ``own`` holds the user's transmitted symbols (values, or tracked rows);
    ``c_self`` their effective coefficients in the relay slot.
    """
    out = np.asarray(y_relay) - np.tensordot(np.asarray(c_self), np.asarray(own), axes=1)
    if y_recorded is not None:
        out = out - alpha * np.asarray(y_recorded)
    return out


def ic_decode(y_side, y_relay, own_symbol, c_self, h_eff, aligned: bool = False,
              alpha: float = 1.0):
    """Recover one user's desired symbol in an IC variant.

    Parameters
    ----------
    y_side : complex
        Observation from the slot the user listened in.
    y_relay : complex
        Relay-slot observation.
    own_symbol : complex
        The symbol this user sent.
    c_self : complex
        Effective relay-slot coefficient of ``own_symbol``.
    h_eff : array
        2x2 (desired, nuisance) for the null-space variants; 1x1 if ``aligned``.
    aligned : bool
        Subtract ``alpha * y_side`` instead of stacking it.

    Returns
    -------
    desired : complex
    solution : ndarray
        Full ZF solution (desired first).
    """
    if aligned:
        stacked = clean(y_relay, [own_symbol], [c_self], y_side, alpha)[None]
    else:
        stacked = np.array([y_side, clean(y_relay, [own_symbol], [c_self])])
    sol = zf_solve(h_eff, stacked)
    return sol[0], sol


def x_decode(y_direct, y_relay, y_recorded, own_symbols, c_self, h_eff, alpha: float = 1.0):
    """Stack ``y_j[direct]`` with ``y_j[5] - alpha * recorded - M_j[5]`` and zero-force."""
    stacked = np.array([y_direct, clean(y_relay, own_symbols, c_self, y_recorded, alpha)])
    return zf_solve(h_eff, stacked)


def user_roles(variant: str, j: int) -> dict:
    """Desired, own, nuisance symbols and the slots user ``j`` uses."""
    _check_variant(variant)
    syms = messages(variant)
    desired = [s for s in syms if s[0] == j]
    own = [s for s in syms if s[1] == j]
    heard = [n for n in sorted(_UPLINK[variant]) if j not in _UPLINK[variant][n]]
    if variant == "X_channel":
        direct = next(n for n in heard if set(_UPLINK[variant][n].values()) == set(desired))
        recorded = next(n for n in heard if n != direct)
        return {"desired": desired, "own": own, "nuisance": [],
                "direct": direct, "recorded": recorded}
    (slot,) = heard
    if variant == "IC_alignment":
        return {"desired": desired, "own": own, "nuisance": [],
                "direct": None, "recorded": slot}
    nuisance = [s for s in _UPLINK[variant][slot].values() if s not in desired]
    return {"desired": desired, "own": own, "nuisance": nuisance,
            "direct": slot, "recorded": None}


# -- full round ------------------------------------------------------------

def run_round(channels: ChannelSet, variant: str, P: float, noise_on: bool = True,
              rng: np.random.Generator | None = None, genie_relay: bool = False,
              tol: linalg.Tolerance = linalg.DEFAULT_TOL) -> RoundResult:
    """Run one round of ``variant`` and decode at all four users."""
    _check_variant(variant)
    topo = channels.topology
    if topo.distributed or topo.num_users != K or topo.relay_dims != N:
        raise ConfigError("pairwise schemes need K=4 users and a 2-antenna relay")
    plan = build_plan(variant)
    if channels.slot_count < len(plan):
        raise ConfigError(f"need {len(plan)} slots of channel, got {channels.slot_count}")
    rng = np.random.default_rng() if rng is None else rng
    syms = messages(variant)
    space = SignalSpace(syms, noise_capacity(plan, N), noise_on)
    amp = np.sqrt(P)

    obs = {j: {} for j in range(1, K + 1)}
    relay_y, est = {}, {}
    for n in sorted(_UPLINK[variant]):
        senders = _UPLINK[variant][n]
        tx = {u: amp * space.symbol(s) for u, s in senders.items()}
        rx = space.receive(n, plan, tx, channels)
        for node, y in rx.items():
            if node != RELAY:
                obs[node][n] = y
        relay_y[n] = rx[RELAY]
        order = sorted(senders)
        if genie_relay:
            vals = [amp * space.symbol(senders[u]) for u in order]
        else:
            h_up = np.column_stack([channels.up(u, n) for u in order])
            vals = zf_solve(h_up, rx[RELAY], tol)
        for u, v in zip(order, vals):
            est[senders[u]] = v

    rs = relay_slot(variant)
    extras = {"variant": variant}
    if variant in ("IC_nullspace", "IC_af"):
        beams = ic_build_precoders(channels, rs, tol)
    elif variant == "IC_alignment":
        beams = ic_alignment_precoders(channels, rs, tol)
    else:
        beams = x_build_precoders(channels, rs, tol)
    if variant == "IC_af" and not genie_relay:
        u1 = uplink_zf_matrix(channels, variant, 1, tol)
        u2 = uplink_zf_matrix(channels, variant, 2, tol)
        x = ic_af_transmit(relay_y[1], relay_y[2], u1, u2, beams)
        extras["U"] = (u1, u2)
    else:
        x = df_transmit(est, beams)
    x, alpha = normalize_power(x, P)
    extras.update(precoders=beams, alpha=alpha, relay_signal=x)
    rx = space.receive(rs, plan, {RELAY: x}, channels)
    for j in range(1, K + 1):
        obs[j][rs] = rx[j]

    s, w = space.draw(rng)
    reports = []
    for j in range(1, K + 1):
        role = user_roles(variant, j)
        desired, own, nuis = role["desired"], role["own"], role["nuisance"]
        y_rel = obs[j][rs]
        c_self = np.array([space.coef(y_rel, o) for o in own])
        own_rows = np.array([space.symbol(o) for o in own])
        own_vals = np.array([s[space.index[o]] for o in own])
        rec = role["recorded"]
        a = alpha if rec is not None else 0.0
        rel_rows = clean(y_rel, own_rows, c_self, obs[j][rec] if rec is not None else None, a)
        rows = rel_rows[None] if role["direct"] is None else np.array([obs[j][role["direct"]], rel_rows])
        cols = [space.index[k] for k in (*desired, *nuis)]
        h_eff = space.symbol_part(rows)[:, cols]

        val = lambda r: space.evaluate(r, s, w)  # noqa: E731
        if variant == "X_channel":
            sol = x_decode(val(obs[j][role["direct"]]), val(y_rel), val(obs[j][rec]),
                           own_vals, c_self, h_eff, alpha)
        elif variant == "IC_alignment":
            _, sol = ic_decode(val(obs[j][rec]), val(y_rel), own_vals[0], c_self[0], h_eff,
                               aligned=True, alpha=alpha)
        else:
            _, sol = ic_decode(val(obs[j][role["direct"]]), val(y_rel), own_vals[0],
                               c_self[0], h_eff)
        rep = make_report(j, desired, nuis, rows, space, P, sol[: len(desired)], s)
        reports.append(rep)

    return RoundResult(variant, plan, reports, P, space, extras=extras)
