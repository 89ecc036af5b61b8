"""Schemes with three distributed single-antenna relays.

The relays share channel knowledge but not data: relay ``n`` transmits a
linear combination of its own past scalar observations only, with
coefficients handed out by a central planner. No relay decodes, so the
receive noise of every relay is forwarded.

``dist_ic``
    Two-pair two-way interference channel. Two uplink slots as in the
    single-relay scheme, then each relay sends ``v^n[1] y^n[1] + v^n[2] y^n[2]``.
    The gain vectors neutralise, over the two hops, the one symbol each user
    knows nothing about.
``dist_y``
    Three-user Y channel. Three uplink slots, then relay ``n`` sends
    ``sum_k V(n, k) y^n[k]``. ``V`` is chosen so each user's inter-user
    interference vanishes; the conditions are linear in ``vec(V)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from . import scheme_pairwise as sp
from . import scheme_y as sy
from .channel import RELAY, ChannelSet, SlotPlan
from .errors import ConfigError
from .signals import RoundResult, SignalSpace, make_report, noise_capacity, zf_solve

R = 3


def relay_transmit(coeffs, history):
    """Transmit sample of one relay from its own observation history.

    ``coeffs[t]`` weights ``history[t]``; entries may be scalars or tracked rows.
    """
    return sum(c * np.asarray(y) for c, y in zip(coeffs, history))


def _common_scale(x: np.ndarray, P: float) -> tuple[np.ndarray, float]:
    # one scale for all relays, set by the most loaded one
    energy = np.sum(np.abs(x) ** 2, axis=tuple(range(1, x.ndim)))
    peak = float(energy.max())
    if peak == 0.0:
        return x, 1.0
    a = np.sqrt(P / peak)
    return a * x, a


def _check_topology(channels: ChannelSet, users: int, slots: int) -> None:
    topo = channels.topology
    if not topo.distributed or topo.num_users != users:
        raise ConfigError(f"need {users} users and distributed relays")
    if channels.slot_count < slots:
        raise ConfigError(f"need {slots} slots of channel, got {channels.slot_count}")


# -- two-pair two-way IC ---------------------------------------------------

def two_hop_gain(channels: ChannelSet, user: int, sender: int, uplink_slot: int,
                 relay_slot: int = 3) -> np.ndarray:
    """``g_{l,R,i}``: elementwise ``h^n_{l,R}[relay_slot] h^n_{R,i}[uplink_slot]`` over relays."""
    return channels.down(user, relay_slot) * channels.up(sender, uplink_slot)


def dist_ic_plan() -> SlotPlan:
    return sp.build_plan("IC_nullspace")


def dist_ic_gains(channels: ChannelSet, tol: linalg.Tolerance = linalg.DEFAULT_TOL):
    """Unit-norm relay gain vectors ``(v[1], v[2])``.

    ``v[1]`` keeps ``s_{4,2}`` from user 1 and ``s_{3,1}`` from user 2;
    ``v[2]`` keeps ``s_{2,4}`` from user 3 and ``s_{1,3}`` from user 4.

    Raises
    ------
    EmptyNullSpace
        With fewer than three relays the stacked 2xR systems are generically
        invertible.
    """
    g1 = np.array([two_hop_gain(channels, 1, 2, 1), two_hop_gain(channels, 2, 1, 1)])
    g2 = np.array([two_hop_gain(channels, 3, 4, 2), two_hop_gain(channels, 4, 3, 2)])
    return linalg.null_space(g1, tol)[:, 0], linalg.null_space(g2, tol)[:, 0]


def dist_ic_residual(channels: ChannelSet, v1: np.ndarray, v2: np.ndarray) -> float:
    """Largest relative neutralization residual ``|g . v| / ||g||`` of the four conditions."""
    worst = 0.0
    for (l, i, t), v in (((1, 2, 1), v1), ((2, 1, 1), v1), ((3, 4, 2), v2), ((4, 3, 2), v2)):
        g = two_hop_gain(channels, l, i, t)
        worst = max(worst, float(abs(g @ v) / np.linalg.norm(g)))
    return worst


def dist_ic_decode(y_side, y_relay, own_symbol, c_self, g_eff):
    """Stack the side observation with the self-cancelled relay observation, then ZF."""
    return sp.ic_decode(y_side, y_relay, own_symbol, c_self, g_eff)


def run_ic_round(channels: ChannelSet, P: float, noise_on: bool = True,
                 rng: np.random.Generator | None = None,
                 tol: linalg.Tolerance = linalg.DEFAULT_TOL) -> RoundResult:
    _check_topology(channels, 4, 3)
    rng = np.random.default_rng() if rng is None else rng
    variant = "IC_nullspace"
    plan = dist_ic_plan()
    L = channels.topology.relay_dims
    space = SignalSpace(sp.messages(variant), noise_capacity(plan, L), noise_on)
    amp = np.sqrt(P)

    obs = {j: {} for j in range(1, 5)}
    relay_y = {}
    for n in (1, 2):
        tx = {u: amp * space.symbol(s) for u, s in sp.uplink_schedule(variant)[n].items()}
        rx = space.receive(n, plan, tx, channels)
        for node, y in rx.items():
            if node != RELAY:
                obs[node][n] = y
        relay_y[n] = rx[RELAY]

    v1, v2 = dist_ic_gains(channels, tol)
    x = np.array([relay_transmit((v1[r], v2[r]), (relay_y[1][r], relay_y[2][r]))
                  for r in range(L)])
    x, alpha = _common_scale(x, P)
    rx = space.receive(3, plan, {RELAY: x}, channels)
    for j in range(1, 5):
        obs[j][3] = rx[j]

    residual = dist_ic_residual(channels, v1, v2)

    s, w = space.draw(rng)
    reports = []
    for j in range(1, 5):
        role = sp.user_roles(variant, j)
        desired, own, nuis = role["desired"], role["own"], role["nuisance"]
        y_rel = obs[j][3]
        c_self = space.coef(y_rel, own[0])
        rows = np.array([obs[j][role["direct"]],
                         sp.clean(y_rel, [space.symbol(own[0])], [c_self])])
        cols = [space.index[k] for k in (*desired, *nuis)]
        g_eff = space.symbol_part(rows)[:, cols]
        _, sol = dist_ic_decode(space.evaluate(obs[j][role["direct"]], s, w),
                                space.evaluate(y_rel, s, w),
                                s[space.index[own[0]]], c_self, g_eff)
        reports.append(make_report(j, desired, nuis, rows, space, P, sol[:1], s))

    return RoundResult("dist_ic", plan, reports, P, space,
                       extras={"gains": (v1, v2), "alpha": alpha, "relay_signal": x,
                               "neutralization_residual": residual})


# -- three-user Y channel --------------------------------------------------

@dataclass
class DistYInstance:
    """Blocks of the distributed Y channel relay design.

    Attributes
    ----------
    H : (3, 6) complex
        ``[H_R[1] H_R[2] H_R[3]]``; column order follows :data:`SYMBOLS`.
    P, A, B, C : dict
        Per-user permutation and the desired / self / other column blocks,
        ``[A_j B_j C_j] = H P_j``.
    downlink : dict
        ``h*_{j,R}[4]`` per user.
    F : (6, 9) complex
        Neutralization system acting on ``vec(V)`` (column-major).
    """

    H: np.ndarray
    P: dict
    A: dict
    B: dict
    C: dict
    downlink: dict
    F: np.ndarray

    def null_dim(self, tol: linalg.Tolerance = linalg.DEFAULT_TOL) -> int:
        return self.F.shape[1] - linalg.rank(self.F, tol)


SYMBOLS = tuple(sy.messages(3))


def symbol_order(j: int) -> list[tuple[int, int]]:
    """Symbols reordered for user ``j``: desired, self, then other."""
    desired = [s for s in SYMBOLS if s[0] == j]
    own = [s for s in SYMBOLS if s[1] == j]
    other = [s for s in SYMBOLS if j not in s]
    return desired + own + other


def permutation(j: int) -> np.ndarray:
    """``P_j`` with ``s_natural = P_j s_reordered``."""
    order = symbol_order(j)
    p = np.zeros((6, 6))
    for c, sym in enumerate(order):
        p[SYMBOLS.index(sym), c] = 1.0
    return p


def dist_y_plan() -> SlotPlan:
    return sy.build_plan(3)


def dist_y_assemble(channels: ChannelSet, relay_slot: int = 4) -> DistYInstance:
    """Build ``H``, ``P_j``, ``A_j``, ``B_j``, ``C_j`` and the neutralization system.

    Relay ``n`` scales its slot-``k`` observation by ``V(n, k)``, so the
    coefficient of ``s_{k,l}`` at user ``j`` is ``(h*_{j,R} o H[:, (k,l)]) . V[:, k]``.
    Each interfering symbol gives one row of ``F`` supported on the
    ``vec(V)`` block of its own slot.
    """
    H = np.column_stack([channels.up(l, k) for (k, l) in SYMBOLS])
    P, A, B, C, down, rows = {}, {}, {}, {}, {}, []
    for j in (1, 2, 3):
        P[j] = permutation(j)
        blocks = H @ P[j]
        A[j], B[j], C[j] = blocks[:, :2], blocks[:, 2:4], blocks[:, 4:]
        down[j] = channels.down(j, relay_slot)
        for (k, l) in symbol_order(j)[4:]:
            e = np.zeros(3)
            e[k - 1] = 1.0
            rows.append(linalg.kron(e, down[j] * channels.up(l, k))[0])
    return DistYInstance(H, P, A, B, C, down, np.array(rows))


def dist_y_solve(inst: DistYInstance, tol: linalg.Tolerance = linalg.DEFAULT_TOL) -> np.ndarray:
    """Unit-Frobenius ``V`` with ``vec(V)`` in the null space of ``F``.

    The null space splits into one direction per slot block. The all-ones
    vector is projected onto it so that every slot is forwarded.
    """
    basis = linalg.null_space(inst.F, tol)
    v = basis @ (basis.conj().T @ np.ones(inst.F.shape[1]))
    v = v / np.linalg.norm(v)
    return linalg.unvec(v, 3, 3)


def interference_coefficients(inst: DistYInstance, V: np.ndarray, j: int) -> np.ndarray:
    """Relay-slot coefficients at user ``j`` of its two inter-user interference symbols."""
    return np.array([(inst.downlink[j] * inst.H[:, SYMBOLS.index(sym)]) @ V[:, sym[0] - 1]
                     for sym in symbol_order(j)[4:]])


def neutralization_residual(inst: DistYInstance, V: np.ndarray) -> float:
    """Largest interference coefficient over users, relative to the user's total gain."""
    worst = 0.0
    for j in (1, 2, 3):
        scale = sum(np.linalg.norm(inst.downlink[j] * inst.H[:, c]) * np.linalg.norm(V[:, s[0] - 1])
                    for c, s in enumerate(SYMBOLS))
        worst = max(worst, float(np.max(np.abs(interference_coefficients(inst, V, j)))) / scale)
    return worst


def dist_y_decode(y_direct, y_relay, own_symbols, c_self, h_eff):
    """Stack ``y_j[j]`` with ``y_j[4]`` minus the self term and solve 2x2."""
    stacked = np.array([y_direct, sp.clean(y_relay, own_symbols, c_self)])
    return zf_solve(h_eff, stacked)


def run_y_round(channels: ChannelSet, P: float, noise_on: bool = True,
                rng: np.random.Generator | None = None,
                tol: linalg.Tolerance = linalg.DEFAULT_TOL) -> RoundResult:
    _check_topology(channels, 3, 4)
    rng = np.random.default_rng() if rng is None else rng
    plan = dist_y_plan()
    L = channels.topology.relay_dims
    space = SignalSpace(SYMBOLS, noise_capacity(plan, L), noise_on)
    amp = np.sqrt(P)

    direct, relay_y = {}, {}
    for k in (1, 2, 3):
        tx = {l: amp * space.symbol((k, l)) for l in (1, 2, 3) if l != k}
        rx = space.receive(k, plan, tx, channels)
        direct[k] = rx[k]
        relay_y[k] = rx[RELAY]

    inst = dist_y_assemble(channels)
    V = dist_y_solve(inst, tol)
    x = np.array([relay_transmit(V[r], [relay_y[k][r] for k in (1, 2, 3)]) for r in range(L)])
    x, alpha = _common_scale(x, P)
    rx = space.receive(4, plan, {RELAY: x}, channels)

    s, w = space.draw(rng)
    reports = []
    for j in (1, 2, 3):
        order = symbol_order(j)
        desired, own = order[:2], order[2:4]
        y_rel = rx[j]
        c_self = np.array([space.coef(y_rel, o) for o in own])
        rows = np.array([direct[j],
                         sp.clean(y_rel, np.array([space.symbol(o) for o in own]), c_self)])
        h_eff = space.symbol_part(rows)[:, [space.index[d] for d in desired]]
        own_vals = np.array([s[space.index[o]] for o in own])
        est = dist_y_decode(space.evaluate(direct[j], s, w), space.evaluate(y_rel, s, w),
                            own_vals, c_self, h_eff)
        reports.append(make_report(j, desired, (), rows, space, P, est, s))

    return RoundResult("dist_y", plan, reports, P, space,
                       extras={"V": V, "alpha": alpha, "instance": inst, "relay_signal": x,
                               "null_dim": inst.null_dim(tol),
                               "neutralization_residual": neutralization_residual(inst, V)})
