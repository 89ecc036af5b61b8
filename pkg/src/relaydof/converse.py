"""Cut-set converse for the K-user Y channel.

With all users but one cooperating, the network becomes a half-duplex
two-way relay channel with six possible network states. Letting
``lam[i]`` be the time fraction of state ``i``, the DoF exchanged across
the cut is bounded by the linear program

    max  min{(K-1)(l1+l3)+l5, l1+l4+l5} + min{l2+l3+l6, l2+(K-1)(l4+l6)}
    s.t. sum(l) = 1, l >= 0.

It is solved exactly in epigraph form (``t1``, ``t2`` below each pair of
branches) by enumerating the vertices of the feasible polytope.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import ConfigError, Singular

CONSTRAINT_NAMES = (
    "lam1>=0", "lam2>=0", "lam3>=0", "lam4>=0", "lam5>=0", "lam6>=0",
    "t1<=source_cut_1", "t1<=dest_cut_1", "t2<=source_cut_2", "t2<=dest_cut_2",
)


def branches(K: int) -> np.ndarray:
    """Coefficients of the four min-branches as rows over ``lam1..lam6``."""
    k1 = K - 1
    return np.array([
        [k1, 0, k1, 0, 1, 0],
        [1, 0, 0, 1, 1, 0],
        [0, 1, 1, 0, 0, 1],
        [0, 1, 0, k1, 0, k1],
    ], dtype=float)


def objective(K: int, lam) -> np.ndarray:
    """LP objective at one or many points ``lam`` (last axis of length 6)."""
    b = np.asarray(lam, dtype=float) @ branches(K).T
    return np.minimum(b[..., 0], b[..., 1]) + np.minimum(b[..., 2], b[..., 3])


@dataclass
class LpResult:
    K: int
    value: float
    lam: np.ndarray
    t: tuple[float, float]
    binding: list[str]

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "value": self.value,
            "lambda": [float(x) for x in self.lam],
            "t": list(self.t),
            "binding": list(self.binding),
        }


def _inequalities(K: int) -> tuple[np.ndarray, np.ndarray]:
    # G z <= h over z = (lam1..lam6, t1, t2)
    G = np.zeros((10, 8))
    G[:6, :6] = -np.eye(6)
    b = branches(K)
    for r, t_col in zip(range(4), (6, 6, 7, 7)):
        G[6 + r, :6] = -b[r]
        G[6 + r, t_col] = 1.0
    return G, np.zeros(10)


def lp_bound(K: int, feas_tol: float = 1e-12) -> LpResult:
    """Exact optimum of the six-state LP by vertex enumeration.

    A vertex has eight active constraints: the simplex equality and seven
    of the ten inequalities. Every choice is solved and checked for
    feasibility; the best objective ``t1 + t2`` wins.
    """
    if K < 2:
        raise ConfigError(f"the cut-set LP needs K >= 2, got {K}")
    G, h = _inequalities(K)
    eq = np.concatenate([np.ones(6), np.zeros(2)])
    best = None
    for active in itertools.combinations(range(10), 7):
        a = np.vstack([eq, G[list(active)]])
        rhs = np.concatenate([[1.0], h[list(active)]])
        try:
            z = np.real(linalg.solve(a, rhs))
        except Singular:
            continue
        if np.any(G @ z - h > feas_tol):
            continue
        val = z[6] + z[7]
        if best is None or val > best[0] + feas_tol:
            best = (val, z)
    val, z = best
    slack = h - G @ z
    binding = [CONSTRAINT_NAMES[i] for i in range(10) if abs(slack[i]) <= 1e-9]
    lam = np.where(np.abs(z[:6]) < feas_tol, 0.0, z[:6])
    return LpResult(K, float(val) + 0.0, lam + 0.0, (float(z[6]) + 0.0, float(z[7]) + 0.0), binding)


@dataclass
class SumBound:
    value: float
    cuts: list[dict]


def lemma1_sum_bound(K: int) -> SumBound:
    """Sum-DoF bound K/2 from adding the K single-user cuts.

    Cut ``k`` bounds everything user ``k`` sends plus everything it
    receives by 1. Each message appears in exactly two cuts, so the sum
    of the K cuts bounds twice the sum-DoF.
    """
    if K < 2:
        raise ConfigError(f"need K >= 2, got {K}")
    cuts = [{"user": k, "bound": 1.0} for k in range(1, K + 1)]
    return SumBound(sum(c["bound"] for c in cuts) / 2, cuts)
