"""Linear bookkeeping of every signal in a scheme round.

Each transmitted or received quantity is stored as a coefficient vector over
a fixed basis of independent unit-variance sources: the information symbols
first, then one column per receive-noise sample. Channels, relay processing
and user-side cancellation are all linear, so the same arrays give

* noise-off observations (dot with the symbol values),
* noisy observations (dot with symbols and a noise draw), and
* the exact noise covariance of any cleaned observation (Gram matrix of the
  noise columns), which the rate computation needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .channel import RELAY, ChannelSet, SlotPlan, complex_noise, propagate
from .errors import RankDeficient

Symbol = tuple  # (destination, source)


class SignalSpace:
    """Basis of symbols and noise sources for one round.

    Parameters
    ----------
    symbols : sequence of (i, j)
        Message keys ``s_{i,j}`` (destination ``i``, source ``j``).
    noise_capacity : int
        Number of scalar noise samples the round will draw.
    noise_on : bool
        If false, :meth:`noise` returns zeros and no noise columns exist.
    """

    def __init__(self, symbols: Sequence[Symbol], noise_capacity: int, noise_on: bool = True):
        self.symbols = tuple(symbols)
        self.index = {s: i for i, s in enumerate(self.symbols)}
        self.noise_on = noise_on
        self.n_sym = len(self.symbols)
        self.size = self.n_sym + (noise_capacity if noise_on else 0)
        self._next = self.n_sym

    def symbol(self, key: Symbol) -> np.ndarray:
        e = np.zeros(self.size, dtype=complex)
        e[self.index[key]] = 1.0
        return e

    def noise(self, shape=()) -> np.ndarray:
        """Fresh independent unit noise for every element of ``shape``."""
        shape = tuple(np.atleast_1d(shape)) if shape != () else ()
        count = int(np.prod(shape)) if shape else 1
        out = np.zeros((count, self.size), dtype=complex)
        if self.noise_on:
            if self._next + count > self.size:
                raise RuntimeError("noise capacity exhausted")
            out[np.arange(count), self._next + np.arange(count)] = 1.0
            self._next += count
        return out.reshape(shape + (self.size,))

    def receive(self, slot: int, plan: SlotPlan, tx: dict, channels: ChannelSet) -> dict:
        """Tracked counterpart of :func:`channel.propagate` with noise sources attached."""
        rx = propagate(slot, plan, tx, channels, noise_on=False)
        for node, y in rx.items():
            rx[node] = y + self.noise(y.shape[:-1])
        return rx

    def coef(self, row: np.ndarray, key: Symbol) -> complex:
        return complex(row[..., self.index[key]])

    def symbol_part(self, rows: np.ndarray) -> np.ndarray:
        return rows[..., : self.n_sym]

    def noise_part(self, rows: np.ndarray) -> np.ndarray:
        return rows[..., self.n_sym:]

    def draw(self, rng: np.random.Generator, noise_on: bool | None = None):
        """Random symbol values and, if noise is on, one noise realization."""
        s = complex_noise(rng, self.n_sym)
        n_noise = self.size - self.n_sym
        on = self.noise_on if noise_on is None else noise_on
        w = complex_noise(rng, n_noise) if on else np.zeros(n_noise, dtype=complex)
        return s, w

    def evaluate(self, rows: np.ndarray, s: np.ndarray, w: np.ndarray) -> np.ndarray:
        return rows @ np.concatenate([s, w])

    def used_noise(self) -> int:
        return self._next - self.n_sym


def noise_capacity(plan: SlotPlan, relay_dims: int) -> int:
    """Scalar noise samples needed to receive every slot of ``plan``."""
    total = 0
    for s in plan.slots:
        for d in s.destinations:
            total += relay_dims if d == RELAY else 1
    return total


def normalize_power(x: np.ndarray, power: float) -> tuple[np.ndarray, float]:
    """Scale a tracked transmit signal to ``E||x||^2 = power``.

    Returns the scaled signal and the applied amplitude factor.
    """
    energy = float(np.sum(np.abs(x) ** 2))
    if energy == 0.0:
        return x, 1.0
    a = np.sqrt(power / energy)
    return a * x, a


def zf_solve(h_eff: np.ndarray, y: np.ndarray, tol: linalg.Tolerance = linalg.DEFAULT_TOL) -> np.ndarray:
    """Zero-forcing solve of ``y = h_eff @ s``; least squares for tall systems."""
    h_eff = linalg.as_cmatrix(h_eff)
    m, d = h_eff.shape
    if linalg.rank(h_eff, tol) < d:
        raise RankDeficient(f"effective channel {m}x{d} lost rank")
    if m == d:
        return linalg.solve(h_eff, y, tol)
    hh = h_eff.conj().T
    return linalg.solve(hh @ h_eff, hh @ np.asarray(y, dtype=complex), tol)


@dataclass
class DecodeReport:
    """What one user recovered and the linear system it used.

    ``h_eff`` holds the desired columns followed by any jointly-resolved
    nuisance columns, normalised by ``sqrt(P)``; ``noise_cov`` is the
    covariance of the aggregate noise on the stacked cleaned observation.
    """

    user: int
    desired: tuple
    nuisance: tuple
    h_eff: np.ndarray
    rank: int
    estimates: np.ndarray
    truth: np.ndarray | None = None
    noise_cov: np.ndarray | None = None
    interference: np.ndarray | None = None
    residual_interference: float | None = None
    power: float | None = None
    noise_on: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def symbol_error(self) -> float:
        if self.truth is None:
            raise ValueError("report carries no transmitted symbols")
        return float(np.max(np.abs(self.estimates - self.truth)))

    @property
    def h_desired(self) -> np.ndarray:
        return self.h_eff[:, : len(self.desired)]

    @property
    def h_nuisance(self) -> np.ndarray:
        return self.h_eff[:, len(self.desired):]

    def sinr(self) -> np.ndarray:
        """Post-ZF SINR (linear) of each desired stream."""
        if self.noise_cov is None or self.power is None:
            raise ValueError("report has no noise model")
        P = self.power
        cov = self.noise_cov.copy()
        if self.interference is not None and self.interference.size:
            cov = cov + P * self.interference @ self.interference.conj().T
        w = np.linalg.pinv(self.h_eff)
        noise = np.real(np.einsum("ij,jk,ik->i", w, cov, w.conj()))
        d = len(self.desired)
        with np.errstate(divide="ignore"):
            return P / noise[:d]


def make_report(user: int, desired: Sequence[Symbol], nuisance: Sequence[Symbol],
                rows: np.ndarray, space: SignalSpace, power: float,
                estimates: np.ndarray, s: np.ndarray | None = None) -> DecodeReport:
    """Assemble a full report from the cleaned, stacked coefficient rows of one user."""
    rows = np.atleast_2d(rows)
    cols = [space.index[k] for k in (*desired, *nuisance)]
    other = [i for i in range(space.n_sym) if i not in cols]
    sym = space.symbol_part(rows)
    amp = np.sqrt(power)
    h_eff = sym[:, cols] / amp
    interf = sym[:, other] / amp
    nz = space.noise_part(rows)
    cov = nz @ nz.conj().T
    desired_pow = float(np.sum(np.abs(sym[:, cols[: len(desired)]]) ** 2))
    resid = float(np.sum(np.abs(sym[:, other]) ** 2)) / desired_pow if desired_pow else np.inf
    truth = None
    if s is not None:
        truth = np.array([s[space.index[k]] for k in desired])
    return DecodeReport(
        user=user,
        desired=tuple(desired),
        nuisance=tuple(nuisance),
        h_eff=h_eff,
        rank=linalg.rank(h_eff),
        estimates=np.asarray(estimates),
        truth=truth,
        noise_cov=cov,
        interference=interf,
        residual_interference=resid,
        power=power,
        noise_on=space.noise_on,
    )


@dataclass
class RoundResult:
    """Outcome of one scheme round on one channel realization."""

    scheme: str
    plan: SlotPlan
    reports: list
    power: float
    space: SignalSpace
    extras: dict = field(default_factory=dict)

    @property
    def slot_count(self) -> int:
        return len(self.plan)

    @property
    def symbol_count(self) -> int:
        return sum(len(r.desired) for r in self.reports)

    @property
    def nominal_dof(self) -> float:
        return self.symbol_count / self.slot_count

    def max_symbol_error(self) -> float:
        return max(r.symbol_error for r in self.reports)

    def max_residual_interference(self) -> float:
        return max(r.residual_interference for r in self.reports)


__all__ = [
    "SignalSpace",
    "DecodeReport",
    "RoundResult",
    "make_report",
    "noise_capacity",
    "normalize_power",
    "zf_solve",
]
