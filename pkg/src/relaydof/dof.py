"""Achievable sum-rates of a scheme round and sum-DoF as a high-SNR slope.

Rates are Gaussian-input mutual informations of each user's cleaned, stacked
observation. Jointly resolved nuisance symbols and any residual interference
are treated as coloured noise, so only the desired streams count. Slopes
are least-squares fits of the mean sum-rate (bits per slot) against
``log2(P)`` on the upper part of the SNR grid.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import DEFAULT_H_MAX, DEFAULT_H_MIN, draw_realization
from .errors import ConfigError, DegenerateDraw, SingularNoiseCov
from .schemes import resolve

log = logging.getLogger(__name__)

MAX_REDRAWS = 5
ABORT_LIMIT = 0.01
THREADS_ENV = "RELAYDOF_THREADS"


def log_det_rate(h_desired, noise_cov, P: float, slots: int = 1, h_interf=None) -> float:
    """``log2 det(I + P Hd^H C^-1 Hd) / slots`` with ``C = noise_cov + P Hi Hi^H``.

    Raises
    ------
    SingularNoiseCov
        If ``noise_cov`` is not positive definite (e.g. a noise-off report).
    """
    hd = np.atleast_2d(np.asarray(h_desired, dtype=complex))
    cov = np.atleast_2d(np.asarray(noise_cov, dtype=complex))
    if h_interf is not None:
        hi = np.atleast_2d(np.asarray(h_interf, dtype=complex))
        if hi.size:
            cov = cov + P * hi @ hi.conj().T
    cov = 0.5 * (cov + cov.conj().T)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise SingularNoiseCov("noise covariance is not positive definite") from None
    g = np.linalg.solve(chol, hd)
    gram = np.eye(hd.shape[1]) + P * (g.conj().T @ g)
    sign, logdet = np.linalg.slogdet(gram)
    return float(logdet / np.log(2.0) / slots)


@dataclass
class RateReport:
    """Rates of one round; ``user_rates`` in bits per slot, amortised over the round."""

    power: float
    slots: int
    user_rates: dict
    sinr: dict

    @property
    def sum_rate(self) -> float:
        return float(sum(self.user_rates.values()))


def round_sum_rate(result, P: float | None = None) -> RateReport:
    """Per-user and sum rate of a :class:`~relaydof.signals.RoundResult`."""
    P = result.power if P is None else P
    rates, sinr = {}, {}
    for rep in result.reports:
        if not rep.noise_on or rep.noise_cov is None:
            raise SingularNoiseCov(f"user {rep.user}: rates need a noise-on round")
        interf = np.hstack([rep.h_nuisance, rep.interference])
        rates[rep.user] = max(0.0, log_det_rate(rep.h_desired, rep.noise_cov, P,
                                                result.slot_count, interf))
        sinr[rep.user] = rep.sinr()
    return RateReport(P, result.slot_count, rates, sinr)


@dataclass
class DofEstimate:
    scheme: str
    params: dict
    snr_grid_db: list
    mean_rates: list
    rate_stderr: list
    slope: float
    stderr: float
    nominal: float
    trials: int
    aborted: int
    fit_points: int
    valid: bool = True
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "params": self.params,
            "nominal_dof": self.nominal,
            "slope": self.slope,
            "stderr": self.stderr,
            "valid": self.valid,
            "trials": self.trials,
            "aborted": self.aborted,
            "fit_points": self.fit_points,
            "snr_grid_db": list(self.snr_grid_db),
            "mean_rates": list(self.mean_rates),
            "rate_stderr": list(self.rate_stderr),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["snr_db", "mean_rate", "stderr"])
        for row in zip(self.snr_grid_db, self.mean_rates, self.rate_stderr):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def fit_slope(snr_grid_db, mean_rates) -> tuple[float, float, int]:
    """Slope of rate vs log2(P) over the top half of the grid (at least 3 points)."""
    snr = np.asarray(snr_grid_db, dtype=float)
    rates = np.asarray(mean_rates, dtype=float)
    n = snr.size
    k = min(n, max(3, n - n // 2))
    x = snr[n - k:] / 10.0 * np.log2(10.0)
    y = rates[n - k:]
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean()) / sxx)
    resid = y - (y.mean() + slope * xc)
    stderr = float(np.sqrt((resid @ resid) / (k - 2) / sxx)) if k > 2 else 0.0
    return slope, stderr, k


def _threads(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _trial(spec, t: int, seed: int, powers, h_min, h_max, genie_relay):
    for attempt in range(MAX_REDRAWS + 1):
        ss = np.random.SeedSequence([seed, t, attempt])
        ch_seed, rng_seed = ss.spawn(2)
        channels = draw_realization(spec.topology, spec.slot_count, ch_seed, h_min, h_max)
        rng = np.random.default_rng(rng_seed)
        try:
            rates = [round_sum_rate(spec.run(channels, P, noise_on=True, rng=rng,
                                             genie_relay=genie_relay)).sum_rate
                     for P in powers]
        except DegenerateDraw as exc:
            log.info("trial %d attempt %d redrawn: %s", t, attempt, exc)
            continue
        return np.array(rates)
    log.warning("trial %d aborted after %d redraws", t, MAX_REDRAWS)
    return None


def estimate_dof(scheme: str, snr_grid_db=None, trials: int = 200, rng_seed: int = 0,
                 K: int | None = None, N: int | None = None, R: int | None = None,
                 h_min: float = DEFAULT_H_MIN, h_max: float = DEFAULT_H_MAX,
                 genie_relay: bool = False, threads: int | None = None) -> DofEstimate:
    """Monte Carlo sum-DoF estimate.

    Each trial draws one channel realization (redrawn up to five times on a
    degenerate draw) and evaluates the round at every grid point, so all
    SNRs share the same channels. Trials run on a thread pool sized by
    ``threads`` or ``$RELAYDOF_THREADS``; results are reduced in trial order,
    so output does not depend on the pool size.
    """
    snr = np.arange(50.0, 90.0 + 1e-9, 5.0) if snr_grid_db is None else np.asarray(snr_grid_db, float)
    if snr.size < 3 or np.any(np.diff(snr) <= 0):
        raise ConfigError("SNR grid must be strictly increasing with at least 3 points")
    if snr[-1] - snr[0] < 20.0:
        raise ConfigError("SNR grid must span at least 20 dB")
    if trials < 200:
        raise ConfigError(f"need at least 200 trials, got {trials}")
    spec = resolve(scheme, K, N, R)
    powers = 10.0 ** (snr / 10.0)

    def work(t):
        return _trial(spec, t, rng_seed, powers, h_min, h_max, genie_relay)

    n_threads = _threads(threads)
    if n_threads == 1:
        results = [work(t) for t in range(trials)]
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            results = list(pool.map(work, range(trials)))

    kept = [r for r in results if r is not None]
    aborted = trials - len(kept)
    if not kept:
        raise DegenerateDraw("every trial aborted")
    table = np.zeros((len(kept), snr.size))
    for i, r in enumerate(kept):
        table[i] = r
    mean = np.zeros(snr.size)
    for r in kept:
        mean += r
    mean /= len(kept)
    err = table.std(axis=0, ddof=1) / np.sqrt(len(kept)) if len(kept) > 1 else np.zeros(snr.size)
    slope, stderr, k = fit_slope(snr, mean)
    params = {"K": spec.topology.num_users, "h_min": h_min, "h_max": h_max,
              "genie_relay": genie_relay, "seed": rng_seed}
    if spec.topology.distributed:
        params["R"] = spec.topology.relay_count
    else:
        params["N"] = spec.topology.relay_antennas
    return DofEstimate(
        scheme=spec.scheme,
        params=params,
        snr_grid_db=[float(v) for v in snr],
        mean_rates=[float(v) for v in mean],
        rate_stderr=[float(v) for v in err],
        slope=slope,
        stderr=stderr,
        nominal=spec.nominal_dof,
        trials=trials,
        aborted=aborted,
        fit_points=k,
        valid=aborted <= ABORT_LIMIT * trials,
    )
