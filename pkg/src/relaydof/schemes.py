"""Registry mapping scheme ids to topology, slot budget and round runner."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .channel import Topology
from .errors import ConfigError

SCHEME_IDS = ("y", "ic", "ic_align", "ic_af", "x", "dist_ic", "dist_y")


@dataclass(frozen=True)
class SchemeSpec:
    scheme: str
    topology: Topology
    slot_count: int
    nominal_dof: float
    runner: Callable

    def run(self, channels, P, noise_on=True, rng=None, genie_relay=False):
        return self.runner(channels, P, noise_on=noise_on, rng=rng, genie_relay=genie_relay)


def resolve(scheme: str, K: int | None = None, N: int | None = None,
            R: int | None = None) -> SchemeSpec:
    """Validate parameters for ``scheme`` and return its runner.

    ``K``/``N`` apply to the Y channel (defaults 3 and K-1); the four-user
    schemes fix K=4, N=2; the distributed schemes fix R=3.
    """
    from . import scheme_distributed as sd
    from . import scheme_pairwise as sp
    from . import scheme_y as sy

    if scheme == "y":
        K = 3 if K is None else K
        N = K - 1 if N is None else N
        if K < 3:
            raise ConfigError(f"y needs K >= 3, got {K}")
        if N < K - 1:
            raise ConfigError(f"y needs N >= K-1 = {K - 1}, got N={N}")

        def run(ch, P, noise_on=True, rng=None, genie_relay=False):
            return sy.run_round(ch, K, N, P, noise_on=noise_on, rng=rng, genie_relay=genie_relay)

        return SchemeSpec("y", Topology(K, relay_antennas=N), 2 * K - 2, K / 2, run)

    if scheme in ("ic", "ic_align", "ic_af", "x"):
        if K not in (None, 4) or N not in (None, 2) or R is not None:
            raise ConfigError(f"{scheme} is defined for K=4 users and an N=2 relay only")
        variant = {"ic": "IC_nullspace", "ic_align": "IC_alignment",
                   "ic_af": "IC_af", "x": "X_channel"}[scheme]
        slots = 5 if scheme == "x" else 3
        nominal = 8 / 5 if scheme == "x" else 4 / 3

        def run(ch, P, noise_on=True, rng=None, genie_relay=False):
            return sp.run_round(ch, variant, P, noise_on=noise_on, rng=rng, genie_relay=genie_relay)

        return SchemeSpec(scheme, Topology(4, relay_antennas=2), slots, nominal, run)

    if scheme in ("dist_ic", "dist_y"):
        R = 3 if R is None else R
        if R != 3:
            raise ConfigError(f"{scheme} requires R=3 relays, got {R}")
        if N is not None:
            raise ConfigError(f"{scheme} uses single-antenna relays; pass R, not N")
        if scheme == "dist_ic":
            if K not in (None, 4):
                raise ConfigError("dist_ic is defined for K=4")

            def run(ch, P, noise_on=True, rng=None, genie_relay=False):
                return sd.run_ic_round(ch, P, noise_on=noise_on, rng=rng)

            return SchemeSpec("dist_ic", Topology(4, relay_count=3), 3, 4 / 3, run)
        if K not in (None, 3):
            raise ConfigError("dist_y is defined for K=3")

        def run(ch, P, noise_on=True, rng=None, genie_relay=False):
            return sd.run_y_round(ch, P, noise_on=noise_on, rng=rng)

        return SchemeSpec("dist_y", Topology(3, relay_count=3), 4, 3 / 2, run)

    raise ConfigError(f"unknown scheme {scheme!r}; choose from {', '.join(SCHEME_IDS)}")
