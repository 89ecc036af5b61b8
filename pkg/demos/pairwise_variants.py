"""Compare the four-user relay variants on one channel draw and by slope."""

import numpy as np

from relaydof import dof, scheme_pairwise
from relaydof.channel import Topology, draw_realization

topo = Topology(4, relay_antennas=2)
for variant in scheme_pairwise.VARIANTS:
    ch = draw_realization(topo, scheme_pairwise.relay_slot(variant), rng_seed=3)
    res = scheme_pairwise.run_round(ch, variant, 1e4, noise_on=False,
                                    rng=np.random.default_rng(0))
    print(f"{variant:13s} symbols={res.symbol_count} slots={res.slot_count} "
          f"max error={res.max_symbol_error():.1e}")

print()
for scheme in ("ic", "ic_align", "ic_af", "x"):
    est = dof.estimate_dof(scheme, snr_grid_db=[40, 50, 60, 70], trials=200)
    print(f"{scheme:9s} slope {est.slope:.3f}  nominal {est.nominal:.3f}")
