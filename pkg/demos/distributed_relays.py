"""Distributed relays: neutralization residuals and the design null space."""

import numpy as np

from relaydof import scheme_distributed as sd
from relaydof.channel import Topology, draw_realization

ch = draw_realization(Topology(4, relay_count=3), 3, rng_seed=0)
res = sd.run_ic_round(ch, 1e3, noise_on=False, rng=np.random.default_rng(0))
print(f"IC: residual {res.extras['neutralization_residual']:.1e}, "
      f"max error {res.max_symbol_error():.1e}")

ch = draw_realization(Topology(3, relay_count=3), 4, rng_seed=0)
res = sd.run_y_round(ch, 1e3, noise_on=False, rng=np.random.default_rng(0))
inst = res.extras["instance"]
print(f"Y: F is {inst.F.shape[0]}x{inst.F.shape[1]}, null dim {res.extras['null_dim']}, "
      f"residual {res.extras['neutralization_residual']:.1e}, "
      f"max error {res.max_symbol_error():.1e}")
print("V =\n", np.round(res.extras["V"], 3))
