"""Independent reference computations shared by several test modules."""

import numpy as np


def _compositions(n, parts):
    # all non-negative integer vectors of length ``parts`` summing to n
    if parts == 1:
        return np.array([[n]])
    out = [np.column_stack([np.full(len(rest), a), rest])
           for a in range(n + 1) for rest in [_compositions(n - a, parts - 1)]]
    return np.vstack(out)


def simplex_grid_max(Ks, steps=100):
    """Brute-force max of the six-state cut-set objective on a simplex grid.

    Returns ``{K: max}``. Points are streamed in chunks that fix the first
    two coordinates, so memory stays small at step 0.01.
    """
    tails = {n: _compositions(n, 4) for n in range(steps + 1)}
    best = {K: -np.inf for K in Ks}
    for a in range(steps + 1):
        for b in range(steps + 1 - a):
            t = tails[steps - a - b] / steps
            l1, l2 = a / steps, b / steps
            l3, l4, l5, l6 = t.T
            for K in Ks:
                k1 = K - 1
                v = (np.minimum(k1 * (l1 + l3) + l5, l1 + l4 + l5)
                     + np.minimum(l2 + l3 + l6, l2 + k1 * (l4 + l6)))
                best[K] = max(best[K], float(v.max()))
    return best
