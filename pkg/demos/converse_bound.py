"""Print the cut-set LP optimum and the single-user-cut sum bound for a range of K."""

from relaydof import converse

for K in range(2, 9):
    lp = converse.lp_bound(K)
    lam = ", ".join(f"{x:.2f}" for x in lp.lam)
    print(f"K={K}: cut value {lp.value:.3f} at lambda=({lam}); "
          f"sum-DoF bound {converse.lemma1_sum_bound(K).value}")
