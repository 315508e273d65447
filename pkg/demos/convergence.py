"""Nested windows on a four-site lattice Gaussian with weights 2^-j.

Adding one more mode to the Weyl block changes the hybrid operator by less each time. The
differences shrink geometrically and stay under the difference bound.
"""

from fockweyl.experiments import convergence_experiment

out = convergence_experiment(n_modes=4, lam=0.3, h=1.0, cap=8, ratio=0.5)
print(f"fitted eps scale C = {out.fitted_C:.4f}")
print(f"{'n':>2} {'||H(n+1) - H(n)||':>18} {'bound':>12} {'ratio':>10}")
for r in out.rows:
    print(f"{r['n']:>2} {r['est_norm_diff']:>18.6e} {r['diff_bound']:>12.4e} {r['ratio']:>10.3e}")
print("monotone:", out.monotone, " within bound:", out.within_bound)
