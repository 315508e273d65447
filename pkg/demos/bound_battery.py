"""Estimated operator norms against the product bounds on a reduced battery.

Norms are largest singular values on the truncation, so they are lower bounds of the true
norms. A ratio above 1 would be a genuine violation; small ratios are slack in the bound.
"""

from collections import defaultdict

from fockweyl.experiments import default_battery, run_bound_battery

rows = run_bound_battery(default_battery(), hs=(0.25, 1.0), caps={1: 12, 2: 8})
worst = defaultdict(float)
for r in rows:
    key = (r["symbol"], r["quantity"].split("[")[0])
    worst[key] = max(worst[key], r["ratio"])

print(f"{'symbol':24} {'quantity':8} max ratio")
for (sym, q), ratio in sorted(worst.items()):
    print(f"{sym:24} {q:8} {ratio:.3e}")
print(f"violations: {sum(r['violation'] for r in rows)} of {len(rows)} comparisons")
