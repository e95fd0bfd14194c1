"""One evaluation of the relaxed problem, both deadline regimes.

Dualizing the per-target coverage requirements at multipliers <= 0 leaves a
best-route problem per idle candidate.  With a slack deadline every arc's
travel time is bound-valued up front (case I); with a binding one the timing
is a continuous knapsack threaded through the search (case II).  Both label
searches are checked against exhaustive enumeration.
"""

import numpy as np

from coverage_routing import (build_coeffs, build_index_table,
                              generate_instance, oracle_relaxation,
                              solve_case1, solve_case2)

inst_free = generate_instance(seed=12, n_waypoints=5, n_targets=7, case="I",
                              coverage_radius=25.0)
table = build_index_table(inst_free)
m = len(table.target_ids)
lam = np.array([-0.5 * (k + 1) for k in range(m)])

# --- case I: deadline never binds ---------------------------------------------
coeffs = build_coeffs(table, inst_free, lam, "I")
print(f"multipliers: {np.round(lam, 2)}")
print(f"idle candidates (positive weighted idle coverage): {coeffs.idle_set}")
best = None
for vbar in coeffs.idle_set:
    res = solve_case1(coeffs, vbar, table)
    gain = inst_free.deadline * coeffs.idle_gain[vbar] if vbar else 0.0
    total = coeffs.constant + gain + res.value
    tag = f"idle at {vbar}" if vbar else "no idling"
    print(f"  {tag:<12} route {res.nodes}  value {total:.3f} "
          f"({res.labels_alive}/{res.labels_stored} labels kept)")
    if best is None or total > best[0]:
        best = (total, vbar, res.nodes)
print(f"case-I relaxation value: {best[0]:.6f} via idle candidate {best[1]}")

orc = oracle_relaxation(table, inst_free, lam, "I")
print(f"exhaustive enumeration:  {orc.value:.6f} "
      f"(agree: {abs(orc.value - best[0]) < 1e-8})")

# --- case II: the deadline bites ------------------------------------------------
inst_tight = generate_instance(seed=12, n_waypoints=5, n_targets=7, case="II",
                               deadline_scale=0.15, coverage_radius=25.0)
table2 = build_index_table(inst_tight)
coeffs2 = build_coeffs(table2, inst_tight, lam, "II")
print(f"\nbinding deadline T = {inst_tight.deadline:.1f}")
best2 = None
for vbar in coeffs2.idle_set:
    res = solve_case2(coeffs2, vbar, inst_tight.deadline, table2)
    if res is None:
        print(f"  idle candidate {vbar}: no route fits the deadline")
        continue
    gain = inst_tight.deadline * coeffs2.idle_gain[vbar] if vbar else 0.0
    total = coeffs2.constant + gain + res.value
    ids = [table2.arc_id[a] for a in zip(res.nodes[:-1], res.nodes[1:])]
    lo, hi = coeffs2.t_lo[ids], coeffs2.t_hi[ids]
    t = np.asarray(res.times)
    interior = int(np.sum((t > lo + 1e-9) & (t < hi - 1e-9)))
    print(f"  idle candidate {vbar}: route {res.nodes} value {total:.3f} "
          f"({interior} arc between its speed bounds)")
    if best2 is None or total > best2[0]:
        best2 = (total, vbar)
orc2 = oracle_relaxation(table2, inst_tight, lam, "II")
print(f"case-II relaxation value: {best2[0]:.6f}")
print(f"exhaustive enumeration:   {orc2.value:.6f} "
      f"(agree: {abs(orc2.value - best2[0]) < 1e-8})")
