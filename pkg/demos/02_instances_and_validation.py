"""Problem instances: generation, files, index tables, and route validation.

Instances live in a single JSON document; the index table caches every
(arc, target) and (waypoint, target) exposure rate so solvers never redo
geometry.
"""

import json
import tempfile
from pathlib import Path

from coverage_routing import (PathSolution, ValidateOptions, build_index_table,
                              generate_instance, instance_to_json,
                              load_instance, validate_solution)

# --- draw a random field of waypoints and targets ---------------------------
inst = generate_instance(seed=7, n_waypoints=5, n_targets=8, case="II",
                         coverage_radius=25.0)
print(f"instance: {inst.n} waypoints + 2 depots, {len(inst.targets)} targets "
      f"({len(inst.removed_targets)} removed at ingestion), "
      f"deadline {inst.deadline:.1f}")
for tid, reason in inst.removed_targets:
    print(f"  dropped target {tid}: {reason}")

# --- round-trip through the file format --------------------------------------
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "instance.json"
    path.write_text(instance_to_json(inst))
    again = load_instance(path)
    print("file round-trip exact:", again == inst)

# --- the index table ----------------------------------------------------------
table = build_index_table(inst)
print(f"\nindex table: {len(table.arcs)} arcs x {len(table.target_ids)} "
      f"targets")
print("coverage rate of the first few arcs against target 0:")
for k in range(3):
    i, j = table.arcs[k]
    print(f"  arc ({i},{j}): {table.coverage_rate[k, 0]:.6f} per unit time")

# --- score a hand-built route --------------------------------------------------
nodes = (0, 1, 2, inst.exit_id)
times = tuple(float(table.node_dist[i, j] / 5.0)
              for i, j in zip(nodes[:-1], nodes[1:]))  # cruise at speed 5
sol = PathSolution(nodes=nodes, times=times, idle_node=1,
                   idle_time=min(10.0, inst.deadline - sum(times)))
report = validate_solution(inst, sol, ValidateOptions(enforce_coverage=True),
                           table)
print(f"\nhand-built route {nodes}, idling {sol.idle_time:.1f} at waypoint 1:")
for check in report.constraints:
    print(f"  {check.name:<22} {'pass' if check.passed else 'FAIL':<5} "
          f"slack {check.slack:+.3e}")
print(f"  objective (priority-weighted coverage): {report.objective:.4f}")
print(json.dumps(report.to_dict()["per_target"], indent=2))
