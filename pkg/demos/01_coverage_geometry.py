"""Chord-disk geometry behind the surveillance indices.

A vehicle moving along an arc accrues effect from a disk-shaped sensor
footprint at a rate proportional to 1/d^2 while inside the disk.  This walks
through the closed-form time integral and checks it against brute-force
quadrature.
"""

import math

from coverage_routing import (Point2, arc_coverage_index, arc_risk_index,
                              chord_disk_intersect, dist, point_index)

# --- where does a flight leg cross a sensor disk? --------------------------
a, b = Point2(-3.0, 1.0), Point2(3.0, 1.0)
center, radius = Point2(0.0, 0.0), 2.0
ch = chord_disk_intersect(a, b, center, radius)
print("flight leg", (a.x, a.y), "->", (b.x, b.y), "vs disk r =", radius)
print(f"  in-disk sub-segment: ({ch.p_start.x:+.6f},{ch.p_start.y:.1f}) -> "
      f"({ch.p_end.x:+.6f},{ch.p_end.y:.1f}), fraction {ch.frac:.6f}")

# --- two exactly solvable exposure integrals --------------------------------
# radial approach: integral of 1/x^2 from 1 to 2 is exactly 1/2
idx = arc_risk_index(Point2(1, 0), Point2(2, 0), Point2(0, 0), 1.0, 3.0)
print("\nradial pass, unit travel time:")
print(f"  computed {idx.per_time_index * idx.frac:.12f}   analytic 0.5")

# perpendicular pass: integral of 1/(1+x^2) over [-1, 1] is pi/2
idx = arc_risk_index(Point2(-1, 1), Point2(1, 1), Point2(0, 0), 1.0, 2.0)
print("perpendicular pass, two time units:")
print(f"  computed {idx.per_time_index * idx.frac * 2:.12f}   "
      f"analytic {math.pi / 2:.12f}")

# --- the same integral, done numerically ------------------------------------
try:
    from scipy.integrate import quad
except ImportError:
    quad = None

if quad is not None:
    w, r, t = Point2(0.4, -0.7), 1.9, 2.5
    a, b = Point2(-2.0, 0.3), Point2(2.5, -1.1)
    idx = arc_coverage_index(a, b, w, 1.0, r)
    ch = chord_disk_intersect(a, b, w, r)
    ux, uy = ch.p_end.x - ch.p_start.x, ch.p_end.y - ch.p_start.y
    val, _ = quad(lambda s: 1.0 / ((ch.p_start.x + s * ux - w.x) ** 2
                                   + (ch.p_start.y + s * uy - w.y) ** 2),
                  0, 1)
    numeric = val * math.hypot(ux, uy) * t / dist(a, b)
    closed = idx.per_time_index * idx.frac * t
    print("\nrandom oblique pass:")
    print(f"  closed form {closed:.12f}")
    print(f"  quadrature  {numeric:.12f}")

# --- idling next to a target -------------------------------------------------
print("\nidle exposure at distance 0.5 inside a unit disk:",
      point_index(Point2(0.5, 0.0), Point2(0.0, 0.0), 1.0, 1.0))
print("idle exposure outside the disk:",
      point_index(Point2(2.0, 0.0), Point2(0.0, 0.0), 1.0, 1.0))
