"""Chord-disk intersections and the per-arc detection/surveillance indices.

A stationary sensor at point ``w`` acts on a vehicle at rate ``factor / d**2``
while the vehicle is inside the sensor's disk.  For straight-line motion at
constant speed the time integral over the in-disk sub-segment has a closed
form: with ``theta`` the angle subtended at ``w`` by the sub-segment endpoints
``p`` and ``q``,

    integral = factor * theta / (sin(theta) * d(p,w) * d(q,w))
               * (len(sub-segment) / len(arc)) * travel_time.

This module computes the sub-segment and packages the two leading factors as
an :class:`ArcIndex` (a rate per unit time plus the in-disk fraction).  The
same machinery serves both the risk side (detection of the vehicle by a
target) and the coverage side (surveillance of the target by the vehicle);
only the factor and radius differ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import DegenerateSegmentError, TargetTooCloseError

EMPTY = "empty"
SEGMENT = "segment"

# Below this subtended angle, theta/sin(theta) is evaluated by series to
# avoid 0/0 on radial chords.
_SMALL_ANGLE = 1e-4


@dataclass(frozen=True)
class Point2:
    """A point in the horizontal plane of motion."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")


def dist(a: Point2, b: Point2) -> float:
    """Euclidean distance between two points."""
    return math.hypot(b.x - a.x, b.y - a.y)


@dataclass(frozen=True)
class ChordIntersection:
    """The sub-segment of ``[a, b]`` inside a closed disk.

    ``p_start``/``p_end`` are ordered from ``a`` toward ``b`` and ``frac`` is
    the sub-segment length divided by the full segment length.  A tangent
    touch (single point) counts as empty: it has zero length and contributes
    nothing to any time integral.
    """

    kind: str
    p_start: Optional[Point2]
    p_end: Optional[Point2]
    frac: float

    @property
    def is_empty(self) -> bool:
        return self.kind == EMPTY


_EMPTY_CHORD = ChordIntersection(EMPTY, None, None, 0.0)


def chord_disk_intersect(a: Point2, b: Point2, center: Point2,
                         radius: float) -> ChordIntersection:
    """Intersect segment ``[a, b]`` with the closed disk around ``center``.

    Raises :class:`DegenerateSegmentError` when ``a == b`` and ``ValueError``
    for a non-positive radius.
    """
    ux, uy = b.x - a.x, b.y - a.y
    seg2 = ux * ux + uy * uy
    if seg2 == 0.0:
        raise DegenerateSegmentError(f"segment endpoints coincide at ({a.x}, {a.y})")
    if radius <= 0.0:
        raise ValueError(f"radius must be positive, got {radius}")

    seg_len = math.sqrt(seg2)
    ax, ay = a.x - center.x, a.y - center.y
    # Foot of the perpendicular from the center, in segment parameter units,
    # and the signed center-to-line distance.  This form keeps the computed
    # endpoints on the circle to ~1 ulp instead of solving the raw quadratic.
    t_mid = -(ax * ux + ay * uy) / seg2
    line_dist = (ax * uy - ay * ux) / seg_len
    half2 = radius * radius - line_dist * line_dist
    if half2 <= 0.0:
        return _EMPTY_CHORD
    half = math.sqrt(half2) / seg_len

    s_lo = max(0.0, t_mid - half)
    s_hi = min(1.0, t_mid + half)
    if s_lo >= s_hi:
        return _EMPTY_CHORD
    return ChordIntersection(
        SEGMENT,
        Point2(a.x + s_lo * ux, a.y + s_lo * uy),
        Point2(a.x + s_hi * ux, a.y + s_hi * uy),
        s_hi - s_lo,
    )


@dataclass(frozen=True)
class ArcIndex:
    """Per-unit-time index of an arc against one disk, plus in-disk fraction.

    The total effect of traversing the arc in time ``t`` is
    ``per_time_index * frac * t``.
    """

    per_time_index: float
    frac: float


def _theta_over_sin(theta: float) -> float:
    if theta < _SMALL_ANGLE:
        t2 = theta * theta
        return 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0
    return theta / math.sin(theta)


def point_segment_distance(p: Point2, a: Point2, b: Point2) -> float:
    """Distance from ``p`` to the closed segment ``[a, b]``."""
    ux, uy = b.x - a.x, b.y - a.y
    seg2 = ux * ux + uy * uy
    if seg2 == 0.0:
        return dist(p, a)
    s = ((p.x - a.x) * ux + (p.y - a.y) * uy) / seg2
    s = min(1.0, max(0.0, s))
    return math.hypot(p.x - (a.x + s * ux), p.y - (a.y + s * uy))


def _arc_index(i: Point2, j: Point2, w: Point2, factor: float, radius: float,
               eps: float, what: str) -> ArcIndex:
    if factor < 0.0:
        raise ValueError(f"{what} factor must be nonnegative, got {factor}")
    if point_segment_distance(w, i, j) <= eps:
        raise TargetTooCloseError(
            f"target at ({w.x}, {w.y}) lies on arc within clearance {eps}")
    chord = chord_disk_intersect(i, j, w, radius)
    if chord.is_empty:
        return ArcIndex(0.0, 0.0)
    if factor == 0.0:
        return ArcIndex(0.0, chord.frac)
    v1x, v1y = chord.p_start.x - w.x, chord.p_start.y - w.y
    v2x, v2y = chord.p_end.x - w.x, chord.p_end.y - w.y
    d1 = math.hypot(v1x, v1y)
    d2 = math.hypot(v2x, v2y)
    theta = math.atan2(abs(v1x * v2y - v1y * v2x), v1x * v2x + v1y * v2y)
    return ArcIndex(factor * _theta_over_sin(theta) / (d1 * d2), chord.frac)


def arc_risk_index(i: Point2, j: Point2, w: Point2, sigma: float,
                   risk_radius: float, eps: float = 0.0) -> ArcIndex:
    """Detection-exposure index of arc ``(i, j)`` against target ``w``.

    ``sigma`` scales the inverse-square detection rate and ``risk_radius`` is
    the detection disk radius.  Targets within ``eps`` of the segment are
    rejected (the index would be singular there).
    """
    return _arc_index(i, j, w, sigma, risk_radius, eps, "risk")


def arc_coverage_index(i: Point2, j: Point2, w: Point2, rho: float,
                       coverage_radius: float, eps: float = 0.0) -> ArcIndex:
    """Surveillance index of arc ``(i, j)`` over target ``w``.

    Identical geometry to :func:`arc_risk_index` with the vehicle's coverage
    factor and coverage radius in place of the target's detection parameters.
    """
    return _arc_index(i, j, w, rho, coverage_radius, eps, "coverage")


def point_index(p: Point2, w: Point2, factor: float, radius: float,
                eps: float = 0.0) -> float:
    """Per-unit-time index while idling at ``p``: ``factor/d**2`` inside the
    closed disk, zero outside."""
    if factor < 0.0:
        raise ValueError(f"factor must be nonnegative, got {factor}")
    d = dist(p, w)
    if d <= eps:
        raise TargetTooCloseError(
            f"target at ({w.x}, {w.y}) coincides with waypoint within {eps}")
    if d <= radius:
        return factor / (d * d)
    return 0.0
