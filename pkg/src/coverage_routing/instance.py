"""Problem data model, file ingestion, generation, and solution validation.

An :class:`Instance` is a route network (entry depot ``0``, interior
waypoints ``1..n``, exit depot ``n+1``), a set of targets to surveil, one
homogeneous vehicle, and an operational deadline.  Arcs form the complete
directed graph over the waypoints minus self-loops and the direct
depot-to-depot hop.

The :class:`ArcIndexTable` caches every per-arc and per-waypoint
risk/coverage index so the optimization layers never touch raw geometry.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from . import geometry
from .errors import SchemaError, TargetTooCloseError
from .geometry import Point2

FIELD_SIZE = 100.0

#: preset -> (interior waypoints, targets drawn, coverage radius)
PRESETS = {
    "small": (9, 10, 10.0),
    "medium": (12, 11, 20.0),
    "large": (15, 12, 20.0),
}

DEADLINE_SCALE = {"I": 1.0, "II": 0.1}


@dataclass(frozen=True)
class Waypoint:
    id: int
    point: Point2
    window_open: float = 0.0
    window_close: float = math.inf


@dataclass(frozen=True)
class Target:
    id: int
    point: Point2
    risk_factor: float
    priority: float
    risk_radius: float
    min_coverage: float


@dataclass(frozen=True)
class Vehicle:
    coverage_factor: float
    coverage_radius: float
    speed_min: float
    speed_max: float
    energy_max: float
    priority: float = 1.0


@dataclass(frozen=True)
class Physics:
    beta: float = 1.0
    gamma: float = 1.0


@dataclass(frozen=True, eq=True)
class Instance:
    """Immutable problem data.  ``waypoints`` holds ids ``0..n+1`` in order;
    ``0`` is the entry depot and ``n+1`` the exit depot."""

    waypoints: Tuple[Waypoint, ...]
    targets: Tuple[Target, ...]
    vehicle: Vehicle
    physics: Physics
    deadline: float
    meta: Tuple[Tuple[str, object], ...] = ()
    removed_targets: Tuple[Tuple[int, str], ...] = field(default=(), compare=False)

    @property
    def n(self) -> int:
        return len(self.waypoints) - 2

    @property
    def exit_id(self) -> int:
        return self.n + 1

    @property
    def interior_ids(self) -> range:
        return range(1, self.n + 1)

    def point(self, node: int) -> Point2:
        return self.waypoints[node].point

    def arcs(self) -> Iterator[Tuple[int, int]]:
        """All arcs: (V minus exit) x V, minus self-loops and (0, exit)."""
        out = self.exit_id
        for i in range(out):
            for j in range(out + 1):
                if i == j or (i == 0 and j == out):
                    continue
                yield (i, j)

    @property
    def arc_count(self) -> int:
        n1 = self.n + 1
        return n1 * (n1 + 1) - n1 - 1

    @property
    def eps_geo(self) -> float:
        """Clearance below which a target counts as sitting on an arc:
        1e-9 of the waypoint bounding-box diagonal."""
        xs = [w.point.x for w in self.waypoints]
        ys = [w.point.y for w in self.waypoints]
        diag = math.hypot(max(xs) - min(xs), max(ys) - min(ys))
        return 1e-9 * diag if diag > 0 else 1e-9

    def meta_dict(self) -> Dict[str, object]:
        return dict(self.meta)


def _segment_pairs(instance: Instance) -> Iterator[Tuple[int, int]]:
    """Unordered node pairs whose segment is traversed by some arc (every
    pair except the depot pair)."""
    out = instance.exit_id
    for i in range(out + 1):
        for j in range(i + 1, out + 1):
            if i == 0 and j == out:
                continue
            yield (i, j)


def validate_instance(instance: Instance) -> None:
    """Raise :class:`SchemaError` on any structural defect."""
    n = instance.n
    if n < 1:
        raise SchemaError("need at least one interior waypoint")
    for pos, wp in enumerate(instance.waypoints):
        if wp.id != pos:
            raise SchemaError(f"waypoint ids must be 0..{n + 1} in order, "
                              f"found id {wp.id} at position {pos}")
        if wp.window_close < wp.window_open:
            raise SchemaError(f"waypoint {wp.id} has an empty time window")
    veh = instance.vehicle
    if not (0 < veh.speed_min <= veh.speed_max):
        raise SchemaError(f"need 0 < speed_min <= speed_max, "
                          f"got [{veh.speed_min}, {veh.speed_max}]")
    if veh.coverage_radius <= 0 or veh.coverage_factor < 0:
        raise SchemaError("coverage radius must be positive and the factor nonnegative")
    if instance.deadline <= 0:
        raise SchemaError(f"deadline must be positive, got {instance.deadline}")
    seen = set()
    for t in instance.targets:
        if t.id in seen or t.id < 0:
            raise SchemaError(f"duplicate or negative target id {t.id}")
        seen.add(t.id)
        if t.min_coverage < 0:
            raise SchemaError(f"target {t.id} has negative coverage requirement")
        if t.risk_radius <= 0 or t.risk_factor < 0:
            raise SchemaError(f"target {t.id} has bad risk parameters")
        if t.priority < 0:
            raise SchemaError(f"target {t.id} has negative priority")
    for (i, j) in _segment_pairs(instance):
        if geometry.dist(instance.point(i), instance.point(j)) == 0.0:
            raise SchemaError(f"waypoints {i} and {j} coincide")


def _clean_targets(instance: Instance) -> Instance:
    """Drop targets that sit on an arc or that no arc/waypoint can cover."""
    eps = instance.eps_geo
    pairs = list(_segment_pairs(instance))
    kept: List[Target] = []
    removed: List[Tuple[int, str]] = []
    for t in instance.targets:
        on_arc = any(
            geometry.point_segment_distance(t.point, instance.point(i),
                                            instance.point(j)) <= eps
            for (i, j) in pairs)
        if on_arc:
            removed.append((t.id, "on-arc"))
            continue
        coverable = any(
            geometry.dist(instance.point(i), t.point) <= instance.vehicle.coverage_radius
            for i in instance.interior_ids)
        if not coverable:
            for (i, j) in pairs:
                chord = geometry.chord_disk_intersect(
                    instance.point(i), instance.point(j), t.point,
                    instance.vehicle.coverage_radius)
                if not chord.is_empty:
                    coverable = True
                    break
        if coverable:
            kept.append(t)
        else:
            removed.append((t.id, "uncoverable"))
    if not removed:
        return instance
    return replace(instance, targets=tuple(kept),
                   removed_targets=instance.removed_targets + tuple(removed))


def _check_target_clearance(instance: Instance) -> None:
    eps = instance.eps_geo
    for t in instance.targets:
        for (i, j) in _segment_pairs(instance):
            if geometry.point_segment_distance(
                    t.point, instance.point(i), instance.point(j)) <= eps:
                raise SchemaError(
                    f"target {t.id} lies on arc ({i},{j}) and cleaning is disabled")


def finalize_instance(instance: Instance, clean: bool = True) -> Instance:
    """Validate and (by default) clean the target set."""
    validate_instance(instance)
    if clean:
        return _clean_targets(instance)
    _check_target_clearance(instance)
    return instance


# ---------------------------------------------------------------------------
# serialization


def serialize_instance(instance: Instance) -> dict:
    return {
        "meta": instance.meta_dict(),
        "deadline": instance.deadline,
        "physics": {"beta": instance.physics.beta, "gamma": instance.physics.gamma},
        "vehicle": {
            "coverage_factor": instance.vehicle.coverage_factor,
            "coverage_radius": instance.vehicle.coverage_radius,
            "speed_min": instance.vehicle.speed_min,
            "speed_max": instance.vehicle.speed_max,
            "energy_max": instance.vehicle.energy_max,
            "priority": instance.vehicle.priority,
        },
        "waypoints": [
            {"id": w.id, "x": w.point.x, "y": w.point.y,
             "window_open": w.window_open, "window_close": w.window_close}
            for w in instance.waypoints
        ],
        "targets": [
            {"id": t.id, "x": t.point.x, "y": t.point.y,
             "risk_factor": t.risk_factor, "priority": t.priority,
             "risk_radius": t.risk_radius, "min_coverage": t.min_coverage}
            for t in instance.targets
        ],
    }


def instance_to_json(instance: Instance) -> str:
    return json.dumps(serialize_instance(instance), indent=2, sort_keys=True) + "\n"


def save_instance(instance: Instance, path: Union[str, Path]) -> None:
    Path(path).write_text(instance_to_json(instance))


def _num(doc: dict, key: str, where: str, allow_inf: bool = False) -> float:
    if key not in doc:
        raise SchemaError(f"missing field '{key}' in {where}")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"field '{key}' in {where} must be a number, got {v!r}")
    v = float(v)
    if not allow_inf and not math.isfinite(v):
        raise SchemaError(f"field '{key}' in {where} must be finite, got {v}")
    return v


def _ident(doc: dict, key: str, where: str) -> int:
    if key not in doc:
        raise SchemaError(f"missing field '{key}' in {where}")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise SchemaError(f"field '{key}' in {where} must be a nonnegative integer")
    return v


def load_instance(source: Union[str, Path, dict], clean: bool = True) -> Instance:
    """Build a validated :class:`Instance` from a JSON file path or a parsed
    document.  Targets dropped during cleaning are reported on
    ``instance.removed_targets``."""
    if isinstance(source, (str, Path)):
        try:
            doc = json.loads(Path(source).read_text())
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {source}: {exc}") from exc
    elif isinstance(source, dict):
        doc = source
    else:
        raise SchemaError(f"unsupported instance source {type(source)!r}")

    for key in ("waypoints", "targets", "vehicle", "physics", "deadline"):
        if key not in doc:
            raise SchemaError(f"missing top-level key '{key}'")

    phys = doc["physics"]
    physics = Physics(beta=_num(phys, "beta", "physics"),
                      gamma=_num(phys, "gamma", "physics"))
    veh = doc["vehicle"]
    vehicle = Vehicle(
        coverage_factor=_num(veh, "coverage_factor", "vehicle"),
        coverage_radius=_num(veh, "coverage_radius", "vehicle"),
        speed_min=_num(veh, "speed_min", "vehicle"),
        speed_max=_num(veh, "speed_max", "vehicle"),
        energy_max=_num(veh, "energy_max", "vehicle", allow_inf=True),
        priority=_num(veh, "priority", "vehicle") if "priority" in veh else 1.0,
    )
    waypoints = []
    for k, w in enumerate(doc["waypoints"]):
        where = f"waypoints[{k}]"
        waypoints.append(Waypoint(
            id=_ident(w, "id", where),
            point=Point2(_num(w, "x", where), _num(w, "y", where)),
            window_open=_num(w, "window_open", where) if "window_open" in w else 0.0,
            window_close=(_num(w, "window_close", where, allow_inf=True)
                          if "window_close" in w else math.inf),
        ))
    targets = []
    for k, t in enumerate(doc["targets"]):
        where = f"targets[{k}]"
        targets.append(Target(
            id=_ident(t, "id", where),
            point=Point2(_num(t, "x", where), _num(t, "y", where)),
            risk_factor=_num(t, "risk_factor", where),
            priority=_num(t, "priority", where),
            risk_radius=_num(t, "risk_radius", where),
            min_coverage=_num(t, "min_coverage", where),
        ))
    meta = doc.get("meta", {})
    if not isinstance(meta, dict):
        raise SchemaError("'meta' must be an object")
    instance = Instance(
        waypoints=tuple(waypoints),
        targets=tuple(targets),
        vehicle=vehicle,
        physics=physics,
        deadline=_num(doc, "deadline", "document"),
        meta=tuple(sorted(meta.items())),
    )
    return finalize_instance(instance, clean=clean)


# ---------------------------------------------------------------------------
# generation


def generate_instance(seed: int,
                      n_waypoints: Optional[int] = None,
                      n_targets: Optional[int] = None,
                      *,
                      preset: Optional[str] = None,
                      case: str = "I",
                      deadline_scale: Optional[float] = None,
                      coverage_radius: Optional[float] = None,
                      risk_radius: float = 5.0,
                      risk_factor: float = 1.0,
                      coverage_factor: float = 1.0,
                      speed_min: float = 1.0,
                      speed_max: float = 10.0,
                      beta: float = 1.0,
                      gamma: float = 1.0,
                      energy_max: float = 67500.0,
                      min_coverage: float = 1.0,
                      priority_range: Tuple[int, int] = (1, 5),
                      field_size: float = FIELD_SIZE) -> Instance:
    """Draw a random instance on a ``field_size`` square, deterministically in
    ``seed``.

    A preset fixes the waypoint/target counts and the coverage radius; counts
    given explicitly override it.  The deadline is ``arc_count * max arc
    length * scale`` with scale 1.0 for case I (never binding) and 0.1 for
    case II unless overridden.  Target priorities are integers drawn
    uniformly from ``priority_range``.
    """
    if preset is not None:
        if preset not in PRESETS:
            raise SchemaError(f"unknown preset {preset!r}")
        p_way, p_tar, p_cov = PRESETS[preset]
        n_waypoints = n_waypoints if n_waypoints is not None else p_way
        n_targets = n_targets if n_targets is not None else p_tar
        coverage_radius = coverage_radius if coverage_radius is not None else p_cov
    if n_waypoints is None or n_targets is None:
        raise SchemaError("give a preset or explicit waypoint/target counts")
    if n_waypoints < 1 or n_targets < 1:
        raise SchemaError("sizes must be at least 1")
    if case not in DEADLINE_SCALE:
        raise SchemaError(f"case must be 'I' or 'II', got {case!r}")
    coverage_radius = coverage_radius if coverage_radius is not None else 10.0
    scale = deadline_scale if deadline_scale is not None else DEADLINE_SCALE[case]

    rng = random.Random(seed)
    depot = Point2(rng.uniform(0, field_size), rng.uniform(0, field_size))
    pts = [Point2(rng.uniform(0, field_size), rng.uniform(0, field_size))
           for _ in range(n_waypoints)]
    raw_targets = []
    for tid in range(n_targets):
        p = Point2(rng.uniform(0, field_size), rng.uniform(0, field_size))
        prio = rng.randint(*priority_range)
        raw_targets.append(Target(tid, p, risk_factor, float(prio),
                                  risk_radius, min_coverage))

    n = n_waypoints
    arc_count = (n + 1) * (n + 2) - (n + 1) - 1
    all_pts = [depot] + pts + [depot]
    max_d = 0.0
    for i in range(n + 2):
        for j in range(i + 1, n + 2):
            if i == 0 and j == n + 1:
                continue
            max_d = max(max_d, geometry.dist(all_pts[i], all_pts[j]))
    deadline = arc_count * max_d * scale

    waypoints = tuple(
        Waypoint(idx, p, 0.0, deadline) for idx, p in enumerate(all_pts))
    instance = Instance(
        waypoints=waypoints,
        targets=tuple(raw_targets),
        vehicle=Vehicle(coverage_factor, coverage_radius, speed_min, speed_max,
                        energy_max, 1.0),
        physics=Physics(beta, gamma),
        deadline=deadline,
        meta=tuple(sorted({
            "seed": seed, "preset": preset, "case": case,
            "deadline_scale": scale,
        }.items())),
    )
    return finalize_instance(instance, clean=True)


# ---------------------------------------------------------------------------
# index table


class ArcIndexTable:
    """Precomputed risk/coverage indices for every (arc, target) and
    (interior waypoint, target) pair, plus node distances and arc time
    bounds."""

    def __init__(self, instance: Instance):
        self.instance = instance
        n = instance.n
        self.n = n
        self.exit_id = instance.exit_id
        self.arcs: Tuple[Tuple[int, int], ...] = tuple(instance.arcs())
        self.arc_id: Dict[Tuple[int, int], int] = {
            a: k for k, a in enumerate(self.arcs)}
        self.target_ids: Tuple[int, ...] = tuple(t.id for t in instance.targets)

        pts = [w.point for w in instance.waypoints]
        self.node_dist = np.zeros((n + 2, n + 2))
        for i in range(n + 2):
            for j in range(i + 1, n + 2):
                d = geometry.dist(pts[i], pts[j])
                self.node_dist[i, j] = self.node_dist[j, i] = d
        self.arc_dist = np.array([self.node_dist[i, j] for (i, j) in self.arcs])
        self.min_time = self.arc_dist / instance.vehicle.speed_max
        self.max_time = self.arc_dist / instance.vehicle.speed_min

        m = len(instance.targets)
        eps = instance.eps_geo
        self.risk_index = np.zeros((len(self.arcs), m))
        self.risk_frac = np.zeros((len(self.arcs), m))
        self.cov_index = np.zeros((len(self.arcs), m))
        self.cov_frac = np.zeros((len(self.arcs), m))
        veh = instance.vehicle
        for k, (i, j) in enumerate(self.arcs):
            for col, t in enumerate(instance.targets):
                try:
                    ri = geometry.arc_risk_index(pts[i], pts[j], t.point,
                                                 t.risk_factor, t.risk_radius, eps)
                    ci = geometry.arc_coverage_index(pts[i], pts[j], t.point,
                                                     veh.coverage_factor,
                                                     veh.coverage_radius, eps)
                except TargetTooCloseError as exc:
                    raise TargetTooCloseError(
                        f"target {t.id} against arc ({i},{j}): {exc}") from exc
                self.risk_index[k, col] = ri.per_time_index
                self.risk_frac[k, col] = ri.frac
                self.cov_index[k, col] = ci.per_time_index
                self.cov_frac[k, col] = ci.frac

        self.wp_risk = np.zeros((n, m))
        self.wp_cov = np.zeros((n, m))
        for i in instance.interior_ids:
            for col, t in enumerate(instance.targets):
                try:
                    self.wp_risk[i - 1, col] = geometry.point_index(
                        pts[i], t.point, t.risk_factor, t.risk_radius, eps)
                    self.wp_cov[i - 1, col] = geometry.point_index(
                        pts[i], t.point, veh.coverage_factor,
                        veh.coverage_radius, eps)
                except TargetTooCloseError as exc:
                    raise TargetTooCloseError(
                        f"target {t.id} against waypoint {i}: {exc}") from exc

        # effect per unit travel time on the arc as a whole
        self.coverage_rate = self.cov_index * self.cov_frac
        self.risk_rate = self.risk_index * self.risk_frac
        # in-disk length of each arc per target (coverage disk)
        self.d_bar = self.cov_frac * self.arc_dist[:, None]
        self.priorities = np.array([t.priority for t in instance.targets])
        self.required = np.array([t.min_coverage for t in instance.targets])

    def matrix(self, per_arc: np.ndarray, fill: float = 0.0) -> np.ndarray:
        """Scatter a per-arc vector into a dense (n+2)x(n+2) node matrix."""
        out = np.full((self.n + 2, self.n + 2), fill)
        for k, (i, j) in enumerate(self.arcs):
            out[i, j] = per_arc[k]
        return out

    def waypoint_coverage_vector(self, node: int) -> np.ndarray:
        """Per-target idle coverage rates at an interior waypoint (zeros for
        the no-idle pseudo-node 0)."""
        if node == 0:
            return np.zeros(len(self.target_ids))
        return self.wp_cov[node - 1]


def build_index_table(instance: Instance) -> ArcIndexTable:
    """Compute the full index table for a validated instance."""
    return ArcIndexTable(instance)


def arc_energy(d: float, v: float, beta: float, gamma: float) -> float:
    """Propulsion energy over one arc: rolling resistance plus quadratic
    drag, ``d*beta + gamma*d*v**2``."""
    if d < 0:
        raise ValueError(f"distance must be nonnegative, got {d}")
    if v <= 0:
        raise ValueError(f"speed must be positive, got {v}")
    return d * beta + gamma * d * v * v


# ---------------------------------------------------------------------------
# solutions and validation


@dataclass(frozen=True)
class PathSolution:
    """One vehicle route with chosen per-arc travel times and at most one
    idle stop."""

    nodes: Tuple[int, ...]
    times: Tuple[float, ...]
    idle_node: Optional[int] = None
    idle_time: float = 0.0
    objective: Optional[float] = None
    per_target_coverage: Optional[Tuple[Tuple[int, float], ...]] = None

    def arcs(self) -> List[Tuple[int, int]]:
        return list(zip(self.nodes[:-1], self.nodes[1:]))

    @property
    def total_time(self) -> float:
        return float(sum(self.times)) + self.idle_time

    def to_dict(self) -> dict:
        doc = {
            "nodes": list(self.nodes),
            "times": list(self.times),
            "idle_node": self.idle_node,
            "idle_time": self.idle_time,
        }
        if self.objective is not None:
            doc["objective"] = self.objective
        if self.per_target_coverage is not None:
            doc["per_target_coverage"] = {
                str(k): v for k, v in self.per_target_coverage}
        return doc


def solution_to_json(sol: PathSolution) -> str:
    return json.dumps(sol.to_dict(), indent=2, sort_keys=True) + "\n"


def save_solution(sol: PathSolution, path: Union[str, Path]) -> None:
    Path(path).write_text(solution_to_json(sol))


def load_solution(source: Union[str, Path, dict]) -> PathSolution:
    if isinstance(source, (str, Path)):
        try:
            doc = json.loads(Path(source).read_text())
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {source}: {exc}") from exc
    else:
        doc = source
    try:
        cov = doc.get("per_target_coverage")
        return PathSolution(
            nodes=tuple(int(v) for v in doc["nodes"]),
            times=tuple(float(v) for v in doc["times"]),
            idle_node=None if doc.get("idle_node") is None else int(doc["idle_node"]),
            idle_time=float(doc.get("idle_time", 0.0)),
            objective=None if doc.get("objective") is None else float(doc["objective"]),
            per_target_coverage=None if cov is None else tuple(
                (int(k), float(v)) for k, v in sorted(cov.items(), key=lambda kv: int(kv[0]))),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad solution document: {exc}") from exc


@dataclass(frozen=True)
class ValidateOptions:
    enforce_coverage: bool = False
    check_time_windows: bool = False
    check_energy: bool = False
    tol: float = 1e-9
    objective_tol: float = 1e-8


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    passed: bool
    slack: float

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "slack", float(self.slack))


@dataclass(frozen=True)
class PerTargetCoverage:
    id: int
    coverage: float
    required: float

    def __post_init__(self):
        object.__setattr__(self, "coverage", float(self.coverage))
        object.__setattr__(self, "required", float(self.required))


@dataclass(frozen=True)
class ValidationReport:
    constraints: Tuple[ConstraintCheck, ...]
    objective: Optional[float]
    per_target: Tuple[PerTargetCoverage, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.constraints)

    def to_dict(self) -> dict:
        return {
            "constraints": [
                {"name": c.name, "pass": c.passed, "slack": c.slack}
                for c in self.constraints],
            "objective": self.objective,
            "per_target": [
                {"id": p.id, "coverage": p.coverage, "required": p.required}
                for p in self.per_target],
        }


def validate_solution(instance: Instance, sol: PathSolution,
                      opts: Optional[ValidateOptions] = None,
                      table: Optional[ArcIndexTable] = None) -> ValidationReport:
    """Check a candidate route against the model constraints.

    Structural problems are reported as failed checks, never raised.  The
    objective is recomputed from the index table and compared against the
    solution's claimed value when one is present.
    """
    opts = opts or ValidateOptions()
    checks: List[ConstraintCheck] = []
    arcs = sol.arcs()
    valid_arcs = set()
    structural = 0

    if len(sol.nodes) < 2 or sol.nodes[0] != 0 or sol.nodes[-1] != instance.exit_id:
        structural += 1
    if len(set(sol.nodes)) != len(sol.nodes):
        structural += 1
    if len(sol.times) != len(arcs):
        structural += 1
    if any(t <= 0 for t in sol.times):
        structural += 1
    if structural == 0:
        valid_arcs = set(instance.arcs())
        if any(a not in valid_arcs for a in arcs):
            structural += 1
    if sol.idle_node is not None:
        if sol.idle_node not in instance.interior_ids or sol.idle_node not in sol.nodes:
            structural += 1
        if sol.idle_time < 0:
            structural += 1
    elif sol.idle_time != 0.0:
        structural += 1
    checks.append(ConstraintCheck("path-structure", structural == 0,
                                  0.0 if structural == 0 else -float(structural)))
    if structural:
        return ValidationReport(tuple(checks), None, ())

    table = table or build_index_table(instance)
    veh = instance.vehicle
    dists = [table.node_dist[i, j] for (i, j) in arcs]
    speeds = [d / t for d, t in zip(dists, sol.times)]

    speed_slack = min(
        min(v - veh.speed_min for v in speeds),
        min(veh.speed_max - v for v in speeds))
    checks.append(ConstraintCheck("speed-bounds", speed_slack >= -opts.tol,
                                  speed_slack))

    deadline_slack = instance.deadline - sol.total_time
    checks.append(ConstraintCheck("deadline", deadline_slack >= -opts.tol,
                                  deadline_slack))

    # recompute coverage per target
    m = len(instance.targets)
    cov = np.zeros(m)
    for (a, t) in zip(arcs, sol.times):
        cov += table.coverage_rate[table.arc_id[a]] * t
    if sol.idle_node is not None and sol.idle_time > 0:
        cov += table.wp_cov[sol.idle_node - 1] * sol.idle_time
    objective = float(table.priorities @ cov)

    if sol.objective is not None:
        diff = abs(objective - sol.objective)
        checks.append(ConstraintCheck("objective-consistency",
                                      diff <= opts.objective_tol,
                                      opts.objective_tol - diff))

    per_target = tuple(
        PerTargetCoverage(t.id, float(cov[col]), t.min_coverage)
        for col, t in enumerate(instance.targets))
    if opts.enforce_coverage:
        failing = [p for p in per_target if p.coverage < p.required - opts.tol]
        if failing:
            for p in failing:
                checks.append(ConstraintCheck(f"coverage[{p.id}]", False,
                                              p.coverage - p.required))
        else:
            worst = min((p.coverage - p.required for p in per_target),
                        default=0.0)
            checks.append(ConstraintCheck("coverage-requirement", True, worst))

    if opts.check_time_windows:
        slack = math.inf
        clock = instance.waypoints[0].window_open
        ok = True
        for (i, j), t in zip(arcs, sol.times):
            clock += t
            wp = instance.waypoints[j]
            if j == instance.exit_id:
                slack = min(slack, wp.window_close - clock)
                break
            service = max(clock, wp.window_open)
            idle = sol.idle_time if j == sol.idle_node else 0.0
            slack = min(slack, wp.window_close - (service + idle))
            clock = service + idle
        ok = slack >= -opts.tol
        checks.append(ConstraintCheck("time-windows", ok,
                                      slack if math.isfinite(slack) else 0.0))

    if opts.check_energy:
        used = sum(arc_energy(d, v, instance.physics.beta, instance.physics.gamma)
                   for d, v in zip(dists, speeds))
        e_slack = veh.energy_max - used
        checks.append(ConstraintCheck("energy", e_slack >= -opts.tol, e_slack))

    return ValidationReport(tuple(checks), objective, per_target)
