"""Ground-truth 2D world, simulated sensing, and the occupancy map.

The world owns the ground truth: polygonal walls, scripted persons, and
the robot pose. Sensing produces what the rest of the pipeline consumes,
a laser scan with leg candidate points and camera person detections with
identity evidence (face label + clothes histogram). The robot's map is a
probabilistic occupancy grid updated per scan with an inverse sensor
model through the binary Bayes filter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import accel
from .geometry import (
    bearing,
    point_in_polygon,
    polygon_centroid,
    polygon_edges,
    polygon_is_simple,
    segment_hits_edges,
    wrap_angle,
)


class InvalidPoseError(ValueError):
    """Pose outside the world bounds (or grid) where one is required inside."""


class NoRegionError(LookupError):
    """Point lies in no region of the region graph."""


HIST_BINS = 16


@dataclass(frozen=True)
class Pose:
    """Robot base pose plus the sensor-head pan offset, angles in (-pi, pi]."""

    x: float
    y: float
    heading: float = 0.0
    pan: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "heading", wrap_angle(self.heading))
        object.__setattr__(self, "pan", wrap_angle(self.pan))

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @property
    def gaze_direction(self) -> float:
        return wrap_angle(self.heading + self.pan)


@dataclass(frozen=True)
class PersonState:
    id: str
    position: np.ndarray
    velocity: np.ndarray
    clothes_histogram: np.ndarray
    face_id: str


@dataclass
class WorldState:
    """Immutable-by-convention snapshot of the ground truth at one instant."""

    time: float
    robot: Pose
    persons: list[PersonState]
    obstacles: list[np.ndarray]
    bounds: tuple[float, float, float, float]
    wall_edges: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.wall_edges is None:
            if self.obstacles:
                self.wall_edges = np.vstack([polygon_edges(p) for p in self.obstacles])
            else:
                self.wall_edges = np.zeros((0, 4))

    def inside_bounds(self, x: float, y: float) -> bool:
        x0, y0, x1, y1 = self.bounds
        return x0 <= x <= x1 and y0 <= y <= y1


@dataclass(frozen=True)
class Region:
    id: int
    name: str
    polygon: np.ndarray


@dataclass
class RegionGraph:
    """Polygon-bounded places and which of them connect to which."""

    regions: list[Region]
    adjacency: set[tuple[int, int]]

    def __post_init__(self):
        self.regions = sorted(self.regions, key=lambda r: r.id)
        self.adjacency = {tuple(sorted(pair)) for pair in self.adjacency}
        self.validate()

    def validate(self):
        ids = {r.id for r in self.regions}
        if len(ids) != len(self.regions):
            raise ValueError("duplicate region ids")
        for r in self.regions:
            if not polygon_is_simple(r.polygon):
                raise ValueError(f"region {r.id} polygon is self-intersecting")
        for a, b in self.adjacency:
            if a not in ids or b not in ids:
                raise ValueError(f"adjacency ({a},{b}) references unknown region")
        for r in self.regions:
            if not self.neighbors(r.id):
                raise ValueError(f"region {r.id} has no neighbors")

    def region(self, rid: int) -> Region:
        for r in self.regions:
            if r.id == rid:
                return r
        raise KeyError(rid)

    def neighbors(self, rid: int) -> list[int]:
        out = []
        for a, b in self.adjacency:
            if a == rid:
                out.append(b)
            elif b == rid:
                out.append(a)
        return sorted(out)

    def centroid(self, rid: int) -> np.ndarray:
        return polygon_centroid(self.region(rid).polygon)


@dataclass
class OccupancyGrid:
    """Per-cell occupancy probability; unknown cells start at exactly 0.5.

    cells is indexed [iy, ix]; world_to_cell returns (ix, iy).
    """

    resolution: float
    width: int
    height: int
    origin: tuple[float, float] = (0.0, 0.0)
    cells: np.ndarray = None

    def __post_init__(self):
        if self.cells is None:
            self.cells = np.full((self.height, self.width), 0.5, np.float64)
        else:
            self.cells = np.asarray(self.cells, np.float64)
            if self.cells.shape != (self.height, self.width):
                raise ValueError("cells shape does not match width/height")
            if (self.cells < 0.0).any() or (self.cells > 1.0).any():
                raise ValueError("cell probabilities must lie in [0, 1]")

    @classmethod
    def from_bounds(cls, bounds, resolution: float) -> "OccupancyGrid":
        x0, y0, x1, y1 = bounds
        w = int(math.ceil((x1 - x0) / resolution))
        h = int(math.ceil((y1 - y0) / resolution))
        return cls(resolution=resolution, width=w, height=h, origin=(x0, y0))

    def world_to_cell(self, x: float, y: float) -> tuple[int, int]:
        ix = int(math.floor((x - self.origin[0]) / self.resolution))
        iy = int(math.floor((y - self.origin[1]) / self.resolution))
        return ix, iy

    def cell_center(self, ix: int, iy: int) -> np.ndarray:
        return np.array(
            [
                self.origin[0] + (ix + 0.5) * self.resolution,
                self.origin[1] + (iy + 0.5) * self.resolution,
            ]
        )

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def contains_point(self, x: float, y: float) -> bool:
        return self.in_bounds(*self.world_to_cell(x, y))

    def prob_at(self, x: float, y: float) -> float:
        ix, iy = self.world_to_cell(x, y)
        if not self.in_bounds(ix, iy):
            raise InvalidPoseError(f"point ({x:.2f},{y:.2f}) outside grid")
        return float(self.cells[iy, ix])

    def copy(self) -> "OccupancyGrid":
        return OccupancyGrid(
            resolution=self.resolution,
            width=self.width,
            height=self.height,
            origin=self.origin,
            cells=self.cells.copy(),
        )


# The human-presence belief reuses the same grid container (separate instance).
BeliefGrid = OccupancyGrid


@dataclass
class LaserScan:
    origin: Pose
    angles: np.ndarray
    ranges: np.ndarray
    max_range: float
    leg_candidates: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if len(self.angles) != len(self.ranges):
            raise ValueError("angles and ranges length mismatch")


@dataclass
class PersonDetection:
    """Simulated camera detection: position, range, and identity evidence."""

    position: np.ndarray
    distance: float
    clothes_histogram: np.ndarray
    face_id: tuple[str, float] | None = None


@dataclass(frozen=True)
class FovCone:
    """Angular wedge a sensor observes in one step."""

    origin: np.ndarray
    direction: float
    half_angle: float
    max_range: float


@dataclass
class SensorParams:
    """Configuration for the simulated laser + camera suite."""

    laser_fov: float = 1.5 * math.pi
    n_beams: int = 270
    laser_range: float = 10.0
    sigma_leg: float = 0.03
    leg_offset: float = 0.1
    clutter_rate: float = 0.1
    camera_fov: float = math.pi / 3.0
    camera_range: float = 6.0
    face_range: float = 4.0
    face_fov: float = math.pi / 3.0
    sigma_vision: float = 0.05
    hist_noise: float = 0.02
    p_miss: float = 0.05
    p_confuse: float = 0.02


def bayes_posterior(p, p_z):
    """Binary Bayes update: posterior from prior p and inverse model p_z."""
    num = np.asarray(p_z, np.float64) * np.asarray(p, np.float64)
    return num / (num + (1.0 - p_z) * (1.0 - p))


def cast_laser(world: WorldState, pose: Pose, params: SensorParams,
               rng: np.random.Generator | None = None) -> LaserScan:
    """Simulate one laser sweep from ``pose``.

    Beam ranges come from ray/wall intersections clipped to the max range.
    Persons inside the swept sector with clear line of sight contribute a
    pair of leg candidate points (one per leg, offset laterally), noisy
    when ``rng`` is given; clutter legs are injected at ``clutter_rate``
    per scan.
    """
    if not world.inside_bounds(pose.x, pose.y):
        raise InvalidPoseError(f"laser pose ({pose.x:.2f},{pose.y:.2f}) outside bounds")
    half = params.laser_fov / 2.0
    rel = np.linspace(-half, half, params.n_beams)
    angles = pose.heading + rel
    ranges = accel.raycast_ranges(
        pose.x, pose.y, angles, world.wall_edges, params.laser_range
    )
    spacing = params.laser_fov / max(params.n_beams - 1, 1)
    legs: list[np.ndarray] = []
    origin = pose.xy
    for person in sorted(world.persons, key=lambda p: p.id):
        delta = person.position - origin
        dist = float(np.hypot(delta[0], delta[1]))
        if dist < 1e-9 or dist > params.laser_range:
            continue
        rel_bearing = wrap_angle(bearing(origin, person.position) - pose.heading)
        if abs(rel_bearing) > half + 2.0 * spacing:
            continue
        if segment_hits_edges(origin, person.position, world.wall_edges):
            continue
        lateral = np.array([-delta[1], delta[0]]) / dist
        for side in (params.leg_offset, -params.leg_offset):
            pt = person.position + side * lateral
            if rng is not None and params.sigma_leg > 0.0:
                pt = pt + rng.normal(0.0, params.sigma_leg, 2)
            legs.append(pt)
    if rng is not None and params.clutter_rate > 0.0:
        for _ in range(int(rng.poisson(params.clutter_rate))):
            ang = pose.heading + rng.uniform(-half, half)
            r = rng.uniform(0.3, params.laser_range)
            x0, y0, x1, y1 = world.bounds
            pt = np.array(
                [
                    min(max(pose.x + r * math.cos(ang), x0), x1),
                    min(max(pose.y + r * math.sin(ang), y0), y1),
                ]
            )
            legs.append(pt)
    return LaserScan(
        origin=pose,
        angles=angles,
        ranges=ranges,
        max_range=params.laser_range,
        leg_candidates=legs,
    )


def detect_persons(world: WorldState, pose: Pose, params: SensorParams,
                   rng: np.random.Generator | None = None) -> list[PersonDetection]:
    """Simulate the person detector for the camera mounted at heading+pan.

    One detection per visible, unoccluded person within camera range and
    field of view. The face label is attached only inside the face range
    and face wedge (subject to a confusion probability); the clothes
    histogram is the person's true histogram with noise, renormalized.
    """
    gaze = pose.gaze_direction
    origin = pose.xy
    out: list[PersonDetection] = []
    face_ids = sorted({p.face_id for p in world.persons})
    for person in sorted(world.persons, key=lambda p: p.id):
        delta = person.position - origin
        dist = float(np.hypot(delta[0], delta[1]))
        if dist < 1e-9 or dist > params.camera_range:
            continue
        rel_bearing = wrap_angle(bearing(origin, person.position) - gaze)
        if abs(rel_bearing) > params.camera_fov / 2.0:
            continue
        if segment_hits_edges(origin, person.position, world.wall_edges):
            continue
        if rng is not None and rng.uniform() < params.p_miss:
            continue
        position = person.position.copy()
        if rng is not None and params.sigma_vision > 0.0:
            position = position + rng.normal(0.0, params.sigma_vision, 2)
        hist = person.clothes_histogram.astype(np.float64).copy()
        if rng is not None and params.hist_noise > 0.0:
            hist = np.maximum(hist + rng.normal(0.0, params.hist_noise, hist.shape), 0.0)
        total = hist.sum()
        hist = hist / total if total > 0.0 else np.full_like(hist, 1.0 / len(hist))
        face = None
        if dist < params.face_range and abs(rel_bearing) <= params.face_fov / 2.0:
            label = person.face_id
            confidence = 1.0
            if rng is not None:
                if len(face_ids) > 1 and rng.uniform() < params.p_confuse:
                    others = [f for f in face_ids if f != person.face_id]
                    label = others[int(rng.integers(len(others)))]
                confidence = float(rng.uniform(0.7, 1.0))
            face = (label, confidence)
        out.append(
            PersonDetection(
                position=position,
                distance=dist,
                clothes_histogram=hist,
                face_id=face,
            )
        )
    return out


def update_occupancy(grid: OccupancyGrid, scan: LaserScan,
                     p_free: float = 0.3, p_occ: float = 0.7,
                     p_min: float = 0.03, p_max: float = 0.97) -> OccupancyGrid:
    """Bayes-update the grid with one scan; cells outside the sweep are untouched.

    Traversed cells receive the free-space model, beam end cells the hit
    model, each through the posterior rule, clamped to [p_min, p_max].
    Returns a new grid; the input is left unmodified.
    """
    ox, oy = scan.origin.x, scan.origin.y
    if not grid.contains_point(ox, oy):
        raise InvalidPoseError("scan origin outside grid")
    hit = scan.ranges < (scan.max_range - 1e-9)
    end_x = ox + scan.ranges * np.cos(scan.angles)
    end_y = oy + scan.ranges * np.sin(scan.angles)
    new = grid.copy()
    accel.apply_scan(
        new.cells, ox, oy,
        np.ascontiguousarray(end_x), np.ascontiguousarray(end_y),
        np.ascontiguousarray(hit),
        grid.resolution, grid.origin[0], grid.origin[1],
        p_free, p_occ, p_min, p_max,
    )
    return new


def current_region(p, graph: RegionGraph) -> int:
    """Region containing point p; boundary ties go to the lowest id."""
    if not graph.regions:
        raise NoRegionError("empty region graph")
    for region in graph.regions:  # sorted by id
        if point_in_polygon(p, region.polygon):
            return region.id
    raise NoRegionError(f"point ({p[0]:.2f},{p[1]:.2f}) in no region")


def line_of_sight(a, b, grid: OccupancyGrid, tau_occ: float = 0.65) -> bool:
    """True iff no cell above tau_occ touches segment a-b (supercover)."""
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    if not grid.contains_point(ax, ay) or not grid.contains_point(bx, by):
        raise InvalidPoseError("line_of_sight endpoints must lie inside the grid")
    if ax == bx and ay == by:
        return True
    cells = accel.supercover_cells(
        ax, ay, bx, by, grid.resolution, grid.origin[0], grid.origin[1],
        grid.width, grid.height,
    )
    for k in range(cells.shape[0]):
        if grid.cells[cells[k, 1], cells[k, 0]] > tau_occ:
            return False
    return True


def ground_truth_visible(world: WorldState, a, b) -> bool:
    """Line of sight against the ground-truth wall polygons."""
    return not segment_hits_edges(a, b, world.wall_edges)
