"""Scenario documents: JSON in, fully validated configuration out.

A scenario bundles the map (bounds, wall polygons, grid resolution), the
region graph, the robot start, scripted persons with appearance, the
target choice, sensor/algorithm parameter overrides, and the seed that
makes a run reproducible. All defaults are filled at load time and echo
back through to_dict().
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .control import ControlParams
from .identity import IdentityParams
from .prediction import PredictorParams
from .search import SearchParams
from .tracking import TrackerParams
from .world import HIST_BINS, Pose, Region, RegionGraph, SensorParams


class ScenarioError(ValueError):
    """Invalid scenario document; the message names the offending field."""


@dataclass
class EngineParams:
    identity_memory_s: float = 0.7     # how long an identification stays fresh
    person_pair_dist: float = 0.5      # leg-track pairing distance, m
    prediction_horizon_s: float = 3.0
    prediction_step_s: float = 0.1
    prediction_nav_timeout_s: float = 30.0
    waypoint_refresh_s: float = 8.0
    wp_exclude_s: float = 40.0         # visited way-points stay excluded this long
    wp_exclude_radius: float = 1.0
    replan_period_s: float = 2.0
    gaze_timeout_s: float = 6.0        # standing sweep gives up after this
    steer_ttl_s: float = 0.5
    seed_belief_from_prediction: bool = True


@dataclass
class PersonSpec:
    id: str
    face_id: str
    clothes_histogram: np.ndarray
    speed: float
    script: list[tuple[float, float, float]]

    def position(self, t: float) -> np.ndarray:
        pts = self.script
        if t <= pts[0][0]:
            return np.array([pts[0][1], pts[0][2]])
        if t >= pts[-1][0]:
            return np.array([pts[-1][1], pts[-1][2]])
        for (t0, x0, y0), (t1, x1, y1) in zip(pts, pts[1:]):
            if t0 <= t <= t1:
                u = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
                return np.array([x0 + u * (x1 - x0), y0 + u * (y1 - y0)])
        return np.array([pts[-1][1], pts[-1][2]])

    def velocity(self, t: float) -> np.ndarray:
        pts = self.script
        if t < pts[0][0] or t >= pts[-1][0]:
            return np.zeros(2)
        for (t0, x0, y0), (t1, x1, y1) in zip(pts, pts[1:]):
            if t0 <= t < t1 and t1 > t0:
                return np.array([(x1 - x0) / (t1 - t0), (y1 - y0) / (t1 - t0)])
        return np.zeros(2)

    def done(self, t: float) -> bool:
        return t >= self.script[-1][0]


@dataclass
class Scenario:
    name: str
    seed: int
    tick_hz: float
    duration_s: float
    bounds: tuple[float, float, float, float]
    resolution: float
    obstacles: list[np.ndarray]
    region_graph: RegionGraph | None
    robot_start: Pose
    v_max: float
    robot_radius: float
    persons: list[PersonSpec]
    target_id: str
    sensors: SensorParams
    tracker: TrackerParams
    identity: IdentityParams
    search: SearchParams
    predictor: PredictorParams
    control: ControlParams
    engine: EngineParams
    success_radius: float
    success_hold_s: float
    raw: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "seed": self.seed,
            "tick_hz": self.tick_hz,
            "duration_s": self.duration_s,
            "map": {
                "bounds": list(self.bounds),
                "resolution": self.resolution,
                "obstacles": [p.tolist() for p in self.obstacles],
            },
            "robot": {
                "start": [self.robot_start.x, self.robot_start.y, self.robot_start.heading],
                "v_max": self.v_max,
                "radius": self.robot_radius,
            },
            "persons": [
                {
                    "id": p.id,
                    "face_id": p.face_id,
                    "clothes_histogram": p.clothes_histogram.tolist(),
                    "speed": p.speed,
                    "script": [list(w) for w in p.script],
                }
                for p in self.persons
            ],
            "target_id": self.target_id,
            "success": {"radius": self.success_radius, "hold_s": self.success_hold_s},
        }
        if self.region_graph is not None:
            d["regions"] = {
                "regions": [
                    {"id": r.id, "name": r.name, "polygon": r.polygon.tolist()}
                    for r in self.region_graph.regions
                ],
                "adjacency": [list(p) for p in sorted(self.region_graph.adjacency)],
            }
        for key, params in (
            ("sensors", self.sensors),
            ("tracker", self.tracker),
            ("identity", self.identity),
            ("search", self.search),
            ("control", self.control),
            ("engine", self.engine),
        ):
            d[key] = dataclasses.asdict(params)
        pd = dataclasses.asdict(self.predictor)
        d["predictor"] = pd
        return d


def _get(doc: dict, key: str, path: str, required: bool = False, default=None):
    if key not in doc:
        if required:
            raise ScenarioError(f"{path}{key}: required field missing")
        return default
    return doc[key]


def _number(value, path: str, minimum=None) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ScenarioError(f"{path}: expected a number, got {value!r}")
    if minimum is not None and value < minimum:
        raise ScenarioError(f"{path}: must be >= {minimum}, got {value}")
    return float(value)


def _polygon(value, path: str) -> np.ndarray:
    try:
        arr = np.asarray(value, np.float64)
    except (TypeError, ValueError):
        raise ScenarioError(f"{path}: not a coordinate list") from None
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 3:
        raise ScenarioError(f"{path}: polygon needs >= 3 [x, y] vertices")
    return arr


def _default_histogram(index: int) -> np.ndarray:
    """Stable per-person fallback: a smoothed peak at a distinct bin."""
    h = np.full(HIST_BINS, 0.01)
    peak = (5 * index + 2) % HIST_BINS
    h[peak] += 0.6
    h[(peak + 1) % HIST_BINS] += 0.2
    h[(peak - 1) % HIST_BINS] += 0.1
    return h / h.sum()


def _params_from(cls, doc: dict | None, path: str):
    defaults = cls()
    if doc is None:
        return defaults
    if not isinstance(doc, dict):
        raise ScenarioError(f"{path}: expected an object")
    valid = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in doc.items():
        if key not in valid:
            raise ScenarioError(f"{path}.{key}: unknown parameter")
        current = getattr(defaults, key)
        if dataclasses.is_dataclass(current):
            kwargs[key] = _params_from(type(current), value, f"{path}.{key}")
        elif isinstance(current, bool):
            if not isinstance(value, bool):
                raise ScenarioError(f"{path}.{key}: expected true/false")
            kwargs[key] = value
        elif isinstance(current, int):
            kwargs[key] = int(_number(value, f"{path}.{key}"))
        else:
            kwargs[key] = _number(value, f"{path}.{key}")
    return dataclasses.replace(defaults, **kwargs)


def load_scenario(source) -> Scenario:
    """Parse and validate a scenario document (JSON text, dict, or path)."""
    if isinstance(source, Path):
        doc = json.loads(source.read_text())
        default_name = source.stem
    elif isinstance(source, str):
        doc = json.loads(source)
        default_name = "scenario"
    elif isinstance(source, dict):
        doc = source
        default_name = "scenario"
    else:
        raise ScenarioError(f"unsupported scenario source {type(source)!r}")
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")

    seed = _get(doc, "seed", "", required=True)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ScenarioError("seed: expected an integer")
    name = doc.get("name", default_name)
    tick_hz = _number(doc.get("tick_hz", 10.0), "tick_hz", minimum=1e-9)
    duration_s = _number(doc.get("duration_s", 120.0), "duration_s", minimum=0.0)

    map_doc = _get(doc, "map", "", required=True)
    if not isinstance(map_doc, dict):
        raise ScenarioError("map: expected an object")
    bounds_raw = _get(map_doc, "bounds", "map.", required=True)
    if not (isinstance(bounds_raw, (list, tuple)) and len(bounds_raw) == 4):
        raise ScenarioError("map.bounds: expected [xmin, ymin, xmax, ymax]")
    bounds = tuple(_number(v, f"map.bounds[{i}]") for i, v in enumerate(bounds_raw))
    if bounds[2] <= bounds[0] or bounds[3] <= bounds[1]:
        raise ScenarioError("map.bounds: max corner must exceed min corner")
    resolution = _number(map_doc.get("resolution", 0.1), "map.resolution", minimum=1e-6)
    obstacles = [
        _polygon(p, f"map.obstacles[{i}]")
        for i, p in enumerate(map_doc.get("obstacles", []))
    ]

    region_graph = None
    if "regions" in doc and doc["regions"] is not None:
        rdoc = doc["regions"]
        if not isinstance(rdoc, dict):
            raise ScenarioError("regions: expected an object")
        regions = []
        for i, r in enumerate(rdoc.get("regions", [])):
            rid = _get(r, "id", f"regions.regions[{i}].", required=True)
            if not isinstance(rid, int):
                raise ScenarioError(f"regions.regions[{i}].id: expected an integer")
            regions.append(
                Region(
                    id=rid,
                    name=str(r.get("name", f"region-{rid}")),
                    polygon=_polygon(
                        _get(r, "polygon", f"regions.regions[{i}].", required=True),
                        f"regions.regions[{i}].polygon",
                    ),
                )
            )
        adjacency = set()
        for i, pair in enumerate(rdoc.get("adjacency", [])):
            if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
                raise ScenarioError(f"regions.adjacency[{i}]: expected [id, id]")
            adjacency.add((int(pair[0]), int(pair[1])))
        try:
            region_graph = RegionGraph(regions=regions, adjacency=adjacency)
        except ValueError as exc:
            raise ScenarioError(f"regions: {exc}") from None

    robot_doc = _get(doc, "robot", "", required=True)
    start = _get(robot_doc, "start", "robot.", required=True)
    if not (isinstance(start, (list, tuple)) and len(start) in (2, 3)):
        raise ScenarioError("robot.start: expected [x, y] or [x, y, heading]")
    heading = _number(start[2], "robot.start[2]") if len(start) == 3 else 0.0
    robot_start = Pose(
        x=_number(start[0], "robot.start[0]"),
        y=_number(start[1], "robot.start[1]"),
        heading=heading,
    )
    if not (bounds[0] <= robot_start.x <= bounds[2] and bounds[1] <= robot_start.y <= bounds[3]):
        raise ScenarioError("robot.start: outside map.bounds")
    v_max = _number(robot_doc.get("v_max", 0.22), "robot.v_max", minimum=0.0)
    robot_radius = _number(robot_doc.get("radius", 0.25), "robot.radius", minimum=0.0)

    persons_doc = _get(doc, "persons", "", required=True)
    if not isinstance(persons_doc, list) or not persons_doc:
        raise ScenarioError("persons: expected a non-empty list")
    persons = []
    seen_ids = set()
    for i, p in enumerate(persons_doc):
        pid = str(_get(p, "id", f"persons[{i}].", required=True))
        if pid in seen_ids:
            raise ScenarioError(f"persons[{i}].id: duplicate id {pid!r}")
        seen_ids.add(pid)
        script_doc = _get(p, "script", f"persons[{i}].", required=True)
        if not isinstance(script_doc, list) or not script_doc:
            raise ScenarioError(f"persons[{i}].script: expected a non-empty list")
        script = []
        prev_t = -math.inf
        for k, wp in enumerate(script_doc):
            if not (isinstance(wp, (list, tuple)) and len(wp) == 3):
                raise ScenarioError(f"persons[{i}].script[{k}]: expected [t, x, y]")
            t = _number(wp[0], f"persons[{i}].script[{k}][0]")
            if t < prev_t:
                raise ScenarioError(
                    f"persons[{i}].script[{k}]: timestamps must be non-decreasing"
                )
            prev_t = t
            x = _number(wp[1], f"persons[{i}].script[{k}][1]")
            y = _number(wp[2], f"persons[{i}].script[{k}][2]")
            if not (bounds[0] <= x <= bounds[2] and bounds[1] <= y <= bounds[3]):
                raise ScenarioError(f"persons[{i}].script[{k}]: outside map.bounds")
            script.append((t, x, y))
        if "clothes_histogram" in p and p["clothes_histogram"] is not None:
            hist = np.asarray(p["clothes_histogram"], np.float64)
            if hist.ndim != 1 or len(hist) < 2 or (hist < 0).any() or hist.sum() <= 0:
                raise ScenarioError(f"persons[{i}].clothes_histogram: invalid histogram")
            hist = hist / hist.sum()
        else:
            hist = _default_histogram(i)
        persons.append(
            PersonSpec(
                id=pid,
                face_id=str(p.get("face_id", pid)),
                clothes_histogram=hist,
                speed=_number(p.get("speed", 0.5), f"persons[{i}].speed", minimum=0.0),
                script=script,
            )
        )

    target_id = str(_get(doc, "target_id", "", required=True))
    if target_id not in seen_ids:
        raise ScenarioError(f"target_id: {target_id!r} not among persons")

    success_doc = doc.get("success", {}) or {}
    predictor = _params_from(PredictorParams, doc.get("predictor"), "predictor")

    return Scenario(
        name=str(name),
        seed=seed,
        tick_hz=tick_hz,
        duration_s=duration_s,
        bounds=bounds,
        resolution=resolution,
        obstacles=obstacles,
        region_graph=region_graph,
        robot_start=robot_start,
        v_max=v_max,
        robot_radius=robot_radius,
        persons=persons,
        target_id=target_id,
        sensors=_params_from(SensorParams, doc.get("sensors"), "sensors"),
        tracker=_params_from(TrackerParams, doc.get("tracker"), "tracker"),
        identity=_params_from(IdentityParams, doc.get("identity"), "identity"),
        search=_params_from(SearchParams, doc.get("search"), "search"),
        predictor=predictor,
        control=_params_from(ControlParams, doc.get("control"), "control"),
        engine=_params_from(EngineParams, doc.get("engine"), "engine"),
        success_radius=_number(success_doc.get("radius", 1.2), "success.radius", minimum=0.0),
        success_hold_s=_number(success_doc.get("hold_s", 5.0), "success.hold_s", minimum=0.0),
        raw=doc,
    )


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package (e.g. "house")."""
    ref = resources.files("pfsim").joinpath("scenarios", f"{name}.json")
    with resources.as_file(ref) as p:
        return Path(p)


def load_bundled(name: str) -> Scenario:
    return load_scenario(bundled_scenario_path(name))
