"""Deterministic simulation engine: the full pipeline, one tick at a time.

Each tick advances scripted persons, senses (laser + camera), updates the
occupancy map, tracks leg candidates, fuses and identifies, maintains the
target belief, ticks the behavior tree, and executes the resulting
navigation and gaze commands under the robot speed cap. Everything flows
from a single seeded RNG, so identical scenario + seed gives identical
runs.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import behavior, control, identity, prediction, search, tracking, world
from .behavior import Blackboard, TickStatus
from .geometry import (
    min_distance_to_edges,
    point_in_polygon,
    segment_hits_edges,
    wrap_angle,
)
from .scenario import Scenario
from .search import DistanceHistory
from .world import FovCone, OccupancyGrid, PersonState, Pose, WorldState


STATUS_IDENTIFIED = "identified"
STATUS_VISIBLE = "visible"
STATUS_LOST = "lost"


@dataclass
class TimelineEvent:
    t: float
    robot: Pose
    active_action: str
    target_status: str
    belief_entropy: float
    aux: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "t": round(self.t, 6),
            "robot": {
                "x": self.robot.x,
                "y": self.robot.y,
                "heading": self.robot.heading,
                "pan": self.robot.pan,
            },
            "active_action": self.active_action,
            "target_status": self.target_status,
            "belief_entropy": self.belief_entropy,
            "aux": self.aux,
        }


@dataclass
class Summary:
    success: bool
    time_to_reacquire: float | None
    distance_traveled: float
    ticks: int
    sim_time: float
    final_status: str

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "time_to_reacquire": self.time_to_reacquire,
            "distance_traveled": round(self.distance_traveled, 6),
            "ticks": self.ticks,
            "sim_time": round(self.sim_time, 6),
            "final_status": self.final_status,
        }


@dataclass
class _PredictionEpisode:
    points: list[tuple[float, float, float, bool]]
    goal: np.ndarray
    created: float
    active: bool = True


class Simulation:
    """Owns all mutable state; step() is the only writer."""

    def __init__(self, scenario: Scenario, seed: int | None = None):
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        self.rng = np.random.default_rng(self.seed)
        self.dt = 1.0 / scenario.tick_hz
        self.tick_idx = 0
        self.t = 0.0
        self.robot = scenario.robot_start
        self.positions = {p.id: p.position(0.0) for p in scenario.persons}
        self.velocities = {p.id: np.zeros(2) for p in scenario.persons}
        self.steer: dict | None = None  # {"v": np(2,), "until": t}; target only
        self.grid = OccupancyGrid.from_bounds(scenario.bounds, scenario.resolution)
        self.belief = OccupancyGrid.from_bounds(scenario.bounds, scenario.resolution)
        self.tracker = tracking.MultiTargetTracker(scenario.tracker)
        self._wall_edges = None
        self._spec_by_id = {p.id: p for p in scenario.persons}
        target = self._spec_by_id[scenario.target_id]
        enrollment = world.PersonDetection(
            position=target.position(0.0),
            distance=0.0,
            clothes_histogram=target.clothes_histogram.copy(),
            face_id=(target.face_id, 1.0),
        )
        self.model = identity.learn_target(
            enrollment, scenario.identity.critical_similarity
        )
        self.pinned_track: int | None = None
        self.last_fix_t = -math.inf
        self.identified = False
        self.target_estimate = None
        self.target_history: list[tuple[float, float, float]] = []
        self.distance_history = DistanceHistory(window=scenario.search.window)
        self.lost_history: DistanceHistory | None = None
        self.episode: _PredictionEpisode | None = None
        self.tree = behavior.build_following_tree()
        self.bb = Blackboard()
        self.handlers = self._build_handlers()
        self.distance_traveled = 0.0
        self.lost_at: float | None = None
        self.first_lost_at: float | None = None
        self.reacquired_after: float | None = None
        self._ever_identified = False
        self._success_hold = 0.0
        self.succeeded = False
        self._prev_action = ""
        self.last_event: TimelineEvent | None = None
        self.last_detections: list = []
        self.last_fix = None
        self.paused = False
        self._nav_grid_cache: tuple[int, OccupancyGrid, np.ndarray] | None = None
        self._stuck_ticks = 0

    # ------------------------------------------------------------------ world

    def world_state(self) -> WorldState:
        persons = [
            PersonState(
                id=p.id,
                position=self.positions[p.id].copy(),
                velocity=self.velocities[p.id].copy(),
                clothes_histogram=p.clothes_histogram,
                face_id=p.face_id,
            )
            for p in self.scenario.persons
        ]
        ws = WorldState(
            time=self.t,
            robot=self.robot,
            persons=persons,
            obstacles=self.scenario.obstacles,
            bounds=self.scenario.bounds,
            wall_edges=self._wall_edges,
        )
        self._wall_edges = ws.wall_edges
        return ws

    def set_steer(self, vx: float, vy: float) -> None:
        """Override the target person's scripted velocity (clamped)."""
        spec = self._spec_by_id[self.scenario.target_id]
        v = np.array([float(vx), float(vy)])
        speed = float(np.hypot(*v))
        if speed > spec.speed > 0.0:
            v = v * (spec.speed / speed)
        self.steer = {"v": v, "until": self.t + self.scenario.engine.steer_ttl_s}

    def _blocked_move(self, start: np.ndarray, end: np.ndarray,
                      margin: float = 0.0) -> bool:
        x0, y0, x1, y1 = self.scenario.bounds
        if not (x0 <= end[0] <= x1 and y0 <= end[1] <= y1):
            return True
        ws_edges = self._wall_edges
        if ws_edges is None:
            self.world_state()
            ws_edges = self._wall_edges
        if segment_hits_edges(start, end, ws_edges):
            return True
        if margin > 0.0 and min_distance_to_edges(end, ws_edges) < margin:
            # only block when the margin is actually being reduced, so a
            # robot that already ended up close to a wall can still leave
            if min_distance_to_edges(end, ws_edges) < min_distance_to_edges(start, ws_edges):
                return True
        return any(point_in_polygon(end, poly) for poly in self.scenario.obstacles)

    def _advance_persons(self) -> None:
        for spec in self.scenario.persons:
            if spec.id == self.scenario.target_id and self.steer is not None:
                if self.t <= self.steer["until"]:
                    v = self.steer["v"]
                    start = self.positions[spec.id]
                    end = start + v * self.dt
                    if self._blocked_move(start, end):
                        # axis sliding: keep whichever component stays free
                        end_x = start + np.array([v[0] * self.dt, 0.0])
                        end_y = start + np.array([0.0, v[1] * self.dt])
                        if not self._blocked_move(start, end_x):
                            end = end_x
                        elif not self._blocked_move(start, end_y):
                            end = end_y
                        else:
                            end = start
                    self.velocities[spec.id] = (end - start) / self.dt
                    self.positions[spec.id] = end
                    continue
                # steer expired: coast in place until the next message
                self.velocities[spec.id] = np.zeros(2)
                continue
            self.positions[spec.id] = spec.position(self.t)
            self.velocities[spec.id] = spec.velocity(self.t)

    # ------------------------------------------------------------- perception

    def _perceive(self, ws: WorldState) -> None:
        scan = world.cast_laser(ws, self.robot, self.scenario.sensors, self.rng)
        detections = world.detect_persons(ws, self.robot, self.scenario.sensors, self.rng)
        self.last_detections = detections
        self.grid = world.update_occupancy(self.grid, scan)
        self.tracker.step(scan.leg_candidates, self.dt)
        idp = self.scenario.identity
        persons = tracking.person_positions(
            self.tracker.tracks, self.scenario.engine.person_pair_dist
        )
        candidates = identity.fuse_candidates(detections, persons, idp.leg_gate)
        fix = identity.identify(candidates, self.model, idp.face_threshold)
        self.last_fix = fix
        was_identified = self.identified
        if fix is not None and fix.track_id is not None:
            self.pinned_track = fix.track_id
            self.last_fix_t = self.t
        track = self._track_by_id(self.pinned_track)
        fresh = (self.t - self.last_fix_t) <= self.scenario.engine.identity_memory_s
        self.identified = fix is not None or (track is not None and fresh)
        if fix is not None:
            vel = track.velocity.copy() if track is not None else np.zeros(2)
            self.target_estimate = (fix.position.copy(), vel)
            self.target_history.append((self.t, float(fix.position[0]), float(fix.position[1])))
            cutoff = self.t - (self.scenario.predictor.history_window + 1.0)
            while self.target_history and self.target_history[0][0] < cutoff:
                self.target_history.pop(0)
        elif self.identified and track is not None:
            self.target_estimate = (track.position.copy(), track.velocity.copy())
        else:
            self.target_estimate = None
        if was_identified and not self.identified:
            self.lost_at = self.t
            if self.first_lost_at is None:
                self.first_lost_at = self.t
            self.lost_history = self.distance_history.copy()
            self._make_prediction()
        if self.identified:
            self._ever_identified = True
            if self.lost_at is not None and self.reacquired_after is None:
                self.reacquired_after = self.t - self.first_lost_at
            self.lost_at = None
            if self.episode is not None:
                self.episode.active = False
        # belief: observation update over the camera wedge
        fov = FovCone(
            origin=self.robot.xy,
            direction=self.robot.gaze_direction,
            half_angle=self.scenario.sensors.camera_fov / 2.0,
            max_range=self.scenario.sensors.camera_range,
        )
        targets = [fix.position] if fix is not None else []
        self.belief = identity.update_belief(
            self.belief, targets, fov, occupancy=self.grid,
            tau_occ=self.scenario.control.occ_thresh,
            p_det=idp.p_det, r_person=idp.r_person,
            belief_min=idp.belief_min, belief_max=idp.belief_max,
        )

    def _track_by_id(self, tid: int | None):
        if tid is None:
            return None
        for t in self.tracker.tracks:
            if t.id == tid and t.status is not tracking.TrackStatus.DEAD:
                return t
        return None

    def _make_prediction(self) -> None:
        if len(self.target_history) < 2:
            return
        eng = self.scenario.engine
        try:
            hist = prediction.TrackHistory(samples=list(self.target_history))
            pred = prediction.predict_trajectory(
                hist, eng.prediction_horizon_s, eng.prediction_step_s,
                self.scenario.predictor,
            )
        except (prediction.InsufficientDataError, prediction.ConvergenceError):
            return
        pts = pred.points()
        valid_pts = [p for p in pts if p[3]]
        if not valid_pts:
            return
        goal = self._clamp_to_bounds(np.array([valid_pts[-1][1], valid_pts[-1][2]]))
        self.episode = _PredictionEpisode(points=pts, goal=goal, created=self.t)
        if eng.seed_belief_from_prediction:
            self._seed_belief([np.array([p[1], p[2]]) for p in valid_pts])

    def _seed_belief(self, points: list[np.ndarray]) -> None:
        """Inject prediction as a presence prior so the gaze looks there."""
        idp = self.scenario.identity
        g = self.belief
        xs = g.origin[0] + (np.arange(g.width) + 0.5) * g.resolution
        ys = g.origin[1] + (np.arange(g.height) + 0.5) * g.resolution
        mask = np.zeros((g.height, g.width), bool)
        for p in points:
            d = np.hypot(xs[None, :] - p[0], ys[:, None] - p[1])
            mask |= d <= idp.r_person
        post = world.bayes_posterior(g.cells[mask], idp.p_det)
        g.cells[mask] = np.clip(post, idp.belief_min, idp.belief_max)

    def _clamp_to_bounds(self, p: np.ndarray) -> np.ndarray:
        x0, y0, x1, y1 = self.scenario.bounds
        margin = 2.0 * self.scenario.resolution
        return np.array(
            [
                min(max(p[0], x0 + margin), x1 - margin),
                min(max(p[1], y0 + margin), y1 - margin),
            ]
        )

    # -------------------------------------------------------------- behaviors

    def _build_handlers(self):
        return {
            behavior.TARGET_IDENTIFIED: self._cond_target_identified,
            behavior.PREDICTION_VALID: self._cond_prediction_valid,
            behavior.FOLLOW_TARGET: self._act_follow_target,
            behavior.NAVIGATE_TO_PREDICTION: self._act_navigate_to_prediction,
            behavior.GAZE_SEARCH: self._act_gaze_search,
            behavior.WAYPOINT_SEARCH: self._act_waypoint_search,
        }

    def _cond_target_identified(self, bb: Blackboard):
        return bb.target_identified

    def _cond_prediction_valid(self, bb: Blackboard):
        ep = self.episode
        if ep is None or not ep.active:
            return False
        eng = self.scenario.engine
        if self.t - ep.created > eng.prediction_nav_timeout_s:
            ep.active = False
            return False
        if float(np.hypot(*(ep.goal - self.robot.xy))) <= self.scenario.control.d_goal:
            ep.active = False
            bb.scratch.pop("gaze_done", None)
            return False
        return True

    def _nav_grid(self) -> tuple[OccupancyGrid, np.ndarray]:
        """Inflated clearance grid for this tick (lazy, cached per tick)."""
        if self._nav_grid_cache is not None and self._nav_grid_cache[0] == self.tick_idx:
            return self._nav_grid_cache[1], self._nav_grid_cache[2]
        params = self.scenario.control
        blocked = control._inflate(self.grid, params.robot_radius, params.occ_thresh)
        grid = OccupancyGrid(
            resolution=self.grid.resolution, width=self.grid.width,
            height=self.grid.height, origin=self.grid.origin,
            cells=np.where(blocked, 0.9, 0.1),
        )
        self._nav_grid_cache = (self.tick_idx, grid, blocked)
        return grid, blocked

    def _snap_to_clear(self, goal: np.ndarray, max_cells: int = 10) -> np.ndarray | None:
        """Nearest cell center with planning clearance, or None."""
        _, blocked = self._nav_grid()
        g = self.grid
        gx, gy = g.world_to_cell(float(goal[0]), float(goal[1]))
        gx = min(max(gx, 0), g.width - 1)
        gy = min(max(gy, 0), g.height - 1)
        if not blocked[gy, gx]:
            return goal
        best = None
        best_d = None
        for r in range(1, max_cells + 1):
            for dy in range(-r, r + 1):
                for dx in range(-r, r + 1):
                    if max(abs(dx), abs(dy)) != r:
                        continue
                    nx, ny = gx + dx, gy + dy
                    if 0 <= nx < g.width and 0 <= ny < g.height and not blocked[ny, nx]:
                        d = (dx * dx + dy * dy, ny, nx)
                        if best_d is None or d < best_d:
                            best_d = d
                            best = (nx, ny)
            if best is not None:
                return g.cell_center(*best)
        return None

    def _navigate_toward(self, bb: Blackboard, goal: np.ndarray, key: str) -> bool:
        """Issue the nav command for goal, caching planned paths under key.

        Direct drive requires a robot-radius-wide clear corridor (the
        inflated grid), not just a zero-width sightline; otherwise the
        planner routes through doorways centered.
        """
        params = self.scenario.control
        goal = self._clamp_to_bounds(np.asarray(goal, np.float64))
        delta = goal - self.robot.xy
        dist = float(np.hypot(*delta))
        if dist <= params.d_goal:
            bb.set_nav(control.stop_cmd())
            return True
        nav_grid, blocked = self._nav_grid()
        if world.line_of_sight(self.robot.xy, goal, nav_grid, params.occ_thresh):
            bb.scratch.pop(key, None)
            desired = math.atan2(delta[1], delta[0])
            err = wrap_angle(desired - self.robot.heading)
            if abs(err) > params.theta_tol:
                bb.set_nav(control.turn_cmd(desired))
            else:
                bb.set_nav(control.go_straight_cmd(min(params.v_max, params.k_v * dist)))
            return True
        cache = bb.scratch.get(key)
        fresh = (
            cache is not None
            and float(np.hypot(*(cache["goal"] - goal))) < 0.3
            and self.t - cache["t"] < self.scenario.engine.replan_period_s
        )
        if not fresh:
            try:
                path = control.plan_path(
                    self.robot.xy, goal, self.grid, params, blocked=blocked
                )
            except control.UnreachableGoalError:
                bb.scratch.pop(key, None)
                return False
            cache = {"goal": goal.copy(), "t": self.t, "path": path, "idx": min(1, len(path) - 1)}
            bb.scratch[key] = cache
        # consume way-points as they are reached; never steer backwards
        path = cache["path"]
        idx = cache["idx"]
        while idx < len(path) - 1 and float(np.hypot(*(np.asarray(path[idx]) - self.robot.xy))) <= 0.15:
            idx += 1
        cache["idx"] = idx
        bb.set_nav(control.move_base_cmd(path[idx:]))
        return True

    def _act_follow_target(self, bb: Blackboard):
        bb.scratch.pop("waypoint", None)
        bb.scratch.pop("gaze_done", None)
        bb.scratch.pop("gaze_search", None)
        if bb.target_estimate is None:
            return TickStatus.FAILURE
        target = np.asarray(bb.target_estimate[0], np.float64)
        delta = target - self.robot.xy
        dist = float(np.hypot(*delta))
        standoff = self.scenario.control.standoff
        if dist > 1e-6:
            goal = target - delta / dist * standoff
        else:
            goal = self.robot.xy
        self._navigate_toward(bb, goal, "nav_follow")
        bb.set_gaze(control.gaze_plan(bb, self.belief, self.tracker.tracks, self.scenario.control))
        return TickStatus.RUNNING

    def _act_navigate_to_prediction(self, bb: Blackboard):
        ep = self.episode
        if ep is None or not ep.active:
            return TickStatus.FAILURE
        goals = [ep.goal] + [
            np.array([p[1], p[2]]) for p in reversed(ep.points) if p[3]
        ]
        for g in goals:
            g = self._snap_to_clear(self._clamp_to_bounds(np.asarray(g, np.float64)))
            if g is None:
                continue
            if self._navigate_toward(bb, g, "nav_predict"):
                ep.goal = g
                bb.set_gaze(
                    control.gaze_plan(bb, self.belief, self.tracker.tracks, self.scenario.control)
                )
                return TickStatus.RUNNING
        ep.active = False
        return TickStatus.FAILURE

    def _act_gaze_search(self, bb: Blackboard):
        # standing sweep; while a way-point journey is underway the search
        # has already failed here, so yield to it immediately
        wp = bb.scratch.get("waypoint")
        if wp is not None and not wp.get("reached", False):
            return TickStatus.FAILURE
        if bb.scratch.get("gaze_done", False):
            return TickStatus.FAILURE
        eng = self.scenario.engine
        params = self.scenario.control
        ep = bb.scratch.get("gaze_search")
        if ep is None:
            ep = {"since": self.t, "min_pan": self.robot.pan, "max_pan": self.robot.pan}
            bb.scratch["gaze_search"] = ep
        lim = params.pan_limit
        covered = ep["max_pan"] >= lim - 0.05 and ep["min_pan"] <= -lim + 0.05
        timed_out = self.t - ep["since"] > eng.gaze_timeout_s
        if covered or timed_out:
            bb.scratch.pop("gaze_search", None)
            bb.scratch["gaze_done"] = True
            return TickStatus.FAILURE
        bb.set_nav(control.stop_cmd())
        bb.set_gaze(control.gaze_plan(bb, self.belief, self.tracker.tracks, params))
        return TickStatus.RUNNING

    def _act_waypoint_search(self, bb: Blackboard):
        params = self.scenario.control
        eng = self.scenario.engine
        if self.scenario.region_graph is None:
            bb.set_nav(control.stop_cmd())
            return TickStatus.FAILURE
        visited = [
            v for v in bb.scratch.get("wp_visited", [])
            if self.t - v[1] <= eng.wp_exclude_s
        ]
        bb.scratch["wp_visited"] = visited
        wp = bb.scratch.get("waypoint")
        stale = wp is None or self.t - wp["t"] > eng.waypoint_refresh_s
        if wp is not None and not stale:
            if float(np.hypot(*(wp["goal"] - self.robot.xy))) <= params.d_goal:
                # vantage reached: sweep from here before moving on
                visited.append((wp["goal"].copy(), self.t))
                bb.scratch.pop("waypoint", None)
                bb.scratch.pop("gaze_done", None)
                bb.scratch.pop("gaze_search", None)
                bb.set_nav(control.stop_cmd())
                bb.set_gaze(
                    control.gaze_plan(bb, self.belief, self.tracker.tracks, params)
                )
                return TickStatus.RUNNING
        if stale:
            history = self.lost_history if self.lost_history is not None else self.distance_history
            try:
                goal = search.waypoint_search(
                    self.robot, self.scenario.region_graph, self.grid,
                    history, self.scenario.search,
                    exclude=[v[0] for v in visited],
                    exclude_radius=eng.wp_exclude_radius,
                )
            except (world.NoRegionError, search.InsufficientHistoryError):
                bb.set_nav(control.stop_cmd())
                return TickStatus.FAILURE
            goal = self._snap_to_clear(self._clamp_to_bounds(goal))
            if goal is None:
                bb.set_nav(control.stop_cmd())
                return TickStatus.FAILURE
            wp = {"goal": goal, "t": self.t}
            bb.scratch["waypoint"] = wp
        bb.waypoint = wp["goal"]
        if not self._navigate_toward(bb, wp["goal"], "nav_waypoint"):
            bb.scratch.pop("waypoint", None)
            bb.set_nav(control.stop_cmd())
            return TickStatus.FAILURE
        bb.set_gaze(control.gaze_plan(bb, self.belief, self.tracker.tracks, params))
        return TickStatus.RUNNING

    # -------------------------------------------------------------- execution

    def _execute(self, bb: Blackboard) -> None:
        params = self.scenario.control
        pose = self.robot
        pan = pose.pan
        if bb.gaze_command is not None:
            target_pan = max(-params.pan_limit, min(params.pan_limit, bb.gaze_command.pan_target))
            step = params.pan_rate * self.dt
            pan = pan + max(-step, min(step, target_pan - pan))
        heading = pose.heading
        position = pose.xy
        cmd = bb.nav_command
        if cmd is not None and cmd.kind == "turn":
            err = wrap_angle(cmd.heading - heading)
            step = params.turn_rate * self.dt
            heading = wrap_angle(heading + max(-step, min(step, err)))
        elif cmd is not None and cmd.kind == "go_straight":
            speed = min(max(cmd.speed, 0.0), params.v_max)
            position = self._move_robot(position, heading, speed)
        elif cmd is not None and cmd.kind == "move_base" and cmd.path:
            nxt = None
            for p in cmd.path:
                if float(np.hypot(*(np.asarray(p) - position))) > 0.12:
                    nxt = np.asarray(p, np.float64)
                    break
            if nxt is not None:
                desired = math.atan2(nxt[1] - position[1], nxt[0] - position[0])
                err = wrap_angle(desired - heading)
                if abs(err) > params.theta_tol:
                    step = params.turn_rate * self.dt
                    heading = wrap_angle(heading + max(-step, min(step, err)))
                else:
                    goal = np.asarray(cmd.path[-1], np.float64)
                    remaining = float(np.hypot(*(goal - position)))
                    speed = min(params.v_max, max(params.k_v * remaining, 0.5 * params.v_max))
                    position = self._move_robot(position, heading, speed)
        new_pose = Pose(x=float(position[0]), y=float(position[1]), heading=heading, pan=pan)
        moved = float(np.hypot(new_pose.x - pose.x, new_pose.y - pose.y))
        self.distance_traveled += moved
        self.robot = new_pose
        self.distance_history.push(self.t, new_pose.xy)
        # stuck watchdog: a drive command that produces no motion for a
        # while means the cached plan no longer matches the world
        if cmd is not None and cmd.kind in ("go_straight", "move_base") and moved < 1e-4:
            self._stuck_ticks += 1
            if self._stuck_ticks > int(2.0 * self.scenario.tick_hz):
                for k in list(self.bb.scratch):
                    if k.startswith("nav_") or k == "waypoint":
                        self.bb.scratch.pop(k, None)
                self._stuck_ticks = 0
        else:
            self._stuck_ticks = 0

    def _move_robot(self, position: np.ndarray, heading: float, speed: float) -> np.ndarray:
        speed = min(speed, self.scenario.v_max)
        step = speed * self.dt
        direction = np.array([math.cos(heading), math.sin(heading)])
        end = position + step * direction
        if self._blocked_move(position, end, margin=0.05):
            return position
        return end

    # ------------------------------------------------------------------ steps

    def step(self) -> TimelineEvent:
        self.tick_idx += 1
        self.t = self.tick_idx * self.dt
        self._advance_persons()
        ws = self.world_state()
        self._perceive(ws)
        bb = self.bb
        bb.begin_tick(self.t, self.dt)
        bb.robot_pose = self.robot
        bb.target_visible = bool(self.last_detections)
        bb.target_identified = self.identified
        bb.target_estimate = self.target_estimate
        bb.prediction = self.episode
        bb.belief = self.belief
        bb.grid = self.grid
        bb.tracks = self.tracker.tracks
        behavior.tick(self.tree, bb, self.handlers)
        self._execute(bb)
        if bb.last_action == behavior.GAZE_SEARCH:
            ep = bb.scratch.get("gaze_search")
            if ep is not None:
                ep["min_pan"] = min(ep["min_pan"], self.robot.pan)
                ep["max_pan"] = max(ep["max_pan"], self.robot.pan)
        self._prev_action = bb.last_action
        if self.identified:
            status = STATUS_IDENTIFIED
        elif self.last_detections:
            status = STATUS_VISIBLE
        else:
            status = STATUS_LOST
        target_pos = self.positions[self.scenario.target_id]
        dist_target = float(np.hypot(*(target_pos - self.robot.xy)))
        spec = self._spec_by_id[self.scenario.target_id]
        if (
            spec.done(self.t)
            and self.steer is None
            and dist_target <= self.scenario.success_radius
        ):
            self._success_hold += self.dt
        else:
            self._success_hold = 0.0
        if self._success_hold >= self.scenario.success_hold_s:
            self.succeeded = True
        event = TimelineEvent(
            t=self.t,
            robot=self.robot,
            active_action=bb.last_action,
            target_status=status,
            belief_entropy=search.map_entropy(self.belief),
            aux={
                "n_tracks": len(self.tracker.tracks),
                "n_detections": len(self.last_detections),
                "nav": bb.nav_command.kind if bb.nav_command is not None else None,
                "gaze_pan": round(self.robot.pan, 6),
                "waypoint": (
                    [round(float(v), 6) for v in bb.waypoint]
                    if bb.waypoint is not None
                    else None
                ),
                "prediction_active": bool(self.episode is not None and self.episode.active),
                "distance_to_target": round(dist_target, 6),
            },
        )
        self.last_event = event
        return event

    def _coarse_belief(self, factor: int = 4) -> dict:
        """Downsampled belief raster for the UI heatmap overlay."""
        cells = self.belief.cells
        h, w = cells.shape
        ch, cw = h // factor, w // factor
        block = cells[: ch * factor, : cw * factor].reshape(ch, factor, cw, factor)
        coarse = block.max(axis=(1, 3))
        return {
            "w": cw,
            "h": ch,
            "cell": self.belief.resolution * factor,
            "origin": list(self.belief.origin),
            "values": [round(float(v), 3) for v in coarse.ravel()],
        }

    def snapshot(self) -> dict:
        """State frame for the live service / UI."""
        frontier_cells = search.extract_frontiers(
            self.grid, self.scenario.search.beta, self.scenario.search.f_thresh,
            self.scenario.search.free_max, self.scenario.search.occ_min,
        )
        frontiers = [
            [round(float(v), 3) for v in self.grid.cell_center(ix, iy)]
            for ix, iy in frontier_cells[:400]
        ]
        ev = self.last_event
        peak = identity.belief_peak(self.belief, self.robot.xy)
        pred_pts = []
        if self.episode is not None and self.episode.active:
            pred_pts = [
                [round(t, 3), round(x, 3), round(y, 3), bool(v)]
                for t, x, y, v in self.episode.points
            ]
        return {
            "type": "state",
            "t": round(self.t, 6),
            "robot": {
                "x": self.robot.x,
                "y": self.robot.y,
                "heading": self.robot.heading,
                "pan": self.robot.pan,
            },
            "persons": [
                {
                    "id": p.id,
                    "x": round(float(self.positions[p.id][0]), 6),
                    "y": round(float(self.positions[p.id][1]), 6),
                    "vx": round(float(self.velocities[p.id][0]), 6),
                    "vy": round(float(self.velocities[p.id][1]), 6),
                    "is_target": p.id == self.scenario.target_id,
                }
                for p in self.scenario.persons
            ],
            "belief_summary": {
                "entropy": (ev.belief_entropy if ev is not None else search.map_entropy(self.belief)),
                "max": round(float(self.belief.cells.max()), 6),
                "peak": ([round(float(v), 3) for v in peak[0]] if peak else None),
                "coarse": self._coarse_belief(),
            },
            "frontiers": frontiers,
            "active_action": ev.active_action if ev is not None else "",
            "target_status": ev.target_status if ev is not None else STATUS_LOST,
            "prediction": pred_pts,
            "paused": self.paused,
        }

    def run(self, max_ticks: int | None = None, log_fp=None) -> Summary:
        """Step to the tick budget or the first terminal condition."""
        if max_ticks is None:
            max_ticks = int(round(self.scenario.duration_s * self.scenario.tick_hz))
        if log_fp is not None and self.tick_idx == 0:
            tree_line = {"type": "tree", "tree": self.tree.to_dict()}
            log_fp.write(json.dumps(tree_line, separators=(",", ":")) + "\n")
        while self.tick_idx < max_ticks and not self.succeeded:
            event = self.step()
            if log_fp is not None:
                line = {"type": "event", **event.to_dict()}
                log_fp.write(json.dumps(line, separators=(",", ":")) + "\n")
        if self.succeeded:
            final = "followed"
        else:
            final = self.last_event.target_status if self.last_event else STATUS_LOST
        if self.first_lost_at is None:
            ttr = 0.0
        else:
            ttr = self.reacquired_after
        return Summary(
            success=self.succeeded,
            time_to_reacquire=ttr,
            distance_traveled=self.distance_traveled,
            ticks=self.tick_idx,
            sim_time=self.t,
            final_status=final,
        )


def run_scenario(scenario: Scenario, max_ticks: int | None = None,
                 log_fp=None, seed: int | None = None) -> Summary:
    return Simulation(scenario, seed=seed).run(max_ticks=max_ticks, log_fp=log_fp)
