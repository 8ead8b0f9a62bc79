"""Gaze planning and base navigation.

Navigation prefers the direct primitives: turn toward the goal, then
drive straight, whenever the grid shows a clear line to it. With
obstacles in between it falls back to a planned path (8-connected A*
over the inflated occupancy grid, shortcut-smoothed).
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .behavior import Blackboard
from .geometry import wrap_angle
from .identity import belief_peak
from .tracking import Track, TrackStatus
from .world import BeliefGrid, OccupancyGrid, Pose, line_of_sight


class UnreachableGoalError(RuntimeError):
    """No collision-free path exists to the goal."""


@dataclass
class ControlParams:
    v_max: float = 0.22        # base speed cap, m/s
    theta_tol: float = 0.15    # bearing error below which we drive, rad
    d_goal: float = 0.4        # arrival radius, m
    k_v: float = 0.5           # speed gain per meter of distance, 1/s
    standoff: float = 0.8      # following distance behind the target, m
    pan_limit: float = 1.2     # gaze pan range, rad
    pan_rate: float = 2.0      # gaze slew rate, rad/s
    turn_rate: float = 1.5     # base turn rate, rad/s
    robot_radius: float = 0.25
    occ_thresh: float = 0.65   # cells above this block movement
    sweep_step: float = 0.15   # gaze sweep increment per tick, rad


@dataclass
class NavCommand:
    kind: str                  # turn | go_straight | move_base | stop
    heading: float = 0.0       # turn target, absolute rad
    speed: float = 0.0         # go_straight, m/s
    path: list = field(default_factory=list)


def turn_cmd(heading: float) -> NavCommand:
    return NavCommand("turn", heading=wrap_angle(heading))


def go_straight_cmd(speed: float) -> NavCommand:
    return NavCommand("go_straight", speed=speed)


def move_base_cmd(path: list) -> NavCommand:
    return NavCommand("move_base", path=path)


def stop_cmd() -> NavCommand:
    return NavCommand("stop")


@dataclass
class GazeCommand:
    pan_target: float  # relative to base heading, clamped to the pan limit


def gaze_plan(bb: Blackboard, belief: BeliefGrid, tracks: list[Track],
              params: ControlParams | None = None) -> GazeCommand:
    """Point the head where the target most plausibly is.

    Priority: current target estimate, then the belief peak, then the
    nearest confirmed leg track, then a saw-tooth sweep across the pan
    range (state kept on the blackboard scratch).
    """
    params = params or ControlParams()
    pose: Pose = bb.robot_pose
    lim = params.pan_limit

    def toward(point) -> GazeCommand:
        ang = math.atan2(point[1] - pose.y, point[0] - pose.x)
        rel = wrap_angle(ang - pose.heading)
        return GazeCommand(pan_target=max(-lim, min(lim, rel)))

    if bb.target_estimate is not None:
        return toward(bb.target_estimate[0])
    if belief is not None:
        peak = belief_peak(belief, (pose.x, pose.y))
        if peak is not None:
            return toward(peak[0])
    confirmed = [t for t in (tracks or []) if t.status is TrackStatus.CONFIRMED]
    if confirmed:
        nearest = min(
            confirmed,
            key=lambda t: float(np.hypot(*(t.position - pose.xy))),
        )
        return toward(nearest.position)
    state = bb.scratch.setdefault("gaze_sweep", {"pan": 0.0, "dir": 1.0})
    pan = state["pan"] + state["dir"] * params.sweep_step
    if pan >= lim:
        pan = lim
        state["dir"] = -1.0
    elif pan <= -lim:
        pan = -lim
        state["dir"] = 1.0
    state["pan"] = pan
    return GazeCommand(pan_target=pan)


def _inflate(grid: OccupancyGrid, radius: float, occ_thresh: float) -> np.ndarray:
    """Boolean blocked-mask with obstacles dilated by the robot radius."""
    blocked = grid.cells > occ_thresh
    r = int(math.ceil(radius / grid.resolution))
    if r <= 0 or not blocked.any():
        return blocked
    out = blocked.copy()
    h, w = blocked.shape
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            if dx * dx + dy * dy > r * r:
                continue
            ys0, ys1 = max(0, dy), min(h, h + dy)
            xd0, xd1 = max(0, dx), min(w, w + dx)
            out[ys0:ys1, xd0:xd1] |= blocked[
                max(0, -dy) : min(h, h - dy), max(0, -dx) : min(w, w - dx)
            ]
    return out


_SQRT2 = math.sqrt(2.0)
_MOVES = (
    (1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
    (1, 1, _SQRT2), (1, -1, _SQRT2), (-1, 1, _SQRT2), (-1, -1, _SQRT2),
)


def astar_cells(blocked: np.ndarray, start: tuple[int, int],
                goal: tuple[int, int]) -> tuple[list[tuple[int, int]], float]:
    """8-connected A* with the octile heuristic; cost in cell units.

    Returns (path of (ix, iy) cells incl. endpoints, cost). Raises
    UnreachableGoalError when no path exists.
    """
    h, w = blocked.shape

    def heuristic(c):
        dx = abs(c[0] - goal[0])
        dy = abs(c[1] - goal[1])
        return (dx + dy) + (_SQRT2 - 2.0) * min(dx, dy)

    dist = {start: 0.0}
    came: dict = {}
    pq = [(heuristic(start), 0.0, start)]
    seen = set()
    while pq:
        f, g, cur = heapq.heappop(pq)
        if cur in seen:
            continue
        seen.add(cur)
        if cur == goal:
            path = [cur]
            while cur in came:
                cur = came[cur]
                path.append(cur)
            path.reverse()
            return path, g
        cx, cy = cur
        for dx, dy, step in _MOVES:
            nx, ny = cx + dx, cy + dy
            if not (0 <= nx < w and 0 <= ny < h) or blocked[ny, nx]:
                continue
            if dx != 0 and dy != 0 and (blocked[cy, nx] or blocked[ny, cx]):
                continue  # no cutting corners through blocked cells
            nd = g + step
            nb = (nx, ny)
            if nd < dist.get(nb, math.inf) - 1e-12:
                dist[nb] = nd
                came[nb] = cur
                heapq.heappush(pq, (nd + heuristic(nb), nd, nb))
    raise UnreachableGoalError(f"no path from {start} to {goal}")


def plan_path(start, goal, grid: OccupancyGrid,
              params: ControlParams | None = None,
              blocked: np.ndarray | None = None) -> list[np.ndarray]:
    """Plan a world-coordinate path start -> goal over the inflated grid.

    Unknown cells are traversable (optimistic: search goals sit next to
    unexplored space by design). The raw A* cell path is smoothed by
    greedy line-of-sight shortcutting. The start cell is exempted from
    inflation so a robot hugging a wall can still plan away from it.
    A precomputed inflation mask can be passed to avoid re-dilating.
    """
    params = params or ControlParams()
    if blocked is None:
        blocked = _inflate(grid, params.robot_radius, params.occ_thresh)
    s = grid.world_to_cell(float(start[0]), float(start[1]))
    g = grid.world_to_cell(float(goal[0]), float(goal[1]))
    for c, label in ((s, "start"), (g, "goal")):
        if not grid.in_bounds(*c):
            raise UnreachableGoalError(f"{label} cell {c} outside the grid")
    if blocked[g[1], g[0]]:
        raise UnreachableGoalError("goal lies inside an inflated obstacle")
    if blocked[s[1], s[0]]:
        # the robot is standing there, so its footprint is clear: lift the
        # inflation (but never raw obstacles) so it can plan its way out
        blocked = blocked.copy()
        raw = grid.cells > params.occ_thresh
        rr = int(math.ceil(params.robot_radius / grid.resolution)) + 1
        for dy in range(-rr, rr + 1):
            for dx in range(-rr, rr + 1):
                nx, ny = s[0] + dx, s[1] + dy
                if 0 <= nx < grid.width and 0 <= ny < grid.height and not raw[ny, nx]:
                    blocked[ny, nx] = False
    cells, _ = astar_cells(blocked, s, g)
    pts = [np.asarray(start, np.float64)] + [grid.cell_center(ix, iy) for ix, iy in cells[1:-1]]
    pts.append(np.asarray(goal, np.float64))
    # greedy shortcutting on the planning grid
    free = OccupancyGrid(
        resolution=grid.resolution, width=grid.width, height=grid.height,
        origin=grid.origin, cells=np.where(blocked, 0.9, 0.1),
    )
    out = [pts[0]]
    k = 0
    while k < len(pts) - 1:
        j = len(pts) - 1
        while j > k + 1:
            if line_of_sight(pts[k], pts[j], free, tau_occ=params.occ_thresh):
                break
            j -= 1
        out.append(pts[j])
        k = j
    return out


def nav_command(robot: Pose, goal, grid: OccupancyGrid,
                params: ControlParams | None = None) -> NavCommand:
    """Choose the navigation primitive for the current goal.

    Clear line of sight: turn until roughly aligned, then drive straight
    with speed proportional to distance (capped). Blocked: delegate to
    the path planner. Within the arrival radius: stop.
    """
    params = params or ControlParams()
    goal = np.asarray(goal, np.float64)
    delta = goal - robot.xy
    dist = float(np.hypot(*delta))
    if dist <= params.d_goal:
        return stop_cmd()
    if line_of_sight(robot.xy, goal, grid, params.occ_thresh):
        desired = math.atan2(delta[1], delta[0])
        err = wrap_angle(desired - robot.heading)
        if abs(err) > params.theta_tol:
            return turn_cmd(desired)
        return go_straight_cmd(min(params.v_max, params.k_v * dist))
    return move_base_cmd(plan_path(robot.xy, goal, grid, params))
