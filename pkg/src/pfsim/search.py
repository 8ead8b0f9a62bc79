"""Map entropy, frontier extraction and clustering, and way-point search.

The way-point search infers which neighboring region the robot has been
approaching (from its recent position history), then picks the frontier
cluster that best trades information gain against travel cost toward
that region.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import accel
from .world import OccupancyGrid, Pose, RegionGraph, current_region


class InsufficientHistoryError(ValueError):
    """Position history too short for the heading inference."""


@dataclass
class SearchParams:
    beta: float = 1.0            # obstacle-boundary cancellation weight
    f_thresh: float = 0.3        # frontier score threshold
    free_max: float = 0.35       # cells below this count as free
    occ_min: float = 0.65        # cells above this count as obstacle
    min_cluster: int = 3
    r_unknown: float = 5.0       # cell radius for the unknown-count N
    alpha: float = 0.5           # info-gain weight in the utility, m/cell
    window: float = 2.0          # history window T, s
    t_min: float = 1.0           # minimum history span, s


@dataclass
class FrontierCluster:
    cells: list[tuple[int, int]]
    unknown_count: int
    representative: np.ndarray


class DistanceHistory:
    """Ring of (time, robot position) covering the last ``window`` seconds."""

    def __init__(self, window: float = 2.0):
        self.window = window
        self._ring: deque[tuple[float, np.ndarray]] = deque()

    def push(self, t: float, position) -> None:
        if self._ring and t <= self._ring[-1][0]:
            raise ValueError("timestamps must be strictly increasing")
        self._ring.append((t, np.asarray(position, np.float64).copy()))
        while self._ring and self._ring[-1][0] - self._ring[0][0] > self.window:
            self._ring.popleft()

    def __len__(self) -> int:
        return len(self._ring)

    def span(self) -> float:
        if len(self._ring) < 2:
            return 0.0
        return self._ring[-1][0] - self._ring[0][0]

    def items(self) -> list[tuple[float, np.ndarray]]:
        return list(self._ring)

    def copy(self) -> "DistanceHistory":
        out = DistanceHistory(self.window)
        out._ring = deque((t, p.copy()) for t, p in self._ring)
        return out


def map_entropy(grid: OccupancyGrid) -> float:
    """Occupancy-weighted entropy, -sum(m * log2 m), with 0 log 0 = 0."""
    m = grid.cells
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(m > 0.0, m * np.log2(m), 0.0)
    return float(-terms.sum())


def extract_frontiers(grid: OccupancyGrid, beta: float = 1.0,
                      f_thresh: float = 0.3, free_max: float = 0.35,
                      occ_min: float = 0.65) -> list[tuple[int, int]]:
    """Free cells whose boundary score exceeds the threshold.

    The score field is the largest absolute probability jump to any
    8-neighbor minus ``beta`` times the same jump measured on the
    obstacle-only field (plus the cell's obstacle excess over 0.5), so
    free/unknown boundaries score high while obstacle boundaries cancel.
    Returned cells are (ix, iy), row-major order.
    """
    F = accel.frontier_field(grid.cells, beta, occ_min)
    mask = (F > f_thresh) & (grid.cells < free_max)
    ys, xs = np.nonzero(mask)
    return [(int(x), int(y)) for x, y in zip(xs, ys)]


def cluster_frontiers(cells: list[tuple[int, int]], min_size: int,
                      grid: OccupancyGrid, r_unknown: float = 5.0,
                      free_max: float = 0.35, occ_min: float = 0.65,
                      waypoint=None) -> list[FrontierCluster]:
    """8-connected components of frontier cells, scored by nearby unknowns.

    Components smaller than min_size are discarded. The unknown count N
    is the number of unknown cells (free_max <= p <= occ_min) within
    r_unknown cells of the component. The representative is the cluster
    cell closest to ``waypoint`` when given, else to the cluster mean.
    """
    cell_set = set(cells)
    seen: set[tuple[int, int]] = set()
    clusters: list[list[tuple[int, int]]] = []
    for start in cells:
        if start in seen:
            continue
        comp = []
        stack = [start]
        seen.add(start)
        while stack:
            c = stack.pop()
            comp.append(c)
            cx, cy = c
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    if dx == 0 and dy == 0:
                        continue
                    nb = (cx + dx, cy + dy)
                    if nb in cell_set and nb not in seen:
                        seen.add(nb)
                        stack.append(nb)
        if len(comp) >= min_size:
            comp.sort()
            clusters.append(comp)
    clusters.sort(key=lambda comp: comp[0])

    unknown = (grid.cells >= free_max) & (grid.cells <= occ_min)
    uys, uxs = np.nonzero(unknown)
    out = []
    for comp in clusters:
        arr = np.asarray(comp, np.float64)
        if len(uxs):
            d2 = (uxs[None, :] - arr[:, 0:1]) ** 2 + (uys[None, :] - arr[:, 1:2]) ** 2
            n_unknown = int((d2.min(axis=0) <= r_unknown ** 2).sum())
        else:
            n_unknown = 0
        centers = np.stack(
            [grid.cell_center(ix, iy) for ix, iy in comp]
        )
        ref = np.asarray(waypoint, np.float64) if waypoint is not None else centers.mean(axis=0)
        k = int(np.argmin(np.hypot(centers[:, 0] - ref[0], centers[:, 1] - ref[1])))
        out.append(
            FrontierCluster(
                cells=comp,
                unknown_count=n_unknown,
                representative=centers[k],
            )
        )
    return out


def utility(c, x, l_star, n_unknown: int, alpha: float) -> float:
    """Information gain minus travel cost: alpha*N - (d(x,c) + d(c,l*))."""
    if alpha < 0.0:
        raise ValueError("alpha must be non-negative")
    c = np.asarray(c, np.float64)
    x = np.asarray(x, np.float64)
    l_star = np.asarray(l_star, np.float64)
    return float(
        alpha * n_unknown
        - (np.hypot(*(c - x)) + np.hypot(*(c - l_star)))
    )


def heading_waypoint(x: Pose, graph: RegionGraph,
                     history: DistanceHistory, t_min: float = 1.0) -> np.ndarray:
    """Centroid of the neighbor region the robot has been approaching.

    For each neighbor of the current region, the mean per-step change of
    the robot-to-centroid distance over the history window; the most
    negative average (ties to the lowest region id) wins.
    """
    if len(history) < 2 or history.span() < t_min:
        raise InsufficientHistoryError(
            f"history spans {history.span():.2f}s < {t_min:.2f}s"
        )
    rid = current_region((x.x, x.y), graph)
    items = history.items()
    best_id = None
    best_rate = math.inf
    for nb in graph.neighbors(rid):
        centroid = graph.centroid(nb)
        d = np.array([np.hypot(*(p - centroid)) for _, p in items])
        span = items[-1][0] - items[0][0]
        rate = float((d[-1] - d[0]) / span)
        if rate < best_rate - 1e-12:
            best_rate = rate
            best_id = nb
    return graph.centroid(best_id)


def waypoint_search(x: Pose, graph: RegionGraph, grid: OccupancyGrid,
                    history: DistanceHistory,
                    params: SearchParams | None = None,
                    exclude=None, exclude_radius: float = 0.8) -> np.ndarray:
    """Pick the next sensing goal: the utility-maximizing frontier point.

    The heading way-point l* (the most-approached neighbor centroid)
    anchors both the per-cluster candidate (cluster cell closest to l*)
    and the travel-cost term. With no frontier clusters left, l* itself
    is the goal. Recently visited goals can be passed via ``exclude`` so
    a caller cycling through vantage points does not re-pick a frontier
    it is already standing on. Deterministic for identical inputs.
    """
    params = params or SearchParams()
    l_star = heading_waypoint(x, graph, history, params.t_min)
    cells = extract_frontiers(
        grid, params.beta, params.f_thresh, params.free_max, params.occ_min
    )
    clusters = cluster_frontiers(
        cells, params.min_cluster, grid, params.r_unknown,
        params.free_max, params.occ_min, waypoint=l_star,
    )
    if exclude:
        kept = []
        for cl in clusters:
            near = any(
                float(np.hypot(*(cl.representative - np.asarray(p)))) <= exclude_radius
                for p in exclude
            )
            if not near:
                kept.append(cl)
        clusters = kept
    if not clusters:
        return l_star
    robot = x.xy
    best = None
    best_u = -math.inf
    for cl in clusters:
        u = utility(cl.representative, robot, l_star, cl.unknown_count, params.alpha)
        if u > best_u + 1e-12:
            best_u = u
            best = cl.representative
    return best.copy()
