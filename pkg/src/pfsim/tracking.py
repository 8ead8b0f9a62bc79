"""Multi-target constant-velocity Kalman tracking of leg candidates.

The motion model is linear, so the filter is an exact linear Kalman
filter (the Jacobian of the constant-velocity transition is the
transition itself). Tracked persons have no known control input, so the
state equation carries no input term. Data association is
nearest-neighbor in the min-total-distance sense: exhaustive over
assignments for small problems, greedy nearest-first beyond.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np


class SingularInnovationError(RuntimeError):
    """Innovation covariance numerically singular during the update step."""


class TrackStatus(str, Enum):
    TENTATIVE = "tentative"
    CONFIRMED = "confirmed"
    DEAD = "dead"


@dataclass(frozen=True)
class Track:
    """One Kalman-filtered leg hypothesis: state [x, y, vx, vy]."""

    id: int
    state: np.ndarray
    covariance: np.ndarray
    hits: int = 1
    misses: int = 0
    status: TrackStatus = TrackStatus.TENTATIVE

    @property
    def position(self) -> np.ndarray:
        return self.state[:2]

    @property
    def velocity(self) -> np.ndarray:
        return self.state[2:]


@dataclass
class Assignment:
    pairs: list[tuple[int, int]]  # (track id, detection index)
    unmatched_tracks: list[int]
    unmatched_detections: list[int]
    total_distance: float = 0.0


@dataclass
class TrackerParams:
    q: float = 0.5           # white-noise acceleration intensity, m^2/s^3
    r: float = 0.05 ** 2     # measurement variance, m^2
    gate: float = 1.0        # association gate, m
    confirm_hits: int = 3
    max_misses: int = 10
    init_vel_var: float = 1.0


_H = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])


def transition(dt: float) -> np.ndarray:
    F = np.eye(4)
    F[0, 2] = dt
    F[1, 3] = dt
    return F


def process_noise(dt: float, q: float) -> np.ndarray:
    """White-noise-acceleration discretization of the process noise."""
    a = q * dt ** 3 / 3.0
    b = q * dt ** 2 / 2.0
    c = q * dt
    return np.array(
        [
            [a, 0.0, b, 0.0],
            [0.0, a, 0.0, b],
            [b, 0.0, c, 0.0],
            [0.0, b, 0.0, c],
        ]
    )


def predict(track: Track, dt: float, q: float) -> Track:
    """Propagate the constant-velocity model by dt."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    F = transition(dt)
    state = F @ track.state
    cov = F @ track.covariance @ F.T + process_noise(dt, q)
    return replace(track, state=state, covariance=cov)


def update(track: Track, z, r: float) -> Track:
    """Standard Kalman correction with a position-only measurement."""
    z = np.asarray(z, np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("measurement must be finite")
    P = track.covariance
    S = _H @ P @ _H.T + r * np.eye(2)
    if np.linalg.cond(S) > 1e12:
        raise SingularInnovationError("innovation covariance is singular")
    K = P @ _H.T @ np.linalg.inv(S)
    state = track.state + K @ (z - _H @ track.state)
    cov = (np.eye(4) - K @ _H) @ P
    return replace(track, state=state, covariance=cov)


def _exhaustive_assignment(dist: np.ndarray) -> tuple[list[tuple[int, int]], float]:
    """Min-total-distance injective assignment of the smaller side, by search."""
    n, m = dist.shape
    swap = n > m
    if swap:
        dist = dist.T
        n, m = m, n
    best_cost = math.inf
    best: list[int] = []
    used = [False] * m
    choice = [-1] * n

    def rec(i: int, cost: float):
        nonlocal best_cost, best
        if cost >= best_cost:
            return
        if i == n:
            best_cost = cost
            best = choice[:i].copy()
            return
        for j in range(m):
            if not used[j]:
                used[j] = True
                choice[i] = j
                rec(i + 1, cost + dist[i, j])
                used[j] = False

    rec(0, 0.0)
    pairs = []
    for i, j in enumerate(best):
        pairs.append((j, i) if swap else (i, j))
    return pairs, best_cost


def associate(tracks: list[Track], detections: list, gate: float) -> Assignment:
    """Pair tracks with detections minimizing the summed distances.

    Exhaustive search when min(len(tracks), len(detections)) <= 6 (and the
    larger side stays small enough to enumerate), greedy nearest-first
    beyond. Pairs farther apart than ``gate`` are dropped to the unmatched
    lists.
    """
    if gate <= 0.0:
        raise ValueError("gate must be positive")
    n, m = len(tracks), len(detections)
    if n == 0 or m == 0:
        return Assignment([], [t.id for t in tracks], list(range(m)))
    pts = np.asarray([np.asarray(d, np.float64) for d in detections])
    pos = np.asarray([t.position for t in tracks])
    dist = np.hypot(
        pos[:, 0:1] - pts[None, :, 0], pos[:, 1:2] - pts[None, :, 1]
    )
    if min(n, m) <= 6 and max(n, m) <= 16:
        raw_pairs, _ = _exhaustive_assignment(dist)
    else:
        order = [
            (dist[i, j], i, j) for i in range(n) for j in range(m)
        ]
        order.sort()
        used_t, used_d = set(), set()
        raw_pairs = []
        for d, i, j in order:
            if d > gate:
                break
            if i in used_t or j in used_d:
                continue
            raw_pairs.append((i, j))
            used_t.add(i)
            used_d.add(j)
    pairs = []
    total = 0.0
    matched_t, matched_d = set(), set()
    for i, j in raw_pairs:
        if dist[i, j] <= gate:
            pairs.append((tracks[i].id, j))
            total += float(dist[i, j])
            matched_t.add(i)
            matched_d.add(j)
    return Assignment(
        pairs=pairs,
        unmatched_tracks=[t.id for k, t in enumerate(tracks) if k not in matched_t],
        unmatched_detections=[j for j in range(m) if j not in matched_d],
        total_distance=total,
    )


def manage(tracks: list[Track], assignment: Assignment, detections: list,
           dt: float, params: TrackerParams | None = None,
           next_id: int = 0) -> tuple[list[Track], int]:
    """Advance one tracking frame from prior tracks.

    Every prior track is predicted by dt; matched tracks are then
    corrected with their detection (hits += 1, misses reset), unmatched
    tracks coast (misses += 1, dead past max_misses and dropped).
    Unmatched detections spawn tentative tracks with zero velocity and an
    inflated covariance. The assignment must have been computed against
    the same dt prediction.
    """
    params = params or TrackerParams()
    matched = dict(assignment.pairs)
    out: list[Track] = []
    for track in tracks:
        t = predict(track, dt, params.q)
        if track.id in matched:
            z = np.asarray(detections[matched[track.id]], np.float64)
            t = update(t, z, params.r)
            hits = t.hits + 1
            status = t.status
            if status is TrackStatus.TENTATIVE and hits >= params.confirm_hits:
                status = TrackStatus.CONFIRMED
            out.append(replace(t, hits=hits, misses=0, status=status))
        else:
            misses = t.misses + 1
            if misses > params.max_misses:
                continue  # dead, dropped
            out.append(replace(t, misses=misses))
    for j in assignment.unmatched_detections:
        z = np.asarray(detections[j], np.float64)
        state = np.array([z[0], z[1], 0.0, 0.0])
        cov = np.diag([params.r, params.r, params.init_vel_var, params.init_vel_var])
        out.append(Track(id=next_id, state=state, covariance=cov))
        next_id += 1
    return out, next_id


class MultiTargetTracker:
    """Stateful frame-by-frame wrapper around predict/associate/manage."""

    def __init__(self, params: TrackerParams | None = None):
        self.params = params or TrackerParams()
        self.tracks: list[Track] = []
        self._next_id = 0

    def step(self, detections: list, dt: float) -> Assignment:
        predicted = [predict(t, dt, self.params.q) for t in self.tracks]
        assignment = associate(predicted, detections, self.params.gate)
        self.tracks, self._next_id = manage(
            self.tracks, assignment, detections, dt, self.params, self._next_id
        )
        return assignment

    @property
    def confirmed(self) -> list[Track]:
        return [t for t in self.tracks if t.status is TrackStatus.CONFIRMED]


def person_positions(tracks: list[Track], pair_dist: float = 0.5) -> list[tuple[np.ndarray, list[int]]]:
    """Group confirmed leg tracks into person hypotheses.

    Tracks within pair_dist of each other are paired greedily (nearest
    first) and represented by their centroid; leftovers stand alone.
    """
    conf = [t for t in tracks if t.status is TrackStatus.CONFIRMED]
    conf.sort(key=lambda t: t.id)
    used: set[int] = set()
    out: list[tuple[np.ndarray, list[int]]] = []
    cand = []
    for a in range(len(conf)):
        for b in range(a + 1, len(conf)):
            d = float(np.hypot(*(conf[a].position - conf[b].position)))
            if d <= pair_dist:
                cand.append((d, a, b))
    cand.sort()
    for d, a, b in cand:
        if a in used or b in used:
            continue
        used.add(a)
        used.add(b)
        centroid = (conf[a].position + conf[b].position) / 2.0
        out.append((centroid, [conf[a].id, conf[b].id]))
    for k, t in enumerate(conf):
        if k not in used:
            out.append((t.position.copy(), [t.id]))
    return out
