"""Target identification and the human-presence belief grid.

Identification is a trust-ordered cascade over fused candidates: leg
corroboration gates, face evidence decides when available, clothes
similarity (histogram intersection) decides otherwise. The belief grid
tracks where the target might be; cells are Bayes-updated only while the
camera actually observes them, so belief persists behind walls and
outside the gaze wedge.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import accel
from .world import BeliefGrid, FovCone, OccupancyGrid, PersonDetection, bayes_posterior


class InvalidHistogramError(ValueError):
    """Histogram bins mismatch, negative entries, or an all-zero template."""


class InsufficientEnrollmentError(ValueError):
    """Enrollment detection lacks face or clothes evidence."""


@dataclass
class IdentityParams:
    face_threshold: float = 0.8
    critical_similarity: float = 0.8
    leg_gate: float = 0.5       # max leg-track distance to corroborate, m
    p_det: float = 0.9          # detection likelihood for occupied belief cells
    r_person: float = 0.4       # belief bump radius around a target fix, m
    belief_min: float = 0.02
    belief_max: float = 0.98


@dataclass
class TargetModel:
    """Learned appearance of the person to follow."""

    face_id: str
    clothes_template: np.ndarray
    critical_similarity: float = 0.8


@dataclass
class HumanCandidate:
    """One fused human hypothesis offered to the identification cascade."""

    position: np.ndarray
    source: str  # "vision" | "leg-track"
    face_evidence: tuple[str, float] | None = None
    clothes_histogram: np.ndarray | None = None
    track_id: int | None = None

    def __post_init__(self):
        if (
            self.face_evidence is None
            and self.clothes_histogram is None
            and self.track_id is None
        ):
            raise ValueError("candidate carries no evidence")


@dataclass
class TargetFix:
    """Cascade output: where the target is and which track carries it."""

    position: np.ndarray
    track_id: int | None
    route: str  # "face" | "clothes"
    score: float


def similarity(I, T) -> float:
    """Histogram intersection ratio: sum(min(I_j, T_j)) / sum(T_j)."""
    I = np.asarray(I, np.float64)
    T = np.asarray(T, np.float64)
    if I.shape != T.shape:
        raise InvalidHistogramError(
            f"bin count mismatch: {I.shape} vs {T.shape}"
        )
    if (I < 0).any() or (T < 0).any():
        raise InvalidHistogramError("histogram entries must be non-negative")
    total = T.sum()
    if total <= 0.0:
        raise InvalidHistogramError("template sums to zero")
    return float(np.minimum(I, T).sum() / total)


def learn_target(detection: PersonDetection,
                 critical_similarity: float = 0.8) -> TargetModel:
    """Enroll the target from one full detection (face + clothes required)."""
    if detection.face_id is None:
        raise InsufficientEnrollmentError("enrollment requires face evidence")
    if detection.clothes_histogram is None:
        raise InsufficientEnrollmentError("enrollment requires a clothes histogram")
    return TargetModel(
        face_id=detection.face_id[0],
        clothes_template=np.asarray(detection.clothes_histogram, np.float64).copy(),
        critical_similarity=critical_similarity,
    )


def fuse_candidates(detections: list[PersonDetection],
                    persons: list[tuple[np.ndarray, list[int]]],
                    leg_gate: float = 0.5) -> list[HumanCandidate]:
    """Build cascade candidates from camera detections and leg-track persons.

    A detection is corroborated (track_id set) when a confirmed leg-track
    person hypothesis lies within leg_gate of it.
    """
    out = []
    for det in detections:
        track_id = None
        best = leg_gate
        for pos, ids in persons:
            d = float(np.hypot(*(det.position - pos)))
            if d <= best:
                best = d
                track_id = min(ids)
        out.append(
            HumanCandidate(
                position=det.position,
                source="vision",
                face_evidence=det.face_id,
                clothes_histogram=det.clothes_histogram,
                track_id=track_id,
            )
        )
    return out


def identify(candidates: list[HumanCandidate], model: TargetModel,
             face_threshold: float = 0.8) -> TargetFix | None:
    """Three-step cascade: gate by legs, decide by face, else by clothes.

    Step 1 keeps only candidates corroborated by a confirmed leg track.
    Step 2 returns the highest-confidence survivor whose face evidence
    matches the model at or above face_threshold. Step 3 falls back to
    the survivor with maximal clothes similarity, accepted only at or
    above the model's critical similarity. None means no target.
    """
    survivors = [c for c in candidates if c.track_id is not None]
    if not survivors:
        return None
    faced = [
        c
        for c in survivors
        if c.face_evidence is not None
        and c.face_evidence[0] == model.face_id
        and c.face_evidence[1] >= face_threshold
    ]
    if faced:
        best = max(faced, key=lambda c: c.face_evidence[1])
        return TargetFix(
            position=best.position.copy(),
            track_id=best.track_id,
            route="face",
            score=float(best.face_evidence[1]),
        )
    best = None
    best_sim = -1.0
    for c in survivors:
        if c.clothes_histogram is None:
            continue
        s = similarity(c.clothes_histogram, model.clothes_template)
        if s > best_sim:
            best_sim = s
            best = c
    if best is not None and best_sim >= model.critical_similarity:
        return TargetFix(
            position=best.position.copy(),
            track_id=best.track_id,
            route="clothes",
            score=best_sim,
        )
    return None


def update_belief(belief: BeliefGrid, target_positions: list,
                  fov: FovCone, occupancy: OccupancyGrid | None = None,
                  tau_occ: float = 0.65, p_det: float = 0.9,
                  r_person: float = 0.4, belief_min: float = 0.02,
                  belief_max: float = 0.98) -> BeliefGrid:
    """Bayes-update target presence over the observed wedge.

    Observed cells within r_person of an identified target position take
    the detection likelihood p_det, all other observed cells the miss
    likelihood 1 - p_det. Cells outside the wedge (or shadowed by the
    occupancy grid, when given) keep their belief bit-identical.
    """
    h, w = belief.cells.shape
    res = belief.resolution
    gx0, gy0 = belief.origin
    n_rays = max(int(2.0 * fov.half_angle * fov.max_range / (0.5 * res)) + 1, 9)
    if occupancy is not None:
        mask = accel.visibility_mask(
            occupancy.cells, float(fov.origin[0]), float(fov.origin[1]),
            fov.direction, fov.half_angle, fov.max_range, tau_occ,
            res, gx0, gy0, n_rays,
        ).astype(bool)
    else:
        xs = gx0 + (np.arange(w) + 0.5) * res
        ys = gy0 + (np.arange(h) + 0.5) * res
        dx = xs[None, :] - fov.origin[0]
        dy = ys[:, None] - fov.origin[1]
        dist = np.hypot(dx, dy)
        ang = np.arctan2(dy, dx) - fov.direction
        ang = np.mod(ang + np.pi, 2.0 * np.pi) - np.pi
        mask = (dist <= fov.max_range) & (np.abs(ang) <= fov.half_angle)
    likelihood = np.full((h, w), 1.0 - p_det)
    if target_positions:
        xs = gx0 + (np.arange(w) + 0.5) * res
        ys = gy0 + (np.arange(h) + 0.5) * res
        for pos in target_positions:
            d = np.hypot(xs[None, :] - pos[0], ys[:, None] - pos[1])
            likelihood[d <= r_person] = p_det
    new = belief.copy()
    post = bayes_posterior(belief.cells[mask], likelihood[mask])
    new.cells[mask] = np.clip(post, belief_min, belief_max)
    return new


def belief_peak(belief: BeliefGrid, origin) -> tuple[np.ndarray, float] | None:
    """Highest-belief cell above the unknown prior; nearest wins ties."""
    best = float(belief.cells.max())
    if best <= 0.5:
        return None
    ys, xs = np.nonzero(belief.cells >= best - 1e-12)
    pts = np.stack(
        [
            belief.origin[0] + (xs + 0.5) * belief.resolution,
            belief.origin[1] + (ys + 0.5) * belief.resolution,
        ],
        axis=1,
    )
    d = np.hypot(pts[:, 0] - origin[0], pts[:, 1] - origin[1])
    k = int(np.argmin(d))
    return pts[k], best
