"""Planar geometry primitives shared across the simulator."""
from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Normalize an angle to the interval (-pi, pi]."""
    a = math.fmod(a + math.pi, TWO_PI)
    if a <= 0.0:
        a += TWO_PI
    return a - math.pi


def bearing(origin, target) -> float:
    """Absolute bearing of ``target`` seen from ``origin``."""
    return math.atan2(target[1] - origin[1], target[0] - origin[0])


def polygon_edges(poly: np.ndarray) -> np.ndarray:
    """Closed edge list of shape (k, 4) with rows [x1, y1, x2, y2]."""
    poly = np.asarray(poly, dtype=float)
    nxt = np.roll(poly, -1, axis=0)
    return np.hstack([poly, nxt])


def polygon_centroid(poly: np.ndarray) -> np.ndarray:
    """Area centroid (shoelace); vertex mean for degenerate rings."""
    poly = np.asarray(poly, dtype=float)
    x, y = poly[:, 0], poly[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = cross.sum() / 2.0
    if abs(area) < 1e-12:
        return poly.mean(axis=0)
    cx = float(((x + xn) * cross).sum() / (6.0 * area))
    cy = float(((y + yn) * cross).sum() / (6.0 * area))
    return np.array([cx, cy])


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def point_on_segment(p, a, b, eps: float = 1e-9) -> bool:
    """True when p lies on segment a-b within eps (perpendicular distance)."""
    ax, ay = a
    bx, by = b
    px, py = p
    abx, aby = bx - ax, by - ay
    apx, apy = px - ax, py - ay
    L2 = abx * abx + aby * aby
    if L2 < eps * eps:
        return math.hypot(apx, apy) <= eps
    t = (apx * abx + apy * aby) / L2
    if t < -eps or t > 1.0 + eps:
        return False
    qx, qy = ax + t * abx, ay + t * aby
    return math.hypot(px - qx, py - qy) <= eps


def point_in_polygon(p, poly: np.ndarray, eps: float = 1e-9) -> bool:
    """Point containment, inclusive of the boundary."""
    poly = np.asarray(poly, dtype=float)
    k = len(poly)
    px, py = float(p[0]), float(p[1])
    for i in range(k):
        if point_on_segment((px, py), poly[i], poly[(i + 1) % k], eps):
            return True
    inside = False
    j = k - 1
    for i in range(k):
        xi, yi = poly[i]
        xj, yj = poly[j]
        if (yi > py) != (yj > py):
            x_at = xi + (py - yi) * (xj - xi) / (yj - yi)
            if px < x_at:
                inside = not inside
        j = i
    return inside


def segments_intersect(p1, p2, p3, p4, eps: float = 1e-12) -> bool:
    """Inclusive segment intersection test (touching counts)."""
    d1 = _orient(p3[0], p3[1], p4[0], p4[1], p1[0], p1[1])
    d2 = _orient(p3[0], p3[1], p4[0], p4[1], p2[0], p2[1])
    d3 = _orient(p1[0], p1[1], p2[0], p2[1], p3[0], p3[1])
    d4 = _orient(p1[0], p1[1], p2[0], p2[1], p4[0], p4[1])
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and (
        (d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)
    ):
        return True
    if abs(d1) <= eps and point_on_segment(p1, p3, p4):
        return True
    if abs(d2) <= eps and point_on_segment(p2, p3, p4):
        return True
    if abs(d3) <= eps and point_on_segment(p3, p1, p2):
        return True
    if abs(d4) <= eps and point_on_segment(p4, p1, p2):
        return True
    return False


def segment_hits_edges(p, q, edges: np.ndarray, eps: float = 1e-12) -> bool:
    """Vectorized test: does segment p-q touch any edge in (m, 4) ``edges``?"""
    if len(edges) == 0:
        return False
    px, py = float(p[0]), float(p[1])
    qx, qy = float(q[0]), float(q[1])
    ax, ay, bx, by = edges[:, 0], edges[:, 1], edges[:, 2], edges[:, 3]
    d1 = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    d2 = (bx - ax) * (qy - ay) - (by - ay) * (qx - ax)
    d3 = (qx - px) * (ay - py) - (qy - py) * (ax - px)
    d4 = (qx - px) * (by - py) - (qy - py) * (bx - px)
    proper = ((d1 > eps) & (d2 < -eps) | (d1 < -eps) & (d2 > eps)) & (
        (d3 > eps) & (d4 < -eps) | (d3 < -eps) & (d4 > eps)
    )
    if bool(proper.any()):
        return True
    # collinear / endpoint touches: rare, fall back to the scalar test
    sus = (np.abs(d1) <= eps) | (np.abs(d2) <= eps) | (np.abs(d3) <= eps) | (np.abs(d4) <= eps)
    for i in np.nonzero(sus)[0]:
        a = (edges[i, 0], edges[i, 1])
        b = (edges[i, 2], edges[i, 3])
        if segments_intersect((px, py), (qx, qy), a, b):
            return True
    return False


def min_distance_to_edges(p, edges: np.ndarray) -> float:
    """Smallest distance from point p to any segment in (m, 4) ``edges``."""
    if len(edges) == 0:
        return math.inf
    px, py = float(p[0]), float(p[1])
    ax, ay, bx, by = edges[:, 0], edges[:, 1], edges[:, 2], edges[:, 3]
    abx, aby = bx - ax, by - ay
    L2 = abx * abx + aby * aby
    t = np.clip(((px - ax) * abx + (py - ay) * aby) / np.maximum(L2, 1e-18), 0.0, 1.0)
    qx = ax + t * abx
    qy = ay + t * aby
    return float(np.hypot(px - qx, py - qy).min())


def polygon_is_simple(poly: np.ndarray) -> bool:
    """True when no two non-adjacent edges intersect."""
    poly = np.asarray(poly, dtype=float)
    k = len(poly)
    if k < 3:
        return False
    for i in range(k):
        a1, a2 = poly[i], poly[(i + 1) % k]
        for j in range(i + 1, k):
            if j == i or (j + 1) % k == i or (i + 1) % k == j:
                continue
            b1, b2 = poly[j], poly[(j + 1) % k]
            if segments_intersect(a1, a2, b1, b2):
                return False
    return True
