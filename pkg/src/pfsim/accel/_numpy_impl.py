"""Pure numpy backend.

Vectorized where the kernel vectorizes cleanly (raycasting, frontier
field); grid traversals are inherently sequential and run as the plain
Python loops from _loops.
"""
import numpy as np

from ._loops import apply_scan, smo_solve, supercover_cells, visibility_mask  # noqa: F401


def raycast_ranges(ox, oy, angles, segs, max_range):
    """Vectorized beam x edge intersection; same math as the loop kernel."""
    n = angles.shape[0]
    if segs.shape[0] == 0:
        return np.full(n, max_range, np.float64)
    dx = np.cos(angles)[:, None]
    dy = np.sin(angles)[:, None]
    ex = (segs[:, 2] - segs[:, 0])[None, :]
    ey = (segs[:, 3] - segs[:, 1])[None, :]
    rx = (segs[:, 0] - ox)[None, :]
    ry = (segs[:, 1] - oy)[None, :]
    det = ex * dy - ey * dx
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (ex * ry - ey * rx) / det
        s = (dx * ry - dy * rx) / det
    ok = (np.abs(det) >= 1e-12) & (t > 1e-9) & (s >= -1e-12) & (s <= 1.0 + 1e-12)
    t = np.where(ok, t, np.inf)
    return np.minimum(t.min(axis=1), max_range)


def frontier_field(cells, beta, occ_thresh):
    """Vectorized boundary-score field; matches the loop kernel exactly."""
    lam = cells
    lam_o = np.where(cells > occ_thresh, cells, 0.0)
    pad = np.pad(lam, 1, mode="edge")
    pad_o = np.pad(lam_o, 1, mode="edge")
    h, w = cells.shape
    dmax = np.zeros((h, w), np.float64)
    domax = np.zeros((h, w), np.float64)
    for oy in (-1, 0, 1):
        for ox in (-1, 0, 1):
            if ox == 0 and oy == 0:
                continue
            shifted = pad[1 + oy : 1 + oy + h, 1 + ox : 1 + ox + w]
            np.maximum(dmax, np.abs(shifted - lam), out=dmax)
            shifted_o = pad_o[1 + oy : 1 + oy + h, 1 + ox : 1 + ox + w]
            np.maximum(domax, np.abs(shifted_o - lam_o), out=domax)
    return dmax - beta * (domax + np.maximum(lam_o - 0.5, 0.0))
