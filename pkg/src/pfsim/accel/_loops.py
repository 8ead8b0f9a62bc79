"""Loop kernels for the hot sensing and mapping paths.

Single source for both backends: the numba backend jit-compiles these
functions unchanged, the numpy backend runs them as plain Python (and
swaps in vectorized variants where one exists). Bodies are kept
self-contained -- no calls into other module functions -- so each stays
njit-compilable in isolation.
"""
import math

import numpy as np


def raycast_ranges(ox, oy, angles, segs, max_range):
    """Per-beam distance to the first segment hit, clipped to max_range.

    segs is an (m, 4) array of [x1, y1, x2, y2] wall edges.
    """
    n = angles.shape[0]
    m = segs.shape[0]
    out = np.empty(n, np.float64)
    for i in range(n):
        dx = math.cos(angles[i])
        dy = math.sin(angles[i])
        best = max_range
        for j in range(m):
            ex = segs[j, 2] - segs[j, 0]
            ey = segs[j, 3] - segs[j, 1]
            det = ex * dy - ey * dx
            if abs(det) < 1e-12:
                continue
            rx = segs[j, 0] - ox
            ry = segs[j, 1] - oy
            t = (ex * ry - ey * rx) / det
            s = (dx * ry - dy * rx) / det
            if t > 1e-9 and -1e-12 <= s <= 1.0 + 1e-12 and t < best:
                best = t
        out[i] = best
    return out


def supercover_cells(x0, y0, x1, y1, res, gx0, gy0, w, h):
    """All grid cells touched by segment (x0,y0)-(x1,y1), start cell first.

    Supercover traversal: crossing a cell corner exactly also yields the two
    cells sharing that corner. The walk stops at the segment end or when it
    leaves the grid (the start is assumed inside).
    """
    cap = 2 * (w + h) + 8
    out = np.empty((cap, 2), np.int64)
    ix = int(math.floor((x0 - gx0) / res))
    iy = int(math.floor((y0 - gy0) / res))
    ix1 = int(math.floor((x1 - gx0) / res))
    iy1 = int(math.floor((y1 - gy0) / res))
    dx = x1 - x0
    dy = y1 - y0
    stepx = 0
    stepy = 0
    tmaxx = math.inf
    tmaxy = math.inf
    tdx = math.inf
    tdy = math.inf
    if dx > 0.0:
        stepx = 1
        tmaxx = ((gx0 + (ix + 1) * res) - x0) / dx
        tdx = res / dx
    elif dx < 0.0:
        stepx = -1
        tmaxx = ((gx0 + ix * res) - x0) / dx
        tdx = -res / dx
    if dy > 0.0:
        stepy = 1
        tmaxy = ((gy0 + (iy + 1) * res) - y0) / dy
        tdy = res / dy
    elif dy < 0.0:
        stepy = -1
        tmaxy = ((gy0 + iy * res) - y0) / dy
        tdy = -res / dy
    n = 0
    while True:
        if 0 <= ix < w and 0 <= iy < h:
            out[n, 0] = ix
            out[n, 1] = iy
            n += 1
        else:
            break
        if ix == ix1 and iy == iy1:
            break
        if tmaxx >= 1.0 and tmaxy >= 1.0:
            break
        if stepx != 0 and stepy != 0 and abs(tmaxx - tmaxy) < 1e-12:
            jx = ix + stepx
            if 0 <= jx < w and 0 <= iy < h and n < cap:
                out[n, 0] = jx
                out[n, 1] = iy
                n += 1
            jy = iy + stepy
            if 0 <= ix < w and 0 <= jy < h and n < cap:
                out[n, 0] = ix
                out[n, 1] = jy
                n += 1
            ix += stepx
            iy += stepy
            tmaxx += tdx
            tmaxy += tdy
        elif tmaxx < tmaxy:
            ix += stepx
            tmaxx += tdx
        else:
            iy += stepy
            tmaxy += tdy
        if n > cap - 4:
            break
    return out[:n]


def apply_scan(cells, ox, oy, end_x, end_y, is_hit, res, gx0, gy0,
               p_free, p_occ, p_min, p_max):
    """In-place occupancy posterior update for one scan.

    Each beam free-updates every cell it traverses; a hit beam then
    occupancy-updates the cell half a cell past its endpoint along the
    beam, so a return from a surface registers inside the surface rather
    than on the free side of the boundary. Posteriors follow the binary
    Bayes rule p' = pz*p / (pz*p + (1-pz)*(1-p)), clamped.
    """
    h = cells.shape[0]
    w = cells.shape[1]
    nb = end_x.shape[0]
    for b in range(nb):
        x1 = end_x[b]
        y1 = end_y[b]
        ex1 = int(math.floor((x1 - gx0) / res))
        ey1 = int(math.floor((y1 - gy0) / res))
        ix = int(math.floor((ox - gx0) / res))
        iy = int(math.floor((oy - gy0) / res))
        dx = x1 - ox
        dy = y1 - oy
        stepx = 0
        stepy = 0
        tmaxx = math.inf
        tmaxy = math.inf
        tdx = math.inf
        tdy = math.inf
        if dx > 0.0:
            stepx = 1
            tmaxx = ((gx0 + (ix + 1) * res) - ox) / dx
            tdx = res / dx
        elif dx < 0.0:
            stepx = -1
            tmaxx = ((gx0 + ix * res) - ox) / dx
            tdx = -res / dx
        if dy > 0.0:
            stepy = 1
            tmaxy = ((gy0 + (iy + 1) * res) - oy) / dy
            tdy = res / dy
        elif dy < 0.0:
            stepy = -1
            tmaxy = ((gy0 + iy * res) - oy) / dy
            tdy = -res / dy
        guard = 2 * (w + h) + 8
        steps = 0
        while steps < guard:
            steps += 1
            inside = 0 <= ix < w and 0 <= iy < h
            if not inside:
                break
            at_end = ix == ex1 and iy == ey1
            if not (at_end and is_hit[b]):
                # the boundary cell of a hit beam is left to the hit model
                p = cells[iy, ix]
                num = p_free * p
                post = num / (num + (1.0 - p_free) * (1.0 - p))
                if post < p_min:
                    post = p_min
                elif post > p_max:
                    post = p_max
                cells[iy, ix] = post
            if at_end:
                break
            if tmaxx >= 1.0 and tmaxy >= 1.0:
                break
            if stepx != 0 and stepy != 0 and abs(tmaxx - tmaxy) < 1e-12:
                jx = ix + stepx
                if 0 <= jx < w and 0 <= iy < h and not (jx == ex1 and iy == ey1):
                    p = cells[iy, jx]
                    num = p_free * p
                    post = num / (num + (1.0 - p_free) * (1.0 - p))
                    if post < p_min:
                        post = p_min
                    elif post > p_max:
                        post = p_max
                    cells[iy, jx] = post
                jy = iy + stepy
                if 0 <= ix < w and 0 <= jy < h and not (ix == ex1 and jy == ey1):
                    p = cells[jy, ix]
                    num = p_free * p
                    post = num / (num + (1.0 - p_free) * (1.0 - p))
                    if post < p_min:
                        post = p_min
                    elif post > p_max:
                        post = p_max
                    cells[jy, ix] = post
                ix += stepx
                iy += stepy
                tmaxx += tdx
                tmaxy += tdy
            elif tmaxx < tmaxy:
                ix += stepx
                tmaxx += tdx
            else:
                iy += stepy
                tmaxy += tdy
        if is_hit[b]:
            norm = math.hypot(dx, dy)
            if norm > 1e-12:
                # seat the return inside the surface: whichever of the two
                # push depths lands in the solid body (cell-boundary
                # alignment decides), that cell accumulates hit evidence
                px_prev = -1
                py_prev = -1
                for depth in (0.5, 1.5):
                    hx = int(math.floor((x1 + depth * res * dx / norm - gx0) / res))
                    hy = int(math.floor((y1 + depth * res * dy / norm - gy0) / res))
                    if hx == px_prev and hy == py_prev:
                        continue
                    px_prev = hx
                    py_prev = hy
                    if 0 <= hx < w and 0 <= hy < h:
                        p = cells[hy, hx]
                        num = p_occ * p
                        post = num / (num + (1.0 - p_occ) * (1.0 - p))
                        if post < p_min:
                            post = p_min
                        elif post > p_max:
                            post = p_max
                        cells[hy, hx] = post


def visibility_mask(cells, ox, oy, direction, half_angle, max_range, tau,
                    res, gx0, gy0, n_rays):
    """Cells observable from (ox, oy) inside an angular wedge.

    Rays march through the grid; a cell with occupancy above tau is marked
    visible (the obstacle surface is observed) and blocks the rest of the
    ray.
    """
    h = cells.shape[0]
    w = cells.shape[1]
    mask = np.zeros((h, w), np.uint8)
    if n_rays < 2:
        n_rays = 2
    for r in range(n_rays):
        ang = direction - half_angle + (2.0 * half_angle) * r / (n_rays - 1)
        x1 = ox + max_range * math.cos(ang)
        y1 = oy + max_range * math.sin(ang)
        ix = int(math.floor((ox - gx0) / res))
        iy = int(math.floor((oy - gy0) / res))
        ix1 = int(math.floor((x1 - gx0) / res))
        iy1 = int(math.floor((y1 - gy0) / res))
        dx = x1 - ox
        dy = y1 - oy
        stepx = 0
        stepy = 0
        tmaxx = math.inf
        tmaxy = math.inf
        tdx = math.inf
        tdy = math.inf
        if dx > 0.0:
            stepx = 1
            tmaxx = ((gx0 + (ix + 1) * res) - ox) / dx
            tdx = res / dx
        elif dx < 0.0:
            stepx = -1
            tmaxx = ((gx0 + ix * res) - ox) / dx
            tdx = -res / dx
        if dy > 0.0:
            stepy = 1
            tmaxy = ((gy0 + (iy + 1) * res) - oy) / dy
            tdy = res / dy
        elif dy < 0.0:
            stepy = -1
            tmaxy = ((gy0 + iy * res) - oy) / dy
            tdy = -res / dy
        guard = 2 * (w + h) + 8
        steps = 0
        while steps < guard:
            steps += 1
            if not (0 <= ix < w and 0 <= iy < h):
                break
            mask[iy, ix] = 1
            if cells[iy, ix] > tau:
                break
            if ix == ix1 and iy == iy1:
                break
            if tmaxx >= 1.0 and tmaxy >= 1.0:
                break
            if tmaxx < tmaxy:
                ix += stepx
                tmaxx += tdx
            else:
                iy += stepy
                tmaxy += tdy
    return mask


def smo_solve(K, y, U, eps, tol, max_iter):
    """Pairwise coordinate descent on the epsilon-SVR dual.

    Working set: first index by maximal KKT violation, partner by maximal
    analytic objective decrease. Returns (alpha, alpha_star, violation,
    iterations); violation <= tol signals convergence. Deterministic.
    """
    n = y.shape[0]
    alpha = np.zeros(n, np.float64)
    alpha_star = np.zeros(n, np.float64)
    kt = np.zeros(n, np.float64)
    it = 0
    viol = np.inf
    while it < max_iter:
        # scores: the bias value each movable coordinate demands
        best_up = -np.inf
        best_dn = np.inf
        i = -1
        i_side = 0
        for u in range(n):
            base = y[u] - kt[u]
            s_a = base - eps
            s_s = base + eps
            if alpha_star[u] > 1e-14 and s_s > best_up:
                best_up = s_s
                i = u
                i_side = 1
            if alpha[u] < U[u] - 1e-14 and s_a > best_up:
                best_up = s_a
                i = u
                i_side = 0
            if alpha[u] > 1e-14 and s_a < best_dn:
                best_dn = s_a
            if alpha_star[u] < U[u] - 1e-14 and s_s < best_dn:
                best_dn = s_s
        viol = best_up - best_dn
        if viol <= tol or i < 0:
            break
        # partner: maximal gain (diff^2 / eta) among down-movable coords
        j = -1
        j_side = 0
        best_gain = 0.0
        best_diff = 0.0
        for u in range(n):
            if u == i:
                continue
            base = y[u] - kt[u]
            eta = K[i, i] + K[u, u] - 2.0 * K[i, u]
            if eta < 1e-12:
                eta = 1e-12
            if alpha[u] > 1e-14:
                diff = best_up - (base - eps)
                if diff > 0.0:
                    gain = diff * diff / eta
                    if gain > best_gain:
                        best_gain = gain
                        best_diff = diff
                        j = u
                        j_side = 0
            if alpha_star[u] < U[u] - 1e-14:
                diff = best_up - (base + eps)
                if diff > 0.0:
                    gain = diff * diff / eta
                    if gain > best_gain:
                        best_gain = gain
                        best_diff = diff
                        j = u
                        j_side = 1
        if j < 0:
            break
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if eta < 1e-12:
            eta = 1e-12
        t_new = best_diff / eta
        hi_i = (U[i] - alpha[i]) if i_side == 0 else alpha_star[i]
        hi_j = alpha[j] if j_side == 0 else (U[j] - alpha_star[j])
        t_step = t_new
        if hi_i < t_step:
            t_step = hi_i
        if hi_j < t_step:
            t_step = hi_j
        if t_step <= 0.0:
            break
        if i_side == 0:
            alpha[i] += t_step
        else:
            alpha_star[i] -= t_step
        if j_side == 0:
            alpha[j] -= t_step
        else:
            alpha_star[j] += t_step
        for u in range(n):
            kt[u] += t_step * (K[u, i] - K[u, j])
        it += 1
    return alpha, alpha_star, viol, it


def frontier_field(cells, beta, occ_thresh):
    """Boundary-score field over the occupancy grid.

    Per cell: largest absolute probability jump to any 8-neighbor, minus
    beta times the same jump measured on the obstacle-only field plus the
    cell's own obstacle excess over the unknown prior. High scores mark
    known/unknown boundaries while obstacle boundaries cancel.
    """
    h = cells.shape[0]
    w = cells.shape[1]
    out = np.empty((h, w), np.float64)
    for iy in range(h):
        for ix in range(w):
            p = cells[iy, ix]
            po = p if p > occ_thresh else 0.0
            dmax = 0.0
            domax = 0.0
            for oy in range(-1, 2):
                for ox_ in range(-1, 2):
                    if ox_ == 0 and oy == 0:
                        continue
                    jx = ix + ox_
                    jy = iy + oy
                    if 0 <= jx < w and 0 <= jy < h:
                        q = cells[jy, jx]
                        d = abs(q - p)
                        if d > dmax:
                            dmax = d
                        qo = q if q > occ_thresh else 0.0
                        do = abs(qo - po)
                        if do > domax:
                            domax = do
            off = po - 0.5
            if off < 0.0:
                off = 0.0
            out[iy, ix] = dmax - beta * (domax + off)
    return out
