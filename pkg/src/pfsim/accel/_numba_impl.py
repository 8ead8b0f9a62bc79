"""Numba-compiled backend: jit wrappers over the single-source loop kernels."""
from numba import njit

from . import _loops

raycast_ranges = njit(cache=True)(_loops.raycast_ranges)
supercover_cells = njit(cache=True)(_loops.supercover_cells)
apply_scan = njit(cache=True)(_loops.apply_scan)
visibility_mask = njit(cache=True)(_loops.visibility_mask)
frontier_field = njit(cache=True)(_loops.frontier_field)
smo_solve = njit(cache=True)(_loops.smo_solve)
