"""Backend dispatch for the hot kernels.

Numba-compiled loops are the default. Set PFSIM_NUMBA=0 (or run without
numba installed) to select the pure numpy/Python fallback. The script
under benchmarks/ compares the two backends.
"""
import os


def _numba_wanted() -> bool:
    v = os.environ.get("PFSIM_NUMBA", "1").strip().lower()
    return v not in {"0", "false", "off", "no"}


BACKEND = "numpy"
if _numba_wanted():
    try:
        from ._numba_impl import (  # noqa: F401
            apply_scan,
            frontier_field,
            raycast_ranges,
            smo_solve,
            supercover_cells,
            visibility_mask,
        )

        BACKEND = "numba"
    except ImportError:
        pass

if BACKEND == "numpy":
    from ._numpy_impl import (  # noqa: F401
        apply_scan,
        frontier_field,
        raycast_ranges,
        smo_solve,
        supercover_cells,
        visibility_mask,
    )

__all__ = [
    "BACKEND",
    "apply_scan",
    "frontier_field",
    "raycast_ranges",
    "smo_solve",
    "supercover_cells",
    "visibility_mask",
]
