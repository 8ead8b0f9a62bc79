import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfsim import accel
from pfsim.accel import _numpy_impl
from pfsim.geometry import (
    min_distance_to_edges,
    point_in_polygon,
    polygon_centroid,
    polygon_is_simple,
    segments_intersect,
    wrap_angle,
)

try:
    from pfsim.accel import _numba_impl
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


class TestWrapAngle:
    @pytest.mark.parametrize(
        "raw,expected",
        [(0.0, 0.0), (math.pi, math.pi), (-math.pi, math.pi), (3 * math.pi, math.pi),
         (2 * math.pi, 0.0), (-0.5, -0.5)],
    )
    def test_reference_points(self, raw, expected):
        assert wrap_angle(raw) == pytest.approx(expected, abs=1e-12)

    @settings(deadline=None)
    @given(st.floats(-50.0, 50.0))
    def test_range_and_equivalence(self, a):
        w = wrap_angle(a)
        assert -math.pi < w <= math.pi
        assert math.cos(w) == pytest.approx(math.cos(a), abs=1e-9)
        assert math.sin(w) == pytest.approx(math.sin(a), abs=1e-9)


SQUARE = np.array([[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]])


class TestPolygons:
    def test_point_in_polygon_inclusive(self):
        assert point_in_polygon((1.0, 1.0), SQUARE)
        assert point_in_polygon((0.0, 1.0), SQUARE)   # edge
        assert point_in_polygon((2.0, 2.0), SQUARE)   # vertex
        assert not point_in_polygon((2.1, 1.0), SQUARE)

    def test_centroid(self):
        assert np.allclose(polygon_centroid(SQUARE), [1.0, 1.0])

    def test_simple_vs_bowtie(self):
        assert polygon_is_simple(SQUARE)
        bowtie = np.array([[0.0, 0.0], [2.0, 2.0], [2.0, 0.0], [0.0, 2.0]])
        assert not polygon_is_simple(bowtie)

    def test_segments_intersect_cases(self):
        assert segments_intersect((0, 0), (2, 2), (0, 2), (2, 0))
        assert segments_intersect((0, 0), (2, 0), (1, 0), (1, 1))  # T-touch
        assert not segments_intersect((0, 0), (1, 0), (0, 1), (1, 1))

    def test_min_distance_to_edges(self):
        edges = np.array([[0.0, 0.0, 2.0, 0.0]])
        assert min_distance_to_edges((1.0, 1.5), edges) == pytest.approx(1.5)
        assert min_distance_to_edges((3.0, 0.0), edges) == pytest.approx(1.0)


class TestSupercover:
    def sample_oracle(self, x0, y0, x1, y1, res, w, h):
        """Dense sampling: every cell containing a sample point must be
        in the supercover set. The terminal point is excluded: an endpoint
        exactly on a cell boundary touches the next cell with measure
        zero, which the traversal deliberately does not count."""
        pts = np.linspace(0, 1, 4001)[:-1]
        xs = x0 + pts * (x1 - x0)
        ys = y0 + pts * (y1 - y0)
        cells = set()
        for x, y in zip(xs, ys):
            ix = int(math.floor(x / res))
            iy = int(math.floor(y / res))
            if 0 <= ix < w and 0 <= iy < h:
                cells.add((ix, iy))
        return cells

    @settings(deadline=None, max_examples=60)
    @given(
        x0=st.floats(0.05, 1.95), y0=st.floats(0.05, 1.95),
        x1=st.floats(0.05, 1.95), y1=st.floats(0.05, 1.95),
    )
    def test_contains_all_sampled_cells(self, x0, y0, x1, y1):
        out = accel.supercover_cells(x0, y0, x1, y1, 0.1, 0.0, 0.0, 20, 20)
        got = {(int(a), int(b)) for a, b in out}
        want = self.sample_oracle(x0, y0, x1, y1, 0.1, 20, 20)
        assert want <= got

    def test_exact_corner_includes_both_side_cells(self):
        # diagonal through the shared corner of four cells
        out = accel.supercover_cells(0.05, 0.05, 0.25, 0.25, 0.1, 0.0, 0.0, 4, 4)
        got = {(int(a), int(b)) for a, b in out}
        assert {(0, 0), (1, 0), (0, 1), (1, 1)} <= got

    def test_start_cell_first(self):
        out = accel.supercover_cells(0.15, 0.15, 0.75, 0.15, 0.1, 0.0, 0.0, 10, 10)
        assert tuple(out[0]) == (1, 1)


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba backend unavailable")
class TestBackendEquivalence:
    def test_raycast_identical(self, rng):
        angles = rng.uniform(-math.pi, math.pi, 90)
        segs = rng.uniform(0.0, 10.0, (25, 4))
        a = _numpy_impl.raycast_ranges(5.0, 5.0, angles, segs, 8.0)
        b = _numba_impl.raycast_ranges(5.0, 5.0, angles, segs, 8.0)
        assert np.array_equal(a, b)

    def test_frontier_field_identical(self, rng):
        cells = rng.uniform(0.0, 1.0, (30, 30))
        a = _numpy_impl.frontier_field(cells, 1.0, 0.65)
        b = _numba_impl.frontier_field(cells, 1.0, 0.65)
        assert np.array_equal(a, b)

    def test_apply_scan_identical(self, rng):
        angles = np.linspace(-2.0, 2.0, 60)
        end_x = 5.0 + 4.0 * np.cos(angles)
        end_y = 5.0 + 4.0 * np.sin(angles)
        hit = rng.uniform(size=60) < 0.5
        a = np.full((100, 100), 0.5)
        b = a.copy()
        _numpy_impl.apply_scan(a, 5.0, 5.0, end_x, end_y, hit, 0.1, 0.0, 0.0,
                               0.3, 0.7, 0.03, 0.97)
        _numba_impl.apply_scan(b, 5.0, 5.0, end_x, end_y, hit, 0.1, 0.0, 0.0,
                               0.3, 0.7, 0.03, 0.97)
        assert np.array_equal(a, b)

    def test_smo_identical(self, rng):
        from pfsim.prediction import rbf_kernel

        x = np.sort(rng.uniform(-1, 1, 12))
        y = np.sin(2 * x) + 0.05 * rng.normal(size=12)
        K = rbf_kernel(x, x, 1.0)
        U = np.full(12, 100.0)
        outs = []
        for impl in (_numpy_impl, _numba_impl):
            a, s, viol, it = impl.smo_solve(K, y, U, 0.01, 1e-8, 100_000)
            outs.append((a.copy(), s.copy()))
        assert np.array_equal(outs[0][0], outs[1][0])
        assert np.array_equal(outs[0][1], outs[1][1])

    def test_visibility_mask_identical(self, rng):
        cells = np.full((60, 60), 0.1)
        cells[30, 10:50] = 0.9
        a = _numpy_impl.visibility_mask(cells, 3.0, 1.0, 1.2, 0.6, 5.0, 0.65,
                                        0.1, 0.0, 0.0, 80)
        b = _numba_impl.visibility_mask(cells, 3.0, 1.0, 1.2, 0.6, 5.0, 0.65,
                                        0.1, 0.0, 0.0, 80)
        assert np.array_equal(a, b)
