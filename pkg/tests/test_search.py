import numpy as np
import pytest

from conftest import grid_from_array
from pfsim.search import (
    DistanceHistory,
    InsufficientHistoryError,
    SearchParams,
    cluster_frontiers,
    extract_frontiers,
    heading_waypoint,
    map_entropy,
    utility,
    waypoint_search,
)
from pfsim.world import NoRegionError, Pose, Region, RegionGraph


def frontier_oracle(cells, free_max=0.35, occ_min=0.65):
    """Brute force: free cells with at least one unknown 8-neighbor."""
    h, w = cells.shape
    out = set()
    for iy in range(h):
        for ix in range(w):
            if cells[iy, ix] >= free_max:
                continue
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    if dx == 0 and dy == 0:
                        continue
                    jx, jy = ix + dx, iy + dy
                    if 0 <= jx < w and 0 <= jy < h and free_max <= cells[jy, jx] <= occ_min:
                        out.add((ix, iy))
    return out


def random_separated_map(rng, size=16):
    """Free field with an unknown blob and obstacle cells kept >= 2 cells
    of gap away from any unknown cell."""
    cells = rng.uniform(0.03, 0.15, (size, size))
    # unknown blob: random rectangle
    x0, y0 = rng.integers(0, size - 4, 2)
    wdt, hgt = rng.integers(2, 6, 2)
    cells[y0 : y0 + hgt, x0 : x0 + wdt] = 0.5
    unknown = cells == 0.5
    # sprinkle obstacles where the 2-cell gap to unknowns holds
    for _ in range(rng.integers(2, 12)):
        ox, oy = rng.integers(0, size, 2)
        neighborhood = unknown[
            max(0, oy - 3) : oy + 4, max(0, ox - 3) : ox + 4
        ]
        if not neighborhood.any():
            cells[oy, ox] = rng.uniform(0.75, 0.97)
    return cells


class TestMapEntropy:
    def test_uniform_half_cells(self):
        g = grid_from_array(np.full((2, 2), 0.5))
        assert map_entropy(g) == pytest.approx(2.0)

    def test_certain_cells_contribute_zero(self):
        g = grid_from_array(np.ones((3, 3)))
        assert map_entropy(g) == 0.0

    def test_zero_cells_use_limit_convention(self):
        g = grid_from_array(np.zeros((3, 3)))
        assert map_entropy(g) == 0.0

    def test_hit_updates_decrease_entropy_monotonically(self):
        # the occupancy-weighted form -m log m falls monotonically on the
        # occupied side (m > 1/e), so hit sequences shrink map entropy
        base = np.full((4, 4), 0.5)
        h_prev = map_entropy(grid_from_array(base.copy()))
        for p in (0.7, 0.8, 0.9, 0.97):
            base[2, 2] = p
            h = map_entropy(grid_from_array(base.copy()))
            assert h < h_prev
            h_prev = h

    def test_free_clamp_below_prior_entropy(self):
        # the free side passes the 1/e maximum of -m log m on its way
        # down, but the clamp ends below the unknown prior's entropy
        base = np.full((4, 4), 0.5)
        h0 = map_entropy(grid_from_array(base.copy()))
        base[2, 2] = 0.03
        assert map_entropy(grid_from_array(base.copy())) < h0


class TestExtractFrontiers:
    def test_fully_known_free_map(self):
        g = grid_from_array(np.full((8, 8), 0.1))
        assert extract_frontiers(g) == []

    def test_half_free_half_unknown(self):
        cells = np.full((4, 4), 0.5)
        cells[:, :2] = 0.1
        g = grid_from_array(cells)
        got = set(extract_frontiers(g))
        assert got == {(1, 0), (1, 1), (1, 2), (1, 3)}

    def test_free_cell_ringed_by_obstacles_not_frontier(self):
        cells = np.full((5, 5), 0.9)
        cells[2, 2] = 0.1
        g = grid_from_array(cells)
        assert extract_frontiers(g) == []

    def test_matches_oracle_on_random_separated_maps(self):
        rng = np.random.default_rng(7)
        for trial in range(25):
            cells = random_separated_map(rng)
            g = grid_from_array(cells)
            got = set(extract_frontiers(g, beta=1.0))
            want = frontier_oracle(cells)
            assert got == want, f"trial {trial}"


class TestClusterFrontiers:
    def test_two_components(self):
        cells = [(0, 0), (1, 0), (0, 1), (5, 5), (6, 5), (6, 6)]
        g = grid_from_array(np.full((10, 10), 0.1))
        out = cluster_frontiers(cells, min_size=2, grid=g)
        assert len(out) == 2

    def test_small_components_discarded(self):
        cells = [(0, 0), (1, 1), (5, 5), (5, 6), (5, 7)]
        g = grid_from_array(np.full((10, 10), 0.1))
        out = cluster_frontiers(cells, min_size=3, grid=g)
        assert len(out) == 1
        assert set(out[0].cells) == {(5, 5), (5, 6), (5, 7)}

    def test_unknown_count_by_hand(self):
        # 6x6 drawn by hand: 3-cell component at column 1, five unknown
        # cells within radius 2, one outside
        cells = np.full((6, 6), 0.1)
        unknown_at = [(3, 1), (3, 2), (3, 3), (2, 1), (2, 3)]
        for ix, iy in unknown_at:
            cells[iy, ix] = 0.5
        cells[5, 5] = 0.5  # farther than radius 2 from the component
        g = grid_from_array(cells)
        comp = [(1, 1), (1, 2), (1, 3)]
        out = cluster_frontiers(comp, min_size=3, grid=g, r_unknown=2.0)
        assert out[0].unknown_count == 5

    def test_representative_closest_to_waypoint(self):
        g = grid_from_array(np.full((10, 10), 0.1))
        comp = [(2, 2), (3, 2), (4, 2)]
        out = cluster_frontiers(comp, 3, g, waypoint=np.array([0.0, 0.0]))
        assert np.allclose(out[0].representative, g.cell_center(2, 2))


class TestUtility:
    def test_arithmetic(self):
        # alpha*N - (d(x,c) + d(c,l*)) with d = 3 and 2
        assert utility((3.0, 0.0), (0.0, 0.0), (3.0, 2.0), 10, 1.0) == pytest.approx(5.0)

    def test_degenerate_zero(self):
        p = (1.0, 1.0)
        assert utility(p, p, p, 0, 1.0) == 0.0

    def test_monotone_in_unknown_count(self):
        u1 = utility((1.0, 0.0), (0.0, 0.0), (2.0, 0.0), 10, 0.5)
        u2 = utility((1.0, 0.0), (0.0, 0.0), (2.0, 0.0), 2, 0.5)
        assert u1 > u2

    def test_rejects_negative_alpha(self):
        with pytest.raises(ValueError):
            utility((0, 0), (0, 0), (0, 0), 1, -0.1)


def two_region_graph():
    a = np.array([[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]])
    b = np.array([[4.0, 0.0], [8.0, 0.0], [8.0, 4.0], [4.0, 4.0]])
    c = np.array([[0.0, 4.0], [8.0, 4.0], [8.0, 8.0], [0.0, 8.0]])
    return RegionGraph(
        regions=[Region(1, "a", a), Region(2, "b", b), Region(3, "c", c)],
        adjacency={(1, 2), (1, 3), (2, 3)},
    )


class TestHeadingWaypoint:
    def test_straight_approach_wins(self):
        graph = two_region_graph()
        hist = DistanceHistory(window=2.0)
        # robot inside region 1 moving straight toward region 2's centroid
        for k in range(11):
            hist.push(k * 0.2, np.array([1.0 + 0.25 * k * 0.2, 2.0]))
        l_star = heading_waypoint(Pose(1.55, 2.0), graph, hist, t_min=1.0)
        assert np.allclose(l_star, [6.0, 2.0])  # centroid of region 2

    def test_stationary_ties_to_lowest_id(self):
        graph = two_region_graph()
        hist = DistanceHistory(window=2.0)
        for k in range(11):
            hist.push(k * 0.2, np.array([3.0, 3.0]))
        l_star = heading_waypoint(Pose(3.0, 3.0), graph, hist, t_min=1.0)
        assert np.allclose(l_star, [6.0, 2.0])  # region 2: lowest neighbor id

    def test_insufficient_history(self):
        graph = two_region_graph()
        hist = DistanceHistory(window=2.0)
        hist.push(0.0, np.array([1.0, 1.0]))
        with pytest.raises(InsufficientHistoryError):
            heading_waypoint(Pose(1.0, 1.0), graph, hist, t_min=1.0)


class TestWaypointSearch:
    def build(self):
        graph = two_region_graph()
        cells = np.full((80, 80), 0.5)
        cells[:40, :40] = 0.1  # region 1 explored
        grid = grid_from_array(cells)
        hist = DistanceHistory(window=2.0)
        for k in range(11):
            hist.push(k * 0.2, np.array([1.0 + 0.25 * k * 0.2, 2.0]))
        return graph, grid, hist

    def test_picks_utility_maximizing_cluster(self):
        graph, grid, hist = self.build()
        params = SearchParams()
        goal = waypoint_search(Pose(1.55, 2.0), graph, grid, hist, params)
        # oracle: recompute over clusters explicitly
        from pfsim.search import cluster_frontiers, extract_frontiers, utility as U

        l_star = heading_waypoint(Pose(1.55, 2.0), graph, hist, params.t_min)
        cl = cluster_frontiers(
            extract_frontiers(grid, params.beta, params.f_thresh),
            params.min_cluster, grid, params.r_unknown, waypoint=l_star,
        )
        best = max(
            cl, key=lambda c: U(c.representative, (1.55, 2.0), l_star, c.unknown_count, params.alpha)
        )
        assert np.allclose(goal, best.representative)

    def test_no_frontiers_returns_heading_waypoint(self):
        graph = two_region_graph()
        grid = grid_from_array(np.full((80, 80), 0.1))
        hist = DistanceHistory(window=2.0)
        for k in range(11):
            hist.push(k * 0.2, np.array([1.0 + 0.25 * k * 0.2, 2.0]))
        goal = waypoint_search(Pose(1.55, 2.0), graph, grid, hist)
        assert np.allclose(goal, [6.0, 2.0])

    def test_deterministic(self):
        graph, grid, hist = self.build()
        a = waypoint_search(Pose(1.55, 2.0), graph, grid, hist)
        b = waypoint_search(Pose(1.55, 2.0), graph, grid, hist)
        assert np.array_equal(a, b)

    def test_outside_regions_raises(self):
        graph, grid, hist = self.build()
        with pytest.raises(NoRegionError):
            waypoint_search(Pose(20.0, 20.0), graph, grid, hist)


class TestDistanceHistory:
    def test_window_pruning(self):
        h = DistanceHistory(window=1.0)
        for k in range(30):
            h.push(k * 0.1, np.array([k * 0.1, 0.0]))
        assert h.span() <= 1.0 + 1e-9

    def test_strictly_increasing_required(self):
        h = DistanceHistory(window=1.0)
        h.push(0.0, np.zeros(2))
        with pytest.raises(ValueError):
            h.push(0.0, np.zeros(2))
