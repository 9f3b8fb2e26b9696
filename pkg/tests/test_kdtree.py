import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boundarycf import NearestIndex
from conftest import scan_nearest as linear_scan_nn


class TestConstruction:
    def test_rejects_empty(self):
        with pytest.raises(ValueError, match="zero points"):
            NearestIndex(np.empty((0, 2)))

    def test_rejects_non_matrix(self):
        with pytest.raises(ValueError, match="2-D"):
            NearestIndex(np.zeros(5))

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError, match="finite"):
            NearestIndex(np.array([[0.0, np.inf]]))

    def test_rejects_bad_leaf_size(self):
        with pytest.raises(ValueError, match="leaf_size"):
            NearestIndex(np.zeros((3, 2)), leaf_size=0)

    def test_points_are_read_only_copy(self):
        raw = np.zeros((3, 2))
        index = NearestIndex(raw)
        raw[0, 0] = 99.0
        assert index.points[0, 0] == 0.0
        with pytest.raises(ValueError):
            index.points[0, 0] = 1.0


class TestQueries:
    def test_single_point_always_wins(self):
        index = NearestIndex(np.array([[1.0, 2.0]]))
        for q in ([0.0, 0.0], [1.0, 2.0], [-50.0, 9.0]):
            idx, dist = index.query(np.array(q))
            assert idx == 0
            assert dist == pytest.approx(np.linalg.norm(np.array(q) - [1.0, 2.0]), abs=0)

    def test_exact_hit_returns_zero_distance(self):
        pts = np.random.default_rng(0).normal(size=(100, 4))
        index = NearestIndex(pts)
        idx, dist = index.query(pts[37])
        assert idx == 37
        assert dist == 0.0

    def test_duplicate_points_tie_to_lowest_index(self):
        pts = np.array([[5.0, 5.0], [1.0, 1.0], [1.0, 1.0], [1.0, 1.0]])
        index = NearestIndex(pts, leaf_size=1)
        idx, dist = index.query(np.array([1.1, 1.0]))
        assert idx == 1
        assert dist == pytest.approx(0.1)

    def test_equidistant_pair_ties_to_lowest_index(self):
        pts = np.array([[-1.0, 0.0], [1.0, 0.0]])
        idx, dist = NearestIndex(pts, leaf_size=1).query(np.array([0.0, 0.0]))
        assert idx == 0
        assert dist == 1.0

    def test_dimension_mismatch_rejected(self):
        index = NearestIndex(np.zeros((3, 2)))
        with pytest.raises(ValueError, match="features"):
            index.query(np.zeros(3))

    def test_query_many_matches_scalar_queries(self):
        rng = np.random.default_rng(1)
        pts = rng.normal(size=(500, 3))
        queries = rng.normal(size=(40, 3))
        index = NearestIndex(pts)
        many_i, many_d = index.query_many(queries)
        for row, (i, d) in zip(queries, zip(many_i, many_d)):
            si, sd = index.query(row)
            assert (si, sd) == (i, d)


class TestMatchesLinearScan:
    @pytest.mark.parametrize("leaf_size", [1, 4, 16])
    @pytest.mark.parametrize("n,d", [(1, 1), (17, 2), (257, 3), (1000, 5)])
    def test_random_clouds(self, n, d, leaf_size):
        rng = np.random.default_rng(n * 31 + d)
        pts = rng.normal(size=(n, d))
        index = NearestIndex(pts, leaf_size=leaf_size)
        for q in rng.normal(size=(50, d)):
            got = index.query(q)
            want = linear_scan_nn(pts, q)
            assert got == want

    def test_lattice_with_many_exact_ties(self):
        # integer lattice points and lattice queries force exact distance ties
        grid = np.stack(np.meshgrid(np.arange(6.0), np.arange(6.0)), -1).reshape(-1, 2)
        rng = np.random.default_rng(9)
        pts = grid[rng.permutation(len(grid))]
        index = NearestIndex(pts, leaf_size=2)
        for q in grid + 0.5:
            got = index.query(q)
            want = linear_scan_nn(pts, q)
            assert got == want

    def test_all_points_identical(self):
        pts = np.ones((20, 3)) * 4.0
        index = NearestIndex(pts, leaf_size=4)
        idx, dist = index.query(np.zeros(3))
        assert idx == 0
        assert dist == pytest.approx(np.sqrt(48.0))

    def test_one_spread_axis(self):
        # constant in all but one dimension; split axis choice must not matter
        rng = np.random.default_rng(3)
        pts = np.column_stack([np.zeros(100), rng.normal(size=100), np.zeros(100)])
        index = NearestIndex(pts, leaf_size=4)
        for q in rng.normal(size=(30, 3)):
            assert index.query(q) == linear_scan_nn(pts, q)

    @given(
        st.integers(min_value=0, max_value=2**32 - 1),
        st.integers(min_value=1, max_value=200),
        st.integers(min_value=1, max_value=4),
        st.sampled_from([1, 3, 16]),
        st.booleans(),
    )
    @settings(max_examples=60)
    def test_property_matches_oracle(self, seed, n, d, leaf_size, quantize):
        rng = np.random.default_rng(seed)
        pts = rng.normal(size=(n, d))
        if quantize:
            # coarse rounding manufactures duplicates and exact ties
            pts = np.round(pts)
        index = NearestIndex(pts, leaf_size=leaf_size)
        queries = rng.normal(size=(10, d))
        if quantize:
            queries = np.round(queries * 2) / 2
        for q in queries:
            assert index.query(q) == linear_scan_nn(pts, q)
