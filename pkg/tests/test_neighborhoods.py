import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from scone import (
    MultiViewDataset,
    SampleSet,
    SconeParams,
    UsageError,
    Variant,
    binary_embedding,
    compute_radii,
    consistent_membership,
    knn_among_samples,
    spherical_membership,
    voronoi_membership,
)

TRIANGLE = np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]])

finite_floats = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def point_sets(min_points=2, max_points=12, max_dim=4):
    return hnp.arrays(
        np.float64,
        st.tuples(st.integers(min_points, max_points), st.integers(1, max_dim)),
        elements=finite_floats,
    )


class TestRadii:
    def test_right_triangle(self):
        assert np.allclose(compute_radii(TRIANGLE), [3.0, 3.0, 4.0])

    def test_coincident_points_have_zero_radius(self):
        assert np.array_equal(compute_radii(np.array([[1.0, 1.0], [1.0, 1.0]])), [0.0, 0.0])

    def test_grid_matches_brute_force(self):
        # independent oracle: pairwise loop over all point pairs
        xs, ys = np.meshgrid(np.arange(4.0), np.arange(4.0))
        grid = np.column_stack([xs.ravel(), ys.ravel()])
        expected = []
        for i, p in enumerate(grid):
            expected.append(
                min(math.dist(p, q) for j, q in enumerate(grid) if j != i)
            )
        radii = compute_radii(grid)
        assert np.allclose(radii, expected)
        assert np.all(radii == 1.0)  # unit grid spacing

    def test_needs_two_samples(self):
        with pytest.raises(UsageError) as err:
            compute_radii(np.array([[0.0, 0.0]]))
        assert err.value.code == "FEWER_THAN_TWO_SAMPLES"

    @given(point_sets(), st.randoms(use_true_random=False))
    def test_permutation_equivariance(self, pts, rnd):
        perm = list(range(pts.shape[0]))
        rnd.shuffle(perm)
        base = compute_radii(pts)
        assert np.array_equal(compute_radii(pts[perm]), base[perm])

    @given(point_sets(), hnp.arrays(np.float64, 4, elements=st.floats(-100, 100)))
    def test_translation_invariance(self, pts, shift):
        shifted = pts + shift[: pts.shape[1]]
        assert np.allclose(compute_radii(shifted), compute_radii(pts), atol=1e-9)


class TestKnnAmongSamples:
    def test_two_nearest(self):
        assert set(knn_among_samples(np.array([1.0, 0.0]), TRIANGLE, 2)) == {0, 1}

    def test_exact_sample_is_its_own_nearest(self):
        assert knn_among_samples(TRIANGLE[2], TRIANGLE, 1)[0] == 2

    def test_distance_tie_prefers_lower_index(self):
        x = np.array([1.5, 0.0])  # equidistant from samples 0 and 1
        assert knn_among_samples(x, TRIANGLE, 1)[0] == 0

    def test_k_bounds(self):
        with pytest.raises(UsageError) as err:
            knn_among_samples(np.zeros(2), TRIANGLE, 4)
        assert err.value.code == "K_EXCEEDS_PSI"
        with pytest.raises(UsageError):
            knn_among_samples(np.zeros(2), TRIANGLE, 0)


class TestSphericalMembership:
    radii = compute_radii(TRIANGLE)

    def test_inside_radius_and_nearest(self):
        assert spherical_membership(np.array([1.0, 0.0]), 0, TRIANGLE, self.radii, 1) == 1

    def test_inside_radius_but_not_nearest(self):
        # distance 2 <= radius 3, but sample 1 is not the 1-NN of x
        assert spherical_membership(np.array([1.0, 0.0]), 1, TRIANGLE, self.radii, 1) == 0

    def test_far_point_is_outside_every_sphere(self):
        x = np.array([100.0, 100.0])
        assert all(
            spherical_membership(x, i, TRIANGLE, self.radii, 3) == 0 for i in range(3)
        )

    def test_boundary_is_inclusive(self):
        samples = np.array([[0.0], [4.0]])
        radii = compute_radii(samples)  # both 4.0
        assert spherical_membership(np.array([4.0]), 0, samples, radii, 2) == 1

    @given(point_sets(max_dim=3), st.integers(1, 12), st.data())
    def test_row_sum_is_at_most_k(self, pts, k, data):
        k = min(k, pts.shape[0])
        x = np.asarray(
            data.draw(hnp.arrays(np.float64, pts.shape[1], elements=finite_floats))
        )
        radii = compute_radii(pts)
        total = sum(
            spherical_membership(x, i, pts, radii, k) for i in range(pts.shape[0])
        )
        assert total <= k


class TestVoronoiMembership:
    def test_nearest_cell_wins(self):
        samples = np.array([[0.0, 0.0], [3.0, 0.0]])
        assert voronoi_membership(np.array([1.0, 0.0]), 0, samples) == 1
        assert voronoi_membership(np.array([1.0, 0.0]), 1, samples) == 0

    def test_cells_cover_all_space(self):
        samples = np.array([[0.0, 0.0], [3.0, 0.0]])
        assert voronoi_membership(np.array([100.0, 100.0]), 1, samples) == 1

    def test_midpoint_tie_prefers_lower_index(self):
        samples = np.array([[0.0, 0.0], [3.0, 0.0]])
        assert voronoi_membership(np.array([1.5, 0.0]), 0, samples) == 1
        assert voronoi_membership(np.array([1.5, 0.0]), 1, samples) == 0

    @given(point_sets(min_points=1, max_dim=3), st.data())
    def test_row_sum_is_exactly_one(self, pts, data):
        x = np.asarray(
            data.draw(hnp.arrays(np.float64, pts.shape[1], elements=finite_floats))
        )
        total = sum(voronoi_membership(x, i, pts) for i in range(pts.shape[0]))
        assert total == 1


def _two_view_fixture():
    """Six instances in two views; instance 5 is near the first cluster in
    view 0 but near the second cluster in view 1."""
    view0 = np.array([[0.0, 0.0], [1.0, 0.0], [20.0, 0.0], [21.0, 0.0], [0.5, 0.5], [0.2, 0.1]])
    view1 = np.array([[0.0, 0.0], [1.0, 0.0], [20.0, 0.0], [21.0, 0.0], [0.5, 0.5], [20.5, 0.2]])
    ds = MultiViewDataset((view0, view1))
    indices = np.array([0, 2])
    radii = np.stack([compute_radii(view0[indices]), compute_radii(view1[indices])])
    return ds, SampleSet(indices, radii)


class TestConsistentMembership:
    def test_product_of_ones(self):
        ds, member = _two_view_fixture()
        params = SconeParams(2, 1, 1)
        # instance 4 is close to sample 0 in both views
        assert consistent_membership(ds, 4, member, 0, params) == 1

    def test_single_inconsistent_view_annihilates(self):
        ds, member = _two_view_fixture()
        params = SconeParams(2, 1, 1)
        # instance 5 belongs to sample 0's neighborhood in view 0 only
        assert consistent_membership(ds, 5, member, 0, params) == 0
        assert consistent_membership(ds, 5, member, 1, params) == 0

    def test_sampled_point_is_inside_its_own_neighborhood(self):
        ds, member = _two_view_fixture()
        params = SconeParams(2, 1, 1)
        assert consistent_membership(ds, 0, member, 0, params) == 1
        assert consistent_membership(ds, 2, member, 1, params) == 1

    def test_member_from_other_dataset_is_rejected(self):
        ds, _ = _two_view_fixture()
        bad = SampleSet(np.array([0, 99]), np.ones((2, 2)))
        with pytest.raises(Exception) as err:
            consistent_membership(ds, 0, bad, 0, SconeParams(2, 1, 1))
        assert err.value.code == "FINGERPRINT_MISMATCH"


class TestBinaryEmbedding:
    def test_far_instance_maps_to_origin(self):
        view0 = np.vstack([TRIANGLE, [100.0, 100.0]])
        view1 = np.vstack([TRIANGLE * 2, [-100.0, -100.0]])
        ds = MultiViewDataset((view0, view1))
        indices = np.array([0, 1, 2])
        radii = np.stack([compute_radii(view0[indices]), compute_radii(view1[indices])])
        member = SampleSet(indices, radii)
        emb = binary_embedding(ds, 3, member, SconeParams(3, 3, 1))
        assert not emb.bits.any()

    def test_consistent_instance_lights_one_column(self):
        ds, member = _two_view_fixture()
        emb = binary_embedding(ds, 4, member, SconeParams(2, 1, 1))
        assert np.array_equal(emb.bits, [[1, 0], [1, 0]])

    def test_cross_view_instance_lights_different_columns(self):
        ds, member = _two_view_fixture()
        emb = binary_embedding(ds, 5, member, SconeParams(2, 1, 1))
        assert np.array_equal(emb.bits, [[1, 0], [0, 1]])
        assert not np.logical_and.reduce(emb.bits, axis=0).any()

    @pytest.mark.parametrize("variant", list(Variant))
    def test_column_and_reproduces_membership(self, variant):
        rng = np.random.default_rng(5)
        views = tuple(rng.normal(size=(30, 2)) for _ in range(2))
        ds = MultiViewDataset(views)
        indices = np.array([3, 11, 17, 25])
        radii = np.stack([compute_radii(v[indices]) for v in views])
        member = SampleSet(indices, radii)
        params = SconeParams(4, 2, 1, variant=variant)
        for x in range(ds.n_instances):
            emb = binary_embedding(ds, x, member, params)
            for pos in range(4):
                assert emb.bits[:, pos].min() == consistent_membership(
                    ds, x, member, pos, params
                )

    @given(st.integers(0, 2**32 - 1), st.integers(1, 4))
    def test_rows_have_at_most_k_ones(self, seed, k):
        rng = np.random.default_rng(seed)
        views = tuple(rng.normal(size=(20, 3)) for _ in range(2))
        ds = MultiViewDataset(views)
        indices = rng.choice(20, size=6, replace=False)
        radii = np.stack([compute_radii(v[indices]) for v in views])
        member = SampleSet(indices, radii)
        emb = binary_embedding(ds, int(rng.integers(20)), member, SconeParams(6, k, 1))
        assert (emb.bits.sum(axis=1) <= k).all()
