import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from scone import (
    DataError,
    Label,
    LabelVector,
    MultiViewDataset,
    SampleSet,
    SconeError,
    SconeParams,
    ScoreVector,
    UsageError,
    Variant,
    minmax_scale_views,
    validate_params,
)
from scone.core import EnsembleModel


def _dataset(n=100, dims=(2, 3), seed=0):
    rng = np.random.default_rng(seed)
    return MultiViewDataset(tuple(rng.normal(size=(n, d)) for d in dims))


class TestDatasetInvariants:
    def test_shape_properties(self):
        ds = _dataset(50, (2, 4, 1))
        assert ds.n_instances == 50
        assert ds.n_views == 3
        assert ds.view_dims == (2, 4, 1)

    def test_row_count_mismatch(self):
        with pytest.raises(DataError) as err:
            MultiViewDataset((np.zeros((3, 2)), np.zeros((4, 2))))
        assert err.value.code == "ROW_COUNT_MISMATCH"

    def test_rejects_non_finite(self):
        bad = np.zeros((3, 2))
        bad[1, 0] = np.nan
        with pytest.raises(DataError) as err:
            MultiViewDataset((bad,))
        assert err.value.code == "NON_FINITE_VALUE"

    def test_rejects_empty(self):
        with pytest.raises(DataError) as err:
            MultiViewDataset(())
        assert err.value.code == "EMPTY_DATASET"
        with pytest.raises(DataError) as err:
            MultiViewDataset((np.zeros((0, 2)),))
        assert err.value.code == "EMPTY_DATASET"

    def test_views_are_read_only(self):
        ds = _dataset()
        with pytest.raises(ValueError):
            ds.views[0][0, 0] = 1.0

    def test_fingerprint_tracks_content_and_shape(self):
        a = _dataset(seed=1)
        b = _dataset(seed=1)
        assert a.fingerprint() == b.fingerprint()
        view = np.array(a.views[0])
        view[0, 0] += 1.0
        changed = MultiViewDataset((view, a.views[1]))
        assert changed.fingerprint() != a.fingerprint()
        assert _dataset(n=101, seed=1).fingerprint() != a.fingerprint()


class TestParamValidation:
    def test_accepts_standard_setting(self):
        validate_params(SconeParams(8, 3, 200), _dataset(1000))

    def test_psi_of_one_rejected(self):
        with pytest.raises(UsageError) as err:
            validate_params(SconeParams(1, 1, 1), _dataset(100))
        assert err.value.code == "PSI_TOO_SMALL"

    def test_k_above_psi_rejected(self):
        with pytest.raises(UsageError) as err:
            validate_params(SconeParams(4, 5, 1), _dataset(100))
        assert err.value.code == "K_EXCEEDS_PSI"

    def test_psi_above_n_rejected(self):
        with pytest.raises(UsageError) as err:
            validate_params(SconeParams(101, 3, 1), _dataset(100))
        assert err.value.code == "PSI_EXCEEDS_N"

    @given(
        psi=st.integers(-2, 12),
        k=st.integers(-2, 12),
        t=st.integers(-2, 5),
        n=st.integers(1, 10),
    )
    def test_validation_is_total(self, psi, k, t, n):
        """Every parameter combination either validates or raises exactly
        one specific usage error."""
        params = SconeParams(psi, k, t)
        ds = MultiViewDataset((np.arange(n, dtype=float).reshape(n, 1),))
        try:
            validate_params(params, ds)
        except UsageError as err:
            assert err.code in {
                "PSI_TOO_SMALL",
                "PSI_EXCEEDS_N",
                "K_TOO_SMALL",
                "K_EXCEEDS_PSI",
                "T_TOO_SMALL",
            }
        else:
            assert 2 <= psi <= n and 1 <= k <= psi and t >= 1

    def test_one_nn_variant_pins_k(self):
        params = SconeParams(8, 5, 10, variant=Variant.SPHERICAL_1NN)
        assert params.effective_k == 1
        assert SconeParams(8, 5, 10).effective_k == 5

    def test_variant_coerces_from_string(self):
        assert SconeParams(8, 3, 1, variant="VORONOI").variant is Variant.VORONOI


class TestSampleSet:
    def test_rejects_duplicate_indices(self):
        with pytest.raises(SconeError):
            SampleSet(np.array([1, 1, 2]), np.zeros((1, 3)))

    def test_rejects_negative_radii(self):
        with pytest.raises(SconeError):
            SampleSet(np.array([0, 1]), np.array([[-0.5, 1.0]]))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(SconeError):
            SampleSet(np.array([0, 1, 2]), np.zeros((2, 2)))

    def test_equality_is_field_wise(self):
        a = SampleSet(np.array([0, 1]), np.array([[1.0, 2.0]]))
        b = SampleSet(np.array([0, 1]), np.array([[1.0, 2.0]]))
        c = SampleSet(np.array([0, 2]), np.array([[1.0, 2.0]]))
        assert a == b and a != c


class TestModelAndScores:
    def test_member_count_must_match_t(self):
        member = SampleSet(np.array([0, 1]), np.zeros((1, 2)))
        with pytest.raises(SconeError):
            EnsembleModel(SconeParams(2, 1, 3), (member,), "fp")

    def test_scores_must_be_in_unit_interval(self):
        with pytest.raises(SconeError):
            ScoreVector(np.array([0.2, 1.5]))
        with pytest.raises(SconeError):
            ScoreVector(np.array([np.nan]))

    def test_label_vector_counts(self):
        labels = LabelVector(np.array([0, 0, 1, 2, 3, 0]))
        counts = labels.counts()
        assert counts[Label.NORMAL] == 3
        assert counts[Label.ATTRIBUTE] == 1
        assert counts[Label.CLASS] == 1
        assert counts[Label.CLASS_ATTRIBUTE] == 1
        assert labels.normal_mask.sum() == 3

    def test_label_vector_rejects_unknown_values(self):
        with pytest.raises(DataError):
            LabelVector(np.array([0, 4]))


class TestMinMaxScaling:
    def test_scales_each_column_to_unit_range(self):
        ds = _dataset(50, (3,), seed=2)
        scaled = minmax_scale_views(ds)
        for col in scaled.views[0].T:
            assert col.min() == 0.0 and col.max() == 1.0

    def test_constant_column_maps_to_zero(self):
        ds = MultiViewDataset((np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 3.0]]),))
        scaled = minmax_scale_views(ds)
        assert np.all(scaled.views[0][:, 0] == 0.0)
