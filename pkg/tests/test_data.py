"""Datasets, predictor scaling, splits and configuration records."""

import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bsgl.data import (
    FitConfig,
    Hyperparameters,
    Scaling,
    SpatialDataset,
    standardize_predictors,
    train_test_split,
    with_intercept,
)


def small_dataset(n=10, m=2, seed=0):
    rng = np.random.default_rng(seed)
    return SpatialDataset(rng.uniform(size=(n, 2)), rng.normal(size=n), rng.normal(size=(n, m)))


class TestSpatialDataset:
    def test_shapes_and_default_names(self):
        ds = small_dataset(7, 3)
        assert (ds.n, ds.m) == (7, 3)
        assert ds.predictor_names == ("x1", "x2", "x3")

    def test_arrays_are_read_only(self):
        ds = small_dataset()
        with pytest.raises(ValueError):
            ds.y[0] = 1.0

    def test_row_mismatch(self):
        with pytest.raises(ValueError, match="row mismatch"):
            SpatialDataset(np.zeros((3, 2)), np.zeros(4), np.zeros((4, 1)))

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="non-finite"):
            SpatialDataset(np.zeros((2, 2)), [0.0, np.inf], np.zeros((2, 1)))

    def test_name_count(self):
        with pytest.raises(ValueError, match="names"):
            SpatialDataset(np.zeros((2, 2)), np.zeros(2), np.zeros((2, 2)), ("a",))

    def test_subset_keeps_names(self):
        ds = SpatialDataset(np.zeros((3, 2)), [1.0, 2.0, 3.0], np.zeros((3, 1)), ("ndvi",))
        sub = ds.subset([2, 0])
        np.testing.assert_array_equal(sub.y, [3.0, 1.0])
        assert sub.predictor_names == ("ndvi",)


class TestScaling:
    def test_columns_land_on_unit_interval(self):
        scaled, rec = standardize_predictors(small_dataset(50, 3))
        np.testing.assert_allclose(scaled.X.min(axis=0), 0.0)
        np.testing.assert_allclose(scaled.X.max(axis=0), 1.0)

    def test_constant_column_maps_to_half_with_warning(self):
        ds = SpatialDataset(np.zeros((3, 2)), np.zeros(3), [[1.0, 4.0], [2.0, 4.0], [3.0, 4.0]], ("a", "b"))
        with pytest.warns(UserWarning, match="b"):
            scaled, rec = standardize_predictors(ds)
        np.testing.assert_array_equal(scaled.X[:, 1], 0.5)

    def test_new_data_may_leave_unit_interval(self):
        rec = Scaling(np.array([0.0]), np.array([2.0]))
        np.testing.assert_allclose(rec.apply([[3.0], [-1.0]]).ravel(), [1.5, -0.5])

    def test_dict_round_trip(self):
        rec = Scaling(np.array([0.1, -3.0]), np.array([0.7, 1e5]))
        back = Scaling.from_dict(rec.to_dict())
        np.testing.assert_array_equal(back.mins, rec.mins)
        np.testing.assert_array_equal(back.maxs, rec.maxs)

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, (12, 2), elements=st.floats(-1e6, 1e6)))
    def test_scaled_values_bounded(self, X):
        ds = SpatialDataset(np.zeros((12, 2)), np.zeros(12), X)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            scaled, _ = standardize_predictors(ds)
        assert scaled.X.min() >= 0.0
        assert scaled.X.max() <= 1.0 + 1e-12


def test_intercept_is_first_group():
    ds = with_intercept(small_dataset(5, 2))
    assert ds.predictor_names[0] == "intercept"
    np.testing.assert_array_equal(ds.X[:, 0], 1.0)
    assert ds.m == 3


class TestSplit:
    @pytest.mark.parametrize("n,fraction,n_test", [(1000, 0.2, 200), (10, 0.25, 2), (3, 0.01, 1), (7, 0.5, 4)])
    def test_sizes(self, n, fraction, n_test):
        train, test = train_test_split(small_dataset(n), fraction)
        assert test.n == n_test
        assert train.n == n - n_test

    def test_disjoint_and_complete(self):
        ds = SpatialDataset(np.zeros((20, 2)), np.arange(20.0), np.zeros((20, 1)))
        train, test = train_test_split(ds, 0.3, seed=4)
        assert sorted(np.concatenate([train.y, test.y])) == list(np.arange(20.0))

    def test_deterministic(self):
        a = train_test_split(small_dataset(30), 0.2, seed=1)[1]
        b = train_test_split(small_dataset(30), 0.2, seed=1)[1]
        np.testing.assert_array_equal(a.y, b.y)

    def test_empty_side(self):
        with pytest.raises(ValueError):
            train_test_split(small_dataset(1), 0.5)


class TestConfig:
    def test_hyperparameters_positive(self):
        with pytest.raises(ValueError, match="a_lambda"):
            Hyperparameters(a_lambda=0.0)

    @pytest.mark.parametrize("kw", [dict(n_iter=10, warmup=10), dict(n_chains=0), dict(ci_level=1.0),
                                    dict(per_dim_count=3)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            FitConfig(**kw)

    def test_single_retained_draw_allowed(self):
        assert FitConfig(n_iter=501, warmup=500).n_iter == 501

    def test_dict_round_trip(self):
        cfg = FitConfig(per_dim_count=6, hyper=Hyperparameters(a_lambda=15.0), bbox=(0, 1, 2, 3), seed=9)
        assert FitConfig.from_dict(cfg.to_dict()) == cfg
