"""End-to-end fitting on small synthetic problems."""

import numpy as np
import pytest

from bsgl.data import FitConfig, SpatialDataset, train_test_split
from bsgl.model import fit, prepare
from bsgl.simulate import SimConfig, generate_dataset


@pytest.fixture(scope="module")
def fitted():
    data, beta = generate_dataset(SimConfig(n=500, m=4, seed=8))
    cfg = FitConfig(per_dim_count=4, n_iter=600, warmup=200, n_chains=2, seed=8)
    return data, beta, fit(data, cfg, standardize=False)


class TestFit:
    def test_result_layout(self, fitted):
        data, _, res = fitted
        assert len(res.samples) == 2
        assert res.samples[0].alpha.shape == (400, 4, 16)
        assert res.predictor_names == data.predictor_names
        assert set(res.timings) == {"prepare", "sample", "diagnose"}
        assert res.report is not None

    def test_signal_recovered(self, fitted):
        data, beta, res = fitted
        est = res.coefficient_means(data.locations)
        # correlation with the true surface is high for the signal predictors
        for j in range(3):
            assert np.corrcoef(est[:, j], beta[:, j])[0, 1] > 0.9
        assert np.mean(est[:, 3] ** 2) < 0.5

    def test_significance_defaults_to_training_locations(self, fitted):
        data, _, res = fitted
        maps = res.significance()
        assert len(maps) == 4
        assert maps[0].grid.shape == (500, 2)
        assert maps[0].scp > 0.5

    def test_prediction_interval_width(self, fitted):
        data, _, res = fitted
        pred = res.predict(data)
        assert 0.85 < pred.coverage(data.y) <= 1.0

    def test_single_chain_has_no_report(self):
        data, _ = generate_dataset(SimConfig(n=100, m=3, seed=1))
        res = fit(data, FitConfig(per_dim_count=4, n_iter=30, warmup=10, n_chains=1))
        assert res.report is None


class TestPrepare:
    def test_raw_predictors_are_standardized(self):
        rng = np.random.default_rng(0)
        ds = SpatialDataset(rng.uniform(size=(40, 2)), rng.normal(size=40), rng.normal(5.0, 3.0, size=(40, 2)))
        data, scaling, basis, blocks = prepare(ds, FitConfig(per_dim_count=4))
        assert data.X.min() == 0.0 and data.X.max() == 1.0
        np.testing.assert_allclose(scaling.mins, ds.X.min(axis=0))
        assert blocks.gram.shape == (32, 32)

    def test_intercept_group(self):
        ds, _ = generate_dataset(SimConfig(n=60, m=3, seed=2))
        data, _, _, blocks = prepare(ds, FitConfig(per_dim_count=4, include_intercept=True))
        assert data.predictor_names[0] == "intercept"
        assert blocks.m == 4

    def test_basis_domain_from_locations(self):
        ds, _ = generate_dataset(SimConfig(n=60, m=3, seed=3))
        _, _, basis, _ = prepare(ds, FitConfig(per_dim_count=4, bbox_margin=0.1))
        u0, u1, _, _ = basis.bbox
        lo, hi = ds.locations[:, 0].min(), ds.locations[:, 0].max()
        assert u0 == pytest.approx(lo - 0.1 * (hi - lo))
        assert u1 == pytest.approx(hi + 0.1 * (hi - lo))


def test_intercept_surface_is_learned():
    rng = np.random.default_rng(4)
    loc = rng.uniform(0, 1, size=(400, 2))
    X = rng.uniform(size=(400, 1))
    y = 2.0 + 3.0 * X[:, 0] + 0.1 * rng.standard_normal(400)
    ds = SpatialDataset(loc, y, X)
    train, test = train_test_split(ds, 0.25, seed=0)
    cfg = FitConfig(per_dim_count=4, n_iter=800, warmup=200, n_chains=2, include_intercept=True,
                    bbox=(0.0, 1.0, 0.0, 1.0))
    res = fit(train, cfg)
    pred = res.predict(test)
    assert np.mean((pred.mean - test.y) ** 2) < 0.03
