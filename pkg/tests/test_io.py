"""CSV/JSON round trips and result writing."""

import json

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bsgl.data import FitConfig, Scaling, SpatialDataset
from bsgl.io import (
    DataError,
    ensure_writable,
    read_dataset,
    read_grid,
    read_model,
    read_samples,
    write_dataset,
    write_grid,
    write_model,
    write_results,
    write_samples,
)
from bsgl.model import fit
from bsgl.simulate import SimConfig, generate_dataset


def write_text(path, text):
    path.write_text(text)
    return path


class TestReadDataset:
    def test_three_rows(self, tmp_path):
        p = write_text(tmp_path / "d.csv", "u,v,y,a\n0,0,1,2\n1,1,2,3\n2,0.5,3,4\n")
        ds = read_dataset(p)
        assert ds.n == 3 and ds.predictor_names == ("a",)

    def test_nan_row_dropped_with_count(self, tmp_path):
        p = write_text(tmp_path / "d.csv", "u,v,y,a\n0,0,1,2\n1,1,,3\n2,0.5,3,4\n")
        with pytest.warns(UserWarning, match="dropped 1 row"):
            ds = read_dataset(p)
        assert ds.n == 2

    def test_fill_values_that_are_not_numbers(self, tmp_path):
        p = write_text(tmp_path / "d.csv", "u,v,y,a\n0,0,1,n/a\n1,1,2,inf\n2,0.5,3,4\n")
        with pytest.warns(UserWarning, match="dropped 2 row"):
            assert read_dataset(p).n == 1

    def test_missing_response_is_named(self, tmp_path):
        p = write_text(tmp_path / "d.csv", "u,v,evi,a\n0,0,1,2\n")
        with pytest.raises(DataError, match="'y'"):
            read_dataset(p)

    def test_custom_roles_and_order(self, tmp_path):
        p = write_text(tmp_path / "d.csv", "lon,lat,evi,b,a,junk\n0,0,1,2,3,9\n1,1,2,3,4,9\n")
        ds = read_dataset(p, u="lon", v="lat", y="evi", predictors=["a", "b"])
        assert ds.predictor_names == ("a", "b")
        np.testing.assert_array_equal(ds.X[0], [3.0, 2.0])

    def test_no_usable_rows(self, tmp_path):
        p = write_text(tmp_path / "d.csv", "u,v,y,a\n0,0,,2\n")
        with pytest.warns(UserWarning), pytest.raises(DataError, match="no usable rows"):
            read_dataset(p)

    def test_no_predictors(self, tmp_path):
        p = write_text(tmp_path / "d.csv", "u,v,y\n0,0,1\n")
        with pytest.raises(DataError, match="predictor"):
            read_dataset(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="no such file"):
            read_dataset(tmp_path / "absent.csv")

    def test_empty_file(self, tmp_path):
        with pytest.raises(DataError):
            read_dataset(write_text(tmp_path / "d.csv", ""))


class TestRoundTrips:
    def test_simulated_dataset_bit_exact(self, tmp_path):
        data, _ = generate_dataset(SimConfig(n=300, m=4, seed=5))
        write_dataset(data, tmp_path / "d.csv")
        back = read_dataset(tmp_path / "d.csv")
        assert back.X.tobytes() == data.X.tobytes()
        assert back.y.tobytes() == data.y.tobytes()
        assert back.locations.tobytes() == data.locations.tobytes()

    @settings(max_examples=25, deadline=None)
    @given(arrays(np.float64, (5, 4), elements=st.floats(-1e300, 1e300, allow_subnormal=True)))
    def test_any_finite_double(self, tmp_path_factory, values):
        path = tmp_path_factory.mktemp("rt") / "d.csv"
        ds = SpatialDataset(values[:, :2], values[:, 2], values[:, 3:])
        write_dataset(ds, path)
        back = read_dataset(path)
        assert back.X.tobytes() == ds.X.tobytes()
        assert back.locations.tobytes() == ds.locations.tobytes()

    def test_samples(self, tmp_path):
        data, _ = generate_dataset(SimConfig(n=80, m=3, seed=6))
        res = fit(data, FitConfig(per_dim_count=4, n_iter=30, warmup=10, n_chains=2), diagnose=False)
        write_samples(res.samples, res.predictor_names, tmp_path / "s.csv")
        back, names = read_samples(tmp_path / "s.csv")
        assert names == res.predictor_names
        for a, b in zip(res.samples, back):
            assert a.alpha.tobytes() == b.alpha.tobytes()
            assert a.tau2.tobytes() == b.tau2.tobytes()
            assert a.sigma2.tobytes() == b.sigma2.tobytes()
            assert a.chain_id == b.chain_id

    def test_model_and_grid(self, tmp_path):
        data, _ = generate_dataset(SimConfig(n=80, m=3, seed=7))
        cfg = FitConfig(per_dim_count=4, n_iter=20, warmup=5, n_chains=1, seed=3)
        res = fit(data, cfg)
        write_model(tmp_path / "model.json", cfg, res.basis, res.scaling, res.predictor_names)
        basis, names, scaling, cfg2 = read_model(tmp_path / "model.json")
        assert basis.bbox == res.basis.bbox and basis.L == 16
        assert names == res.predictor_names and cfg2 == cfg
        write_grid(data.locations, tmp_path / "g.csv")
        assert read_grid(tmp_path / "g.csv").tobytes() == data.locations.tobytes()

    def test_malformed_model(self, tmp_path):
        with pytest.raises(DataError):
            read_model(write_text(tmp_path / "m.json", "{}"))


@pytest.fixture(scope="module")
def result():
    data, _ = generate_dataset(SimConfig(n=150, m=3, seed=9))
    return data, fit(data, FitConfig(per_dim_count=4, n_iter=60, warmup=20, n_chains=2, seed=9))


class TestWriteResults:
    def test_artifact_set(self, tmp_path, result):
        data, res = result
        man = write_results(res, tmp_path, test=data.subset(np.arange(20)), save_samples=True)
        expected = {"grid.csv", "surfaces.csv", "significance.csv", "scp.json", "convergence.json",
                    "model.json", "predictions.csv", "metrics.json", "samples.csv"}
        assert set(man.outputs) == expected
        for name in expected | {"manifest.json"}:
            assert (tmp_path / name).exists()
        sig = pd.read_csv(tmp_path / "significance.csv")
        assert list(sig.columns) == ["predictor", "u", "v", "mean", "lo", "hi", "significant"]
        assert sorted(sig["predictor"].unique()) == ["x1", "x2", "x3"]
        assert list(json.loads((tmp_path / "scp.json").read_text())) == ["x1", "x2", "x3"]
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["seed"] == 9 and manifest["config"]["n_chains"] == 2

    def test_samples_are_optional(self, tmp_path, result):
        _, res = result
        man = write_results(res, tmp_path)
        assert "samples.csv" not in man.outputs and not (tmp_path / "samples.csv").exists()

    def test_unwritable_directory(self, tmp_path):
        blocker = write_text(tmp_path / "file", "x")
        with pytest.raises(OSError, match="not writable"):
            ensure_writable(blocker / "sub")


def test_scaling_record_survives_model_file(tmp_path):
    rec = Scaling(np.array([0.1, 1e-17]), np.array([1.0 / 3.0, 2.0]))
    data, _ = generate_dataset(SimConfig(n=40, m=3, seed=1))
    res = fit(data, FitConfig(per_dim_count=4, n_iter=10, warmup=2, n_chains=1))
    write_model(tmp_path / "m.json", res.config, res.basis, rec, ("a", "b"))
    back = read_model(tmp_path / "m.json")[2]
    assert back.mins.tobytes() == rec.mins.tobytes() and back.maxs.tobytes() == rec.maxs.tobytes()
