"""CSV/JSON serialization of datasets, posterior samples and fit results.

Floats are written with Python's shortest round-trip representation and
read back with pandas' ``round_trip`` parser, so a write/read cycle
reproduces every value bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import tempfile
import warnings
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pandas as pd

from .basis import BasisConfig, BasisSystem, build_basis
from .data import FitConfig, Scaling, SpatialDataset
from .inference import Prediction, SignificanceMap, posterior_mean_surfaces
from .sampler import ChainSamples

__all__ = [
    "DataError",
    "RunManifest",
    "read_dataset",
    "write_dataset",
    "write_truth",
    "write_samples",
    "read_samples",
    "write_model",
    "read_model",
    "read_grid",
    "write_grid",
    "write_significance",
    "write_scp",
    "write_json",
    "ensure_writable",
    "sha256_file",
    "write_results",
]


class DataError(ValueError):
    """Input data that cannot be used: missing columns, no usable rows, bad files."""


def _read_csv(path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, float_precision="round_trip")
    except FileNotFoundError as exc:
        raise DataError(f"no such file: {path}") from exc
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as exc:
        raise DataError(f"cannot parse {path}: {exc}") from exc


def _write_csv(frame: pd.DataFrame, path) -> None:
    frame.to_csv(path, index=False, lineterminator="\n")


def read_dataset(path, u: str = "u", v: str = "v", y: str = "y", predictors=None) -> SpatialDataset:
    """Load a dataset from a CSV with a header row.

    Parameters
    ----------
    path : path-like
    u, v, y : str
        Column names of the coordinates and the response.
    predictors : sequence of str, optional
        Predictor columns in model order.  By default every remaining
        column, in file order.

    Rows holding any non-finite value in a used column are dropped with a
    warning that states how many went.
    """
    frame = _read_csv(path)
    if predictors is None:
        predictors = [c for c in frame.columns if c not in (u, v, y)]
    predictors = list(predictors)
    required = [u, v, y] + predictors
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise DataError(f"{path}: missing column(s) {', '.join(repr(c) for c in missing)}")
    if not predictors:
        raise DataError(f"{path}: no predictor columns")
    try:
        values = frame[required].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
    except (TypeError, ValueError) as exc:
        raise DataError(f"{path}: non-numeric data ({exc})") from exc
    keep = np.isfinite(values).all(axis=1)
    dropped = int((~keep).sum())
    if dropped:
        warnings.warn(f"dropped {dropped} row(s) with non-finite values from {path}", stacklevel=2)
    values = values[keep]
    if values.shape[0] == 0:
        raise DataError(f"{path}: no usable rows")
    return SpatialDataset(values[:, :2], values[:, 2], values[:, 3:], tuple(predictors))


def write_dataset(dataset: SpatialDataset, path) -> None:
    frame = pd.DataFrame({"u": dataset.locations[:, 0], "v": dataset.locations[:, 1], "y": dataset.y})
    for j, name in enumerate(dataset.predictor_names):
        frame[name] = dataset.X[:, j]
    _write_csv(frame, path)


def write_truth(locations, beta, names, path) -> None:
    """True coefficient surfaces at the data locations, one ``beta_<name>`` column each."""
    loc = np.asarray(locations, dtype=float)
    frame = pd.DataFrame({"u": loc[:, 0], "v": loc[:, 1]})
    for j, name in enumerate(names):
        frame[f"beta_{name}"] = np.asarray(beta)[:, j]
    _write_csv(frame, path)


# -- posterior samples -------------------------------------------------------

def write_samples(samples: list[ChainSamples], names, path) -> None:
    """Long-format draws: one row per (chain, iteration).

    Columns are ``chain, iter, sigma2, lambda2``, then ``tau2.<name>`` per
    predictor and ``alpha.<name>.<l>`` per basis coefficient.
    """
    m, L = samples[0].m, samples[0].L
    cols = ["sigma2", "lambda2"] + [f"tau2.{nm}" for nm in names]
    cols += [f"alpha.{nm}.{l}" for nm in names for l in range(L)]
    blocks = []
    for s in samples:
        T = s.n_samples
        body = np.column_stack([s.sigma2, s.lambda2, s.tau2, s.alpha.reshape(T, m * L)])
        frame = pd.DataFrame(body, columns=cols)
        frame.insert(0, "iter", np.arange(T))
        frame.insert(0, "chain", s.chain_id)
        blocks.append(frame)
    _write_csv(pd.concat(blocks, ignore_index=True), path)


def read_samples(path) -> tuple[list[ChainSamples], tuple[str, ...]]:
    """Inverse of :func:`write_samples`; returns the chains and predictor names."""
    frame = _read_csv(path)
    for c in ("chain", "iter", "sigma2", "lambda2"):
        if c not in frame.columns:
            raise DataError(f"{path}: missing column {c!r}")
    names = tuple(c[len("tau2."):] for c in frame.columns if c.startswith("tau2."))
    if not names:
        raise DataError(f"{path}: no tau2 columns")
    alpha_cols = [c for c in frame.columns if c.startswith("alpha.")]
    m = len(names)
    if len(alpha_cols) % m:
        raise DataError(f"{path}: {len(alpha_cols)} alpha columns for {m} predictors")
    L = len(alpha_cols) // m
    expected = [f"alpha.{nm}.{l}" for nm in names for l in range(L)]
    if alpha_cols != expected:
        raise DataError(f"{path}: alpha columns are not in the expected order")
    tau_cols = [f"tau2.{nm}" for nm in names]
    out = []
    for chain_id, part in frame.groupby("chain", sort=True):
        part = part.sort_values("iter", kind="mergesort")
        T = len(part)
        out.append(ChainSamples(
            alpha=part[expected].to_numpy(dtype=float).reshape(T, m, L),
            tau2=part[tau_cols].to_numpy(dtype=float),
            sigma2=part["sigma2"].to_numpy(dtype=float),
            lambda2=part["lambda2"].to_numpy(dtype=float),
            chain_id=int(chain_id),
        ))
    return out, names


# -- model description ---------------------------------------------------------

def write_model(path, config: FitConfig, basis: BasisSystem, scaling: Scaling, names) -> None:
    """Everything needed to turn stored samples back into surfaces."""
    doc = {
        "basis": {
            "per_dim_count": basis.per_dim_count,
            "degree": basis.degree,
            "bbox": [float(b) for b in basis.bbox],
        },
        "predictor_names": list(names),
        "include_intercept": config.include_intercept,
        "scaling": scaling.to_dict(),
        "config": config.to_dict(),
    }
    write_json(doc, path)


def read_model(path):
    """Returns ``(basis, names, scaling, config)`` from a model JSON."""
    try:
        doc = json.loads(Path(path).read_text())
        b = doc["basis"]
        basis = build_basis(BasisConfig(int(b["per_dim_count"]), int(b["degree"]), tuple(b["bbox"])))
        names = tuple(doc["predictor_names"])
        scaling = Scaling.from_dict(doc["scaling"])
        config = FitConfig.from_dict(doc["config"])
    except FileNotFoundError as exc:
        raise DataError(f"no such file: {path}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed model file ({exc})") from exc
    return basis, names, scaling, config


def write_grid(grid, path) -> None:
    g = np.asarray(grid, dtype=float)
    _write_csv(pd.DataFrame({"u": g[:, 0], "v": g[:, 1]}), path)


def read_grid(path) -> np.ndarray:
    frame = _read_csv(path)
    if not {"u", "v"} <= set(frame.columns):
        raise DataError(f"{path}: grid needs columns u and v")
    return frame[["u", "v"]].to_numpy(dtype=float)


# -- result files ----------------------------------------------------------------

def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, allow_nan=True) + "\n")


def write_significance(maps: list[SignificanceMap], path) -> None:
    frames = []
    for mp in maps:
        frames.append(pd.DataFrame({
            "predictor": mp.name,
            "u": mp.grid[:, 0],
            "v": mp.grid[:, 1],
            "mean": mp.mean,
            "lo": mp.lo,
            "hi": mp.hi,
            "significant": mp.significant.astype(int),
        }))
    _write_csv(pd.concat(frames, ignore_index=True), path)


def write_scp(maps: list[SignificanceMap], path) -> None:
    write_json({mp.name: mp.scp for mp in maps}, path)


def _write_surfaces(samples, basis, grid, names, path) -> None:
    means = posterior_mean_surfaces(samples, basis, grid)
    frame = pd.DataFrame({"u": grid[:, 0], "v": grid[:, 1]})
    for j, name in enumerate(names):
        frame[name] = means[:, j]
    _write_csv(frame, path)


def _write_predictions(dataset: SpatialDataset, pred: Prediction, path) -> None:
    frame = pd.DataFrame({
        "u": dataset.locations[:, 0],
        "v": dataset.locations[:, 1],
        "y": dataset.y,
        "mean": pred.mean,
        "lo": pred.lo,
        "hi": pred.hi,
    })
    _write_csv(frame, path)


def ensure_writable(out_dir) -> Path:
    """Create ``out_dir`` if needed and prove a file can be written there."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=out, prefix=".probe-"):
            pass
    except OSError as exc:
        raise OSError(f"output directory {out} is not writable: {exc}") from exc
    return out


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    version: str
    seed: int
    config: dict
    tuning: dict | None = None
    inputs: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    created: str = ""

    def add_output(self, path) -> None:
        p = Path(path)
        self.outputs[p.name] = sha256_file(p)

    def write(self, out_dir) -> Path:
        self.created = datetime.now(timezone.utc).isoformat(timespec="seconds")
        path = Path(out_dir) / "manifest.json"
        write_json(asdict(self), path)
        return path


def _version() -> str:
    from . import __version__
    return __version__


def write_results(result, out_dir, grid=None, test: SpatialDataset | None = None, save_samples: bool = False,
                  inputs=None, tuning=None, command: str = "fit") -> RunManifest:
    """Write every artifact of a fit and the manifest describing them.

    Parameters
    ----------
    result : FitResult
    out_dir : path-like
    grid : ndarray (G, 2), optional
        Where surfaces and significance are evaluated (default: training locations).
    test : SpatialDataset, optional
        Held-out rows; adds ``predictions.csv`` and MSPE/coverage to ``metrics.json``.
    save_samples : bool
        Also write every post-warmup draw to ``samples.csv``.
    inputs : dict, optional
        ``{label: path}`` of input files to fingerprint in the manifest.
    """
    out = ensure_writable(out_dir)
    grid = result.train_locations if grid is None else np.asarray(grid, dtype=float)
    names = result.predictor_names
    manifest = RunManifest(
        command=command,
        version=_version(),
        seed=result.config.seed,
        config=result.config.to_dict(),
        tuning=tuning,
        inputs={k: {"path": str(p), "sha256": sha256_file(p)} for k, p in (inputs or {}).items()},
        timings=dict(result.timings),
    )
    files = []

    path = out / "grid.csv"
    write_grid(grid, path)
    files.append(path)

    path = out / "surfaces.csv"
    _write_surfaces(result.samples, result.basis, grid, names, path)
    files.append(path)

    maps = result.significance(grid)
    path = out / "significance.csv"
    write_significance(maps, path)
    files.append(path)
    path = out / "scp.json"
    write_scp(maps, path)
    files.append(path)

    conv = result.report.to_dict() if result.report is not None else {"available": False,
                                                                      "reason": "fewer than two chains"}
    path = out / "convergence.json"
    write_json(conv, path)
    files.append(path)

    path = out / "model.json"
    write_model(path, result.config, result.basis, result.scaling, names)
    files.append(path)

    if test is not None:
        pred = result.predict(test)
        path = out / "predictions.csv"
        _write_predictions(test, pred, path)
        files.append(path)
        metrics = {
            "n_test": test.n,
            "mspe": float(np.mean((pred.mean - test.y) ** 2)),
            "coverage": pred.coverage(test.y),
            "ci_level": pred.ci_level,
        }
        path = out / "metrics.json"
        write_json(metrics, path)
        files.append(path)

    if save_samples:
        path = out / "samples.csv"
        write_samples(result.samples, names, path)
        files.append(path)

    for p in files:
        manifest.add_output(p)
    manifest.extra["ci_level"] = result.config.ci_level
    manifest.extra["complete_chains"] = all(s.complete for s in result.samples)
    manifest.write(out)
    return manifest
