"""Datasets, predictor scaling and model configuration."""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field, replace

import numpy as np

__all__ = [
    "SpatialDataset",
    "Scaling",
    "Hyperparameters",
    "FitConfig",
    "standardize_predictors",
    "train_test_split",
    "with_intercept",
    "INTERCEPT_NAME",
]

INTERCEPT_NAME = "intercept"


@dataclass(frozen=True)
class SpatialDataset:
    """Response and predictors observed at 2-D locations.

    Parameters
    ----------
    locations : ndarray, shape (n, 2)
        Coordinates ``(u_i, v_i)``.
    y : ndarray, shape (n,)
    X : ndarray, shape (n, m)
    predictor_names : tuple of str, length m
    """

    locations: np.ndarray
    y: np.ndarray
    X: np.ndarray
    predictor_names: tuple[str, ...] = ()

    def __post_init__(self):
        loc = np.array(self.locations, dtype=float).reshape(-1, 2)
        y = np.array(self.y, dtype=float).reshape(-1)
        X = np.array(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        n = y.shape[0]
        if n < 1:
            raise ValueError("dataset needs at least one row")
        if loc.shape[0] != n or X.shape[0] != n:
            raise ValueError(
                f"row mismatch: {loc.shape[0]} locations, {n} responses, {X.shape[0]} predictor rows"
            )
        if X.shape[1] < 1:
            raise ValueError("dataset needs at least one predictor")
        if not (np.isfinite(loc).all() and np.isfinite(y).all() and np.isfinite(X).all()):
            raise ValueError("dataset contains non-finite values")
        names = tuple(self.predictor_names) or tuple(f"x{j + 1}" for j in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise ValueError(f"{len(names)} predictor names for {X.shape[1]} columns")
        for a in (loc, y, X):
            a.setflags(write=False)
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "predictor_names", names)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def m(self) -> int:
        return self.X.shape[1]

    def subset(self, index) -> "SpatialDataset":
        idx = np.asarray(index)
        return SpatialDataset(self.locations[idx], self.y[idx], self.X[idx], self.predictor_names)


@dataclass(frozen=True)
class Scaling:
    """Per-column ``(min, max)`` record of a min-max predictor map.

    Constant columns (``max == min``) map to 0.5.
    """

    mins: np.ndarray
    maxs: np.ndarray

    @classmethod
    def identity(cls, m: int) -> "Scaling":
        return cls(np.zeros(m), np.ones(m))

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        mins = np.asarray(self.mins, dtype=float)
        span = np.asarray(self.maxs, dtype=float) - mins
        const = span == 0
        out = (X - mins) / np.where(const, 1.0, span)
        out[:, const] = 0.5
        return out

    def to_dict(self) -> dict:
        return {"mins": [float(v) for v in self.mins], "maxs": [float(v) for v in self.maxs]}

    @classmethod
    def from_dict(cls, d: dict) -> "Scaling":
        return cls(np.asarray(d["mins"], dtype=float), np.asarray(d["maxs"], dtype=float))


def standardize_predictors(dataset: SpatialDataset) -> tuple[SpatialDataset, Scaling]:
    """Min-max map every predictor column onto [0, 1].

    Returns the mapped dataset and the record needed to map new data
    identically.  New data mapped with a training record may fall outside
    [0, 1].
    """
    mins = dataset.X.min(axis=0)
    maxs = dataset.X.max(axis=0)
    const = np.flatnonzero(maxs == mins)
    if const.size:
        names = ", ".join(dataset.predictor_names[j] for j in const)
        warnings.warn(f"constant predictor column(s) mapped to 0.5: {names}", stacklevel=2)
    scaling = Scaling(mins, maxs)
    return replace(dataset, X=scaling.apply(dataset.X)), scaling


def with_intercept(dataset: SpatialDataset) -> SpatialDataset:
    """Prepend a constant-one predictor so the intercept surface is group 0."""
    X = np.column_stack([np.ones(dataset.n), dataset.X])
    return replace(dataset, X=X, predictor_names=(INTERCEPT_NAME,) + dataset.predictor_names)


def train_test_split(dataset: SpatialDataset, fraction: float = 0.2, seed: int = 0):
    """Random disjoint split with ``round(fraction * n)`` (at least 1) test rows."""
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    n = dataset.n
    n_test = max(1, int(round(fraction * n)))
    if n_test >= n:
        raise ValueError(f"split of n={n} at fraction={fraction} leaves an empty side")
    perm = np.random.default_rng(seed).permutation(n)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    return dataset.subset(train_idx), dataset.subset(test_idx)


@dataclass(frozen=True)
class Hyperparameters:
    """Inverse-Gamma(a_sigma, b_sigma) prior on sigma^2 and Gamma(a_lambda, b_lambda) on lambda^2.

    Both use the shape/rate convention.
    """

    a_sigma: float = 0.01
    b_sigma: float = 0.01
    a_lambda: float = 30.0
    b_lambda: float = 0.1

    def __post_init__(self):
        for name, val in asdict(self).items():
            if not (np.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be a positive real, got {val}")


@dataclass(frozen=True)
class FitConfig:
    """Everything needed to reproduce a fit.

    ``bbox=None`` means the basis domain is the bounding box of the training
    locations expanded by ``bbox_margin``.
    """

    per_dim_count: int = 5
    degree: int = 3
    hyper: Hyperparameters = field(default_factory=Hyperparameters)
    n_iter: int = 5000
    warmup: int = 500
    n_chains: int = 4
    ci_level: float = 0.95
    seed: int = 0
    include_intercept: bool = False
    jitter_init: bool = True
    bbox: tuple[float, float, float, float] | None = None
    bbox_margin: float = 0.0

    def __post_init__(self):
        if self.n_iter < 1:
            raise ValueError("n_iter must be positive")
        if not 0 <= self.warmup < self.n_iter:
            raise ValueError(f"need 0 <= warmup < n_iter, got warmup={self.warmup}, n_iter={self.n_iter}")
        if self.n_chains < 1:
            raise ValueError("n_chains must be positive")
        if not 0.0 < self.ci_level < 1.0:
            raise ValueError(f"ci_level must lie in (0, 1), got {self.ci_level}")
        if self.per_dim_count < self.degree + 1:
            raise ValueError("per_dim_count must be at least degree + 1")

    @property
    def L(self) -> int:
        return self.per_dim_count**2

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bbox"] = None if self.bbox is None else list(self.bbox)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FitConfig":
        d = dict(d)
        d["hyper"] = Hyperparameters(**d.get("hyper", {}))
        if d.get("bbox") is not None:
            d["bbox"] = tuple(d["bbox"])
        return cls(**d)
