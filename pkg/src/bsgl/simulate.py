"""Synthetic spatially varying coefficient data with three signal surfaces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import SpatialDataset

__all__ = ["SimConfig", "true_beta", "true_surfaces", "generate_dataset"]


@dataclass(frozen=True)
class SimConfig:
    """Generator settings.

    Predictors 1-3 carry the signal surfaces; predictor 4 is the constant
    ``constant_c`` when set; every other predictor has a zero coefficient.
    """

    n: int = 1000
    m: int = 5
    domain: tuple[float, float] = (0.0, 20.0)
    noise_var: float = 0.1
    constant_c: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.m < 3:
            raise ValueError("m must be at least 3")
        if self.n < 1:
            raise ValueError("n must be positive")
        if not self.noise_var >= 0:
            raise ValueError("noise_var must be non-negative")
        if self.constant_c is not None and self.m < 4:
            raise ValueError("constant_c needs m >= 4")
        lo, hi = self.domain
        if not lo < hi:
            raise ValueError(f"bad domain {self.domain}")


def true_beta(j: int, u, v, constant_c: float | None = None):
    """True coefficient of predictor ``j`` (1-based) at ``(u, v)``."""
    if j < 1:
        raise ValueError("predictor index is 1-based")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if j == 1:
        return 20.0 * np.cos(np.pi * u / 20.0) * np.cos(np.pi * v / 20.0)
    if j == 2:
        return 18.0 * np.cos(np.pi * u / 18.0) * np.sin(np.pi * v / 18.0)
    if j == 3:
        return 20.0 * np.exp(-((u - 10.0) ** 2 + (v - 10.0) ** 2) / 50.0)
    if j == 4 and constant_c is not None:
        return np.full(np.broadcast(u, v).shape, float(constant_c))
    return np.zeros(np.broadcast(u, v).shape)


def true_surfaces(locations, m: int, constant_c: float | None = None) -> np.ndarray:
    """Matrix of true coefficients, shape (n, m)."""
    loc = np.asarray(locations, dtype=float).reshape(-1, 2)
    return np.column_stack([true_beta(j, loc[:, 0], loc[:, 1], constant_c) for j in range(1, m + 1)])


def generate_dataset(config: SimConfig) -> tuple[SpatialDataset, np.ndarray]:
    """Draw a dataset and return it with its (n, m) true coefficient matrix.

    Locations are uniform on the square domain; each predictor column is a
    standard normal draw min-max rescaled to [0, 1]; the response adds
    N(0, noise_var) errors to ``sum_j x_j * beta_j``.
    """
    rng = np.random.default_rng(config.seed)
    lo, hi = config.domain
    n, m = config.n, config.m
    loc = rng.uniform(lo, hi, size=(n, 2))
    Z = rng.standard_normal((n, m))
    zmin = Z.min(axis=0)
    span = Z.max(axis=0) - zmin
    X = (Z - zmin) / np.where(span > 0, span, 1.0)
    X[:, span == 0] = 0.5
    beta = true_surfaces(loc, m, config.constant_c)
    eps = rng.normal(0.0, np.sqrt(config.noise_var), size=n)
    y = np.sum(X * beta, axis=1) + eps
    names = tuple(f"x{j}" for j in range(1, m + 1))
    return SpatialDataset(loc, y, X, names), beta
