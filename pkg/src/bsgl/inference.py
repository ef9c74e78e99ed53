"""Posterior coefficient surfaces, significance maps and evaluation metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSystem, design_block
from .data import Scaling, SpatialDataset
from .sampler import ChainSamples, stacked_design

__all__ = [
    "SurfaceDraws",
    "SignificanceMap",
    "Prediction",
    "pooled_alpha",
    "pooled_sigma2",
    "regular_grid",
    "surface_draws",
    "credible_interval",
    "significance_map",
    "significance_maps",
    "scp",
    "selection_metrics",
    "mspe",
    "mse_signal",
    "mse_noise",
    "posterior_mean_surfaces",
    "predict",
    "INFORMATIVE_SCP",
]

INFORMATIVE_SCP = 0.5
_CHUNK_ELEMENTS = 4_000_000


def pooled_alpha(samples: list[ChainSamples]) -> np.ndarray:
    """All post-warmup ``alpha`` draws, chains concatenated: (T, m, L)."""
    return np.concatenate([s.alpha for s in samples], axis=0)


def pooled_sigma2(samples: list[ChainSamples]) -> np.ndarray:
    return np.concatenate([s.sigma2 for s in samples])


def regular_grid(bbox, q: int = 50) -> np.ndarray:
    """Cell-centred ``q x q`` grid over ``(u_min, u_max, v_min, v_max)``, row-major in u."""
    u0, u1, v0, v1 = bbox
    du = (u1 - u0) / q
    dv = (v1 - v0) / q
    uu = u0 + du * (np.arange(q) + 0.5)
    vv = v0 + dv * (np.arange(q) + 0.5)
    U, V = np.meshgrid(uu, vv, indexing="ij")
    return np.column_stack([U.ravel(), V.ravel()])


@dataclass(frozen=True)
class SurfaceDraws:
    """Posterior draws of one coefficient surface on a grid.

    ``draws[t, g]`` is ``beta_j(s_g)`` under posterior sample ``t``.
    """

    j: int
    grid: np.ndarray
    draws: np.ndarray


def surface_draws(samples: list[ChainSamples], basis: BasisSystem, grid, j: int) -> SurfaceDraws:
    grid = np.asarray(grid, dtype=float).reshape(-1, 2)
    if grid.shape[0] == 0:
        raise ValueError("grid is empty")
    alpha_j = np.concatenate([s.alpha[:, j, :] for s in samples], axis=0)
    return SurfaceDraws(j, grid, alpha_j @ design_block(basis, grid).T)


def credible_interval(draws, ci_level: float = 0.95):
    """Equal-tailed interval from linearly interpolated quantiles along axis 0."""
    x = np.asarray(draws, dtype=float)
    if x.shape[0] == 0:
        raise ValueError("no draws")
    if not 0.0 < ci_level < 1.0:
        raise ValueError("ci_level must lie in (0, 1)")
    tail = 0.5 * (1.0 - ci_level)
    lo, hi = np.quantile(x, [tail, 1.0 - tail], axis=0)
    if np.ndim(lo) == 0:
        return float(lo), float(hi)
    return lo, hi


@dataclass(frozen=True)
class SignificanceMap:
    """Pointwise credible intervals of one predictor's surface.

    ``significant[g]`` is True when the interval at ``grid[g]`` lies strictly
    on one side of zero; an endpoint equal to zero counts as covering zero.
    """

    j: int
    name: str
    grid: np.ndarray
    mean: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    significant: np.ndarray
    ci_level: float

    @property
    def scp(self) -> float:
        return float(np.mean(self.significant))

    @property
    def informative(self) -> bool:
        return self.scp > INFORMATIVE_SCP


def _excludes_zero(lo, hi):
    return (lo > 0) | (hi < 0)


def significance_map(surfaces: SurfaceDraws, ci_level: float = 0.95, name: str | None = None) -> SignificanceMap:
    lo, hi = credible_interval(surfaces.draws, ci_level)
    lo, hi = np.atleast_1d(lo), np.atleast_1d(hi)
    return SignificanceMap(
        j=surfaces.j,
        name=name or f"x{surfaces.j + 1}",
        grid=surfaces.grid,
        mean=surfaces.draws.mean(axis=0),
        lo=lo,
        hi=hi,
        significant=_excludes_zero(lo, hi),
        ci_level=ci_level,
    )


def significance_maps(samples: list[ChainSamples], basis: BasisSystem, grid, ci_level: float = 0.95,
                      names=None, predictors=None) -> list[SignificanceMap]:
    """Significance maps for several predictors without holding every draw matrix at once."""
    grid = np.asarray(grid, dtype=float).reshape(-1, 2)
    alpha = pooled_alpha(samples)
    T, m, _ = alpha.shape
    names = names or tuple(f"x{j + 1}" for j in range(m))
    predictors = range(m) if predictors is None else predictors
    Psi = design_block(basis, grid)
    chunk = max(1, _CHUNK_ELEMENTS // T)
    tail = 0.5 * (1.0 - ci_level)
    out = []
    for j in predictors:
        G = grid.shape[0]
        mean = np.empty(G)
        lo = np.empty(G)
        hi = np.empty(G)
        aj = alpha[:, j, :]
        for start in range(0, G, chunk):
            sl = slice(start, min(G, start + chunk))
            d = aj @ Psi[sl].T
            mean[sl] = d.mean(axis=0)
            lo[sl], hi[sl] = np.quantile(d, [tail, 1.0 - tail], axis=0)
        out.append(SignificanceMap(j, names[j], grid, mean, lo, hi, _excludes_zero(lo, hi), ci_level))
    return out


def scp(smap: SignificanceMap) -> float:
    """Fraction of grid points whose credible interval excludes zero."""
    if smap.significant.size == 0:
        raise ValueError("empty significance map")
    return smap.scp


def selection_metrics(true_values, smap: SignificanceMap) -> tuple[float, float]:
    """Pointwise (F1, FPR) of the significance decisions against ``true_values != 0``.

    F1 is 0 when nothing is detected or there is no true signal; FPR is 0
    when there are no truly null locations.
    """
    truth = np.asarray(true_values, dtype=float).reshape(-1) != 0
    det = np.asarray(smap.significant, dtype=bool).reshape(-1)
    if truth.shape != det.shape:
        raise ValueError(f"truth has {truth.size} points, map has {det.size}")
    tp = np.sum(truth & det)
    fp = np.sum(~truth & det)
    fn = np.sum(truth & ~det)
    tn = np.sum(~truth & ~det)
    f1 = 0.0 if tp == 0 else 2.0 * tp / (2.0 * tp + fp + fn)
    fpr = 0.0 if fp + tn == 0 else fp / (fp + tn)
    return float(f1), float(fpr)


def mspe(predicted, observed) -> float:
    p = np.asarray(predicted, dtype=float).reshape(-1)
    o = np.asarray(observed, dtype=float).reshape(-1)
    if p.shape != o.shape or p.size == 0:
        raise ValueError("predicted and observed must be non-empty and of equal length")
    return float(np.mean((p - o) ** 2))


def mse_signal(estimated, true, signal=(0, 1, 2)) -> float:
    """Mean over signal predictors of the mean squared surface error.

    ``estimated`` and ``true`` are (n, m) matrices of coefficients at the
    data locations.
    """
    est = np.asarray(estimated, dtype=float)
    tru = np.asarray(true, dtype=float)
    if est.shape != tru.shape:
        raise ValueError("shape mismatch")
    idx = list(signal)
    return float(np.mean((est[:, idx] - tru[:, idx]) ** 2))


def mse_noise(estimated, noise=None) -> float:
    """Mean over null predictors of the mean squared estimated surface.

    ``noise`` defaults to predictors 4..m (0-based 3..m-1).
    """
    est = np.asarray(estimated, dtype=float)
    m = est.shape[1]
    if noise is None:
        if m <= 3:
            raise ValueError("no null predictors when m <= 3")
        noise = range(3, m)
    idx = list(noise)
    if not idx:
        raise ValueError("no null predictors given")
    return float(np.mean(est[:, idx] ** 2))


def posterior_mean_surfaces(samples: list[ChainSamples], basis: BasisSystem, locations) -> np.ndarray:
    """Posterior mean of every coefficient surface at ``locations``: (G, m)."""
    mean_alpha = pooled_alpha(samples).mean(axis=0)
    return design_block(basis, locations) @ mean_alpha.T


@dataclass(frozen=True)
class Prediction:
    mean: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    ci_level: float

    def coverage(self, observed) -> float:
        y = np.asarray(observed, dtype=float)
        return float(np.mean((y >= self.lo) & (y <= self.hi)))


def predict(samples: list[ChainSamples], basis: BasisSystem, dataset_new: SpatialDataset, scaling: Scaling | None,
            include_intercept: bool = False, ci_level: float = 0.95, rng=None) -> Prediction:
    """Posterior predictive mean and equal-tailed prediction intervals.

    ``dataset_new`` holds raw predictors; they are mapped with the training
    ``scaling`` record.  Each draw adds N(0, sigma2_t) noise to the linear
    predictor; the point prediction is the exact predictive mean.
    """
    if scaling is None:
        raise ValueError("a standardization record from the training data is required")
    rng = np.random.default_rng() if rng is None else rng
    X = scaling.apply(dataset_new.X)
    if include_intercept:
        X = np.column_stack([np.ones(X.shape[0]), X])
    alpha = pooled_alpha(samples)
    T, m, L = alpha.shape
    if X.shape[1] != m:
        raise ValueError(f"samples have {m} groups, new data give {X.shape[1]}")
    A = alpha.reshape(T, m * L)
    sd = np.sqrt(pooled_sigma2(samples))
    B = stacked_design(X, design_block(basis, dataset_new.locations))
    n = B.shape[0]
    mean = B @ A.mean(axis=0)
    lo = np.empty(n)
    hi = np.empty(n)
    tail = 0.5 * (1.0 - ci_level)
    chunk = max(1, _CHUNK_ELEMENTS // T)
    for start in range(0, n, chunk):
        sl = slice(start, min(n, start + chunk))
        draws = A @ B[sl].T
        draws += sd[:, None] * rng.standard_normal(draws.shape)
        lo[sl], hi[sl] = np.quantile(draws, [tail, 1.0 - tail], axis=0)
    return Prediction(mean, lo, hi, ci_level)
