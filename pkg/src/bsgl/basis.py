"""Tensor-product B-spline bases over a rectangular spatial domain.

Each coefficient surface is expanded as ``beta(z) = sum_l alpha_l psi_l(z)``
where ``psi_l`` is the product of a clamped B-spline in ``u`` and one in
``v``.  Basis index ``l`` enumerates the ``k x k`` tensor grid in row-major
order, ``l = iu * k + iv``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BSpline

__all__ = [
    "BasisConfig",
    "BasisSystem",
    "OutOfDomainWarning",
    "build_basis",
    "clamped_knots",
    "evaluate_basis",
    "design_block",
    "bbox_from_locations",
]


class OutOfDomainWarning(UserWarning):
    """Locations outside the basis bounding box were clamped onto it."""


@dataclass(frozen=True)
class BasisConfig:
    """Size, degree and domain of a tensor-product basis.

    Parameters
    ----------
    per_dim_count : int
        Number of B-splines ``k`` along each axis; ``L = k**2``.
    degree : int
        Polynomial degree of the 1-D splines (3 = cubic).
    bbox : tuple of float
        ``(u_min, u_max, v_min, v_max)``.
    """

    per_dim_count: int
    degree: int = 3
    bbox: tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0)

    def __post_init__(self):
        k, d = int(self.per_dim_count), int(self.degree)
        if d < 0:
            raise ValueError(f"degree must be non-negative, got {d}")
        if k < d + 1:
            raise ValueError(
                f"per_dim_count={k} is too small for degree {d}; need at least {d + 1}"
            )
        u0, u1, v0, v1 = (float(b) for b in self.bbox)
        if not (np.isfinite([u0, u1, v0, v1]).all() and u0 < u1 and v0 < v1):
            raise ValueError(f"degenerate bounding box {self.bbox}")
        object.__setattr__(self, "per_dim_count", k)
        object.__setattr__(self, "degree", d)
        object.__setattr__(self, "bbox", (u0, u1, v0, v1))

    @property
    def L(self) -> int:
        return self.per_dim_count**2


def clamped_knots(lo: float, hi: float, count: int, degree: int) -> np.ndarray:
    """Clamped knot vector with uniformly spaced interior knots.

    The vector has ``count + degree + 1`` entries with the boundary knots
    repeated ``degree + 1`` times.
    """
    n_interior = count - degree - 1
    interior = np.linspace(lo, hi, n_interior + 2)[1:-1]
    return np.concatenate([np.full(degree + 1, lo), interior, np.full(degree + 1, hi)])


@dataclass(frozen=True)
class BasisSystem:
    config: BasisConfig
    knots_u: np.ndarray
    knots_v: np.ndarray

    @property
    def L(self) -> int:
        return self.config.L

    @property
    def per_dim_count(self) -> int:
        return self.config.per_dim_count

    @property
    def degree(self) -> int:
        return self.config.degree

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        return self.config.bbox


def build_basis(config: BasisConfig) -> BasisSystem:
    k, d = config.per_dim_count, config.degree
    u0, u1, v0, v1 = config.bbox
    ku = clamped_knots(u0, u1, k, d)
    kv = clamped_knots(v0, v1, k, d)
    ku.setflags(write=False)
    kv.setflags(write=False)
    return BasisSystem(config=config, knots_u=ku, knots_v=kv)


def bbox_from_locations(locations, margin: float = 0.0) -> tuple[float, float, float, float]:
    """Bounding box of ``locations`` expanded by ``margin`` times each side length."""
    loc = np.asarray(locations, dtype=float).reshape(-1, 2)
    lo = loc.min(axis=0)
    hi = loc.max(axis=0)
    pad = margin * (hi - lo)
    return (float(lo[0] - pad[0]), float(hi[0] + pad[0]), float(lo[1] - pad[1]), float(hi[1] + pad[1]))


def _clamp(basis: BasisSystem, loc: np.ndarray) -> np.ndarray:
    u0, u1, v0, v1 = basis.bbox
    lo = np.array([u0, v0])
    hi = np.array([u1, v1])
    # tolerate round-off from coordinate transforms
    tol = 1e-12 * (hi - lo)
    outside = ((loc < lo - tol) | (loc > hi + tol)).any(axis=1)
    n_out = int(outside.sum())
    if n_out:
        warnings.warn(
            f"{n_out} location(s) outside the basis bounding box were clamped",
            OutOfDomainWarning,
            stacklevel=3,
        )
    return np.clip(loc, lo, hi)


def _axis_matrix(knots: np.ndarray, count: int, degree: int, x: np.ndarray) -> np.ndarray:
    return BSpline.design_matrix(x, knots, degree, extrapolate=False).toarray()[:, :count]


def design_block(basis: BasisSystem, locations) -> np.ndarray:
    """Evaluate every basis function at every location.

    Parameters
    ----------
    basis : BasisSystem
    locations : array_like, shape (n, 2)

    Returns
    -------
    ndarray, shape (n, L)
        Row ``i`` is ``(psi_1(z_i), ..., psi_L(z_i))``.  Locations outside
        the bounding box are clamped onto it with an ``OutOfDomainWarning``.
    """
    loc = np.asarray(locations, dtype=float).reshape(-1, 2)
    if loc.shape[0] == 0:
        raise ValueError("need at least one location")
    if not np.isfinite(loc).all():
        raise ValueError("locations must be finite")
    loc = _clamp(basis, loc)
    k, d = basis.per_dim_count, basis.degree
    bu = _axis_matrix(basis.knots_u, k, d, loc[:, 0])
    bv = _axis_matrix(basis.knots_v, k, d, loc[:, 1])
    return (bu[:, :, None] * bv[:, None, :]).reshape(loc.shape[0], k * k)


def evaluate_basis(basis: BasisSystem, location) -> np.ndarray:
    """Basis vector of length ``L`` at a single ``(u, v)`` location."""
    return design_block(basis, np.asarray(location, dtype=float).reshape(1, 2))[0]
