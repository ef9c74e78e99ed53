"""Bayesian spatial group lasso for spatially varying coefficient regression.

Coefficient surfaces are tensor-product B-spline expansions whose basis
coefficients receive a group-lasso prior, one group per predictor.  A
blocked Gibbs sampler draws from the posterior; significance maps mark the
locations where a surface's credible interval excludes zero.
"""

from importlib.metadata import PackageNotFoundError, version

from .basis import BasisConfig, BasisSystem, build_basis, design_block
from .data import FitConfig, Hyperparameters, Scaling, SpatialDataset, standardize_predictors, train_test_split
from .diagnostics import ConvergenceReport, build_report, effective_sample_size, gelman_rubin
from .inference import predict, regular_grid, scp, selection_metrics, significance_maps
from .model import FitResult, fit
from .sampler import SamplerError, run_chains, sample_gig_half
from .simulate import SimConfig, generate_dataset, true_beta
from .tuning import TuningGrid, grid_search

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover - source checkout without install
    __version__ = "0.1.0"

__all__ = [
    "BasisConfig",
    "BasisSystem",
    "ConvergenceReport",
    "FitConfig",
    "FitResult",
    "Hyperparameters",
    "SamplerError",
    "Scaling",
    "SimConfig",
    "SpatialDataset",
    "TuningGrid",
    "build_basis",
    "build_report",
    "design_block",
    "effective_sample_size",
    "fit",
    "gelman_rubin",
    "generate_dataset",
    "grid_search",
    "predict",
    "regular_grid",
    "run_chains",
    "sample_gig_half",
    "scp",
    "selection_metrics",
    "significance_maps",
    "standardize_predictors",
    "train_test_split",
    "true_beta",
    "__version__",
]
