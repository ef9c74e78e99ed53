"""K-fold cross-validation over basis size and lambda^2 prior hyperparameters."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

from .basis import bbox_from_locations, design_block
from .data import FitConfig, SpatialDataset
from .inference import mspe
from .model import prepare
from .sampler import SamplerError, run_chain, stacked_design

__all__ = ["TuningGrid", "kfold_split", "grid_search", "cv_long_table", "PAPER_GRID"]


@dataclass(frozen=True)
class TuningGrid:
    L_values: tuple[int, ...] = (16, 25, 36, 49)
    a_lambda_values: tuple[float, ...] = (15.0, 30.0, 35.0, 40.0, 45.0)
    b_lambda_values: tuple[float, ...] = (0.01, 0.1, 1.0)
    cv_folds: int = 5
    cv_iters: int = 1000
    cv_warmup: int = 200

    def __post_init__(self):
        for L in self.L_values:
            k = math.isqrt(int(L))
            if k * k != L:
                raise ValueError(f"L={L} is not a perfect square")
        if not (self.L_values and self.a_lambda_values and self.b_lambda_values):
            raise ValueError("tuning grid is empty")
        if self.cv_folds < 2:
            raise ValueError("need at least two folds")
        if not 0 <= self.cv_warmup < self.cv_iters:
            raise ValueError("need 0 <= cv_warmup < cv_iters")

    def combinations(self) -> list[tuple[int, float, float]]:
        return list(itertools.product(self.L_values, self.a_lambda_values, self.b_lambda_values))

    def __len__(self) -> int:
        return len(self.L_values) * len(self.a_lambda_values) * len(self.b_lambda_values)


PAPER_GRID = TuningGrid()


def kfold_split(n: int, k: int, seed: int = 0) -> list[np.ndarray]:
    """Random partition of ``range(n)`` into ``k`` folds whose sizes differ by at most one."""
    if k < 1 or k > n:
        raise ValueError(f"cannot make {k} folds from {n} rows")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(f) for f in np.array_split(perm, k)]


def _fold_mspe(dataset: SpatialDataset, train_idx, test_idx, config: FitConfig, stream) -> float:
    train = dataset.subset(train_idx)
    test = dataset.subset(test_idx)
    data, scaling, basis, blocks = prepare(train, config, standardize=True)
    samples = [run_chain(blocks, config, chain_id=0, rng=np.random.default_rng(stream))]
    X = scaling.apply(test.X)
    if config.include_intercept:
        X = np.column_stack([np.ones(X.shape[0]), X])
    mean_alpha = samples[0].alpha.mean(axis=0)
    pred = stacked_design(X, design_block(basis, test.locations)) @ mean_alpha.ravel()
    return mspe(pred, test.y)


def _score_combo(args):
    idx, (L, a, b), dataset, folds, base, grid = args
    config = replace(
        base,
        per_dim_count=math.isqrt(L),
        hyper=replace(base.hyper, a_lambda=a, b_lambda=b),
        n_iter=grid.cv_iters,
        warmup=grid.cv_warmup,
        n_chains=1,
    )
    n = dataset.n
    scores = []
    failed = False
    for f, test_idx in enumerate(folds):
        train_idx = np.setdiff1d(np.arange(n), test_idx, assume_unique=True)
        stream = np.random.SeedSequence(base.seed, spawn_key=(1, idx, f))
        try:
            scores.append(_fold_mspe(dataset, train_idx, test_idx, config, stream))
        except (SamplerError, np.linalg.LinAlgError):
            scores.append(math.inf)
            failed = True
    return idx, scores, failed


def grid_search(dataset: SpatialDataset, grid: TuningGrid, base_config: FitConfig, n_jobs: int = 1,
                order=None):
    """Score every (L, a_lambda, b_lambda) by mean held-fold MSPE.

    Each fold fit is a single chain of ``grid.cv_iters`` sweeps.  The RNG
    stream of fold ``f`` of combination ``i`` is keyed by ``(seed, i, f)``,
    so the table does not depend on evaluation order or ``n_jobs``.

    Returns
    -------
    best : FitConfig
        ``base_config`` with the winning ``per_dim_count``, ``a_lambda``, ``b_lambda``.
        When ``base_config.bbox`` is unset the returned config carries the
        bounding box of all rows of ``dataset``.
    table : pandas.DataFrame
        One row per combination: L, a_lambda, b_lambda, per-fold MSPEs,
        mean_mspe and a ``failed`` flag.  Ties go to smaller L, then a, then b.
    """
    if base_config.bbox is None:
        # one basis domain for every fold, so held-out rows never fall outside it
        base_config = replace(base_config, bbox=bbox_from_locations(dataset.locations, base_config.bbox_margin))
    combos = grid.combinations()
    folds = kfold_split(dataset.n, grid.cv_folds, base_config.seed)
    order = list(range(len(combos))) if order is None else list(order)
    jobs = [(i, combos[i], dataset, folds, base_config, grid) for i in order]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_score_combo, jobs))
    else:
        results = [_score_combo(job) for job in jobs]
    results.sort(key=lambda r: r[0])
    rows = []
    for idx, scores, failed in results:
        L, a, b = combos[idx]
        row = {"L": L, "a_lambda": a, "b_lambda": b}
        row.update({f"mspe_fold{f}": s for f, s in enumerate(scores)})
        row["mean_mspe"] = math.inf if failed else float(np.mean(scores))
        row["failed"] = failed
        rows.append(row)
    table = pd.DataFrame(rows)
    ranked = table.sort_values(["mean_mspe", "L", "a_lambda", "b_lambda"], kind="mergesort")
    top = ranked.iloc[0]
    best = replace(
        base_config,
        per_dim_count=math.isqrt(int(top["L"])),
        hyper=replace(base_config.hyper, a_lambda=float(top["a_lambda"]), b_lambda=float(top["b_lambda"])),
    )
    return best, table


def cv_long_table(table: pd.DataFrame) -> pd.DataFrame:
    """Reshape a score table to one row per (combination, fold)."""
    fold_cols = [c for c in table.columns if c.startswith("mspe_fold")]
    long = table.melt(id_vars=["L", "a_lambda", "b_lambda", "mean_mspe"], value_vars=fold_cols,
                      var_name="fold", value_name="mspe")
    long["fold"] = long["fold"].str.replace("mspe_fold", "", regex=False).astype(int)
    long = long.sort_values(["L", "a_lambda", "b_lambda", "fold"], kind="mergesort")
    return long[["L", "a_lambda", "b_lambda", "fold", "mspe", "mean_mspe"]].reset_index(drop=True)
