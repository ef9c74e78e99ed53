"""Blocked Gibbs sampler for the spatial group lasso.

One sweep updates, in order: every basis-coefficient block ``alpha_j``,
every group variance ``tau2_j``, the noise variance ``sigma2`` and the global
shrinkage ``lambda2``.

All data enter the sampler through :class:`PrecomputedBlocks`, the Gram
matrix ``K = B^T B`` and ``B^T y`` of the stacked design
``B = [X_1 Psi, ..., X_m Psi]``.  Each chain keeps ``K alpha`` as a running
cache, so the per-sweep cost does not depend on ``n``.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .data import FitConfig, Hyperparameters

__all__ = [
    "SamplerError",
    "PrecomputedBlocks",
    "SamplerState",
    "ChainSamples",
    "sample_gig_half",
    "init_state",
    "sample_alpha_block",
    "alpha_conditional",
    "sample_tau2",
    "sigma2_conditional",
    "sample_sigma2",
    "lambda2_conditional",
    "sample_lambda2",
    "gibbs_sweep",
    "run_chain",
    "run_chains",
    "chain_seed",
]

B_FLOOR = 1e-300
JITTER_START = 1e-10
JITTER_MAX = 1e-6


class SamplerError(RuntimeError):
    """A chain could not continue (e.g. a conditional precision is not positive definite)."""


# --------------------------------------------------------------------------
# GIG(-1/2, a, b) draws
# --------------------------------------------------------------------------

def sample_gig_half(a, b, rng, size=None):
    """Draw from GIG(p=-1/2, a, b) with density proportional to
    ``x**(-3/2) * exp(-(a*x + b/x) / 2)``.

    This is the inverse Gaussian law with mean ``sqrt(b/a)`` and shape ``b``.
    At ``a = 0`` the law is the (proper) inverse gamma with shape 1/2 and
    scale ``b/2``, drawn exactly as ``b / z**2``.  At ``b = 0`` the density
    is not normalisable; ``b`` is floored at 1e-300.

    Parameters
    ----------
    a, b : float or array_like
        Non-negative; broadcast against each other.
    rng : numpy.random.Generator
    size : int or tuple, optional

    Returns
    -------
    float or ndarray
    """
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    if np.any(~np.isfinite(a_arr)) or np.any(a_arr < 0):
        raise ValueError("GIG parameter a must be finite and non-negative")
    if np.any(~np.isfinite(b_arr)) or np.any(b_arr < 0):
        raise ValueError("GIG parameter b must be finite and non-negative")
    if np.any((a_arr == 0) & (b_arr == 0)):
        raise ValueError("GIG(-1/2, 0, 0) is improper")
    scalar = size is None and a_arr.ndim == 0 and b_arr.ndim == 0
    if size is None:
        size = np.broadcast(a_arr, b_arr).shape
    b_arr = np.maximum(b_arr, B_FLOOR)
    zero_a = a_arr == 0
    safe_a = np.where(zero_a, 1.0, a_arr)
    mean = np.sqrt(b_arr / safe_a)
    # both uniforms are consumed for every element so streams stay aligned
    z = rng.standard_normal(size)
    u = rng.random(size)
    t = mean * (z * z) / (2.0 * b_arr)
    root = 1.0 + t + np.sqrt(t * (t + 2.0))
    small = mean / root
    ig = np.where(u * (mean + small) <= mean, small, mean * root)
    with np.errstate(divide="ignore"):
        limit = b_arr / (z * z)
    out = np.where(zero_a | ~np.isfinite(mean), limit, ig)
    return float(out) if scalar else out


# --------------------------------------------------------------------------
# data blocks, state, samples
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PrecomputedBlocks:
    """Sufficient statistics of the stacked design.

    ``gram[jL:(j+1)L, jL:(j+1)L]`` is ``G_j = Psi^T X_j^T X_j Psi``.
    """

    gram: np.ndarray
    xty: np.ndarray
    yty: float
    y_var: float
    n: int
    m: int
    L: int

    @classmethod
    def from_design(cls, X, Psi, y) -> "PrecomputedBlocks":
        X = np.asarray(X, dtype=float)
        Psi = np.asarray(Psi, dtype=float)
        y = np.asarray(y, dtype=float).reshape(-1)
        if X.ndim == 1:
            X = X[:, None]
        n, m = X.shape
        L = Psi.shape[1]
        if Psi.shape[0] != n or y.shape[0] != n:
            raise ValueError("X, Psi and y disagree on n")
        B = stacked_design(X, Psi)
        gram = B.T @ B
        gram = 0.5 * (gram + gram.T)
        xty = (B.T @ y).reshape(m, L)
        y_var = float(np.var(y, ddof=1)) if n > 1 else 0.0
        gram.setflags(write=False)
        xty.setflags(write=False)
        return cls(gram, xty, float(y @ y), y_var, n, m, L)

    def G(self, j: int) -> np.ndarray:
        sl = slice(j * self.L, (j + 1) * self.L)
        return self.gram[sl, sl]


def stacked_design(X, Psi) -> np.ndarray:
    """``[X_1 Psi, ..., X_m Psi]`` with ``X_j = diag(x_j)``; shape (n, m L)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, m = X.shape
    return (X[:, :, None] * Psi[:, None, :]).reshape(n, m * Psi.shape[1])


@dataclass
class SamplerState:
    alpha: np.ndarray  # (m, L)
    tau2: np.ndarray  # (m,)
    sigma2: float
    lambda2: float
    k_alpha: np.ndarray  # cache of gram @ alpha.ravel()
    iteration: int = 0

    def copy(self) -> "SamplerState":
        return SamplerState(
            self.alpha.copy(), self.tau2.copy(), self.sigma2, self.lambda2, self.k_alpha.copy(), self.iteration
        )

    def refresh_cache(self, blocks: PrecomputedBlocks) -> None:
        self.k_alpha = blocks.gram @ self.alpha.ravel()


@dataclass
class ChainSamples:
    """Post-warmup draws of one chain.

    ``alpha`` has shape (T, m, L); ``tau2`` (T, m); ``sigma2`` and
    ``lambda2`` (T,).  ``complete`` is False when the run was interrupted.
    """

    alpha: np.ndarray
    tau2: np.ndarray
    sigma2: np.ndarray
    lambda2: np.ndarray
    chain_id: int = 0
    seed: int = 0
    complete: bool = True

    @property
    def n_samples(self) -> int:
        return self.sigma2.shape[0]

    @property
    def m(self) -> int:
        return self.alpha.shape[1]

    @property
    def L(self) -> int:
        return self.alpha.shape[2]


def init_state(blocks: PrecomputedBlocks, hyper: Hyperparameters, rng=None, jitter: bool = False) -> SamplerState:
    """Starting point: ``alpha = 0`` (or N(0, 0.01) jitter), ``tau2 = 1``,
    ``sigma2 = var(y)``, ``lambda2 = a_lambda / b_lambda``."""
    m, L = blocks.m, blocks.L
    if jitter:
        alpha = 0.1 * rng.standard_normal((m, L))
    else:
        alpha = np.zeros((m, L))
    sigma2 = blocks.y_var if blocks.y_var > 0 else 1.0
    state = SamplerState(alpha, np.ones(m), sigma2, hyper.a_lambda / hyper.b_lambda, np.zeros(m * L))
    state.refresh_cache(blocks)
    return state


# --------------------------------------------------------------------------
# full conditionals
# --------------------------------------------------------------------------

def _cholesky(P: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(P)
    except np.linalg.LinAlgError:
        pass
    L = P.shape[0]
    scale = np.trace(P) / L
    eps = JITTER_START
    while eps <= JITTER_MAX * (1 + 1e-9):
        try:
            return np.linalg.cholesky(P + eps * scale * np.eye(L))
        except np.linalg.LinAlgError:
            eps *= 10.0
    raise SamplerError(
        f"conditional precision not positive definite after jitter up to {JITTER_MAX:g}*trace/L "
        f"(trace={np.trace(P):.6g}, min diag={np.min(np.diag(P)):.6g})"
    )


def alpha_conditional(state: SamplerState, j: int, blocks: PrecomputedBlocks):
    """Mean and covariance of ``alpha_j`` given everything else.

    ``V_j = sigma2 (G_j + I/tau2_j)^{-1}`` and
    ``m_j = V_j Psi^T X_j^T r_j / sigma2`` with ``r_j`` the partial residual.
    Dense reference path; the sampler itself never forms the inverse.
    """
    L = blocks.L
    sl = slice(j * L, (j + 1) * L)
    G = blocks.G(j)
    rhs = blocks.xty[j] - state.k_alpha[sl] + G @ state.alpha[j]
    prec = G + np.eye(L) / state.tau2[j]
    V = state.sigma2 * np.linalg.inv(prec)
    return V @ rhs / state.sigma2, V


def sample_alpha_block(state: SamplerState, j: int, blocks: PrecomputedBlocks, rng) -> np.ndarray:
    """Draw ``alpha_j`` from its Gaussian full conditional; updates ``state`` in place."""
    L = blocks.L
    sl = slice(j * L, (j + 1) * L)
    G = blocks.gram[sl, sl]
    old = state.alpha[j]
    rhs = blocks.xty[j] - state.k_alpha[sl] + G @ old
    prec = G + np.diag(np.full(L, 1.0 / state.tau2[j]))
    C = _cholesky(prec)
    # alpha = C^{-T} (C^{-1} rhs + sigma z) has mean prec^{-1} rhs, cov sigma2 prec^{-1}
    w = solve_triangular(C, rhs, lower=True, check_finite=False)
    w += np.sqrt(state.sigma2) * rng.standard_normal(L)
    new = solve_triangular(C, w, lower=True, trans="T", check_finite=False)
    state.k_alpha += (new - old) @ blocks.gram[sl, :]
    state.alpha[j] = new
    return new


def sample_tau2(state: SamplerState, rng, j: int | None = None):
    """Draw ``gamma_j = 1/tau2_j ~ GIG(-1/2, |alpha_j|^2 / sigma2, lambda2)``.

    In the density convention of :func:`sample_gig_half` this is the
    inverse Gaussian with mean ``sqrt(lambda2 sigma2) / |alpha_j|`` and shape
    ``lambda2``.  With ``j=None`` all groups are updated.
    """
    idx = slice(None) if j is None else j
    sq = np.sum(np.atleast_2d(state.alpha[idx]) ** 2, axis=1)
    gamma = sample_gig_half(sq / state.sigma2, state.lambda2, rng, size=sq.shape)
    tau2 = 1.0 / gamma
    if j is None:
        state.tau2[:] = tau2
        return state.tau2
    state.tau2[j] = tau2[0]
    return state.tau2[j]


def residual_sum_of_squares(state: SamplerState, blocks: PrecomputedBlocks) -> float:
    a = state.alpha.ravel()
    rss = blocks.yty - 2.0 * float(blocks.xty.ravel() @ a) + float(a @ state.k_alpha)
    return max(rss, 0.0)


def sigma2_conditional(state: SamplerState, blocks: PrecomputedBlocks, hyper: Hyperparameters):
    """(shape, rate) of the Inverse-Gamma full conditional of ``sigma2``."""
    S = 0.5 * residual_sum_of_squares(state, blocks)
    S += 0.5 * float(np.sum(np.sum(state.alpha**2, axis=1) / state.tau2))
    shape = hyper.a_sigma + 0.5 * (blocks.n + blocks.m * blocks.L)
    return shape, hyper.b_sigma + S


def sample_sigma2(state: SamplerState, blocks: PrecomputedBlocks, hyper: Hyperparameters, rng) -> float:
    shape, rate = sigma2_conditional(state, blocks, hyper)
    state.sigma2 = rate / rng.gamma(shape)
    return state.sigma2


def lambda2_conditional(state: SamplerState, hyper: Hyperparameters, L: int):
    """(shape, rate) of the Gamma full conditional of ``lambda2``."""
    m = state.tau2.shape[0]
    return hyper.a_lambda + 0.5 * m * (L + 1), hyper.b_lambda + 0.5 * float(np.sum(state.tau2))


def sample_lambda2(state: SamplerState, hyper: Hyperparameters, L: int, rng) -> float:
    shape, rate = lambda2_conditional(state, hyper, L)
    state.lambda2 = rng.gamma(shape) / rate
    return state.lambda2


def gibbs_sweep(state: SamplerState, blocks: PrecomputedBlocks, hyper: Hyperparameters, rng) -> SamplerState:
    for j in range(blocks.m):
        sample_alpha_block(state, j, blocks, rng)
    sample_tau2(state, rng)
    sample_sigma2(state, blocks, hyper, rng)
    sample_lambda2(state, hyper, blocks.L, rng)
    state.iteration += 1
    return state


# --------------------------------------------------------------------------
# chains
# --------------------------------------------------------------------------

def chain_seed(seed: int, chain_id: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(chain_id,))


def run_chain(blocks: PrecomputedBlocks, config: FitConfig, chain_id: int = 0, rng=None,
              init: SamplerState | None = None) -> ChainSamples:
    """Run one chain for ``config.n_iter`` sweeps and keep the post-warmup draws.

    ``rng`` defaults to the stream keyed by ``(config.seed, chain_id)``.  A
    ``KeyboardInterrupt`` returns the draws collected so far with
    ``complete=False``.
    """
    if rng is None:
        rng = np.random.default_rng(chain_seed(config.seed, chain_id))
    hyper = config.hyper
    state = init.copy() if init is not None else init_state(blocks, hyper, rng, jitter=config.jitter_init)
    T = config.n_iter - config.warmup
    m, L = blocks.m, blocks.L
    alpha = np.empty((T, m, L))
    tau2 = np.empty((T, m))
    sigma2 = np.empty(T)
    lambda2 = np.empty(T)
    kept = 0
    complete = True
    try:
        for it in range(config.n_iter):
            gibbs_sweep(state, blocks, hyper, rng)
            if it >= config.warmup:
                alpha[kept] = state.alpha
                tau2[kept] = state.tau2
                sigma2[kept] = state.sigma2
                lambda2[kept] = state.lambda2
                kept += 1
    except SamplerError as exc:
        raise SamplerError(f"chain {chain_id} aborted at iteration {state.iteration}: {exc}") from exc
    except KeyboardInterrupt:
        complete = False
    return ChainSamples(alpha[:kept], tau2[:kept], sigma2[:kept], lambda2[:kept],
                        chain_id=chain_id, seed=config.seed, complete=complete)


def _run_chain_job(args):
    blocks, config, chain_id = args
    return run_chain(blocks, config, chain_id)


def default_n_jobs() -> int:
    env = os.environ.get("BSGL_N_JOBS")
    if env:
        return max(1, int(env))
    return 1


def run_chains(blocks: PrecomputedBlocks, config: FitConfig, n_jobs: int | None = None) -> list[ChainSamples]:
    """Run ``config.n_chains`` independent chains, returned in chain-id order.

    Each chain owns the RNG stream keyed by ``(config.seed, chain_id)`` so
    the result does not depend on ``n_jobs``.
    """
    n_jobs = default_n_jobs() if n_jobs is None else max(1, int(n_jobs))
    jobs = [(blocks, config, c) for c in range(config.n_chains)]
    if n_jobs == 1 or config.n_chains == 1:
        return [_run_chain_job(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(n_jobs, config.n_chains)) as pool:
        return list(pool.map(_run_chain_job, jobs))
