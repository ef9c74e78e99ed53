"""Convergence diagnostics: split-chain R-hat and effective sample size."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sampler import ChainSamples

__all__ = [
    "gelman_rubin",
    "effective_sample_size",
    "ConvergenceReport",
    "build_report",
    "parameter_table",
]


def _psrf(x: np.ndarray) -> np.ndarray:
    """PSRF for chains stacked as (C, N, P); returns shape (P,)."""
    C, N = x.shape[:2]
    means = x.mean(axis=1)
    W = x.var(axis=1, ddof=1).mean(axis=0)
    B = N * means.var(axis=0, ddof=1)
    V = (N - 1) / N * W + B / N
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.sqrt(V / W)
    zero_w = W == 0
    # zero within-chain variance: identical constants give 1, distinct means diverge
    r = np.where(zero_w & (B > 0), np.inf, r)
    r = np.where(zero_w & (B == 0), 1.0, r)
    return r


def _split(x: np.ndarray) -> np.ndarray:
    C, N = x.shape[:2]
    half = N // 2
    first = x[:, :half]
    second = x[:, N - half:]
    return np.concatenate([first, second], axis=0)


def gelman_rubin(chains, split: bool = True) -> float:
    """Potential scale reduction factor of one scalar parameter.

    Parameters
    ----------
    chains : array_like, shape (n_chains, n_draws)
        At least two chains of equal length >= 2 (>= 4 when ``split``).
    split : bool
        Halve every chain first, which also flags drift within a chain.

    Returns
    -------
    float
        ``inf`` when every chain is constant but the chain means differ.
    """
    x = np.asarray(chains, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need at least two chains as a (n_chains, n_draws) array")
    if x.shape[1] < (4 if split else 2):
        raise ValueError("chains are too short")
    if split:
        x = _split(x)
    return float(_psrf(x[:, :, None])[0])


def _autocorr(x: np.ndarray) -> np.ndarray:
    """Normalised autocorrelation along axis 0 for columns of ``x``."""
    n = x.shape[0]
    xc = x - x.mean(axis=0)
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, n=nfft, axis=0)
    acov = np.fft.irfft(f * np.conj(f), n=nfft, axis=0)[:n] / n
    return acov / acov[0]


def _geyer_ess(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Initial-positive-sequence ESS per column; also returns a degeneracy mask."""
    n, P = x.shape
    ess = np.full(P, float(n))
    degenerate = np.ptp(x, axis=0) == 0
    live = np.flatnonzero(~degenerate)
    if live.size == 0:
        return ess, degenerate
    rho = _autocorr(x[:, live])
    n_pairs = (n - 1) // 2
    for col, p in enumerate(live):
        r = rho[:, col]
        tau = -1.0
        prev = np.inf
        for k in range(n_pairs):
            gamma = r[2 * k] + r[2 * k + 1]
            if gamma <= 0:
                break
            # monotone sequence estimator
            gamma = min(gamma, prev)
            prev = gamma
            tau += 2.0 * gamma
        ess[p] = n / tau if tau > 0 else float(n)
    return np.minimum(ess, float(n)), degenerate


def effective_sample_size(chain) -> float:
    """Effective sample size of one chain (Geyer initial monotone sequence).

    Capped at the chain length; a constant chain has ESS equal to its length.
    """
    x = np.asarray(chain, dtype=float).reshape(-1)
    if x.size < 10:
        raise ValueError("chain must have at least 10 draws")
    ess, _ = _geyer_ess(x[:, None])
    return float(ess[0])


def parameter_table(samples: list[ChainSamples], names: tuple[str, ...] | None = None):
    """Stack every scalar parameter as a (C, T, P) array with labels."""
    m, L = samples[0].m, samples[0].L
    names = names or tuple(f"x{j + 1}" for j in range(m))
    labels = ["sigma2", "lambda2"]
    labels += [f"tau2[{names[j]}]" for j in range(m)]
    labels += [f"alpha[{names[j]},{l}]" for j in range(m) for l in range(L)]
    cols = []
    for s in samples:
        cols.append(np.column_stack([s.sigma2, s.lambda2, s.tau2, s.alpha.reshape(s.n_samples, m * L)]))
    return np.stack(cols), labels


@dataclass
class ConvergenceReport:
    rhat: dict[str, float]
    ess: dict[str, float]
    threshold: float = 1.1
    degenerate: list[str] = field(default_factory=list)

    @property
    def worst_rhat(self) -> float:
        return max(self.rhat.values()) if self.rhat else float("nan")

    @property
    def worst_parameter(self) -> str:
        return max(self.rhat, key=self.rhat.get)

    @property
    def passed(self) -> bool:
        return bool(self.worst_rhat < self.threshold)

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "passed": self.passed,
            "worst_rhat": self.worst_rhat,
            "worst_parameter": self.worst_parameter,
            "min_ess": min(self.ess.values()),
            "degenerate": list(self.degenerate),
            "rhat": {k: float(v) for k, v in self.rhat.items()},
            "ess": {k: float(v) for k, v in self.ess.items()},
        }


def build_report(samples: list[ChainSamples], threshold: float = 1.1,
                 names: tuple[str, ...] | None = None, split: bool = True) -> ConvergenceReport:
    """R-hat and ESS for sigma2, lambda2, every tau2_j and every alpha_jl.

    ESS is summed over chains.  Needs at least two chains of equal length.
    """
    if len(samples) < 2:
        raise ValueError("convergence report needs at least two chains")
    lengths = {s.n_samples for s in samples}
    if len(lengths) != 1:
        raise ValueError(f"chains have different lengths: {sorted(lengths)}")
    x, labels = parameter_table(samples, names)
    rhat = _psrf(_split(x) if split else x)
    ess = np.zeros(x.shape[2])
    degenerate = np.ones(x.shape[2], dtype=bool)
    for c in range(x.shape[0]):
        e, d = _geyer_ess(x[c])
        ess += e
        degenerate &= d
    return ConvergenceReport(
        rhat=dict(zip(labels, map(float, rhat))),
        ess=dict(zip(labels, map(float, ess))),
        threshold=threshold,
        degenerate=[lab for lab, d in zip(labels, degenerate) if d],
    )
