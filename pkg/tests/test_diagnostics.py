"""Split-chain R-hat and effective sample size."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bsgl.diagnostics import build_report, effective_sample_size, gelman_rubin, parameter_table
from bsgl.sampler import ChainSamples


def ar1(n, phi, rng, chains=1):
    x = np.empty((chains, n))
    x[:, 0] = rng.standard_normal(chains) / np.sqrt(1 - phi**2)
    eps = rng.standard_normal((chains, n))
    for t in range(1, n):
        x[:, t] = phi * x[:, t - 1] + eps[:, t]
    return x


def fake_samples(rng, C=4, T=200, m=2, L=4, shift=0.0):
    out = []
    for c in range(C):
        out.append(ChainSamples(
            alpha=rng.standard_normal((T, m, L)) + (shift * c),
            tau2=rng.gamma(2.0, size=(T, m)),
            sigma2=rng.gamma(5.0, size=T),
            lambda2=rng.gamma(5.0, size=T),
            chain_id=c,
        ))
    return out


class TestRhat:
    def test_iid_chains_near_one(self):
        x = np.random.default_rng(0).standard_normal((4, 2000))
        assert gelman_rubin(x) < 1.01

    def test_divergent_chains(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((4, 1000)) + np.array([0.0, 5.0, 10.0, 15.0])[:, None]
        assert gelman_rubin(x) > 1.5

    def test_drift_within_chain_is_caught_by_splitting(self):
        rng = np.random.default_rng(2)
        trend = np.linspace(0, 10, 1000)
        x = rng.standard_normal((4, 1000)) + trend
        assert gelman_rubin(x, split=False) < 1.01
        assert gelman_rubin(x, split=True) > 1.5

    def test_constant_chains(self):
        assert gelman_rubin(np.ones((3, 10))) == 1.0
        assert gelman_rubin(np.array([[1.0] * 10, [2.0] * 10])) == np.inf

    def test_identical_chains(self):
        # with zero between-chain spread the estimate is sqrt((N-1)/N), just under 1
        row = np.random.default_rng(3).standard_normal(100)
        assert gelman_rubin(np.vstack([row, row]), split=False) == pytest.approx(np.sqrt(99 / 100))

    @pytest.mark.parametrize("shape", [(1, 100), (2, 3), (100,)])
    def test_bad_input(self, shape):
        with pytest.raises(ValueError):
            gelman_rubin(np.zeros(shape))

    @settings(max_examples=40, deadline=None)
    @given(scale=st.floats(1e-3, 1e3), shift=st.floats(-1e3, 1e3), seed=st.integers(0, 10_000))
    def test_affine_invariance(self, scale, shift, seed):
        x = np.random.default_rng(seed).standard_normal((3, 60)) + np.arange(3)[:, None] * 0.3
        assert gelman_rubin(scale * x + shift) == pytest.approx(gelman_rubin(x), rel=1e-9)

    def test_chain_order_invariance(self):
        x = np.random.default_rng(4).standard_normal((4, 100)) + np.arange(4)[:, None] * 0.2
        assert gelman_rubin(x[::-1]) == pytest.approx(gelman_rubin(x), rel=1e-12)


class TestESS:
    def test_ar1_matches_analytic(self):
        phi = 0.9
        n = 20_000
        ess = np.mean([effective_sample_size(c) for c in ar1(n, phi, np.random.default_rng(5), chains=5)])
        expected = n * (1 - phi) / (1 + phi)
        assert abs(ess - expected) / expected < 0.2

    def test_iid_close_to_n(self):
        x = np.random.default_rng(6).standard_normal(10_000)
        assert 0.9 <= effective_sample_size(x) / x.size <= 1.1

    def test_never_exceeds_n(self):
        # strongly anti-correlated draws would give ESS > N without the cap
        x = np.tile([1.0, -1.0], 500) + 1e-3 * np.random.default_rng(7).standard_normal(1000)
        assert effective_sample_size(x) <= 1000

    def test_constant_chain(self):
        assert effective_sample_size(np.full(50, 3.0)) == 50

    def test_too_short(self):
        with pytest.raises(ValueError):
            effective_sample_size(np.zeros(5))

    def test_scale_invariant(self):
        x = ar1(2000, 0.5, np.random.default_rng(8))[0]
        assert effective_sample_size(100 * x - 4) == pytest.approx(effective_sample_size(x), rel=1e-9)


class TestReport:
    def test_labels_cover_every_parameter(self):
        s = fake_samples(np.random.default_rng(9), m=2, L=4)
        x, labels = parameter_table(s, ("a", "b"))
        assert x.shape == (4, 200, 2 + 2 + 8)
        assert labels[:4] == ["sigma2", "lambda2", "tau2[a]", "tau2[b]"]
        assert labels[-1] == "alpha[b,3]"

    def test_mixed_chains_pass(self):
        rep = build_report(fake_samples(np.random.default_rng(10)))
        assert rep.passed
        assert rep.worst_rhat < 1.1
        assert set(rep.to_dict()) >= {"worst_rhat", "rhat", "ess", "passed", "worst_parameter"}

    def test_shifted_chains_fail(self):
        rep = build_report(fake_samples(np.random.default_rng(11), shift=3.0))
        assert not rep.passed
        assert rep.worst_parameter.startswith("alpha")

    def test_ess_summed_over_chains(self):
        rep = build_report(fake_samples(np.random.default_rng(12), C=4, T=500))
        assert 0.8 * 2000 < rep.ess["sigma2"] <= 2000

    def test_threshold_is_configurable(self):
        s = fake_samples(np.random.default_rng(13))
        assert not build_report(s, threshold=1.0).passed

    def test_needs_two_equal_chains(self):
        rng = np.random.default_rng(14)
        with pytest.raises(ValueError):
            build_report(fake_samples(rng, C=1))
        a, b = fake_samples(rng, C=2)
        b = ChainSamples(b.alpha[:-1], b.tau2[:-1], b.sigma2[:-1], b.lambda2[:-1], 1)
        with pytest.raises(ValueError, match="different lengths"):
            build_report([a, b])

    def test_degenerate_parameters_listed(self):
        s = fake_samples(np.random.default_rng(15), C=2)
        for c in s:
            c.alpha[:, 0, 0] = 0.0
        rep = build_report(s, names=("p", "q"))
        assert rep.degenerate == ["alpha[p,0]"]
        assert rep.rhat["alpha[p,0]"] == 1.0
