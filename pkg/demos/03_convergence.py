"""Inspect chain mixing.

Four chains are run from jittered starts.  The report lists split R-hat and
effective sample size for the variance parameters and the worst basis
coefficient; a short run is then compared against a longer one to show the
diagnostic shrinking towards one.
"""

from bsgl import FitConfig, SimConfig, fit, generate_dataset


def show(label, result):
    rep = result.report
    print(f"{label}: worst R-hat {rep.worst_rhat:.3f} ({rep.worst_parameter}), passed={rep.passed}")
    for name in ("sigma2", "lambda2", rep.worst_parameter):
        print(f"  {name:<14s} R-hat {rep.rhat[name]:.3f}  ESS {rep.ess[name]:8.1f}")
    print()


def main():
    data, _ = generate_dataset(SimConfig(n=600, m=4, seed=11))
    for n_iter in (300, 3000):
        config = FitConfig(per_dim_count=4, n_iter=n_iter, warmup=n_iter // 5, n_chains=4, seed=11)
        show(f"{n_iter} iterations", fit(data, config, standardize=False))


if __name__ == "__main__":
    main()
