"""Choose the basis size and shrinkage prior by 5-fold cross-validation.

The grid here is deliberately small (two basis sizes, two prior shapes) so
the demo finishes in a few seconds on one core.  The long table printed at
the end has one row per (combination, fold).
"""

from bsgl import FitConfig, SimConfig, TuningGrid, generate_dataset, grid_search
from bsgl.tuning import cv_long_table


def main():
    data, _ = generate_dataset(SimConfig(n=800, m=5, seed=3))
    grid = TuningGrid(L_values=(16, 25), a_lambda_values=(15.0, 30.0), b_lambda_values=(0.1,),
                      cv_folds=5, cv_iters=800, cv_warmup=200)
    base = FitConfig(seed=3)
    best, table = grid_search(data, grid, base)

    print(table[["L", "a_lambda", "b_lambda", "mean_mspe"]].round(4).to_string(index=False))
    print()
    print(f"selected L={best.L}, a_lambda={best.hyper.a_lambda}, b_lambda={best.hyper.b_lambda}")
    print(cv_long_table(table).head(10).to_string(index=False))


if __name__ == "__main__":
    main()
