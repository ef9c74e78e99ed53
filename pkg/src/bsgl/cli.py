"""Command-line entry point: ``bsgl simulate | cv | fit | report``.

Exit status: 0 success, 1 usage error, 2 data error, 3 convergence gate
failed under ``--strict`` (results are still written).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import asdict, replace
from pathlib import Path

from .basis import bbox_from_locations
from .data import FitConfig, Hyperparameters, train_test_split
from .diagnostics import build_report
from .inference import regular_grid, significance_maps
from .io import (
    DataError,
    RunManifest,
    ensure_writable,
    read_dataset,
    read_grid,
    read_model,
    read_samples,
    sha256_file,
    write_dataset,
    write_json,
    write_results,
    write_scp,
    write_significance,
    write_truth,
)
from .model import fit
from .sampler import SamplerError
from .simulate import SimConfig, generate_dataset
from .tuning import TuningGrid, cv_long_table, grid_search

log = logging.getLogger("bsgl")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_CONVERGENCE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _square(text: str) -> int:
    L = int(text)
    k = math.isqrt(L) if L > 0 else 0
    if k * k != L:
        raise argparse.ArgumentTypeError(f"L must be a perfect square, got {text}")
    return L


def _level(text: str) -> float:
    x = float(text)
    if not 0.0 < x < 1.0:
        raise argparse.ArgumentTypeError("level must lie in (0, 1)")
    return x


def _columns(p):
    g = p.add_argument_group("column roles")
    g.add_argument("--u", default="u", help="coordinate column (default: u)")
    g.add_argument("--v", default="v", help="coordinate column (default: v)")
    g.add_argument("--y", default="y", help="response column (default: y)")
    g.add_argument("--predictors", nargs="+", metavar="COL",
                   help="predictor columns in model order (default: all other columns)")


def _model_flags(p):
    g = p.add_argument_group("model")
    g.add_argument("--config", type=Path, help="JSON config to start from, e.g. best_config.json from `cv`")
    g.add_argument("--L", type=_square, help="basis functions per surface (perfect square; default 25)")
    g.add_argument("--degree", type=int, help="B-spline degree (default 3)")
    g.add_argument("--a-lambda", type=float, help="Gamma shape of the lambda^2 prior")
    g.add_argument("--b-lambda", type=float, help="Gamma rate of the lambda^2 prior")
    g.add_argument("--a-sigma", type=float, help="inverse-gamma shape of the sigma^2 prior")
    g.add_argument("--b-sigma", type=float, help="inverse-gamma scale of the sigma^2 prior")
    g.add_argument("--include-intercept", action="store_true", default=None,
                   help="add a spatially varying intercept surface")
    g.add_argument("--seed", type=int, help="master seed (default 0)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser = _Parser(prog="bsgl", description="Bayesian spatial group lasso for spatially varying coefficients.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="write a synthetic dataset and its true surfaces")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--m", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-var", type=float, default=0.1)
    p.add_argument("--constant-c", type=float, help="make the fourth coefficient this constant")
    p.add_argument("--domain", type=float, nargs=2, default=(0.0, 20.0), metavar=("LO", "HI"))
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")

    p = sub.add_parser("cv", parents=[common], help="k-fold grid search over L, a_lambda, b_lambda")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, default=Path("cv"))
    _columns(p)
    _model_flags(p)
    p.add_argument("--L-values", type=_square, nargs="+", default=[16, 25, 36, 49])
    p.add_argument("--a-values", type=float, nargs="+", default=[15.0, 30.0, 35.0, 40.0, 45.0])
    p.add_argument("--b-values", type=float, nargs="+", default=[0.01, 0.1, 1.0])
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--cv-iters", type=int, default=1000)
    p.add_argument("--cv-warmup", type=int, default=200)
    p.add_argument("--jobs", type=int, help="worker processes (default: BSGL_N_JOBS or 1)")

    p = sub.add_parser("fit", parents=[common], help="fit, diagnose and write surfaces and significance maps")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, default=Path("fit"))
    _columns(p)
    _model_flags(p)
    p.add_argument("--chains", type=int, help="number of chains (default 4)")
    p.add_argument("--iters", type=int, help="iterations per chain including warm-up (default 5000)")
    p.add_argument("--warmup", type=int, help="warm-up iterations discarded (default 500)")
    p.add_argument("--ci-level", type=_level, help="credible level of the maps (default 0.95)")
    p.add_argument("--test-fraction", type=float, default=0.2,
                   help="held-out share for predictions; 0 fits on every row (default 0.2)")
    p.add_argument("--grid-size", type=int,
                   help="evaluate maps on a q x q regular grid instead of the training locations")
    p.add_argument("--save-samples", action="store_true", help="also write samples.csv")
    p.add_argument("--no-standardize", action="store_true", help="use predictors as given")
    p.add_argument("--strict", action="store_true", help="exit 3 when the R-hat gate fails")
    p.add_argument("--rhat-threshold", type=float, default=1.1)
    p.add_argument("--jobs", type=int, help="worker processes (default: BSGL_N_JOBS or 1)")

    p = sub.add_parser("report", parents=[common], help="recompute significance from stored samples at a new level")
    p.add_argument("--samples", type=Path, required=True)
    p.add_argument("--model", type=Path, help="model.json (default: next to the samples)")
    p.add_argument("--grid", type=Path, help="grid.csv (default: next to the samples)")
    p.add_argument("--ci-level", type=_level, required=True)
    p.add_argument("--out", type=Path, help="output directory (default: report-<level> next to the samples)")
    p.add_argument("--rhat-threshold", type=float, default=1.1)
    return parser


def _config_from_args(args) -> FitConfig:
    base = FitConfig()
    if args.config is not None:
        try:
            base = FitConfig.from_dict(json.loads(args.config.read_text()))
        except FileNotFoundError as exc:
            raise DataError(f"no such file: {args.config}") from exc
        except (json.JSONDecodeError, TypeError, ValueError, KeyError) as exc:
            raise DataError(f"{args.config}: malformed config ({exc})") from exc
    hyper = asdict(base.hyper)
    for flag, key in (("a_lambda", "a_lambda"), ("b_lambda", "b_lambda"), ("a_sigma", "a_sigma"),
                      ("b_sigma", "b_sigma")):
        if getattr(args, flag) is not None:
            hyper[key] = getattr(args, flag)
    changes = {"hyper": Hyperparameters(**hyper)}
    if args.L is not None:
        changes["per_dim_count"] = math.isqrt(args.L)
    for flag, key in (("degree", "degree"), ("seed", "seed"), ("include_intercept", "include_intercept"),
                      ("chains", "n_chains"), ("iters", "n_iter"), ("warmup", "warmup"),
                      ("ci_level", "ci_level")):
        val = getattr(args, flag, None)
        if val is not None:
            changes[key] = val
    return replace(base, **changes)


def _load(args):
    return read_dataset(args.data, args.u, args.v, args.y, args.predictors)


def cmd_simulate(args) -> int:
    out = ensure_writable(args.out)
    sim = SimConfig(n=args.n, m=args.m, domain=tuple(args.domain), noise_var=args.noise_var,
                    constant_c=args.constant_c, seed=args.seed)
    data, beta = generate_dataset(sim)
    write_dataset(data, out / "data.csv")
    write_truth(data.locations, beta, data.predictor_names, out / "truth.csv")
    manifest = RunManifest(command="simulate", version=_version(), seed=args.seed, config=asdict(sim))
    for name in ("data.csv", "truth.csv"):
        manifest.add_output(out / name)
    manifest.write(out)
    log.info("wrote %d rows to %s", data.n, out / "data.csv")
    return EXIT_OK


def cmd_cv(args) -> int:
    out = ensure_writable(args.out)
    config = _config_from_args(args)
    grid = TuningGrid(tuple(args.L_values), tuple(args.a_values), tuple(args.b_values), args.folds,
                      args.cv_iters, args.cv_warmup)
    data = _load(args)
    t0 = time.perf_counter()
    best, table = grid_search(data, grid, config, n_jobs=args.jobs or 1)
    elapsed = time.perf_counter() - t0
    cv_long_table(table).to_csv(out / "cv_scores.csv", index=False, lineterminator="\n")
    write_json(best.to_dict(), out / "best_config.json")
    manifest = RunManifest(command="cv", version=_version(), seed=config.seed, config=config.to_dict(),
                           tuning=asdict(grid), timings={"cv": elapsed},
                           inputs={"data": {"path": str(args.data), "sha256": sha256_file(args.data)}})
    for name in ("cv_scores.csv", "best_config.json"):
        manifest.add_output(out / name)
    best_row = table.sort_values(["mean_mspe", "L", "a_lambda", "b_lambda"], kind="mergesort").iloc[0]
    manifest.extra["best_mean_mspe"] = float(best_row["mean_mspe"])
    manifest.extra["failed_combinations"] = int(table["failed"].sum())
    manifest.write(out)
    log.info("best L=%d a_lambda=%g b_lambda=%g", best.L, best.hyper.a_lambda, best.hyper.b_lambda)
    return EXIT_OK


def cmd_fit(args) -> int:
    out = ensure_writable(args.out)
    config = _config_from_args(args)
    if not 0.0 <= args.test_fraction < 1.0:
        raise UsageError("--test-fraction must lie in [0, 1)")
    data = _load(args)
    if config.bbox is None:
        # the domain comes from every location, including held-out ones
        config = replace(config, bbox=bbox_from_locations(data.locations, config.bbox_margin))
    test = None
    if args.test_fraction > 0:
        data, test = train_test_split(data, args.test_fraction, config.seed)
    result = fit(data, config, standardize=not args.no_standardize, n_jobs=args.jobs)
    if result.report is not None and args.rhat_threshold != result.report.threshold:
        result.report = build_report(result.samples, args.rhat_threshold, result.predictor_names)
    grid = regular_grid(result.basis.bbox, args.grid_size) if args.grid_size else None
    write_results(result, out, grid=grid, test=test, save_samples=args.save_samples,
                  inputs={"data": args.data})
    if result.report is not None:
        log.info("worst R-hat %.4f (%s)", result.report.worst_rhat, result.report.worst_parameter)
    if args.strict:
        if result.report is None:
            print("bsgl: --strict needs at least two chains", file=sys.stderr)
            return EXIT_CONVERGENCE
        if not result.report.passed:
            print(f"bsgl: convergence gate failed: R-hat {result.report.worst_rhat:.4f} for "
                  f"{result.report.worst_parameter} (threshold {result.report.threshold})", file=sys.stderr)
            return EXIT_CONVERGENCE
    return EXIT_OK


def cmd_report(args) -> int:
    here = args.samples.parent
    samples, names = read_samples(args.samples)
    basis, model_names, _, config = read_model(args.model or here / "model.json")
    if tuple(model_names) != tuple(names):
        raise DataError("samples and model list different predictors")
    grid = read_grid(args.grid or here / "grid.csv")
    out = ensure_writable(args.out or here / f"report-{args.ci_level:g}")
    maps = significance_maps(samples, basis, grid, args.ci_level, names)
    write_significance(maps, out / "significance.csv")
    write_scp(maps, out / "scp.json")
    outputs = ["significance.csv", "scp.json"]
    lengths = {s.n_samples for s in samples}
    if len(samples) >= 2 and len(lengths) == 1:
        write_json(build_report(samples, args.rhat_threshold, names).to_dict(), out / "convergence.json")
        outputs.append("convergence.json")
    manifest = RunManifest(command="report", version=_version(), seed=config.seed, config=config.to_dict(),
                           inputs={"samples": {"path": str(args.samples), "sha256": sha256_file(args.samples)}})
    manifest.extra["ci_level"] = args.ci_level
    for name in outputs:
        manifest.add_output(out / name)
    manifest.write(out)
    return EXIT_OK


def _version() -> str:
    from . import __version__
    return __version__


COMMANDS = {"simulate": cmd_simulate, "cv": cmd_cv, "fit": cmd_fit, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"bsgl: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, SamplerError) as exc:
        print(f"bsgl: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"bsgl: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        # invalid settings surface here from the config dataclasses
        print(f"bsgl: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
