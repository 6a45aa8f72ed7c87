"""
Desk-scale experiment runners and the ``assist-bench`` command.

Every runner is seed-deterministic and returns a pandas DataFrame with a fixed
column schema:

- fig5: n, r, s, seed, l1, baseline
- fig5 summary: n, r, s, mean, se, baseline_mean
- fig1a: seed, c, numerical_rank, sign_invariant
- completion: fixture, missing_frac, r, seed, assist_mae, hard_impute_mae, soft_impute_mae
- dimension: d, seed, l1, baseline
"""

import argparse
import logging
import sys
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from .completion import completion_mae, fit_completion, impute, resolution_preset
from .constants import LinkKind, LossKind
from .entities import Hyperparams
from .estimator import fit
from .simgen import (
    best_constant_l1,
    fixture_matrix,
    gen_low_rank,
    gen_monotone_transform,
    gen_regression,
    l1_error,
    numerical_rank,
    observe_uniformly,
    soft_impute_baseline,
    svd_impute_baseline,
)
from .utils.helpers import hash64, sgn

logger = logging.getLogger("assist.bench")

# Monte Carlo draws for the L1 error of one replicate.
EVAL_DRAWS = 20_000

# Solver settings of the regression replicates when no template is given.
BENCH_HYPERPARAMS = Hyperparams(n_starts=1, max_admm_iters=50, max_inner_iters=200, rho_growth=1.15)


def _map(function, tasks, n_jobs: int):
    if n_jobs != 1:
        return Parallel(n_jobs=n_jobs)(delayed(function)(*task) for task in tasks)
    return [function(*task) for task in tasks]


def _regression_replicate(d, n, r, s, seed, link, hp):
    data, truth = gen_regression(d, r, s, n, link=link, seed=seed)
    model = fit(data, hp.with_overrides(r=r, s1=s, s2=s, seed=seed))
    eval_seed = hash64(seed, "eval")
    return l1_error(model, truth, EVAL_DRAWS, eval_seed), best_constant_l1(truth, EVAL_DRAWS, eval_seed)


def run_fig5(
    seeds: Sequence[int],
    n_list: Sequence[int],
    d: int = 20,
    rs_list: Sequence[Tuple[int, int]] = ((2, 2),),
    link: str = LinkKind.SMOOTH,
    hp: Optional[Hyperparams] = None,
    n_jobs: int = 1,
) -> pd.DataFrame:
    """
    L1 prediction error against sample size for the trace-regression simulator.

    Args:
        seeds: Replicate seeds
        n_list: Sample sizes
        d: Matrix dimension
        rs_list: (r, s) pairs; the fitted budgets match the truth
        link: smooth or step
        hp: Template hyperparameters
        n_jobs: joblib workers over replicates

    Returns:
        Long table with one row per (n, r, s, seed)
    """
    hp = hp or BENCH_HYPERPARAMS
    tasks = [(d, n, r, s, seed, link, hp) for n in n_list for r, s in rs_list for seed in seeds]
    results = _map(_regression_replicate, tasks, n_jobs)
    rows = []
    for (_, n, r, s, seed, _, _), (l1, baseline) in zip(tasks, results):
        logger.info(f"fig5 n={n} r={r} s={s} seed={seed}: l1={l1:.4f} baseline={baseline:.4f}")
        rows.append({"n": n, "r": r, "s": s, "seed": seed, "l1": l1, "baseline": baseline})
    return pd.DataFrame(rows, columns=["n", "r", "s", "seed", "l1", "baseline"])


def summarize(table: pd.DataFrame, keys: Sequence[str], value: str = "l1") -> pd.DataFrame:
    """
    Mean and standard error of a column per group.

    Args:
        table: Long table
        keys: Grouping columns
        value: Column to summarize

    Returns:
        Table with keys, mean, se and baseline_mean when a baseline column exists
    """
    grouped = table.groupby(list(keys), sort=True)
    summary = grouped[value].agg(["mean", "std", "count"]).reset_index()
    summary["se"] = summary["std"].fillna(0.0) / np.sqrt(summary["count"])
    summary = summary.drop(columns=["std", "count"])
    if "baseline" in table.columns:
        summary["baseline_mean"] = grouped["baseline"].mean().values
    return summary


def run_fig1a(c_list: Sequence[float], d: int = 50, seeds: Sequence[int] = range(10), r: int = 5) -> pd.DataFrame:
    """
    Numerical rank of the logistic transform g_c(B) of a rank-r matrix.

    Also checks that sgn(g_c(B) - g_c(pi)) equals sgn(B - pi) at the levels of a
    10-level grid.

    Args:
        c_list: Transform slopes
        d: Dimension
        seeds: Seeds of B
        r: Rank of B

    Returns:
        Table with one row per (seed, c)
    """
    levels = np.linspace(-1.0, 1.0, 11)
    rows = []
    for seed in seeds:
        B = gen_low_rank(d, r, seed)
        B = B / np.abs(B).max()
        for c in c_list:
            transformed = gen_monotone_transform(B, c)
            invariant = all(
                np.array_equal(sgn(transformed - gen_monotone_transform(level, c)), sgn(B - level)) for level in levels
            )
            rank = numerical_rank(transformed)
            rows.append({"seed": seed, "c": c, "numerical_rank": rank, "sign_invariant": invariant})
    return pd.DataFrame(rows, columns=["seed", "c", "numerical_rank", "sign_invariant"])


def _completion_replicate(fixture, d, missing_frac, r, seed, H, loss):
    truth = fixture_matrix(fixture, d, seed)
    obs = observe_uniformly(truth, missing_frac, hash64(seed, "mask"))
    hp = Hyperparams(r=r, H=H, loss=loss, seed=seed)
    estimate = fit_completion(obs, hp)
    return (
        completion_mae(impute(estimate), truth),
        completion_mae(svd_impute_baseline(obs, r), truth),
        completion_mae(soft_impute_baseline(obs), truth),
    )


def run_completion_bench(
    fixture: str = "max-graphon",
    missing_frac: float = 0.2,
    r_list: Sequence[int] = (2,),
    seeds: Sequence[int] = range(10),
    d: int = 40,
    H: Optional[int] = 10,
    loss: str = LossKind.HINGE,
    n_jobs: int = 1,
) -> pd.DataFrame:
    """
    Completion MAE of the sign-series estimate against hard and soft impute.

    Args:
        fixture: Fixture name (see simgen.fixture_matrix)
        missing_frac: Fraction of unobserved entries
        r_list: Rank budgets, shared by all methods
        seeds: Replicate seeds
        d: Dimension
        H: Resolution; the default preset when None
        loss: Surrogate loss
        n_jobs: joblib workers over replicates

    Returns:
        Table with one row per (r, seed)
    """
    tasks = []
    for r in r_list:
        for seed in seeds:
            level_h = H
            if level_h is None:
                n_obs = int(round((1.0 - missing_frac) * d * d))
                level_h = resolution_preset("default", max(n_obs, 1), d, r)
            tasks.append((fixture, d, missing_frac, r, seed, level_h, loss))
    results = _map(_completion_replicate, tasks, n_jobs)
    rows = []
    for (_, _, _, r, seed, _, _), (assist_mae, hard_mae, soft_mae) in zip(tasks, results):
        logger.info(f"completion {fixture} r={r} seed={seed}: assist={assist_mae:.4f} hard={hard_mae:.4f}")
        rows.append({
            "fixture": fixture,
            "missing_frac": missing_frac,
            "r": r,
            "seed": seed,
            "assist_mae": assist_mae,
            "hard_impute_mae": hard_mae,
            "soft_impute_mae": soft_mae,
        })
    columns = ["fixture", "missing_frac", "r", "seed", "assist_mae", "hard_impute_mae", "soft_impute_mae"]
    return pd.DataFrame(rows, columns=columns)


def run_dimension_sweep(
    d_list: Sequence[int],
    n: int = 400,
    r: int = 2,
    s: int = 2,
    seeds: Sequence[int] = range(10),
    hp: Optional[Hyperparams] = None,
    n_jobs: int = 1,
) -> pd.DataFrame:
    """
    L1 prediction error against the matrix dimension at fixed n.

    Args:
        d_list: Dimensions
        n: Sample size
        r: Rank
        s: Support
        seeds: Replicate seeds
        hp: Template hyperparameters
        n_jobs: joblib workers over replicates

    Returns:
        Table with one row per (d, seed)
    """
    hp = hp or BENCH_HYPERPARAMS
    tasks = [(d, n, r, s, seed, LinkKind.SMOOTH, hp) for d in d_list for seed in seeds]
    results = _map(_regression_replicate, tasks, n_jobs)
    rows = [
        {"d": task[0], "seed": task[4], "l1": l1, "baseline": baseline}
        for task, (l1, baseline) in zip(tasks, results)
    ]
    return pd.DataFrame(rows, columns=["d", "seed", "l1", "baseline"])


def _int_list(text: str):
    return [int(item) for item in text.split(",") if item]


def _float_list(text: str):
    return [float(item) for item in text.split(",") if item]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="assist-bench", description="Desk-scale ASSIST experiments")
    parser.add_argument("--out", required=True, help="Output CSV path")
    parser.add_argument("--seeds", type=_int_list, default=list(range(10)), help="Comma-separated seeds")
    parser.add_argument("--jobs", type=int, default=1, help="Parallel replicates")
    sub = parser.add_subparsers(dest="experiment", required=True)

    fig5 = sub.add_parser("fig5", help="L1 error against n")
    fig5.add_argument("--n-list", type=_int_list, default=[150, 400])
    fig5.add_argument("--d", type=int, default=20)
    fig5.add_argument("--rs", type=_int_list, default=[2], help="Comma-separated r=s values")
    fig5.add_argument("--link", choices=[k.value for k in LinkKind], default=LinkKind.SMOOTH.value)
    fig5.add_argument("--summary", action="store_true", help="Write mean/se per (n, r, s)")

    fig1a = sub.add_parser("fig1a", help="Numerical rank of transformed low-rank matrices")
    fig1a.add_argument("--c-list", type=_float_list, default=[1, 5, 10, 20])
    fig1a.add_argument("--d", type=int, default=50)

    completion = sub.add_parser("completion", help="Completion MAE against baselines")
    completion.add_argument("--fixture", default="max-graphon")
    completion.add_argument("--missing-frac", type=float, default=0.2)
    completion.add_argument("--r-list", type=_int_list, default=[2])
    completion.add_argument("--d", type=int, default=40)
    completion.add_argument("--H", type=int, default=10)

    dimension = sub.add_parser("dimension", help="L1 error against d")
    dimension.add_argument("--d-list", type=_int_list, default=[10, 20, 30])
    dimension.add_argument("--n", type=int, default=400)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point of ``assist-bench``.

    Returns:
        Exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    if args.experiment == "fig5":
        table = run_fig5(args.seeds, args.n_list, args.d, [(v, v) for v in args.rs], args.link, n_jobs=args.jobs)
        if args.summary:
            table = summarize(table, ["n", "r", "s"])
    elif args.experiment == "fig1a":
        table = run_fig1a(args.c_list, args.d, args.seeds)
    elif args.experiment == "completion":
        table = run_completion_bench(
            args.fixture, args.missing_frac, args.r_list, args.seeds, args.d, args.H, n_jobs=args.jobs
        )
    else:
        table = run_dimension_sweep(args.d_list, args.n, seeds=args.seeds, n_jobs=args.jobs)
    table.to_csv(args.out, index=False, float_format="%.17g")
    return 0


if __name__ == "__main__":
    sys.exit(main())
