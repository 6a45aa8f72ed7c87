"""
Command-line interface of the ASSIST library.

Exit codes: 0 on success, 1 when an AssistException (or an I/O error) stops the
run, 2 on usage errors. Failures print one line ``error: <Name>: <message>`` to
standard error.
"""

import argparse
import json
import logging
import sys
import traceback
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from .bench import run_fig1a
from .client import Assist
from .completion import completion_mae, resolution_preset
from .config import AssistConfig
from .constants import ActivationPattern, LinkKind, LossKind, Metric, ResolutionPreset, ResponseKind
from .entities import CompletionModel, Dataset, Hyperparams, SignSeriesModel
from .exceptions import AssistException, ComputationException, ValidationException
from .grid import GridBuilder
from .simgen import FIXTURES, fixture_matrix, gen_network_latent, gen_regression, observe_uniformly
from .utils.converters import format_number, to_jsonable
from .utils.helpers import hash64, make_rng

logger = logging.getLogger("assist.cli")

# Draws written to the oracle file of the regression generator.
DEFAULT_ORACLE_DRAWS = 1000


def _int_list(text: str):
    return [int(item) for item in text.split(",") if item]


def _float_list(text: str):
    return [float(item) for item in text.split(",") if item]


def _add_hyperparam_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Flat JSON hyperparameter file")
    parser.add_argument("--r", type=int, help="Rank budget")
    parser.add_argument("--s", type=int, help="Row and column support budget")
    parser.add_argument("--s1", type=int, help="Row support budget")
    parser.add_argument("--s2", type=int, help="Column support budget")
    parser.add_argument("--H", type=int, help="Resolution; 2H+1 levels")
    parser.add_argument("--lambda", dest="lam", type=float, help="Ridge weight")
    parser.add_argument("--loss", choices=[k.value for k in LossKind if k is not LossKind.ZERO_ONE])
    parser.add_argument("--seed", type=int, help="Seed of the multi-start initialization")
    parser.add_argument("--n-starts", type=int, help="ADMM restarts per level")
    parser.add_argument("--max-admm-iters", type=int, help="ADMM iteration cap")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="assist", description="Trace regression by aggregated sign-series classifiers")
    parser.add_argument("--debug", action="store_true", help="Debug logging and full tracebacks")
    parser.add_argument("--jobs", type=int, help="Parallel per-level fits (-1 uses all cores)")
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)

    fit = sub.add_parser("fit", help="Fit a sign-series regression model")
    fit.add_argument("--data", required=True, help="Dataset file")
    fit.add_argument("--model", required=True, help="Output model file")
    fit.add_argument("--diagnostics", help="Output per-level diagnostics CSV")
    _add_hyperparam_flags(fit)
    fit.set_defaults(handler=_cmd_fit)

    predict = sub.add_parser("predict", help="Predict responses with a fitted model")
    predict.add_argument("--model", required=True, help="Model file")
    predict.add_argument("--data", required=True, help="Dataset file")
    predict.add_argument("--out", required=True, help="Output predictions CSV")
    predict.set_defaults(handler=_cmd_predict)

    complete = sub.add_parser("complete", help="Fit a completion model from observed entries")
    complete.add_argument("--triplets", required=True, help="Triplet file")
    complete.add_argument("--model", required=True, help="Output model file")
    complete.add_argument("--preset", choices=[k.value for k in ResolutionPreset], help="Resolution preset")
    complete.add_argument("--out", help="Output imputed matrix CSV")
    complete.add_argument("--diagnostics", help="Output per-level diagnostics CSV")
    _add_hyperparam_flags(complete)
    complete.set_defaults(handler=_cmd_complete)

    impute = sub.add_parser("impute", help="Impute a full matrix")
    source = impute.add_mutually_exclusive_group(required=True)
    source.add_argument("--model", help="Completion model file")
    source.add_argument("--triplets", help="Triplet file to fit on the fly")
    impute.add_argument("--preset", choices=[k.value for k in ResolutionPreset], help="Resolution preset")
    impute.add_argument("--out", help="Output imputed matrix CSV")
    impute.add_argument("--truth", help="Dense truth matrix CSV; prints the MAE")
    _add_hyperparam_flags(impute)
    impute.set_defaults(handler=_cmd_impute)

    tune = sub.add_parser("tune", help="Cross-validate a hyperparameter grid")
    tune.add_argument("--data", required=True, help="Dataset file")
    tune.add_argument("--grid", required=True, help="Grid JSON file")
    tune.add_argument("--folds", type=int, default=5)
    tune.add_argument("--metric", choices=[k.value for k in Metric], default=Metric.L1.value)
    tune.add_argument("--seed", type=int, default=0, help="Fold seed")
    tune.add_argument("--out", required=True, help="Output CV table CSV")
    tune.add_argument("--selected", help="Output JSON of the selected hyperparameters")
    tune.add_argument("--no-one-se", action="store_true", help="Select the best mean instead of the one-SE rule")
    tune.set_defaults(handler=_cmd_tune)

    simulate = sub.add_parser("simulate", help="Generate synthetic data")
    simulate.add_argument("generator", choices=["regression", "network", "matrix"])
    simulate.add_argument("--out", required=True, help="Output dataset (or triplet) file")
    simulate.add_argument("--truth", help="Output truth oracle file")
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--d", type=int, default=20)
    simulate.add_argument("--r", type=int, default=2)
    simulate.add_argument("--s", type=int, default=2)
    simulate.add_argument("--n", type=int, default=400)
    simulate.add_argument("--response", choices=[k.value for k in ResponseKind], default=ResponseKind.CONTINUOUS.value)
    simulate.add_argument("--link", choices=[k.value for k in LinkKind], default=LinkKind.SMOOTH.value)
    simulate.add_argument("--noise-sd", type=float, default=0.1)
    simulate.add_argument("--oracle-draws", type=int, default=DEFAULT_ORACLE_DRAWS)
    simulate.add_argument("--pattern", choices=[k.value for k in ActivationPattern], default=ActivationPattern.CROSS.value)
    simulate.add_argument("--sigma", type=float, default=0.5)
    simulate.add_argument("--fixture", choices=list(FIXTURES), default="max-graphon")
    simulate.add_argument("--missing-frac", type=float, default=0.2)
    simulate.set_defaults(handler=_cmd_simulate)

    rankdemo = sub.add_parser("rankdemo", help="Numerical ranks of transformed low-rank matrices")
    rankdemo.add_argument("--out", required=True, help="Output CSV")
    rankdemo.add_argument("--c-list", type=_float_list, default=[1.0, 5.0, 10.0, 20.0])
    rankdemo.add_argument("--d", type=int, default=50)
    rankdemo.add_argument("--r", type=int, default=5)
    rankdemo.add_argument("--seeds", type=_int_list, default=list(range(10)))
    rankdemo.set_defaults(handler=_cmd_rankdemo)
    return parser


def _hyperparams(assist: Assist, args: argparse.Namespace) -> Hyperparams:
    """Config file values, then command-line overrides."""
    hp = Hyperparams()
    if args.config:
        document = assist.file_client.read_json(args.config)
        # "s" is shorthand for s1 = s2.
        if "s" in document:
            support = document.pop("s")
            document.setdefault("s1", support)
            document.setdefault("s2", support)
        hp = Hyperparams.from_config(document)
    s1 = args.s1 if args.s1 is not None else args.s
    s2 = args.s2 if args.s2 is not None else args.s
    return hp.with_overrides(
        r=args.r,
        s1=s1,
        s2=s2,
        H=args.H,
        lam=args.lam,
        loss=args.loss,
        seed=args.seed,
        n_starts=args.n_starts,
        max_admm_iters=args.max_admm_iters,
    )


def _write_csv(assist: Assist, frame: pd.DataFrame, path: str) -> None:
    frame.to_csv(path, index=False, float_format=assist.config.float_format)


def _cmd_fit(assist: Assist, args: argparse.Namespace) -> int:
    data = assist.datasets.load(args.data)
    model, reports = assist.fit(data, _hyperparams(assist, args))
    assist.models.save(model, args.model)
    if args.diagnostics:
        _write_csv(assist, assist.reports_frame(reports), args.diagnostics)
    return 0


def _cmd_predict(assist: Assist, args: argparse.Namespace) -> int:
    model = assist.models.load(args.model)
    if not isinstance(model, SignSeriesModel):
        raise ValidationException(f"{args.model} holds a completion model; use impute")
    data = assist.datasets.load(args.data)
    predictions = assist.predict(model, data.predictors, data.covariates)
    _write_csv(assist, pd.DataFrame({"prediction": predictions}), args.out)
    return 0


def _fit_completion(assist: Assist, args: argparse.Namespace) -> CompletionModel:
    obs = assist.triplets.load(args.triplets)
    hp = _hyperparams(assist, args)
    if args.preset:
        hp = hp.with_overrides(H=resolution_preset(args.preset, obs.n_obs, max(obs.shape), hp.r))
    model, reports = assist.complete(obs, hp)
    if getattr(args, "diagnostics", None):
        _write_csv(assist, assist.reports_frame(reports), args.diagnostics)
    return model


def _cmd_complete(assist: Assist, args: argparse.Namespace) -> int:
    model = _fit_completion(assist, args)
    assist.models.save(model, args.model)
    if args.out:
        assist.matrices.save(assist.impute(model), args.out)
    return 0


def _cmd_impute(assist: Assist, args: argparse.Namespace) -> int:
    if args.model:
        model = assist.models.load(args.model)
        if not isinstance(model, CompletionModel):
            raise ValidationException(f"{args.model} holds a regression model; use predict")
    else:
        model = _fit_completion(assist, args)
    imputed = assist.impute(model)
    if args.out:
        assist.matrices.save(imputed, args.out)
    if args.truth:
        mae = completion_mae(imputed, assist.matrices.load(args.truth))
        print(f"mae,{format_number(mae, assist.config.float_format)}")
    return 0


def _cmd_tune(assist: Assist, args: argparse.Namespace) -> int:
    data = assist.datasets.load(args.data)
    grid = GridBuilder.from_config(assist.file_client.read_json(args.grid)).build()
    table, selected = assist.tune(data, grid, args.folds, args.metric, args.seed, use_one_se=not args.no_one_se)
    _write_csv(assist, table.to_frame(), args.out)
    if args.selected:
        assist.file_client.write_json(args.selected, selected.to_dict())
    else:
        print(json.dumps(to_jsonable(selected.to_dict()), sort_keys=True))
    return 0


def _cmd_simulate(assist: Assist, args: argparse.Namespace) -> int:
    if args.generator == "regression":
        data, truth = gen_regression(
            args.d, args.r, args.s, args.n, args.response, args.link, args.noise_sd, args.seed
        )
        assist.datasets.save(data, args.out)
        if args.truth:
            # Oracle samples: fresh predictors with their noise-free mean response.
            predictors = truth.sample_predictors(make_rng(hash64(args.seed, "oracle")), args.oracle_draws)
            oracle = Dataset.from_arrays(predictors, truth.mean_response(predictors))
            assist.datasets.save(oracle, args.truth)
    elif args.generator == "network":
        if args.truth:
            raise ValidationException("the network generator has no truth oracle")
        data = gen_network_latent(args.d, args.pattern, args.sigma, args.n, args.seed, args.seed)
        assist.datasets.save(data, args.out)
    else:
        matrix = fixture_matrix(args.fixture, args.d, args.seed, args.r)
        assist.triplets.save(observe_uniformly(matrix, args.missing_frac, args.seed), args.out)
        if args.truth:
            assist.matrices.save(matrix, args.truth)
    return 0


def _cmd_rankdemo(assist: Assist, args: argparse.Namespace) -> int:
    _write_csv(assist, run_fig1a(args.c_list, args.d, args.seeds, args.r), args.out)
    return 0


def _report(error: Exception, debug: bool) -> None:
    message = getattr(error, "error_message", str(error))
    print(f"error: {type(error).__name__}: {' '.join(str(message).split())}", file=sys.stderr)
    if debug:
        traceback.print_exc(file=sys.stderr)


def cli(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the ``assist`` command line.

    Args:
        argv: Arguments without the program name; sys.argv[1:] when None

    Returns:
        Exit code: 0 success, 1 runtime failure, 2 usage error
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    config = AssistConfig.from_env()
    if args.debug:
        config.debug = True
    if args.jobs is not None:
        config.n_jobs = args.jobs

    try:
        assist = Assist(config)
        logger.debug(f"Running {args.command}")
        return args.handler(assist, args)
    except (AssistException, OSError) as e:
        _report(e, config.debug)
        return 1
    except (np.linalg.LinAlgError, ArithmeticError, LookupError, ValueError) as e:
        _report(ComputationException(f"{type(e).__name__}: {e}"), config.debug)
        return 1


def main() -> None:
    sys.exit(cli())


if __name__ == "__main__":
    main()
