"""Command-line interface: ``lpep {fit,simulate,replicate,oracle,check-separation}``.

Exit codes: 0 success, 2 usage error, 3 data/configuration error,
4 numeric-failure budget exceeded. Errors are reported as a single line on
stderr of the form ``lpep: error: <message>``.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .errors import ConfigError, DataError, FailureBudgetError, NumericError
from .experiments import METRIC_FIELDS, replicate
from .glm import detect_separation
from .inference import summarize
from .io import DELTA_KINDS, RunConfig, load_csv, write_csv, write_json, write_metrics_csv
from .oracle import exact_model_posterior
from .priors import DeltaPrior
from .sampler import run_chains
from .simgen import Scenario, simulate

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_BUDGET = 0, 2, 3, 4
_SCENARIO_KEYS = {"n": int, "p": int, "p_true": int, "p-true": int, "r": float}


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _nonneg_int(s):
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {s}")
    return v


def _scenario_spec(text):
    """Parse ``n=500,p=20,p_true=5,r=0.75`` into a dict."""
    out = {}
    for part in filter(None, text.split(",")):
        key, sep, val = part.partition("=")
        key = key.strip()
        if not sep or key not in _SCENARIO_KEYS:
            raise argparse.ArgumentTypeError(f"bad scenario item {part!r}")
        try:
            out[key.replace("-", "_")] = _SCENARIO_KEYS[key](val)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad scenario value {part!r}") from None
    return out


def _add_scenario_args(sp):
    sp.add_argument("--scenario", type=_scenario_spec, default={},
                    help="shorthand such as n=500,p=20,p_true=5,r=0.75; "
                         "explicit flags take precedence")
    sp.add_argument("--n", type=_positive_int, default=None)
    sp.add_argument("--p", type=_positive_int, default=None)
    sp.add_argument("--p-true", type=int, choices=(0, 5, 10, 20), default=None)
    sp.add_argument("--r", type=float, default=None)


def _scenario_fields(args):
    vals = {"n": 500, "p": 20, "p_true": 5, "r": 0.0}
    vals.update(args.scenario)
    for k in vals:
        v = getattr(args, k)
        if v is not None:
            vals[k] = v
    return vals


def _add_data_args(sp):
    sp.add_argument("csv", help="input CSV with a header row")
    sp.add_argument("--response", default=None,
                    help="response column name or index (default: 'y', else last column)")
    sp.add_argument("--standardize", action="store_true",
                    help="center and scale covariates before fitting")


def _add_mcmc_args(sp, seed_required=False):
    sp.add_argument("--delta", choices=sorted(DELTA_KINDS), default="fixed",
                    help="prior on the power parameter delta")
    sp.add_argument("--seed", type=_nonneg_int, required=seed_required,
                    default=None if seed_required else 0)
    sp.add_argument("--iterations", type=_positive_int, default=131072,
                    help="total iterations per chain, burn-in included")
    sp.add_argument("--burn-in", type=_nonneg_int, default=10000)


def build_parser():
    ap = argparse.ArgumentParser(prog="lpep", description="Bayesian variable selection for logistic regression.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("fit", help="sample the posterior for a CSV dataset")
    _add_data_args(sp)
    _add_mcmc_args(sp)
    sp.add_argument("--chains", type=_positive_int, default=1)
    sp.add_argument("--threads", type=_positive_int, default=None)
    sp.add_argument("--beta-binomial", nargs=2, type=float, metavar=("A", "B"),
                    default=(1.0, 1.0), help="model-size prior parameters")
    sp.add_argument("--top", type=_positive_int, default=20,
                    help="number of models listed in the output")
    sp.add_argument("--output", "-o", default=None, help="JSON summary path (default stdout)")
    sp.add_argument("--draw-log", default=None, help="write post-burn-in draws to this CSV")

    sp = sub.add_parser("simulate", help="write one simulated dataset")
    _add_scenario_args(sp)
    sp.add_argument("--seed", type=_nonneg_int, default=0)
    sp.add_argument("--output", "--out", "-o", required=True)

    sp = sub.add_parser("replicate", help="run a replicated simulation study")
    _add_scenario_args(sp)
    sp.add_argument("--reps", type=_positive_int, required=True)
    sp.add_argument("--threads", type=_positive_int, default=None)
    _add_mcmc_args(sp, seed_required=True)
    sp.add_argument("--output", "-o", default=None, help="metrics CSV path (default stdout)")

    sp = sub.add_parser("oracle", help="exact posterior model probabilities (tiny n, p)")
    _add_data_args(sp)
    sp.add_argument("--delta", choices=sorted(DELTA_KINDS), default="fixed")
    sp.add_argument("--quad-order", type=_positive_int, default=32)

    sp = sub.add_parser("check-separation", help="report whether the data are separated")
    _add_data_args(sp)
    return ap


def _cmd_fit(args):
    rc = RunConfig(
        input_path=args.csv, response_column=args.response, delta_prior=args.delta,
        model_prior=tuple(args.beta_binomial), iterations=args.iterations,
        burn_in=args.burn_in, chains=args.chains, seed=args.seed,
        standardize=args.standardize, output_path=args.output, draw_log=args.draw_log,
    )
    data = load_csv(rc.input_path, rc.response_column, rc.standardize)
    cfg = rc.mcmc_config(data.n)
    draws = run_chains(data, cfg, rc.chains, args.threads)
    summ = summarize(draws)
    out = {
        "columns": ["(Intercept)"] + list(data.column_names),
        "n": data.n,
        "delta_prior": rc.delta_prior,
        "seed": rc.seed,
        "chains": rc.chains,
        "draws": len(draws),
        "numeric_failures": draws.numeric_failures,
        "acceptance": draws.acceptance_rates(),
    }
    out.update(summ.to_dict(args.top))
    write_json(out, rc.output_path)
    if rc.draw_log:
        draws.write_csv(rc.draw_log, cfg.burn_in)
    return EXIT_OK


def _cmd_simulate(args):
    sc = _scenario_fields(args)
    data, _ = simulate(Scenario(sc["n"], sc["p"], sc["p_true"], sc["r"], args.seed))
    write_csv(args.output, data)
    return EXIT_OK


def _cmd_replicate(args):
    if args.iterations <= args.burn_in:
        raise ValueError("need iterations > burn-in")
    sc = _scenario_fields(args)
    rows = replicate(
        sc["n"], sc["p"], sc["p_true"], sc["r"], args.reps, args.seed,
        DELTA_KINDS[args.delta], args.iterations, args.burn_in, args.threads,
    )
    write_metrics_csv(rows, METRIC_FIELDS, args.output)
    return EXIT_OK


def _cmd_oracle(args):
    data = load_csv(args.csv, args.response, args.standardize)
    res = exact_model_posterior(data, DeltaPrior(DELTA_KINDS[args.delta], data.n),
                                quad_order=args.quad_order)
    for bits, prob in sorted(res.model_posteriors.items()):
        print(f"{bits or '-'}\t{prob:.12f}")
    return EXIT_OK


def _cmd_check_separation(args):
    data = load_csv(args.csv, args.response, args.standardize)
    rep = detect_separation(data)
    w = rep.witness_direction
    write_json({
        "separated": rep.separated,
        "detector": rep.detector,
        "lp_objective": rep.lp_objective,
        "witness_direction": None if w is None else [float(v) for v in w],
    })
    return EXIT_OK


_COMMANDS = {
    "fit": _cmd_fit,
    "simulate": _cmd_simulate,
    "replicate": _cmd_replicate,
    "oracle": _cmd_oracle,
    "check-separation": _cmd_check_separation,
}


def _fail(msg, code):
    print(f"lpep: error: {' '.join(str(msg).split())}", file=sys.stderr)
    return code


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except FailureBudgetError as exc:
        return _fail(exc, EXIT_BUDGET)
    except (DataError, ConfigError, NumericError, ValueError) as exc:
        return _fail(exc, EXIT_DATA)
    except OSError as exc:
        return _fail(f"{exc.filename}: {exc.strerror}", EXIT_DATA)


if __name__ == "__main__":
    sys.exit(main())
