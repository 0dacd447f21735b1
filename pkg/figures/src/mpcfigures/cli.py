"""One command per figure family; each takes --in CSV and --out image path."""

from __future__ import annotations

import argparse
import sys

from .csvio import FigureDataError
from .render import FigureSpec, render


def _main(family, kind, options, argv, default_in):
    parser = argparse.ArgumentParser(
        prog=f"fig-{family}",
        description=f"render the {family.replace('-', ' ')} figure")
    parser.add_argument("--in", dest="input", required=False,
                        default=default_in, help="input CSV path")
    parser.add_argument("--out", dest="output", required=True,
                        help="output image path (.png)")
    args = parser.parse_args(argv)
    spec = FigureSpec(inputs=(args.input,), kind=kind, output=args.output,
                      options=options | {"family": family})
    try:
        render(spec)
    except FigureDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def regret_disturbance(argv=None):
    return _main("regret-disturbance", "curves", {"setting": "disturbance"},
                 argv, "regret_curve.csv")


def regret_all(argv=None):
    return _main("regret-all", "curves", {"setting": "all"}, argv,
                 "regret_curve.csv")


def per_step(argv=None):
    return _main("per-step", "log-curves", {}, argv, "per_step.csv")


def table_mean_disturbance(argv=None):
    return _main("table-mean-disturbance", "table-heatmap",
                 {"value_column": "mean_regret", "setting": "disturbance"},
                 argv, "table_mean.csv")


def table_mean_all(argv=None):
    return _main("table-mean-all", "table-heatmap",
                 {"value_column": "mean_regret", "setting": "all"}, argv,
                 "table_mean.csv")


def table_std(argv=None):
    return _main("table-std", "table-heatmap",
                 {"value_column": "std_regret"}, argv, "table_std.csv")


def nn_error(argv=None):
    return _main("nn-error", "log-curves", {}, argv, "nn_error.csv")


def nn_regret(argv=None):
    return _main("nn-regret", "table-heatmap", {}, argv, "nn_regret.csv")
