"""Command-line entry point for running experiments and exporting plot data.

Subcommands: ``run`` (one seeded run), ``suite`` (variants x replications
with aggregation), ``export`` (plot-ready CSVs from stored runs). The
environment variables AURORA_QD_OUT and AURORA_QD_PARALLEL override the
output directory and worker count when set.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .config import load_run_config, load_suite_config
from .experiment import export_plot_data, run, run_suite

OUT_ENV = "AURORA_QD_OUT"
PARALLEL_ENV = "AURORA_QD_PARALLEL"


def build_parser():
    parser = argparse.ArgumentParser(
        prog="aurora-qd",
        description="Quality-diversity search with learned behavioral descriptors",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a single run from a config file")
    p_run.add_argument("--config", required=True, help="INI config file")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the seed from the config")
    p_run.add_argument("--out", default=None,
                       help="output directory (default: config, then $%s)" % OUT_ENV)
    p_run.add_argument("--quiet", action="store_true", help="suppress progress lines")

    p_suite = sub.add_parser("suite", help="run variants x replications and aggregate")
    p_suite.add_argument("--config", required=True, help="INI config file")
    p_suite.add_argument("--replications", type=int, default=None,
                         help="override the replication count")
    p_suite.add_argument("--parallel", type=int, default=None,
                         help="worker processes (default: config, then $%s)" % PARALLEL_ENV)
    p_suite.add_argument("--out", default=None, help="output directory")
    p_suite.add_argument("--quiet", action="store_true", help="suppress progress lines")

    p_export = sub.add_parser("export", help="write plot-ready CSVs from stored runs")
    p_export.add_argument("--runs", required=True, help="directory containing run outputs")
    p_export.add_argument("--metric", required=True,
                          choices=("klc", "diversity", "size", "rmse"))
    p_export.add_argument("--out", default=None,
                          help="output directory (default: <runs>/plots)")
    return parser


def _resolve_out(cli_value):
    if cli_value:
        return cli_value
    return os.environ.get(OUT_ENV) or None


def _cmd_run(args):
    config = load_run_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    record = run(config, out_dir=_resolve_out(args.out), verbose=not args.quiet)
    summary = record.summary
    value = summary["final_metric"]
    shown = "n/a" if value is None else f"{value:.6g}"
    print(f"{summary['variant']} seed={summary['seed']}: size={summary['final_size']} "
          f"{summary['metric']}={shown}")
    if record.out_dir:
        print(f"artifacts written to {record.out_dir}")
    return 0


def _cmd_suite(args):
    suite = load_suite_config(args.config)
    if args.replications is not None:
        suite = replace(suite, replications=args.replications)
    parallel = args.parallel
    if parallel is None and os.environ.get(PARALLEL_ENV):
        parallel = int(os.environ[PARALLEL_ENV])
    if parallel is not None:
        suite = replace(suite, parallel=parallel)
    result = run_suite(suite.validate(), out_dir=_resolve_out(args.out),
                       verbose=not args.quiet)
    for row in result.summary_rows:
        median = row["median"]
        shown = "n/a" if median is None else f"{median:.6g}"
        print(f"{row['variant']}: median={shown} (q1={row['q1']!r}, q3={row['q3']!r}, "
              f"n={row['n']})")
    if result.out_dir:
        print(f"artifacts written to {result.out_dir}")
    return 0


def _cmd_export(args):
    out = args.out or (os.path.join(args.runs, "plots"))
    written = export_plot_data(args.runs, args.metric, out)
    for path in written:
        print(path)
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": _cmd_run, "suite": _cmd_suite, "export": _cmd_export}
    try:
        return handlers[args.command](args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
