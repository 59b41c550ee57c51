import argparse
import logging
import os
import sys
from logging.config import dictConfig

import yaml

from harness.commands import EXIT_CONFIG, RUN_ALGORITHMS, cmd_experiment, cmd_run, cmd_verify
from harness.config import ConfigurationError
from harness.verify import MUTATIONS

LOGGING_CONFIG = os.path.join(os.path.dirname(os.path.abspath(__file__)), "harness", "logging.yaml")

log = logging.getLogger()


def _int_list(text):
    return [int(item) for item in text.split(",") if item.strip()]


def build_parser():
    parser = argparse.ArgumentParser(description="Joint AP selection and power allocation simulator.")
    parser.add_argument("--config", default=None, help="INI file with defaults (harness/config.ini).")
    commands = parser.add_subparsers(dest="command")
    commands.required = True

    run = commands.add_parser("run", help="Run one algorithm on one snapshot.")
    run.add_argument("--algo", default="jaspa", help="One of %s." % ", ".join(RUN_ALGORITHMS))
    run.add_argument("--n", type=int, default=None, help="Number of CUs.")
    run.add_argument("--w", type=int, default=None, help="Number of APs.")
    run.add_argument("--k", type=int, default=None, help="Number of channels.")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--memory", type=int, default=None, help="Memory length M.")
    run.add_argument("--cost", type=float, default=None, help="Connection cost in bit/s.")
    run.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    run.add_argument("--out", default=None, help="Trace CSV.")
    run.add_argument("--track", type=_int_list, default=None, help="Comma-separated CUs to trace.")
    run.add_argument("--selections-out", dest="selections_out", default=None, help="Selection trace CSV.")
    run.add_argument("--oracle-out", dest="oracle_out", default=None, help="Exhaustive oracle table CSV.")
    run.set_defaults(handler=cmd_run)

    experiment = commands.add_parser("experiment", help="Run Monte-Carlo experiments.")
    experiment.add_argument("experiment_file", nargs="?", default=None, help="JSON experiment file.")
    experiment.add_argument("--out", default=None, help="Output directory.")
    experiment.add_argument("--large", action="store_true", help="Use the large-scale presets.")
    experiment.add_argument("--simulate", action="store_true", help="Do not write any file.")
    experiment.set_defaults(handler=cmd_experiment)

    verify = commands.add_parser("verify", help="Run the acceptance suite.")
    verify.add_argument("--quick", action="store_true", help="Reduced seed counts.")
    verify.add_argument("--mutate", default=None, choices=MUTATIONS, help="Inject a known defect.")
    verify.add_argument("--only", type=_int_list, default=None, help="Comma-separated criterion numbers.")
    verify.set_defaults(handler=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigurationError as e:
        log.error("Configuration error: %s" % e)
        return EXIT_CONFIG


if __name__ == '__main__':
    dictConfig(yaml.safe_load(open(LOGGING_CONFIG)))
    sys.exit(main())
