'''
Sub-commands of crn.py.

Exit codes: 0 on success or convergence, 2 when a run did not converge or a
verification criterion failed, 1 on configuration errors.
'''

import logging
import os

from crncore import oracle, physics
from crncore.learn import run_algorithm
from crncore.model import generate_snapshot
from harness.config import BASELINES, ConfigurationError, algorithm_from_config, load_defaults, scenario_from_config
from harness.data_writer import DataWriter
from harness.experiment import Experiment, summary_frame
from harness.verify import run_suite

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NOT_CONVERGED = 2

RUN_ALGORITHMS = ("jaspa", "se", "si", "jjaspa") + BASELINES


def _writer_for(path):
    directory = os.path.dirname(os.path.abspath(path))
    return DataWriter(directory), os.path.basename(path)


def cmd_run(args):
    """
    Runs one algorithm on one snapshot and writes its trace.
    """
    if args.algo not in RUN_ALGORITHMS:
        raise ConfigurationError("Unknown algorithm %s, expected one of %s" % (args.algo, ", ".join(RUN_ALGORITHMS)))
    parser = load_defaults(args.config)
    scenario = scenario_from_config(parser, {"num_cus": args.n, "num_aps": args.w, "num_channels": args.k,
                                             "seed": args.seed})
    if scenario.num_channels < scenario.num_aps:
        raise ConfigurationError("K=%d channels cannot be split among W=%d APs"
                                 % (scenario.num_channels, scenario.num_aps))
    algorithm = algorithm_from_config(parser, scenario.num_channels,
                                      {"memory": args.memory, "cost": args.cost, "max_iters": args.max_iters},
                                      track_cus=args.track or ())
    for i in algorithm.track_cus:
        if not 0 <= i < scenario.num_cus:
            raise ConfigurationError("Cannot track CU %d in a network of %d CUs" % (i, scenario.num_cus))

    inst = generate_snapshot(scenario, scenario.seed)
    log.info("Running %s on N=%d W=%d K=%d seed=%d" % (args.algo, inst.num_cus, inst.num_aps, inst.num_channels,
                                                       scenario.seed))

    if args.oracle_out:
        writer, filename = _writer_for(args.oracle_out)
        writer.write_oracle_table(oracle.exhaustive_sep(inst, base=algorithm.log_base).table, filename)

    if args.algo in BASELINES:
        if args.algo == "closest":
            sum_rate = oracle.closest_ap_baseline(inst, d_min=scenario.d_min, base=algorithm.log_base).sum_rate
        else:
            sum_rate = oracle.multi_connectivity_baseline(inst, schedule=algorithm.schedule(), base=algorithm.log_base)
        log.info("%s sum rate %.6g" % (args.algo, sum_rate))
        if args.out:
            writer, filename = _writer_for(args.out)
            writer.write_summary(summary_frame([{
                "experiment": "run", "algo": args.algo, "n": inst.num_cus, "w": inst.num_aps,
                "k": inst.num_channels, "seed": scenario.seed, "iters_to_converge": float("nan"),
                "sum_rate": sum_rate, "sep": float("nan"), "ratio_to_Tstar": float("nan")}]), filename)
        return EXIT_OK

    trace = run_algorithm(args.algo, inst, algorithm, scenario.seed)
    log.info("Terminal sum rate %.6g, potential %.6g"
             % (physics.sum_rate(inst, trace.assoc, trace.powers, algorithm.log_base),
                physics.system_potential(inst, trace.assoc, trace.powers, algorithm.log_base)))
    if args.out:
        writer, filename = _writer_for(args.out)
        writer.write_trace(trace, filename)
    if args.selections_out:
        writer, filename = _writer_for(args.selections_out)
        writer.write_selections(trace, filename)
    return EXIT_OK if trace.converged else EXIT_NOT_CONVERGED


def cmd_experiment(args):
    """
    Runs the experiments of a JSON file (or the defaults) and writes the summary,
    the aggregate and the plot scripts.
    """
    experiment = Experiment(simulate=args.simulate)
    experiment.initialize(args.experiment_file, args.config, large=args.large, out_dir=args.out)
    summary = experiment.run()
    log.info("Experiments produced %d summary rows" % len(summary))
    return EXIT_OK


def cmd_verify(args):
    """
    Runs the acceptance suite; nonzero exit if any criterion fails.
    """
    only = set(args.only) if args.only else None
    try:
        outcomes = run_suite(quick=args.quick, mutate=args.mutate, only=only)
    except ValueError as e:
        raise ConfigurationError(str(e))
    failed = [outcome.name for outcome in outcomes if not outcome.passed]
    if failed:
        log.error("%d of %d criteria failed: %s" % (len(failed), len(outcomes), "; ".join(failed)))
        return EXIT_NOT_CONVERGED
    log.info("All %d criteria passed" % len(outcomes))
    return EXIT_OK
