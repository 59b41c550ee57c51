'''
Monte-Carlo experiments over seeded network snapshots.

An experiment sweeps the number of CUs and APs, draws one snapshot per seed,
runs every listed algorithm on it and emits one summary row per run. Two kinds
exist: 'convergence' (iterations to converge against N) and 'throughput'
(sum rate against W, optionally compared with the exhaustive maximum T*).
'''

import logging
from collections import namedtuple

import numpy as np
import pandas as pd
from scipy import stats

from crncore import oracle, physics
from crncore.learn import run_algorithm
from crncore.model import generate_snapshot
from crncore.utils import multiprocess
from harness.config import (algorithm_from_config, default_experiments, large_experiments, load_defaults,
                            load_experiment_file, parse_algorithm_label, scale_cost, scenario_from_config,
                            validate_experiment)
from harness.data_writer import SUMMARY_COLUMNS, DataWriter

log = logging.getLogger(__name__)

GROUP_COLUMNS = ["experiment", "algo", "n", "w", "k"]
METRICS = ["iters_to_converge", "sum_rate", "ratio_to_Tstar"]

# algorithm carries its connection cost in bit/s; it is scaled per snapshot.
SnapshotJob = namedtuple("SnapshotJob", ["experiment", "algorithms", "n", "w", "k", "seed", "oracle",
                                         "scenario", "algorithm"])


def run_snapshot(job):
    """
    Runs every algorithm of a job on its snapshot.

    Returns:
        list of dict: One summary row per algorithm.
    """
    scenario = job.scenario.replace(num_cus=job.n, num_aps=job.w, num_channels=job.k)
    inst = generate_snapshot(scenario, job.seed)
    base = job.algorithm.log_base

    seps, t_star = None, float("nan")
    if job.oracle:
        result = oracle.exhaustive_sep(inst, number_of_workers=1, base=base)
        seps = dict(zip(result.table["association"], result.table["sep"]))
        t_star = result.sep

    rows = []
    for label in job.algorithms:
        name, cost = parse_algorithm_label(label)
        assoc, iterations = None, float("nan")
        if name == "closest":
            baseline = oracle.closest_ap_baseline(inst, d_min=scenario.d_min, base=base)
            assoc, sum_rate = baseline.assoc, baseline.sum_rate
        elif name == "multi":
            sum_rate = oracle.multi_connectivity_baseline(inst, schedule=job.algorithm.schedule(), base=base)
        else:
            bits = cost if cost is not None else job.algorithm.costs
            config = job.algorithm.replace(costs=scale_cost(bits, job.k))
            trace = run_algorithm(name, inst, config, job.seed)
            assoc = trace.assoc
            sum_rate = physics.sum_rate(inst, trace.assoc, trace.powers, base)
            if trace.converged:
                iterations = trace.iterations_to_converge

        sep = float("nan")
        if seps is not None and assoc is not None:
            sep = seps[oracle.encode_association(assoc)]
        # The multiple-connectivity network is not bounded by T*.
        ratio = sum_rate / t_star if job.oracle and name != "multi" else float("nan")
        rows.append({"experiment": job.experiment, "algo": label, "n": job.n, "w": job.w, "k": job.k,
                     "seed": job.seed, "iters_to_converge": iterations, "sum_rate": sum_rate, "sep": sep,
                     "ratio_to_Tstar": ratio})
    log.debug("Finished %s n=%d w=%d k=%d seed=%d" % (job.experiment, job.n, job.w, job.k, job.seed))
    return rows


def summary_frame(rows):
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


def aggregate_frame(summary):
    """
    Mean and standard error of every metric per (experiment, algo, n, w, k).
    """
    columns = GROUP_COLUMNS + ["runs", "converged"] + [
        "%s_%s" % (metric, stat) for metric in METRICS for stat in ("mean", "sem")]
    records = []
    for key, group in summary.groupby(GROUP_COLUMNS, sort=False):
        record = dict(zip(GROUP_COLUMNS, key))
        record["runs"] = len(group)
        record["converged"] = int(group["iters_to_converge"].notna().sum())
        for metric in METRICS:
            values = group[metric].dropna().to_numpy(dtype=np.float64)
            record[metric + "_mean"] = float(np.mean(values)) if values.size else float("nan")
            record[metric + "_sem"] = float(stats.sem(values)) if values.size > 1 else float("nan")
        records.append(record)
    return pd.DataFrame(records, columns=columns)


class Experiment:
    def __init__(self, simulate=False):
        self.simulate = simulate
        self.scenario = None
        self.algorithm = None
        self.experiments = []
        self.data_writer = None

    def initialize(self, experiment_path=None, config_path=None, large=False, out_dir=None):
        """
        Reads the defaults, the optional JSON experiment file and prepares the writer.
        """
        parser = load_defaults(config_path)
        content = {"scenario": {}, "algorithm": {}, "experiments": None}
        if experiment_path is not None:
            content = load_experiment_file(experiment_path)
        self.scenario = scenario_from_config(parser, content["scenario"])
        self.algorithm = algorithm_from_config(parser, 1, content["algorithm"])
        if large:
            experiments = large_experiments()
        elif content["experiments"] is None:
            experiments = default_experiments(parser)
        else:
            experiments = content["experiments"]
        self.experiments = [validate_experiment(e) for e in experiments]
        self.data_writer = DataWriter(out_dir or parser.get("output", "base_dir"), simulate=self.simulate)

    def jobs(self):
        jobs = []
        for experiment in self.experiments:
            first = int(experiment["first_seed"])
            for n in experiment["cus"]:
                for w in experiment["aps"]:
                    for seed in range(first, first + int(experiment["seeds"])):
                        jobs.append(SnapshotJob(experiment["name"], tuple(experiment["algorithms"]), int(n), int(w),
                                                int(experiment["channels"]), seed, bool(experiment["oracle"]),
                                                self.scenario, self.algorithm))
        return jobs

    def run(self, number_of_workers=None):
        """
        Runs every job and writes summary.csv, aggregate.csv and one plot script
        per experiment.

        Returns:
            DataFrame: The summary.
        """
        jobs = self.jobs()
        log.info("Running %d snapshots in %d experiments" % (len(jobs), len(self.experiments)))
        results = multiprocess(jobs, run_snapshot, number_of_workers, show_progress=True)
        summary = summary_frame([row for rows in results for row in rows])
        aggregate = aggregate_frame(summary)

        self.data_writer.write_summary(summary)
        self.data_writer.write_frame(aggregate, "aggregate.csv")
        for experiment in self.experiments:
            self.data_writer.write_plot_script(experiment["name"], experiment["kind"], experiment["algorithms"])
        return summary
