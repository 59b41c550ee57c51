'''
Per-iteration records of a learning run.
'''

from __future__ import absolute_import
import logging

import numpy as np
import pandas as pd

log = logging.getLogger(__name__)

TRACE_COLUMNS = ["iteration", "sum_rate", "potential", "num_switchers", "max_beta_gap", "converged_flag"]
FLOAT_FORMAT = "%.12g"


class RunTrace(object):
    """
    Trace of one run of a learning algorithm.

    Every iteration adds one row (see TRACE_COLUMNS, plus num_coalitions for
    J-JASPA). CUs listed in track_cus additionally get a row per iteration in
    the selection trace holding the AP they picked and their probability vector.

    After finish() the trace also holds the terminal association and powers, the
    converged flag, the iteration at which the association settled and the
    worst deviation gap of the terminal state.
    """

    def __init__(self, algorithm, seed, num_aps, track_cus=(), with_coalitions=False):
        self.algorithm = algorithm
        self.seed = seed
        self.num_aps = num_aps
        self.track_cus = tuple(int(i) for i in track_cus)
        self.with_coalitions = with_coalitions
        self.rows = []
        self.selections = []
        self.assoc = None
        self.powers = None
        self.converged = False
        self.iterations_to_converge = None
        self.jep_gap = float("nan")
        self.evictions = 0

    def record(self, iteration, sum_rate, potential, num_switchers, max_beta_gap, converged_flag, num_coalitions=None):
        row = [int(iteration), float(sum_rate), float(potential), int(num_switchers), float(max_beta_gap),
               int(bool(converged_flag))]
        if self.with_coalitions:
            row.append(int(num_coalitions or 0))
        self.rows.append(row)

    def record_selection(self, iteration, cu, ap, beta):
        if cu in self.track_cus:
            self.selections.append([int(iteration), int(cu), int(ap)] + [float(b) for b in beta])

    def finish(self, assoc, powers, converged, iterations_to_converge, jep_gap):
        self.assoc = np.array(assoc, dtype=np.int64)
        self.powers = np.array(powers, dtype=np.float64)
        self.converged = bool(converged)
        self.iterations_to_converge = iterations_to_converge
        self.jep_gap = float(jep_gap)
        if self.converged:
            log.info("%s (seed %d) converged after %d iterations, gap %.3g"
                     % (self.algorithm, self.seed, iterations_to_converge, jep_gap))
        else:
            log.warning("%s (seed %d) did not converge within %d iterations"
                        % (self.algorithm, self.seed, self.num_iterations))
        return self

    @property
    def num_iterations(self):
        return len(self.rows)

    @property
    def columns(self):
        return TRACE_COLUMNS + (["num_coalitions"] if self.with_coalitions else [])

    @property
    def final_sum_rate(self):
        return self.rows[-1][1] if self.rows else float("nan")

    @property
    def potentials(self):
        return np.array([row[2] for row in self.rows])

    def to_frame(self):
        return pd.DataFrame(self.rows, columns=self.columns)

    def selections_frame(self):
        columns = ["iteration", "cu", "ap"] + ["beta_%d" % w for w in range(self.num_aps)]
        return pd.DataFrame(self.selections, columns=columns)

    def to_csv(self, path):
        self.to_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT)

    def selections_to_csv(self, path):
        self.selections_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT)
