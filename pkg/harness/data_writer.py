import logging
import os

from crncore.trace import FLOAT_FORMAT

log = logging.getLogger(__name__)

SUMMARY_COLUMNS = ["experiment", "algo", "n", "w", "k", "seed", "iters_to_converge", "sum_rate", "sep",
                   "ratio_to_Tstar"]

_PLOT_AXES = {
    "convergence": ("n", "iters_to_converge_mean", "Number of CUs", "Iterations to converge"),
    "throughput": ("w", "sum_rate_mean", "Number of APs", "Sum rate (bit/s/Hz)"),
}


class DataWriter:
    """
    Writes traces, summaries, oracle tables and gnuplot scripts below one directory.

    With simulate set nothing touches the disk; the target paths are only logged.
    """

    def __init__(self, base_dir, simulate=False):
        self.base_dir = base_dir
        self.simulate = simulate
        self.initialize()

    def initialize(self):
        self.makedirs_if_not_exists(self.base_dir)

    def path(self, filename):
        return os.path.join(self.base_dir, filename)

    def write_frame(self, frame, filename):
        path = self.path(filename)
        if self.simulate:
            log.info("Simulating write of %d rows to %s" % (len(frame), path))
            return path
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
        log.info("Wrote %d rows to %s" % (len(frame), path))
        return path

    def write_trace(self, trace, filename="trace.csv"):
        return self.write_frame(trace.to_frame(), filename)

    def write_selections(self, trace, filename="selections.csv"):
        return self.write_frame(trace.selections_frame(), filename)

    def write_summary(self, frame, filename="summary.csv"):
        return self.write_frame(frame[SUMMARY_COLUMNS], filename)

    def write_oracle_table(self, table, filename="oracle.csv"):
        return self.write_frame(table, filename)

    def write_plot_script(self, experiment, kind, algorithms, aggregate_filename="aggregate.csv"):
        """
        Writes a gnuplot script drawing one line per algorithm from the aggregate CSV.
        """
        path = self.path("%s.gp" % experiment)
        text = plot_script(experiment, kind, algorithms, aggregate_filename)
        if self.simulate:
            log.info("Simulating write of plot script %s" % path)
            return path
        with open(path, "w") as f:
            f.write(text)
        log.info("Wrote plot script %s" % path)
        return path

    def makedirs_if_not_exists(self, path):
        if self.simulate:
            return
        if not os.path.exists(path):
            os.makedirs(path)


def plot_script(experiment, kind, algorithms, aggregate_filename="aggregate.csv"):
    """
    Gnuplot commands plotting the mean of one experiment against its sweep
    variable, with standard-error bars.
    """
    x, y, xlabel, ylabel = _PLOT_AXES[kind]
    error = y.replace("_mean", "_sem")
    lines = [
        "set datafile separator ','",
        "set terminal pngcairo size 800,600",
        "set output '%s.png'" % experiment,
        "set xlabel '%s'" % xlabel,
        "set ylabel '%s'" % ylabel,
        "set title '%s'" % experiment,
    ]
    plots = []
    for algo in algorithms:
        selection = "(strcol('experiment') eq '%s' && strcol('algo') eq '%s' ? column('%s') : 1/0)" % (
            experiment, algo, x)
        plots.append("'%s' using %s:(column('%s')):(column('%s')) with yerrorlines title '%s'"
                     % (aggregate_filename, selection, y, error, algo))
    if plots:
        lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"
