import json
import os
import shutil
import tempfile
import time
import unittest
from unittest import mock

import numpy as np
import pandas as pd

import crn
from crncore import oracle, physics
from crncore.utils import THREADS_VARIABLE, multiprocess, worker_count
from harness import config
from harness.data_writer import SUMMARY_COLUMNS, DataWriter, plot_script
from harness.experiment import Experiment, aggregate_frame
from harness.verify import cost_tradeoff, inner_optimality, jjaspa_convergence, mutation, run_suite


def _square(x):
    return x * x


class TestConfig(unittest.TestCase):

    def setUp(self):
        self.parser = config.load_defaults()

    def test_missing_file(self):
        with self.assertRaises(config.ConfigurationError):
            config.load_defaults("/nonexistent/config.ini")

    def test_unknown_scenario_key(self):
        with self.assertRaises(config.ConfigurationError):
            config.scenario_from_config(self.parser, {"bandwidth": 3})

    def test_invalid_scenario_value(self):
        with self.assertRaises(config.ConfigurationError):
            config.scenario_from_config(self.parser, {"num_aps": 0})

    def test_overrides(self):
        scenario = config.scenario_from_config(self.parser, {"num_cus": 4, "seed": None})
        self.assertEqual(scenario.num_cus, 4)
        self.assertEqual(scenario.seed, 0)

    def test_cost_is_scaled_by_channels(self):
        algorithm = config.algorithm_from_config(self.parser, 4, {"cost": 3.0})
        self.assertEqual(algorithm.costs, 0.75)
        self.assertEqual(config.scale_cost(5, 10), 0.5)

    def test_algorithm_labels(self):
        self.assertEqual(config.parse_algorithm_label("jaspa"), ("jaspa", None))
        self.assertEqual(config.parse_algorithm_label("jaspa_c3"), ("jaspa", 3.0))
        self.assertEqual(config.parse_algorithm_label("si_c0.5"), ("si", 0.5))
        for label in ("greedy", "closest_c3", "jaspa_3"):
            with self.assertRaises(config.ConfigurationError):
                config.parse_algorithm_label(label)

    def test_experiment_defaults(self):
        experiment = config.validate_experiment({"name": "a", "kind": "convergence", "algorithms": ["se"],
                                                 "cus": [2], "aps": [2], "channels": 4})
        self.assertEqual(experiment["seeds"], 20)
        self.assertFalse(experiment["oracle"])
        with self.assertRaises(config.ConfigurationError):
            config.validate_experiment(dict(experiment, kind="latency"))
        with self.assertRaises(config.ConfigurationError):
            config.validate_experiment(dict(experiment, colour="red"))

    def test_experiment_network_sizes(self):
        experiment = {"name": "a", "kind": "throughput", "algorithms": ["jaspa"], "cus": [2], "aps": [1, 2],
                      "channels": 4}
        config.validate_experiment(experiment)
        for change in ({"aps": [1, 8]}, {"channels": 1}, {"aps": [0, 1]}, {"aps": []}, {"cus": [0]}, {"cus": 3},
                       {"channels": "many"}):
            with self.assertRaises(config.ConfigurationError):
                config.validate_experiment(dict(experiment, **change))

    def test_convergence_presets_include_simultaneous_cost(self):
        self.assertIn("si_c3", config.default_experiments(self.parser)[0]["algorithms"])
        self.assertIn("si_c3", config.large_experiments()[0]["algorithms"])

    def test_default_experiments(self):
        experiments = [config.validate_experiment(e) for e in config.default_experiments(self.parser)]
        self.assertEqual([e["kind"] for e in experiments], ["convergence", "throughput"])
        self.assertEqual(len(config.large_experiments()), 2)


class TestExperimentFiles(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.directory)

    def _write(self, content):
        path = os.path.join(self.directory, "experiments.json")
        with open(path, "w") as f:
            f.write(content if isinstance(content, str) else json.dumps(content))
        return path

    def test_invalid_json(self):
        with self.assertRaises(config.ConfigurationError):
            config.load_experiment_file(self._write("{not json"))

    def test_unknown_block(self):
        with self.assertRaises(config.ConfigurationError):
            config.load_experiment_file(self._write({"plots": {}}))

    def test_empty_experiment_list_writes_header_only(self):
        out = os.path.join(self.directory, "out")
        experiment = Experiment()
        experiment.initialize(self._write({"experiments": []}), out_dir=out)
        summary = experiment.run(number_of_workers=1)
        self.assertEqual(len(summary), 0)
        with open(os.path.join(out, "summary.csv")) as f:
            self.assertEqual(f.read().strip(), ",".join(SUMMARY_COLUMNS))

    def test_runs_are_identical(self):
        path = self._write({"experiments": [
            {"name": "tiny", "kind": "throughput", "algorithms": ["jaspa", "se_c3", "closest", "multi"],
             "cus": [2], "aps": [2], "channels": 4, "seeds": 2, "oracle": True}]})
        contents = []
        for run in ("a", "b"):
            out = os.path.join(self.directory, run)
            experiment = Experiment()
            experiment.initialize(path, out_dir=out)
            experiment.run(number_of_workers=1)
            with open(os.path.join(out, "summary.csv")) as f:
                contents.append(f.read())
            self.assertTrue(os.path.exists(os.path.join(out, "tiny.gp")))
        self.assertEqual(contents[0], contents[1])

        summary = pd.read_csv(os.path.join(self.directory, "a", "summary.csv"))
        self.assertEqual(len(summary), 8)
        self.assertTrue(summary.loc[summary["algo"] == "multi", "ratio_to_Tstar"].isna().all())
        bounded = summary.loc[summary["algo"] != "multi", "ratio_to_Tstar"]
        self.assertTrue(np.all(bounded <= 1.0 + 1e-9))

    def test_simulate_writes_nothing(self):
        out = os.path.join(self.directory, "simulated")
        experiment = Experiment(simulate=True)
        experiment.initialize(self._write({"experiments": []}), out_dir=out)
        experiment.run(number_of_workers=1)
        self.assertFalse(os.path.exists(out))


class TestAggregation(unittest.TestCase):

    def test_mean_and_standard_error(self):
        rows = [{"experiment": "e", "algo": "jaspa", "n": 2, "w": 2, "k": 4, "seed": s, "iters_to_converge": it,
                 "sum_rate": 1.0, "sep": np.nan, "ratio_to_Tstar": np.nan}
                for s, it in enumerate([10.0, 20.0, np.nan])]
        aggregate = aggregate_frame(pd.DataFrame(rows, columns=SUMMARY_COLUMNS))
        self.assertEqual(len(aggregate), 1)
        record = aggregate.iloc[0]
        self.assertEqual(record["runs"], 3)
        self.assertEqual(record["converged"], 2)
        self.assertAlmostEqual(record["iters_to_converge_mean"], 15.0)
        self.assertAlmostEqual(record["iters_to_converge_sem"], 5.0)
        self.assertTrue(np.isnan(record["ratio_to_Tstar_mean"]))

    def test_plot_script(self):
        text = plot_script("tiny", "throughput", ["jaspa", "closest"])
        self.assertIn("set datafile separator ','", text)
        self.assertIn("strcol('algo') eq 'closest'", text)
        self.assertIn("column('sum_rate_mean')", text)
        self.assertEqual(text.count("yerrorlines"), 2)

    def test_data_writer_creates_directory(self):
        directory = tempfile.mkdtemp()
        try:
            writer = DataWriter(os.path.join(directory, "nested"))
            path = writer.write_frame(pd.DataFrame({"a": [1.5]}), "frame.csv")
            with open(path) as f:
                self.assertEqual(f.read().split(), ["a", "1.5"])
        finally:
            shutil.rmtree(directory)


class TestCommandLine(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.directory)

    def test_configuration_errors_exit_with_one(self):
        self.assertEqual(crn.main(["run", "--w", "0"]), 1)
        self.assertEqual(crn.main(["run", "--algo", "greedy"]), 1)
        self.assertEqual(crn.main(["run", "--n", "3", "--track", "5"]), 1)
        self.assertEqual(crn.main(["experiment", os.path.join(self.directory, "missing.json")]), 1)

    def test_too_few_channels_exit_with_one(self):
        path = os.path.join(self.directory, "narrow.json")
        with open(path, "w") as f:
            json.dump({"experiments": [{"name": "narrow", "kind": "throughput", "algorithms": ["jaspa"],
                                        "cus": [2], "aps": [4], "channels": 2}]}, f)
        self.assertEqual(crn.main(["experiment", path, "--out", os.path.join(self.directory, "out")]), 1)

    def test_run_writes_trace(self):
        out = os.path.join(self.directory, "trace.csv")
        code = crn.main(["run", "--algo", "se", "--n", "2", "--w", "2", "--k", "4", "--seed", "1", "--out", out])
        self.assertIn(code, (0, 2))
        frame = pd.read_csv(out)
        self.assertEqual(list(frame.columns)[:6], ["iteration", "sum_rate", "potential", "num_switchers",
                                                   "max_beta_gap", "converged_flag"])

    def test_baseline_run(self):
        out = os.path.join(self.directory, "closest.csv")
        args = ["run", "--algo", "closest", "--n", "3", "--w", "2", "--k", "4", "--out", out]
        with mock.patch.object(oracle, "closest_ap_baseline", wraps=oracle.closest_ap_baseline) as baseline:
            self.assertEqual(crn.main(args), 0)
        self.assertEqual(baseline.call_args[1]["d_min"], config.load_defaults().getfloat("scenario", "d_min"))
        self.assertEqual(list(pd.read_csv(out).columns), SUMMARY_COLUMNS)


class TestVerify(unittest.TestCase):

    def test_mutation_is_undone(self):
        original = physics.potential_ap
        with mutation("potential-sign"):
            self.assertIsNot(physics.potential_ap, original)
        self.assertIs(physics.potential_ap, original)
        with self.assertRaises(ValueError):
            with mutation("off-by-one"):
                pass

    def test_mutation_is_caught(self):
        self.assertTrue(run_suite(quick=True, only={1})[0].passed)
        self.assertFalse(run_suite(quick=True, mutate="potential-sign", only={1})[0].passed)

    def test_cost_tradeoff_covers_simultaneous_updates(self):
        _, detail = cost_tradeoff(2)
        self.assertTrue(detail.startswith("JASPA iterations"))
        self.assertIn("Si-JASPA iterations", detail)

    def test_joint_means_skip_unconverged_seeds(self):
        def joint(inst, config, seed):
            return mock.Mock(converged=seed > 0, iterations_to_converge=10 if seed > 0 else None)

        def simultaneous(inst, config, seed):
            return mock.Mock(converged=True, iterations_to_converge=12)

        with mock.patch("harness.verify.run_jjaspa", side_effect=joint), \
                mock.patch("harness.verify.run_si_jaspa", side_effect=simultaneous):
            passed, detail = jjaspa_convergence(20)
        self.assertTrue(passed)
        self.assertIn("J-JASPA 10.0 vs Si-JASPA 12.0 over 19 paired seeds", detail)

    def test_inner_optimality_is_quick(self):
        start = time.time()
        passed, detail = inner_optimality(5)
        self.assertTrue(passed, detail)
        self.assertLess(time.time() - start, 15.0)


class TestUtils(unittest.TestCase):

    def test_worker_count_from_environment(self):
        with mock.patch.dict(os.environ, {THREADS_VARIABLE: "3"}):
            self.assertEqual(worker_count(), 3)
        with mock.patch.dict(os.environ, {THREADS_VARIABLE: "zero"}):
            with self.assertRaises(ValueError):
                worker_count()
        with mock.patch.dict(os.environ, {THREADS_VARIABLE: ""}):
            self.assertEqual(worker_count(5), 5)

    def test_multiprocess_keeps_order(self):
        self.assertEqual(multiprocess(range(6), _square, 1), [0, 1, 4, 9, 16, 25])
        self.assertEqual(multiprocess(range(6), _square, 2), [0, 1, 4, 9, 16, 25])
        self.assertEqual(multiprocess([], _square, 2), [])


if __name__ == '__main__':
    unittest.main()
