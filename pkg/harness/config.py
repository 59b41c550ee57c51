'''
Configuration loading for the command line and the experiments.

Defaults come from config.ini next to this file. JSON files can override the
scenario and algorithm blocks and list experiments. Connection costs in these
files are given in un-normalized bit/s and are divided by the number of
channels before they reach the library.
'''

import configparser
import json
import logging
import os
import re

from crncore.learn import ALGORITHMS, AlgorithmConfig
from crncore.model import ScenarioConfig

log = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "config.ini")

BASELINES = ("closest", "multi")
EXPERIMENT_KINDS = ("convergence", "throughput")
FILE_KEYS = ("scenario", "algorithm", "experiments")

_SCENARIO_TYPES = {"num_cus": int, "num_aps": int, "num_channels": int, "area_m": float, "power_budget": float,
                   "noise_floor": float, "d_min": float, "seed": int}
_ALGORITHM_TYPES = {"memory": int, "cost": float, "exponent": float, "inner_solver": str, "inner_tol": float,
                    "inner_max_iters": int, "max_iters": int, "stop_window": int, "jep_tol": float,
                    "log_base": float}
_ALGORITHM_LABEL = re.compile(r"^(?P<name>[a-z]+?)(?:_c(?P<cost>[0-9]+(?:\.[0-9]+)?))?$")


class ConfigurationError(ValueError):
    pass


def load_defaults(path=None):
    """
    Reads the INI defaults. Raises ConfigurationError if the file is missing.
    """
    path = path or DEFAULT_CONFIG_PATH
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise ConfigurationError("Cannot read config file %s" % path)
    for section in ("scenario", "algorithm", "experiment", "output"):
        if not parser.has_section(section):
            raise ConfigurationError("Config file %s lacks the [%s] section" % (path, section))
    return parser


def _typed(section, types, values):
    result = {}
    for key, value in values.items():
        if key not in types:
            raise ConfigurationError("Unknown %s key: %s" % (section, key))
        try:
            result[key] = types[key](value)
        except (TypeError, ValueError):
            raise ConfigurationError("Invalid value for %s.%s: %r" % (section, key, value))
    return result


def scale_cost(cost, num_channels):
    """
    Converts a connection cost in bit/s to the 1/K-normalized rate unit.
    """
    return float(cost) / float(num_channels)


def scenario_from_config(parser, overrides=None):
    values = _typed("scenario", _SCENARIO_TYPES, dict(parser.items("scenario")))
    values.update(_typed("scenario", _SCENARIO_TYPES, {k: v for k, v in (overrides or {}).items() if v is not None}))
    try:
        return ScenarioConfig.from_dict(values)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(str(e))


def algorithm_from_config(parser, num_channels, overrides=None, track_cus=()):
    """
    Builds the AlgorithmConfig, scaling the bit/s cost by 1/num_channels.
    """
    values = _typed("algorithm", _ALGORITHM_TYPES, dict(parser.items("algorithm")))
    values.update(_typed("algorithm", _ALGORITHM_TYPES, {k: v for k, v in (overrides or {}).items() if v is not None}))
    cost = values.pop("cost", 0.0)
    values["costs"] = scale_cost(cost, num_channels)
    values["track_cus"] = tuple(track_cus)
    try:
        return AlgorithmConfig.from_dict(values)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(str(e))


def parse_algorithm_label(label):
    """
    Splits an algorithm label such as 'jaspa' or 'jaspa_c3' into its name and
    its connection cost in bit/s.
    """
    match = _ALGORITHM_LABEL.match(label.strip())
    if match is None or match.group("name") not in ALGORITHMS + BASELINES:
        raise ConfigurationError("Unknown algorithm label: %s" % label)
    cost = match.group("cost")
    if cost is not None and match.group("name") in BASELINES:
        raise ConfigurationError("Baselines take no connection cost: %s" % label)
    return match.group("name"), (float(cost) if cost is not None else None)


def _int_list(text):
    try:
        return [int(item) for item in str(text).split(",") if item.strip()]
    except ValueError:
        raise ConfigurationError("Expected a comma-separated list of integers: %s" % text)


def _label_list(text):
    return [item.strip() for item in str(text).split(",") if item.strip()]


def default_experiments(parser):
    """
    The desk-scale experiments described in the [experiment] section.
    """
    section = parser["experiment"]
    seeds = section.getint("seeds")
    return [
        {"name": "convergence", "kind": "convergence",
         "algorithms": _label_list(section.get("convergence_algorithms")),
         "cus": _int_list(section.get("convergence_cus")),
         "aps": _int_list(section.get("convergence_aps")),
         "channels": section.getint("convergence_channels"),
         "seeds": seeds, "oracle": False},
        {"name": "throughput", "kind": "throughput",
         "algorithms": _label_list(section.get("throughput_algorithms")),
         "cus": _int_list(section.get("throughput_cus")),
         "aps": _int_list(section.get("throughput_aps")),
         "channels": section.getint("throughput_channels"),
         "seeds": seeds, "oracle": section.getboolean("oracle")},
    ]


def large_experiments():
    """
    Large-scale presets: convergence speed of every algorithm with 4 APs and 64
    channels for up to 30 CUs, and the throughput of 30 CUs with up to 16 APs and
    128 channels. Too large for the exhaustive oracle.
    """
    return [
        {"name": "convergence_large", "kind": "convergence",
         "algorithms": ["jaspa", "jaspa_c3", "jaspa_c5", "se", "si", "si_c3", "jjaspa"],
         "cus": [5, 10, 15, 20, 25, 30], "aps": [4], "channels": 64, "seeds": 100, "oracle": False},
        {"name": "throughput_large", "kind": "throughput",
         "algorithms": ["jaspa", "jaspa_c3", "jaspa_c5", "closest", "multi"],
         "cus": [30], "aps": [2, 4, 8, 16], "channels": 128, "seeds": 100, "oracle": False},
    ]


def validate_experiment(experiment):
    """
    Checks one experiment definition and fills in defaults.
    """
    known = {"name", "kind", "algorithms", "cus", "aps", "channels", "seeds", "oracle", "first_seed"}
    unknown = sorted(set(experiment) - known)
    if unknown:
        raise ConfigurationError("Unknown experiment keys: %s" % ", ".join(unknown))
    missing = [key for key in ("name", "kind", "algorithms", "cus", "aps", "channels") if key not in experiment]
    if missing:
        raise ConfigurationError("Experiment lacks keys: %s" % ", ".join(missing))
    if experiment["kind"] not in EXPERIMENT_KINDS:
        raise ConfigurationError("Unknown experiment kind: %s" % experiment["kind"])
    for label in experiment["algorithms"]:
        parse_algorithm_label(label)
    try:
        cus = [int(n) for n in experiment["cus"]]
        aps = [int(w) for w in experiment["aps"]]
        channels = int(experiment["channels"])
    except (TypeError, ValueError) as e:
        raise ConfigurationError("Experiment %s needs lists of CU and AP counts and a channel count: %s"
                                 % (experiment["name"], e))
    if not cus or min(cus) < 1:
        raise ConfigurationError("Experiment %s needs at least one CU in every network: %s" % (experiment["name"], cus))
    if not aps or min(aps) < 1:
        raise ConfigurationError("Experiment %s needs at least one AP in every network: %s" % (experiment["name"], aps))
    if channels < max(aps):
        raise ConfigurationError("Experiment %s: K=%d channels cannot be split among W=%d APs"
                                 % (experiment["name"], channels, max(aps)))
    result = dict(experiment)
    result.setdefault("seeds", 20)
    result.setdefault("oracle", False)
    result.setdefault("first_seed", 0)
    if int(result["seeds"]) < 1:
        raise ConfigurationError("An experiment needs at least one seed: %s" % result["name"])
    return result


def load_experiment_file(path):
    """
    Reads a JSON experiment file with optional 'scenario', 'algorithm' and
    'experiments' blocks. Without an 'experiments' block the defaults apply.
    """
    try:
        with open(path) as f:
            content = json.load(f)
    except (IOError, OSError) as e:
        raise ConfigurationError("Cannot read experiment file %s: %s" % (path, e))
    except ValueError as e:
        raise ConfigurationError("Experiment file %s is not valid JSON: %s" % (path, e))
    if not isinstance(content, dict):
        raise ConfigurationError("Experiment file %s must hold a JSON object" % path)
    unknown = sorted(set(content) - set(FILE_KEYS))
    if unknown:
        raise ConfigurationError("Unknown blocks in %s: %s" % (path, ", ".join(unknown)))
    content.setdefault("scenario", {})
    content.setdefault("algorithm", {})
    if "experiments" in content:
        content["experiments"] = [validate_experiment(e) for e in content["experiments"]]
        log.info("Loaded %d experiments from %s" % (len(content["experiments"]), path))
    else:
        content["experiments"] = None
    return content
