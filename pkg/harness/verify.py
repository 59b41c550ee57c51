'''
Acceptance suite.

Each criterion runs a seeded Monte-Carlo check against a closed-form identity,
an oracle or a paired comparison and reports PASS/FAIL with the measured
values. The quick mode shrinks the seed counts.
'''

import contextlib
import io
import logging
import time
from collections import namedtuple

import numpy as np

from crncore import inner, oracle, physics
from crncore.bestresp import fill, water_levels, waterfill
from crncore.learn import AlgorithmConfig, certify_jep, run_jaspa, run_se_jaspa, run_si_jaspa
from crncore.jjaspa import run_jjaspa
from crncore.model import NetworkInstance, ScenarioConfig, generate_snapshot, make_rng, random_power

log = logging.getLogger(__name__)

Outcome = namedtuple("Outcome", ["name", "passed", "detail", "seconds"])

MUTATIONS = ("potential-sign",)

# A-IWF stopping rule of the inner optimality check, whose bar is a 1e-4 relative potential error.
AIWF_TOL = 1e-7
AIWF_MAX_ITERS = 5000


def _single_ap_instance(rng, num_cus, num_channels, noise=None):
    gains = rng.exponential(1.0, size=(num_cus, 1, num_channels))
    noise = rng.uniform(0.1, 1.0, size=(1, num_channels)) if noise is None else noise
    return NetworkInstance(num_cus=num_cus, num_aps=1, num_channels=num_channels,
                           channel_owner=np.zeros(num_channels, dtype=np.int64), gains=gains, noise=noise,
                           budgets=rng.uniform(0.5, 2.0, size=num_cus),
                           positions_cu=np.zeros((num_cus, 2)), positions_ap=np.zeros((1, 2)))


def exact_potential(samples):
    rng = make_rng(1001)
    scenario = ScenarioConfig(num_cus=4, num_aps=2, num_channels=8)
    worst = 0.0
    for s in range(samples):
        inst = generate_snapshot(scenario, s % 50)
        i, w = int(rng.integers(4)), int(rng.integers(2))
        others = [j for j in range(4) if j != i and rng.random() < 0.5]
        occupants = sorted(others + [i])
        row = occupants.index(i)
        channels = inst.channels_of(w)
        block = np.vstack([random_power(inst, j, w, rng) for j in occupants])
        before, after = block.copy(), block.copy()
        after[row] = random_power(inst, i, w, rng)
        received = np.sum(inst.gains[occupants][:, w, channels] * block, axis=0)
        interference = received - inst.gains[i, w, channels] * block[row]
        delta_rate = (physics.rate(inst, i, w, after[row], interference)
                      - physics.rate(inst, i, w, before[row], interference))
        delta_potential = (physics.potential_ap(inst, w, occupants, after)
                           - physics.potential_ap(inst, w, occupants, before))
        worst = max(worst, abs(delta_rate - delta_potential))
    return worst <= 1e-9, "max |dR - dP| = %.3g over %d triples" % (worst, samples)


def waterfilling_grid(samples):
    rng = make_rng(1002)
    grid = np.arange(0, 1001) / 1000.0
    p1, p2 = np.meshgrid(grid, grid, indexing="ij")
    inside = p1 + p2 <= 1.0 + 1e-12
    p1, p2 = p1[inside], p2[inside]
    p3 = np.maximum(1.0 - p1 - p2, 0.0)
    worst_rate, worst_kkt = -np.inf, 0.0
    for _ in range(samples):
        inst = _single_ap_instance(rng, 1, 3)
        interference = rng.uniform(0.0, 1.0, size=3)
        budget = inst.budgets[0]
        power = waterfill(inst, 0, 0, interference)
        rate = physics.rate(inst, 0, 0, power, interference)
        g, n = inst.gains[0, 0], inst.noise[0]
        sinr = g[None, :] / (n + interference)[None, :] * budget
        grid_rates = np.sum(np.log2(1.0 + sinr * np.stack([p1, p2, p3], axis=1)), axis=1) / 3.0
        worst_rate = max(worst_rate, float(grid_rates.max()) - rate)
        levels = water_levels(g, n, interference)
        _, mark = fill(levels, budget)
        active = power > 0.0
        residual = max(float(np.max(np.abs(power[active] + levels[active] - mark))),
                       float(np.max(np.maximum(mark - levels[~active], 0.0), initial=0.0)),
                       abs(float(power.sum()) - budget))
        worst_kkt = max(worst_kkt, residual)
    passed = worst_rate <= 1e-6 and worst_kkt <= 1e-8
    return passed, "grid excess %.3g, KKT residual %.3g over %d problems" % (worst_rate, worst_kkt, samples)


def inner_optimality(samples):
    rng = make_rng(1003)
    worst_aiwf, worst_siwf = 0.0, 0.0
    for _ in range(samples):
        inst = _single_ap_instance(rng, 3, 4)
        occupants = np.arange(3)
        sequential = inner.siwf_solve(inst, 0, occupants)
        averaged = inner.aiwf_solve(inst, 0, occupants, schedule=inner.StepsizeSchedule(0.6), tol=AIWF_TOL,
                                    max_iters=AIWF_MAX_ITERS)
        # The ascent only stops on a Frank-Wolfe gap below tol, wherever it starts.
        reference = oracle.equilibrium_potential(inst, 0, occupants, tol=1e-10, init_powers=sequential.powers)
        worst_aiwf = max(worst_aiwf, abs(physics.potential_ap(inst, 0, occupants, averaged.powers) - reference)
                         / reference)
        worst_siwf = max(worst_siwf, abs(physics.potential_ap(inst, 0, occupants, sequential.powers) - reference)
                         / reference)
    passed = worst_aiwf <= 1e-4 and worst_siwf <= 1e-4
    return passed, "relative potential error A-IWF %.3g, S-IWF %.3g over %d instances" % (
        worst_aiwf, worst_siwf, samples)


def sequential_monotone(runs):
    scenario = ScenarioConfig(num_cus=8, num_aps=3, num_channels=12)
    config = AlgorithmConfig(max_iters=200)
    worst = 0.0
    for seed in range(runs):
        trace = run_se_jaspa(generate_snapshot(scenario, seed), config, seed)
        steps = np.diff(trace.potentials)
        if steps.size:
            worst = max(worst, float(-steps.min()))
    return worst <= 1e-9, "largest potential decrease %.3g over %d runs" % (worst, runs)


def exhaustive_equilibrium(samples):
    rng = make_rng(1005)
    failures, worst = 0, 0.0
    for s in range(samples):
        num_cus = int(rng.integers(2, 5))
        inst = generate_snapshot(ScenarioConfig(num_cus=num_cus, num_aps=2, num_channels=4), s)
        result = oracle.exhaustive_sep(inst)
        powers = oracle.inner_solve_all(inst, result.assoc, tol=1e-12)
        certificate = certify_jep(inst, result.assoc, powers, tol=1e-6)
        worst = max(worst, certificate.gap)
        failures += 0 if certificate.passed else 1
    return failures == 0, "%d/%d maximizers certified, worst gap %.3g" % (samples - failures, samples, worst)


def _converged_share(traces):
    return sum(1 for trace in traces if trace.converged) / float(len(traces))


def jaspa_convergence(runs):
    scenario = ScenarioConfig(num_cus=6, num_aps=3, num_channels=12)
    config = AlgorithmConfig(memory=6, max_iters=500)
    traces = [run_jaspa(generate_snapshot(scenario, seed), config, seed) for seed in range(runs)]
    share = _converged_share(traces)
    concentrated = all(trace.rows[-1][4] <= 1e-9 for trace in traces if trace.converged)
    passed = share >= 0.95 and concentrated
    return passed, "%.0f%% converged and certified, concentrated beta: %s" % (100 * share, concentrated)


def _iterations(trace, config):
    return trace.iterations_to_converge if trace.converged else config.max_iters


def jjaspa_convergence(runs):
    scenario = ScenarioConfig(num_cus=6, num_aps=3, num_channels=12)
    config = AlgorithmConfig(memory=6, max_iters=2000)
    joint, simultaneous = [], []
    for seed in range(runs):
        inst = generate_snapshot(scenario, seed)
        joint.append(run_jjaspa(inst, config, seed))
        simultaneous.append(run_si_jaspa(inst, config, seed))
    share = _converged_share(joint)
    # Means are paired over the seeds on which both runs converged.
    pairs = [(a.iterations_to_converge, b.iterations_to_converge)
             for a, b in zip(joint, simultaneous) if a.converged and b.converged]
    if not pairs:
        return False, "%.0f%% converged, no seed on which both converged" % (100 * share)
    mean_joint, mean_si = np.mean(pairs, axis=0)
    passed = share >= 0.95 and mean_joint < mean_si
    return passed, "%.0f%% converged, mean iterations J-JASPA %.1f vs Si-JASPA %.1f over %d paired seeds" % (
        100 * share, mean_joint, mean_si, len(pairs))


def throughput_bound(seeds):
    violations, ratios, jaspa_rates, closest_rates = 0, [], [], []
    for w in (1, 2, 3, 4):
        scenario = ScenarioConfig(num_cus=8, num_aps=w, num_channels=16)
        for seed in range(seeds):
            inst = generate_snapshot(scenario, seed)
            t_star = oracle.max_throughput(inst)
            trace = run_jaspa(inst, AlgorithmConfig(memory=8), seed)
            rate = physics.sum_rate(inst, trace.assoc, trace.powers)
            violations += 0 if rate <= t_star + 1e-9 else 1
            ratios.append(rate / t_star)
            jaspa_rates.append(rate)
            closest_rates.append(oracle.closest_ap_baseline(inst, d_min=scenario.d_min).sum_rate)
    passed = violations == 0 and np.mean(closest_rates) < np.mean(jaspa_rates)
    return passed, "%d bound violations, mean ratio to T* %.3f, closest %.3f vs JASPA %.3f" % (
        violations, np.mean(ratios), np.mean(closest_rates), np.mean(jaspa_rates))


def _cost_effect(run, scenario, plain, seeds):
    """
    Mean iterations and sum rates of a learning algorithm with a connection
    cost of 3 and without one, on the same snapshots and seeds.
    """
    costly = plain.replace(costs=3.0 / scenario.num_channels)
    iters_plain, iters_costly, rates_plain, rates_costly = [], [], [], []
    for seed in range(seeds):
        inst = generate_snapshot(scenario, seed)
        for config, iters, rates in ((plain, iters_plain, rates_plain), (costly, iters_costly, rates_costly)):
            trace = run(inst, config, seed)
            iters.append(_iterations(trace, config))
            rates.append(physics.sum_rate(inst, trace.assoc, trace.powers))
    return np.mean(iters_costly), np.mean(iters_plain), np.mean(rates_costly), np.mean(rates_plain)


def cost_tradeoff(seeds):
    scenario = ScenarioConfig(num_cus=6, num_aps=3, num_channels=12)
    passed, details = True, []
    for label, run, plain in (("JASPA", run_jaspa, AlgorithmConfig(memory=6)),
                              ("Si-JASPA", run_si_jaspa, AlgorithmConfig(memory=6, max_iters=2000))):
        iters_costly, iters_plain, rates_costly, rates_plain = _cost_effect(run, scenario, plain, seeds)
        passed = passed and iters_costly <= iters_plain and rates_costly <= rates_plain
        details.append("%s iterations %.1f vs %.1f, sum rate %.4f vs %.4f" % (
            label, iters_costly, iters_plain, rates_costly, rates_plain))
    return passed, "; ".join(details) + " (cost 3 vs none)"


def reproducibility(_):
    inst = generate_snapshot(ScenarioConfig(num_cus=6, num_aps=3, num_channels=12), 7)
    outputs = []
    for _ in range(2):
        buffer = io.StringIO()
        run_jaspa(inst, AlgorithmConfig(), 7).to_csv(buffer)
        outputs.append(buffer.getvalue())
    return outputs[0] == outputs[1], "%d bytes, identical: %s" % (len(outputs[0]), outputs[0] == outputs[1])


# (name, check, full size, quick size)
CRITERIA = [
    ("exact potential identity", exact_potential, 1000, 100),
    ("water-filling against grid search", waterfilling_grid, 200, 20),
    ("inner solvers reach the potential maximum", inner_optimality, 50, 10),
    ("Se-JASPA potential is nondecreasing", sequential_monotone, 100, 10),
    ("exhaustive maximizer is an equilibrium", exhaustive_equilibrium, 50, 10),
    ("JASPA converges to certified equilibria", jaspa_convergence, 100, 20),
    ("J-JASPA converges faster than Si-JASPA", jjaspa_convergence, 100, 10),
    ("JASPA throughput bounded by T*", throughput_bound, 20, 3),
    ("connection cost trades throughput for speed", cost_tradeoff, 100, 20),
    ("runs are reproducible", reproducibility, 1, 1),
]


@contextlib.contextmanager
def mutation(name):
    """
    Temporarily breaks the library so that the suite can be shown to catch it.
    """
    if name is None:
        yield
        return
    if name not in MUTATIONS:
        raise ValueError("Unknown mutation %s, expected one of %s" % (name, ", ".join(MUTATIONS)))
    original = physics.potential_ap

    def negated(*args, **kwargs):
        return -original(*args, **kwargs)

    physics.potential_ap = negated
    try:
        yield
    finally:
        physics.potential_ap = original


def run_suite(quick=False, mutate=None, only=None):
    """
    Runs the criteria and logs PASS/FAIL for each.

    Returns:
        list of Outcome
    """
    outcomes = []
    with mutation(mutate):
        for index, (name, check, full, reduced) in enumerate(CRITERIA, start=1):
            if only is not None and index not in only:
                continue
            start = time.time()
            try:
                passed, detail = check(reduced if quick else full)
            except Exception as e:
                log.exception("Criterion %d raised" % index)
                passed, detail = False, "raised %s: %s" % (type(e).__name__, e)
            outcome = Outcome(name, passed, detail, time.time() - start)
            log.info("%2d %s %s: %s (%.1f s)" % (index, "PASS" if passed else "FAIL", name, detail,
                                                 outcome.seconds))
            outcomes.append(outcome)
    return outcomes
