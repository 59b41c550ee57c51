'''
Reference solutions for small networks.

The equilibrium potential of an AP (the maximum of its potential over the
occupants' feasible powers) is computed by projected gradient ascent. Summing
it over the APs and enumerating every association yields the system
equilibrium potential maximizer and the maximum network throughput T*. The two
comparison baselines (closest-AP association and multiple connectivity) live
here as well.
'''

from __future__ import absolute_import
import itertools
import logging
from collections import namedtuple

import numpy as np
import pandas as pd

from . import inner, physics
from .jjaspa import coalition_key
from .model import NetworkInstance, check_association, embed_powers
from .utils import multiprocess

log = logging.getLogger(__name__)

MAX_ASSOCIATIONS = 10 ** 6
SLACK = 1e-15
MIN_STEP = 1e-16

SepResult = namedtuple("SepResult", ["assoc", "sep", "table"])
BaselineResult = namedtuple("BaselineResult", ["assoc", "powers", "sum_rate"])


def project_simplex(v, budget=1.0):
    """
    Euclidean projection of v onto {x >= 0, sum(x) = budget} by sorting.
    """
    v = np.asarray(v, dtype=np.float64)
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u) - budget
    ind = np.arange(1, v.size + 1)
    rho = np.flatnonzero(u - cssv / ind > 0)[-1]
    theta = cssv[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def project_capped_simplex(v, budget):
    """
    Euclidean projection of v onto {x >= 0, sum(x) <= budget}.
    """
    clipped = np.maximum(np.asarray(v, dtype=np.float64), 0.0)
    if clipped.sum() <= budget:
        return clipped
    return project_simplex(v, budget)


def _project_rows(powers, budgets):
    return np.vstack([project_capped_simplex(row, budget) for row, budget in zip(powers, budgets)])


class _PotentialProblem(object):
    """
    The AP potential as a function of the occupants' local power block.
    """

    def __init__(self, inst, w, occupants, base):
        channels = inst.channels_of(w)
        self.gains = inst.gains[occupants][:, w, channels]
        self.noise = inst.noise[w, channels]
        self.budgets = inst.budgets[occupants]
        self.scale = 1.0 / (inst.num_channels * np.log(base))

    def value(self, powers):
        received = np.sum(self.gains * powers, axis=0)
        return float(np.sum(np.log1p(received / self.noise)) * self.scale)

    def gradient(self, powers):
        received = np.sum(self.gains * powers, axis=0)
        return self.gains / (self.noise + received)[None, :] * self.scale

    def frank_wolfe_gap(self, powers, gradient):
        # Upper bound on the distance to the maximum, the potential being concave.
        best = self.budgets * np.maximum(gradient.max(axis=1), 0.0)
        return float(np.sum(best - np.sum(gradient * powers, axis=1)))


def maximize_potential(inst, w, occupants, tol=1e-9, max_iters=20000, init_powers=None,
                       base=physics.DEFAULT_LOG_BASE):
    """
    Maximizes the potential of AP w over the occupants' feasible powers.

    Projected gradient ascent with backtracking line search; every row is
    projected onto its capped simplex. Stops once the Frank-Wolfe duality gap
    falls below tol.

    Returns:
        (float, ndarray): The maximum and a maximizing local power block.
    """
    occupants = np.asarray(occupants, dtype=np.int64)
    if occupants.size == 0:
        return 0.0, np.zeros((0, inst.channels_of(w).size))
    problem = _PotentialProblem(inst, w, occupants, base)
    if init_powers is None:
        powers = np.repeat((problem.budgets / problem.gains.shape[1])[:, None], problem.gains.shape[1], axis=1)
    else:
        powers = _project_rows(np.array(init_powers, dtype=np.float64), problem.budgets)

    value = problem.value(powers)
    step = 1.0
    for _ in range(max_iters):
        gradient = problem.gradient(powers)
        if problem.frank_wolfe_gap(powers, gradient) <= tol:
            break
        while True:
            candidate = _project_rows(powers + step * gradient, problem.budgets)
            direction = candidate - powers
            candidate_value = problem.value(candidate)
            model = value + np.sum(gradient * direction) - np.sum(direction ** 2) / (2.0 * step)
            if candidate_value >= model - SLACK * max(1.0, abs(value)) or step < MIN_STEP:
                break
            step *= 0.5
        if not np.any(direction):
            break
        powers, value = candidate, candidate_value
        step *= 2.0
    else:
        log.debug("Projected gradient at AP %d stopped after %d iterations" % (w, max_iters))
    return problem.value(powers), powers


def equilibrium_potential(inst, w, occupants, tol=1e-9, init_powers=None, base=physics.DEFAULT_LOG_BASE):
    """
    Equilibrium potential of AP w for the given occupants: the maximum of its
    potential over their feasible powers. 0 for an empty AP.

    A warm start (a power block, for instance from S-IWF) is kept when it scores
    higher than the ascent.
    """
    occupants = np.asarray(occupants, dtype=np.int64)
    if occupants.size == 0:
        return 0.0
    value, _ = maximize_potential(inst, w, occupants, tol, init_powers=init_powers, base=base)
    if init_powers is not None:
        value = max(value, physics.potential_ap(inst, w, occupants, init_powers, base))
    return value


def _coalition_potential(entry):
    inst, w, occupants, tol, base = entry
    if len(occupants) == 0:
        return 0.0
    warm = inner.siwf_solve(inst, w, occupants, tol=1e-10)
    return equilibrium_potential(inst, w, occupants, tol, warm.powers, base)


def encode_association(assoc):
    return "-".join(str(int(w)) for w in assoc)


def exhaustive_sep(inst, tol=1e-9, number_of_workers=1, base=physics.DEFAULT_LOG_BASE):
    """
    Enumerates every association and maximizes the system equilibrium potential.

    Each coalition (AP, occupant set) is solved once. Associations are visited in
    lexicographic order and only a strictly larger value replaces the incumbent,
    so ties go to the lexicographically smallest association.

    Returns:
        SepResult: (best association, its SEP, DataFrame with one row per
        association: association, sep, ep_0 .. ep_{W-1}).

    Raises:
        ValueError: if there are more than 10^6 associations.
    """
    N, W = inst.num_cus, inst.num_aps
    if W ** N > MAX_ASSOCIATIONS:
        raise ValueError("W^N = %d^%d associations exceed the exhaustive limit of %d" % (W, N, MAX_ASSOCIATIONS))

    associations = list(itertools.product(range(W), repeat=N))
    coalitions = sorted({(w, coalition_key(i for i in range(N) if assoc[i] == w))
                         for assoc in associations for w in range(W)})
    log.debug("Solving %d coalitions for %d associations" % (len(coalitions), len(associations)))
    values = multiprocess([(inst, w, key, tol, base) for w, key in coalitions], _coalition_potential,
                          number_of_workers)
    cache = dict(zip(coalitions, values))

    rows = []
    best_assoc, best_sep = None, -np.inf
    for assoc in associations:
        eps = [cache[(w, coalition_key(i for i in range(N) if assoc[i] == w))] for w in range(W)]
        sep = float(np.sum(eps))
        rows.append([encode_association(assoc), sep] + eps)
        if sep > best_sep:
            best_assoc, best_sep = assoc, sep
    table = pd.DataFrame(rows, columns=["association", "sep"] + ["ep_%d" % w for w in range(W)])
    return SepResult(np.array(best_assoc, dtype=np.int64), best_sep, table)


def max_throughput(inst, tol=1e-9, number_of_workers=1, base=physics.DEFAULT_LOG_BASE):
    """
    Maximum network throughput T*.

    The sum capacity of an AP's multiple access channel equals its equilibrium
    potential, so T* is the largest system equilibrium potential.
    """
    return exhaustive_sep(inst, tol, number_of_workers, base).sep


def inner_solve_all(inst, assoc, method="siwf", tol=inner.DEFAULT_TOL, max_iters=inner.DEFAULT_MAX_ITERS):
    """
    N x K powers with every occupied AP at its spectrum-sharing equilibrium.
    """
    assoc = check_association(inst, assoc)
    powers = np.zeros((inst.num_cus, inst.num_channels))
    for w in range(inst.num_aps):
        occupants = np.flatnonzero(assoc == w)
        if occupants.size == 0:
            continue
        result = inner.solve(method, inst, w, occupants, tol=tol, max_iters=max_iters)
        powers[np.ix_(occupants, inst.channels_of(w))] = result.powers
    return powers


def closest_ap_baseline(inst, tol=inner.DEFAULT_TOL, d_min=0.0, method="siwf", base=physics.DEFAULT_LOG_BASE):
    """
    Associates every CU with its nearest AP (lowest index on ties) and solves
    the spectrum-sharing game at every AP.

    Distances are floored at d_min before comparing, as they are when the
    snapshot's gains are drawn: pass the scenario's d_min, so that APs closer
    than the floor tie and the lowest index wins.

    Returns:
        BaselineResult: (assoc, powers, realized sum rate).
    """
    assoc = np.argmin(inst.distances(d_min), axis=1).astype(np.int64)
    powers = inner_solve_all(inst, assoc, method, tol)
    return BaselineResult(assoc, powers, physics.sum_rate(inst, assoc, powers, base))


def virtual_instance(inst):
    """
    One AP owning all K channels, with the gains and noise each channel has at
    its real owner.
    """
    return NetworkInstance(
        num_cus=inst.num_cus,
        num_aps=1,
        num_channels=inst.num_channels,
        channel_owner=np.zeros(inst.num_channels, dtype=np.int64),
        gains=inst.effective_gains[:, None, :],
        noise=inst.effective_noise[None, :],
        budgets=inst.budgets,
        positions_cu=inst.positions_cu,
        positions_ap=inst.positions_ap[:1],
        rng_seed=inst.rng_seed)


def multi_connectivity_baseline(inst, tol=inner.DEFAULT_TOL, max_iters=inner.DEFAULT_MAX_ITERS, schedule=None,
                                base=physics.DEFAULT_LOG_BASE):
    """
    Sum rate when every CU may spread its budget over the channels of all APs.

    The network then behaves as a single virtual AP owning every channel, whose
    spectrum-sharing game is solved by A-IWF.
    """
    virtual = virtual_instance(inst)
    assoc = np.zeros(inst.num_cus, dtype=np.int64)
    result = inner.aiwf_solve(virtual, 0, np.arange(inst.num_cus), schedule=schedule, tol=tol, max_iters=max_iters)
    if not result.converged:
        log.warning("A-IWF on the multiple-connectivity network stopped after %d iterations" % result.iterations)
    powers = embed_powers(virtual, assoc, result.powers)
    return physics.sum_rate(virtual, assoc, powers, base)
