'''
Spectrum-sharing equilibria for a fixed association.

For a fixed set of occupants an AP hosts a potential game; its Nash equilibria
are exactly the maximizers of the AP potential. Two iterative water-filling
solvers reach them: the averaged simultaneous one (A-IWF) and the sequential
round-robin one (S-IWF).
'''

from __future__ import absolute_import
import logging
from dataclasses import dataclass, field

import numpy as np

from . import physics
from .bestresp import fill, water_levels

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITERS = 5000
SOLVERS = ("aiwf", "siwf")


@dataclass(frozen=True)
class StepsizeSchedule:
    """
    Stepsizes alpha_t = 1 / (t + 1)^exponent.

    For exponent in (0.5, 1] the sequence sums to infinity while its squares
    have a finite sum. alpha_0 = 1; every later stepsize lies in (0, 1).
    """

    exponent: float = 1.0

    def __post_init__(self):
        if not 0.5 < self.exponent <= 1.0:
            raise ValueError("Stepsize exponent must lie in (0.5, 1]: %s" % self.exponent)

    def alpha(self, t):
        return 1.0 / (t + 1.0) ** self.exponent

    def partial_sums(self, horizon):
        """
        Returns (sum alpha_t, sum alpha_t^2) for t = 1..horizon.
        """
        alphas = 1.0 / (np.arange(2, horizon + 2, dtype=np.float64)) ** self.exponent
        return float(np.sum(alphas)), float(np.sum(alphas ** 2))


@dataclass
class InnerResult:
    powers: np.ndarray
    iterations: int
    converged: bool
    potentials: list = field(default_factory=list)


def _local_problem(inst, w, occupants, init_powers):
    channels = inst.channels_of(w)
    occupants = np.asarray(occupants, dtype=np.int64)
    if occupants.size == 0:
        raise ValueError("AP %d has no occupants to solve for" % w)
    gains = inst.gains[occupants][:, w, channels]
    noise = inst.noise[w, channels]
    budgets = inst.budgets[occupants]
    if init_powers is None:
        powers = np.repeat((budgets / channels.size)[:, None], channels.size, axis=1)
    else:
        powers = np.array(init_powers, dtype=np.float64).reshape(occupants.size, channels.size)
    return gains, noise, budgets, powers


def _best_responses(gains, noise, budgets, powers):
    contributions = gains * powers
    interference = np.maximum(contributions.sum(axis=0)[None, :] - contributions, 0.0)
    responses = np.zeros(powers.shape)
    for row in range(powers.shape[0]):
        levels = water_levels(gains[row], noise, interference[row])
        responses[row], _ = fill(levels, budgets[row])
    return responses


def aiwf_solve(inst, w, occupants, init_powers=None, schedule=None, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS):
    """
    Averaged iterative water-filling at AP w.

    Every occupant water-fills against the current interference at the same time,
    then moves a fraction alpha_t of the way: p <- (1 - alpha_t) p + alpha_t p*.

    Args:
        inst (NetworkInstance): The snapshot.
        w (int): AP index.
        occupants (sequence of int): CUs associated with AP w, non-empty.
        init_powers (ndarray): len(occupants) x |K_w| feasible start. Uniform split if None.
        schedule (StepsizeSchedule): Stepsizes. alpha_t = 1/(t+1) if None.
        tol (float): Stop once the sup-norm of the update falls below tol.
        max_iters (int): Iteration cap.

    Returns:
        InnerResult: Local powers (rows follow occupants), iterations and converged flag.
    """
    schedule = schedule or StepsizeSchedule()
    gains, noise, budgets, powers = _local_problem(inst, w, occupants, init_powers)

    converged = False
    iterations = 0
    for t in range(max_iters):
        responses = _best_responses(gains, noise, budgets, powers)
        alpha = schedule.alpha(t)
        updated = (1.0 - alpha) * powers + alpha * responses
        change = np.max(np.abs(updated - powers))
        powers = updated
        iterations = t + 1
        if change < tol:
            converged = True
            break

    if not converged:
        log.debug("A-IWF at AP %d stopped after %d iterations without reaching tol %g" % (w, iterations, tol))
    return InnerResult(powers=powers, iterations=iterations, converged=converged)


def siwf_solve(inst, w, occupants, init_powers=None, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS,
               record_potential=False, base=physics.DEFAULT_LOG_BASE):
    """
    Sequential iterative water-filling at AP w.

    Occupants replace their power by their exact best response one after the
    other. One iteration is a full round; the solver stops once a round moves no
    power entry by more than tol.

    With record_potential the AP potential after every individual best response
    is kept in the result.
    """
    gains, noise, budgets, powers = _local_problem(inst, w, occupants, init_powers)
    occupants = np.asarray(occupants, dtype=np.int64)

    potentials = []
    converged = False
    iterations = 0
    for _ in range(max_iters):
        received = np.sum(gains * powers, axis=0)
        change = 0.0
        for row in range(powers.shape[0]):
            own = gains[row] * powers[row]
            interference = np.maximum(received - own, 0.0)
            response, _ = fill(water_levels(gains[row], noise, interference), budgets[row])
            change = max(change, float(np.max(np.abs(response - powers[row]))))
            received = interference + gains[row] * response
            powers[row] = response
            if record_potential:
                potentials.append(physics.potential_ap(inst, w, occupants, powers, base))
        iterations += 1
        if change < tol:
            converged = True
            break

    if not converged:
        log.debug("S-IWF at AP %d stopped after %d rounds without reaching tol %g" % (w, iterations, tol))
    return InnerResult(powers=powers, iterations=iterations, converged=converged, potentials=potentials)


def solve(method, inst, w, occupants, init_powers=None, schedule=None, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS):
    """
    Dispatches to the named inner solver ('aiwf' or 'siwf').
    """
    if method == "aiwf":
        return aiwf_solve(inst, w, occupants, init_powers, schedule, tol, max_iters)
    if method == "siwf":
        return siwf_solve(inst, w, occupants, init_powers, tol, max_iters)
    raise ValueError("Unknown inner solver %s, expected one of %s" % (method, ", ".join(SOLVERS)))


def equilibrium_gap(inst, w, occupants, powers_w, base=physics.DEFAULT_LOG_BASE):
    """
    Largest rate any occupant gains by water-filling against the others.

    A zero gap (up to tolerance) certifies a Nash equilibrium of the AP's game.
    """
    occupants = np.asarray(occupants, dtype=np.int64)
    if occupants.size == 0:
        return 0.0
    gains, noise, budgets, powers = _local_problem(inst, w, occupants, powers_w)
    contributions = gains * powers
    interference = np.maximum(contributions.sum(axis=0)[None, :] - contributions, 0.0)
    gap = 0.0
    for row, i in enumerate(occupants):
        response, _ = fill(water_levels(gains[row], noise, interference[row]), budgets[row])
        best = physics.rate(inst, i, w, response, interference[row], base)
        current = physics.rate(inst, i, w, powers[row], interference[row], base)
        gap = max(gap, best - current)
    return gap
