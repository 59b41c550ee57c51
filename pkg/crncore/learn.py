'''
Joint AP selection and power allocation by learning.

Three outer-loop algorithms are implemented here:

  - JASPA: every CU keeps a memory of its recent best-reply APs and samples its
    next AP from their empirical distribution; the occupants of every AP reach
    their spectrum-sharing equilibrium between association updates.
  - Se-JASPA: one CU at a time best-responds in AP and power; the system
    potential never decreases.
  - Si-JASPA: all CUs update AP and power simultaneously, damping their power
    updates while they stay at the same AP.

J-JASPA lives in jjaspa.py.
'''

from __future__ import absolute_import
import logging
from collections import deque, namedtuple
from dataclasses import dataclass, fields

import numpy as np

from . import inner, physics
from .bestresp import best_rates, select_best_ap
from .model import check_association, make_rng, random_powers, uniform_powers
from .trace import RunTrace

log = logging.getLogger(__name__)

BETA_CONCENTRATION = 1e-9
ALGORITHMS = ("jaspa", "se", "si", "jjaspa")

JepCertificate = namedtuple("JepCertificate", ["passed", "gap", "cu"])


@dataclass(frozen=True)
class AlgorithmConfig:
    """
    Parameters shared by the learning algorithms.

    Args:
        memory (int): Best-reply memory length M.
        costs (float or tuple): Connection cost c_i, one value for all CUs or one per CU.
        exponent (float): Stepsize exponent of the damped power updates, alpha_t = 1 / (t + 1)^exponent.
            0.6 lets the damped power updates settle within a few hundred stays.
        inner_solver (str): 'siwf' or 'aiwf' for the JASPA inner loop.
        inner_tol (float): Inner solver tolerance on the power sup-norm. Si-JASPA and J-JASPA only
            declare convergence once their damped power step is this small.
        inner_max_iters (int): Inner solver iteration cap.
        max_iters (int): Outer iteration cap.
        stop_window (int): Consecutive stable iterations needed to stop. Defaults to M (N for Se-JASPA).
        jep_tol (float): Tolerance of the terminal equilibrium certificate.
        log_base (float): Logarithm base of all rates.
        track_cus (tuple): CUs whose AP choices and probability vectors are traced.
    """

    memory: int = 10
    costs: object = 0.0
    exponent: float = 0.6
    inner_solver: str = "siwf"
    inner_tol: float = inner.DEFAULT_TOL
    inner_max_iters: int = inner.DEFAULT_MAX_ITERS
    max_iters: int = 500
    stop_window: object = None
    jep_tol: float = 1e-6
    log_base: float = physics.DEFAULT_LOG_BASE
    track_cus: tuple = ()

    def __post_init__(self):
        if int(self.memory) < 1:
            raise ValueError("memory must be at least 1: %s" % self.memory)
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be at least 1: %s" % self.max_iters)
        if self.stop_window is not None and int(self.stop_window) < 1:
            raise ValueError("stop_window must be at least 1: %s" % self.stop_window)
        if self.inner_solver not in inner.SOLVERS:
            raise ValueError("Unknown inner solver %s" % self.inner_solver)
        if not self.jep_tol > 0.0:
            raise ValueError("jep_tol must be positive: %s" % self.jep_tol)
        if not self.log_base > 1.0:
            raise ValueError("log_base must exceed 1: %s" % self.log_base)
        if np.any(np.asarray(self.costs, dtype=np.float64) < 0.0):
            raise ValueError("Connection costs must be non-negative: %s" % (self.costs,))
        inner.StepsizeSchedule(self.exponent)
        if not isinstance(self.costs, (int, float)):
            object.__setattr__(self, "costs", tuple(float(c) for c in self.costs))
        object.__setattr__(self, "track_cus", tuple(int(i) for i in self.track_cus))

    @classmethod
    def from_dict(cls, values):
        """
        Creates a config from a dictionary, rejecting unknown keys.
        """
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ValueError("Unknown algorithm keys: %s" % ", ".join(unknown))
        return cls(**values)

    def replace(self, **changes):
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return AlgorithmConfig(**values)

    def cost_vector(self, num_cus):
        costs = np.asarray(self.costs, dtype=np.float64)
        if costs.ndim == 0:
            return np.full(num_cus, float(costs))
        if costs.shape != (num_cus,):
            raise ValueError("Expected one connection cost per CU (%d): %s" % (num_cus, costs.shape))
        return costs

    def window(self, default):
        return int(self.stop_window) if self.stop_window is not None else int(default)

    def schedule(self):
        return inner.StepsizeSchedule(self.exponent)


class ReplyMemory(object):
    """
    FIFO of a CU's last M best-reply APs.

    The probability vector beta is the empirical distribution of the stored
    replies. An empty memory yields the uniform distribution.
    """

    def __init__(self, capacity, num_aps):
        if int(capacity) < 1:
            raise ValueError("Memory capacity must be at least 1: %s" % capacity)
        self.capacity = int(capacity)
        self.num_aps = int(num_aps)
        self.replies = deque(maxlen=self.capacity)

    def __len__(self):
        return len(self.replies)

    def push(self, w):
        if not 0 <= int(w) < self.num_aps:
            raise ValueError("Invalid AP index %s for W=%d" % (w, self.num_aps))
        self.replies.append(int(w))

    @property
    def beta(self):
        if not self.replies:
            return np.full(self.num_aps, 1.0 / self.num_aps)
        counts = np.bincount(np.fromiter(self.replies, dtype=np.int64), minlength=self.num_aps)
        return counts / float(len(self.replies))


def best_reply_vector(w, num_aps):
    """
    Elementary vector e_w of length num_aps.
    """
    b = np.zeros(num_aps)
    b[w] = 1.0
    return b


def beta_update(mem, b_new):
    """
    Pushes a best reply into the memory and returns it.

    b_new is an AP index or an elementary vector.
    """
    b_new = np.asarray(b_new)
    if b_new.ndim == 0:
        mem.push(int(b_new))
    else:
        if b_new.shape != (mem.num_aps,) or np.count_nonzero(b_new) != 1 or b_new.max() != 1:
            raise ValueError("Best reply must be an elementary vector of length %d: %s" % (mem.num_aps, b_new))
        mem.push(int(np.argmax(b_new)))
    return mem


def sample_association(beta, rng):
    """
    Draws an AP index from the multinomial distribution beta.
    """
    beta = np.asarray(beta, dtype=np.float64)
    if np.any(beta < 0.0) or not beta.sum() > 0.0:
        raise ValueError("beta must be a probability vector: %s" % beta)
    return int(rng.choice(beta.size, p=beta / beta.sum()))


def max_beta_gap(memories):
    return max(1.0 - float(np.max(mem.beta)) for mem in memories)


def power_step(new_powers, old_powers):
    """
    Sup-norm of a power update.
    """
    return float(np.max(np.abs(np.asarray(new_powers) - np.asarray(old_powers))))


@dataclass
class GameState:
    """
    Mutable state of one run: association, N x K powers, reply memories,
    stay durations and the iteration counter.
    """

    assoc: np.ndarray
    powers: np.ndarray
    memories: list
    stay: np.ndarray
    iteration: int = 0


def certify_jep(inst, assoc, powers, tol=1e-6, costs=None, base=physics.DEFAULT_LOG_BASE):
    """
    Checks that no CU gains by changing its AP or its powers on its own.

    For every CU the best-response rate at every AP (own power excluded at the
    home AP, full occupant interference elsewhere) is compared with its current
    rate. With costs, a move to another AP only counts if it beats the current
    rate by more than the CU's connection cost.

    Returns:
        JepCertificate: (passed, worst gap, CU attaining it).
    """
    assoc = check_association(inst, assoc)
    costs = np.zeros(inst.num_cus) if costs is None else np.broadcast_to(np.asarray(costs, dtype=np.float64),
                                                                          (inst.num_cus,))
    imap = physics.interference_map(inst, assoc, powers)
    current = physics.realized_rates(inst, assoc, powers, base, imap)
    worst_gap, worst_cu = -np.inf, -1
    for i in range(inst.num_cus):
        rates, _ = best_rates(inst, i, imap, base)
        gaps = rates - current[i] - costs[i]
        gaps[assoc[i]] = rates[assoc[i]] - current[i]
        gap = float(np.max(gaps))
        if gap > worst_gap:
            worst_gap, worst_cu = gap, i
    worst_gap = max(worst_gap, 0.0)
    return JepCertificate(worst_gap <= tol, worst_gap, worst_cu)


def inner_equilibria(inst, assoc, powers, restart, config):
    """
    Solves the spectrum-sharing game at every occupied AP.

    CUs flagged in restart start from a uniform split, the others from their
    current powers.

    Returns:
        (ndarray, bool): The N x K powers and whether every inner solver converged.
    """
    start = uniform_powers(inst, assoc)
    keep = ~np.asarray(restart, dtype=bool)
    start[keep] = powers[keep]
    result = np.zeros_like(start)
    schedule = config.schedule()
    all_converged = True
    for w in range(inst.num_aps):
        occupants = np.flatnonzero(assoc == w)
        if occupants.size == 0:
            continue
        channels = inst.channels_of(w)
        solved = inner.solve(config.inner_solver, inst, w, occupants, start[np.ix_(occupants, channels)],
                             schedule, config.inner_tol, config.inner_max_iters)
        result[np.ix_(occupants, channels)] = solved.powers
        all_converged = all_converged and solved.converged
    return result, all_converged


class StopRule(object):
    """
    Counts consecutive stable iterations and remembers where the streak began.
    """

    def __init__(self, window):
        self.window = window
        self.streak = 0
        self.start = None

    def update(self, iteration, stable):
        if stable:
            if self.streak == 0:
                self.start = iteration
            self.streak += 1
        else:
            self.streak = 0
            self.start = None
        return self.streak >= self.window


def _new_trace(name, inst, seed, config, with_coalitions=False):
    return RunTrace(name, seed, inst.num_aps, config.track_cus, with_coalitions)


def _initial_state(inst, rng, config, random_start):
    assoc = rng.integers(inst.num_aps, size=inst.num_cus)
    powers = random_powers(inst, assoc, rng) if random_start else uniform_powers(inst, assoc)
    return GameState(assoc=assoc,
                     powers=powers,
                     memories=[ReplyMemory(config.memory, inst.num_aps) for _ in range(inst.num_cus)],
                     stay=np.zeros(inst.num_cus, dtype=np.int64))


def run_jaspa(inst, config=None, seed=0):
    """
    JASPA: best-reply sampling for the association, inner equilibria for the powers.

    Every outer iteration the occupants of each AP reach their spectrum-sharing
    equilibrium, every CU then records the AP promising the largest rate
    improvement (more than its connection cost) and samples its next AP from its
    reply memory.

    Args:
        inst (NetworkInstance): The snapshot.
        config (AlgorithmConfig): Parameters. Defaults if None.
        seed (int): Seed of the run's generator.

    Returns:
        RunTrace: The trace with the terminal state.
    """
    config = config or AlgorithmConfig()
    base = config.log_base
    rng = make_rng(seed)
    if config.memory < inst.num_cus:
        log.warning("Memory M=%d is below N=%d; convergence is not guaranteed" % (config.memory, inst.num_cus))
    costs = config.cost_vector(inst.num_cus)
    stop = StopRule(config.window(config.memory))
    trace = _new_trace("jaspa", inst, seed, config)

    state = _initial_state(inst, rng, config, random_start=False)
    restart = np.ones(inst.num_cus, dtype=bool)
    certificate = JepCertificate(False, float("nan"), -1)
    converged = False
    for t in range(1, config.max_iters + 1):
        state.iteration = t
        state.powers, inner_converged = inner_equilibria(inst, state.assoc, state.powers, restart, config)
        if not inner_converged:
            log.debug("Iteration %d: an inner solver hit its iteration cap" % t)
        imap = physics.interference_map(inst, state.assoc, state.powers)
        current = physics.realized_rates(inst, state.assoc, state.powers, base, imap)

        next_assoc = state.assoc.copy()
        for i in range(inst.num_cus):
            rates, _ = best_rates(inst, i, imap, base)
            reply = select_best_ap(inst, i, state.assoc[i], rates, current[i], costs[i], rng)
            beta_update(state.memories[i], reply)
            next_assoc[i] = sample_association(state.memories[i].beta, rng)
            trace.record_selection(t, i, next_assoc[i], state.memories[i].beta)

        restart = next_assoc != state.assoc
        gap = max_beta_gap(state.memories)
        stable = not restart.any() and gap <= BETA_CONCENTRATION
        if stop.update(t, stable):
            certificate = certify_jep(inst, state.assoc, state.powers, config.jep_tol, costs, base)
            converged = certificate.passed
        trace.record(t, current.sum(), physics.system_potential(inst, state.assoc, state.powers, base),
                     restart.sum(), gap, converged)
        if converged:
            break
        state.assoc = next_assoc

    if not converged:
        certificate = certify_jep(inst, state.assoc, state.powers, config.jep_tol, costs, base)
    return trace.finish(state.assoc, state.powers, converged, stop.start if converged else None, certificate.gap)


def run_se_jaspa(inst, config=None, seed=0):
    """
    Se-JASPA: sequential best responses in AP and power.

    At iteration t CU (t + 1) mod N acts: it moves to the AP with the largest
    best-response rate (ties broken at random) and water-fills there against
    the current occupants, or re-water-fills at its own AP. All other CUs keep
    their strategies, so the system potential is nondecreasing.
    """
    config = config or AlgorithmConfig()
    base = config.log_base
    rng = make_rng(seed)
    N = inst.num_cus
    costs = config.cost_vector(N)
    stop = StopRule(config.window(N))
    trace = _new_trace("se", inst, seed, config)

    state = _initial_state(inst, rng, config, random_start=True)
    certificate = JepCertificate(False, float("nan"), -1)
    converged = False
    for t in range(config.max_iters):
        iteration = t + 1
        state.iteration = iteration
        actor = (t + 1) % N
        home = state.assoc[actor]
        imap = physics.interference_map(inst, state.assoc, state.powers)
        rates, responses = best_rates(inst, actor, imap, base)

        winners = np.flatnonzero(rates == rates.max())
        choice = int(winners[0]) if winners.size == 1 else int(winners[rng.integers(winners.size)])
        if choice != home and rates[choice] <= rates[home] + costs[actor]:
            choice = int(home)

        state.powers[actor] = 0.0
        state.powers[actor, inst.channels_of(choice)] = responses[choice]
        switched = choice != home
        state.assoc[actor] = choice
        trace.record_selection(iteration, actor, choice, np.eye(inst.num_aps)[choice])

        if stop.update(iteration, not switched):
            certificate = certify_jep(inst, state.assoc, state.powers, config.jep_tol, costs, base)
            converged = certificate.passed
        trace.record(iteration, physics.sum_rate(inst, state.assoc, state.powers, base),
                     physics.system_potential(inst, state.assoc, state.powers, base), int(switched), 0.0, converged)
        if converged:
            break

    if not converged:
        certificate = certify_jep(inst, state.assoc, state.powers, config.jep_tol, costs, base)
    return trace.finish(state.assoc, state.powers, converged, stop.start if converged else None, certificate.gap)


def run_si_jaspa(inst, config=None, seed=0):
    """
    Si-JASPA: simultaneous AP and power updates.

    Every CU compares its best-response rate at home with the rates it could get
    elsewhere, records its best reply and samples an AP. A CU that switches
    water-fills at the new AP and restarts its stay counter; a CU that stays
    moves a fraction alpha_T of the way towards its water-filling response, T
    being the number of consecutive iterations it has stayed.

    The run stops once the association and the probability vectors have been
    stable for the stop window, the last power step is within inner_tol and the
    state certifies as a JEP.
    """
    config = config or AlgorithmConfig()
    base = config.log_base
    rng = make_rng(seed)
    schedule = config.schedule()
    costs = config.cost_vector(inst.num_cus)
    stop = StopRule(config.window(config.memory))
    trace = _new_trace("si", inst, seed, config)

    state = _initial_state(inst, rng, config, random_start=True)
    certificate = JepCertificate(False, float("nan"), -1)
    converged = False
    imap = physics.interference_map(inst, state.assoc, state.powers)
    for t in range(1, config.max_iters + 1):
        state.iteration = t
        next_assoc = state.assoc.copy()
        next_powers = np.zeros_like(state.powers)
        for i in range(inst.num_cus):
            home = state.assoc[i]
            rates, responses = best_rates(inst, i, imap, base)
            reply = select_best_ap(inst, i, home, rates, rates[home], costs[i], rng)
            beta_update(state.memories[i], reply)
            w = sample_association(state.memories[i].beta, rng)
            next_assoc[i] = w
            channels = inst.channels_of(w)
            if w != home:
                state.stay[i] = 1
                next_powers[i, channels] = responses[w]
            else:
                state.stay[i] += 1
                alpha = schedule.alpha(state.stay[i])
                next_powers[i, channels] = (1.0 - alpha) * state.powers[i, channels] + alpha * responses[w]
            trace.record_selection(t, i, w, state.memories[i].beta)

        switchers = int(np.count_nonzero(next_assoc != state.assoc))
        step = power_step(next_powers, state.powers)
        state.assoc, state.powers = next_assoc, next_powers
        imap = physics.interference_map(inst, state.assoc, state.powers)
        gap = max_beta_gap(state.memories)
        if stop.update(t, switchers == 0 and gap <= BETA_CONCENTRATION) and step <= config.inner_tol:
            certificate = certify_jep(inst, state.assoc, state.powers, config.jep_tol, costs, base)
            converged = certificate.passed
        current = physics.realized_rates(inst, state.assoc, state.powers, base, imap)
        trace.record(t, current.sum(), physics.system_potential(inst, state.assoc, state.powers, base),
                     switchers, gap, converged)
        if converged:
            break

    if not converged:
        certificate = certify_jep(inst, state.assoc, state.powers, config.jep_tol, costs, base)
    return trace.finish(state.assoc, state.powers, converged, stop.start if converged else None, certificate.gap)


def run_algorithm(name, inst, config=None, seed=0):
    """
    Runs a learning algorithm by name: 'jaspa', 'se', 'si' or 'jjaspa'.
    """
    if name == "jaspa":
        return run_jaspa(inst, config, seed)
    if name == "se":
        return run_se_jaspa(inst, config, seed)
    if name == "si":
        return run_si_jaspa(inst, config, seed)
    if name == "jjaspa":
        from .jjaspa import run_jjaspa
        return run_jjaspa(inst, config, seed)
    raise ValueError("Unknown algorithm %s, expected one of %s" % (name, ", ".join(ALGORITHMS)))
