'''
J-JASPA: joint-strategy learning of AP association and powers.

Every CU remembers its past associations, interference snapshots and realized
rates, and every AP remembers, per coalition of occupants, the power and
interference profile it last saw and how often that coalition has played. A CU
re-evaluates one uniformly sampled past iteration, moves to a random AP that
would have beaten the rate it earned then, and continues the power iteration
the new AP recorded for the coalition it now belongs to.
'''

from __future__ import absolute_import
import logging
from collections import OrderedDict, deque
from dataclasses import dataclass

import numpy as np

from . import physics
from .bestresp import best_rate_at, waterfill
from .learn import BETA_CONCENTRATION, AlgorithmConfig, StopRule, certify_jep, power_step
from .model import make_rng, random_power, random_powers
from .trace import RunTrace

log = logging.getLogger(__name__)

MAX_COALITIONS_PER_AP = 4096
FRESH_STARTS = ("waterfill", "random")


def coalition_key(occupants):
    """
    Canonical, order-independent key of a set of CU indices.
    """
    return tuple(sorted(int(i) for i in set(occupants)))


class CuMemories(object):
    """
    Association, interference and rate memories of one CU.

    The three FIFOs are pushed together, so entries at the same position come
    from the same iteration.
    """

    def __init__(self, capacity):
        if int(capacity) < 1:
            raise ValueError("Memory capacity must be at least 1: %s" % capacity)
        self.capacity = int(capacity)
        self.associations = deque(maxlen=self.capacity)
        self.interference = deque(maxlen=self.capacity)
        self.rates = deque(maxlen=self.capacity)

    def __len__(self):
        return len(self.associations)

    def push(self, ap, interference, rate):
        self.associations.append(int(ap))
        self.interference.append(np.array(interference, dtype=np.float64))
        self.rates.append(float(rate))

    def sample(self, rng):
        """
        Returns an aligned (association, interference, rate) triple drawn uniformly
        from the stored iterations.
        """
        if not self.associations:
            raise ValueError("Cannot sample an empty memory")
        index = int(rng.integers(len(self.associations)))
        return self.associations[index], self.interference[index], self.rates[index]

    def mode_frequency(self):
        counts = np.bincount(np.fromiter(self.associations, dtype=np.int64))
        return counts.max() / float(len(self.associations))


@dataclass
class ApCoalitionRecord:
    """
    What an AP last saw for one coalition. Rows of powers and interference follow
    the coalition key.
    """

    powers: np.ndarray
    interference: np.ndarray
    visits: int = 1


class CoalitionStore(object):
    """
    Per-AP coalition records, least recently visited evicted first.
    """

    def __init__(self, ap, capacity=MAX_COALITIONS_PER_AP):
        self.ap = ap
        self.capacity = capacity
        self.records = OrderedDict()
        self.evictions = 0

    def __len__(self):
        return len(self.records)

    def __contains__(self, key):
        return key in self.records

    def get(self, key):
        return self.records.get(key)

    def visit(self, key, powers, interference):
        record = self.records.get(key)
        if record is None:
            record = ApCoalitionRecord(np.array(powers), np.array(interference))
            self.records[key] = record
            if len(self.records) > self.capacity:
                evicted, _ = self.records.popitem(last=False)
                self.evictions += 1
                log.warning("AP %d dropped the record of coalition %s" % (self.ap, evicted))
        else:
            record.powers = np.array(powers)
            record.interference = np.array(interference)
            record.visits += 1
            self.records.move_to_end(key)
        return record


def _fresh_power(inst, i, w, interference, fresh_start, rng):
    if fresh_start == "waterfill":
        return waterfill(inst, i, w, interference)
    return random_power(inst, i, w, rng)


def run_jjaspa(inst, config=None, seed=0, store_capacity=MAX_COALITIONS_PER_AP, fresh_start="waterfill",
               observer=None):
    """
    Runs J-JASPA.

    Each iteration proceeds in barrier-separated phases: all CUs push into their
    memories, all APs update the record of their current coalition, all CUs
    pick their next AP, and only then, with the new coalitions known, every CU
    sets its powers from the record of its new coalition.

    A coalition an AP has never seen starts from any feasible power vector. With
    fresh_start='waterfill' each of its members water-fills against the
    interference it measures at the AP this iteration; 'random' draws a uniform
    point of the feasible set instead.

    The run stops once no CU has switched and every association memory has held
    a single AP for the stop window, the last power step is within inner_tol
    and the state certifies as a JEP.

    Args:
        inst (NetworkInstance): The snapshot.
        config (AlgorithmConfig): memory, exponent, costs, inner_tol, max_iters, stop_window and jep_tol are used.
        seed (int): Seed of the run's generator.
        store_capacity (int): Coalition records kept per AP.
        fresh_start (str): 'waterfill' or 'random'.
        observer (callable): Called as observer(t, assoc, powers, stores) once the APs have
            recorded iteration t.

    Returns:
        RunTrace: The trace, with the number of stored coalitions per iteration.
    """
    if fresh_start not in FRESH_STARTS:
        raise ValueError("Unknown fresh start %s, expected one of %s" % (fresh_start, ", ".join(FRESH_STARTS)))
    config = config or AlgorithmConfig()
    base = config.log_base
    rng = make_rng(seed)
    schedule = config.schedule()
    costs = config.cost_vector(inst.num_cus)
    N, W = inst.num_cus, inst.num_aps
    trace = RunTrace("jjaspa", seed, W, config.track_cus, with_coalitions=True)

    assoc = rng.integers(W, size=N)
    powers = random_powers(inst, assoc, rng)
    memories = [CuMemories(config.memory) for _ in range(N)]
    stores = [CoalitionStore(w, store_capacity) for w in range(W)]

    stop = StopRule(config.window(config.memory))
    converged = False
    certificate = None
    for t in range(1, config.max_iters + 1):
        imap = physics.interference_map(inst, assoc, powers)
        current = physics.realized_rates(inst, assoc, powers, base, imap)

        for i in range(N):
            memories[i].push(assoc[i], imap.values[i], current[i])

        for w in range(W):
            occupants = np.flatnonzero(assoc == w)
            if occupants.size == 0:
                continue
            channels = inst.channels_of(w)
            stores[w].visit(coalition_key(occupants), powers[np.ix_(occupants, channels)],
                            imap.values[np.ix_(occupants, channels)])
        if observer is not None:
            observer(t, assoc, powers, stores)

        next_assoc = assoc.copy()
        for i in range(N):
            sampled_ap, sampled_interference, sampled_rate = memories[i].sample(rng)
            candidates = {sampled_ap}
            for w in range(W):
                cost = 0.0 if w == sampled_ap else costs[i]
                rate_w, _ = best_rate_at(inst, i, w, sampled_interference[inst.channels_of(w)], base)
                if rate_w > sampled_rate + cost:
                    candidates.add(w)
            candidates = sorted(candidates)
            next_assoc[i] = candidates[0] if len(candidates) == 1 else candidates[rng.integers(len(candidates))]

        next_powers = np.zeros_like(powers)
        for w in range(W):
            occupants = np.flatnonzero(next_assoc == w)
            if occupants.size == 0:
                continue
            channels = inst.channels_of(w)
            record = stores[w].get(coalition_key(occupants))
            for row, i in enumerate(occupants):
                if record is None:
                    next_powers[i, channels] = _fresh_power(inst, i, w, imap.values[i, channels], fresh_start, rng)
                else:
                    alpha = schedule.alpha(record.visits)
                    response = waterfill(inst, i, w, record.interference[row])
                    next_powers[i, channels] = (1.0 - alpha) * record.powers[row] + alpha * response

        switchers = int(np.count_nonzero(next_assoc != assoc))
        step = power_step(next_powers, powers)
        assoc, powers = next_assoc, next_powers
        for i in range(N):
            trace.record_selection(t, i, assoc[i], np.bincount(list(memories[i].associations), minlength=W)
                                   / float(len(memories[i])))

        gap = max(1.0 - memory.mode_frequency() for memory in memories)
        if stop.update(t, switchers == 0 and gap <= BETA_CONCENTRATION) and step <= config.inner_tol:
            certificate = certify_jep(inst, assoc, powers, config.jep_tol, costs, base)
            converged = certificate.passed
        trace.record(t, physics.sum_rate(inst, assoc, powers, base),
                     physics.system_potential(inst, assoc, powers, base), switchers, gap, converged,
                     sum(len(store) for store in stores))
        if converged:
            break

    trace.evictions = sum(store.evictions for store in stores)
    if not converged:
        certificate = certify_jep(inst, assoc, powers, config.jep_tol, costs, base)
    return trace.finish(assoc, powers, converged, stop.start if converged else None, certificate.gap)
