'''
Rates, interference and potential functions.

All rates are normalized by the total number of channels K (the available
bandwidth is normalized to one) and use base-2 logarithms unless a different
base is passed in.
'''

from __future__ import absolute_import
import numpy as np

from .model import check_association, check_cu

DEFAULT_LOG_BASE = 2.0


def log_of(x, base=DEFAULT_LOG_BASE):
    if base == 2.0:
        return np.log2(x)
    return np.log(x) / np.log(base)


class InterferenceMap(object):
    """
    Aggregate received power that each CU sees on every channel.

    values[i, k] is the power received by the AP owning channel k from all CUs
    associated with it, excluding CU i. For an AP other than a(i) this is the
    full received power, since i transmits nothing there.
    """

    def __init__(self, inst, values, received):
        self.inst = inst
        self.values = values
        self.received = received

    def at(self, i, w):
        """
        Returns the vector I_{i,w} over the channels of AP w.
        """
        return self.values[i, self.inst.channels_of(w)]


def _local_arrays(inst, i, w, p, interference):
    check_cu(inst, i)
    channels = inst.channels_of(w)
    p = np.asarray(p, dtype=np.float64)
    interference = np.asarray(interference, dtype=np.float64)
    if p.shape != channels.shape or interference.shape != channels.shape:
        raise ValueError("Expected vectors over the %d channels of AP %d, got %s and %s"
                         % (channels.size, w, p.shape, interference.shape))
    return inst.gains[i, w, channels], inst.noise[w, channels], p, interference


def rate(inst, i, w, p, interference, base=DEFAULT_LOG_BASE):
    """
    Uplink rate of CU i at AP w.

    Args:
        inst (NetworkInstance): The snapshot.
        i (int): CU index.
        w (int): AP index.
        p (ndarray): Power vector over the channels of AP w.
        interference (ndarray): Interference I_{i,w} over the channels of AP w.
        base (float): Logarithm base.

    Returns:
        float: (1/K) sum_k log(1 + g(k) p(k) / (n(k) + I(k))).
    """
    gains, noise, p, interference = _local_arrays(inst, i, w, p, interference)
    sinr = gains * p / (noise + interference)
    return float(np.sum(log_of(1.0 + sinr, base)) / inst.num_channels)


def interference_map(inst, assoc, powers):
    """
    Computes the interference every CU experiences at every AP.

    Args:
        inst (NetworkInstance): The snapshot.
        assoc (ndarray): Association profile.
        powers (ndarray): N x K power matrix, row i supported on the channels of a(i).

    Returns:
        InterferenceMap: The map.
    """
    check_association(inst, assoc)
    powers = np.asarray(powers, dtype=np.float64)
    if powers.shape != (inst.num_cus, inst.num_channels):
        raise ValueError("Power profile must have shape %s: %s" % ((inst.num_cus, inst.num_channels), powers.shape))
    contributions = inst.effective_gains * powers
    received = contributions.sum(axis=0)
    values = np.maximum(received[None, :] - contributions, 0.0)
    return InterferenceMap(inst, values, received)


def realized_rates(inst, assoc, powers, base=DEFAULT_LOG_BASE, interference=None):
    """
    Returns the vector of every CU's rate at its own AP.
    """
    if interference is None:
        interference = interference_map(inst, assoc, powers)
    sinr = inst.effective_gains * powers / (inst.effective_noise[None, :] + interference.values)
    return np.sum(log_of(1.0 + sinr, base), axis=1) / inst.num_channels


def sum_rate(inst, assoc, powers, base=DEFAULT_LOG_BASE):
    return float(np.sum(realized_rates(inst, assoc, powers, base)))


def potential_ap(inst, w, occupants, powers_w, base=DEFAULT_LOG_BASE):
    """
    Potential function of the spectrum-sharing game at AP w.

    Args:
        inst (NetworkInstance): The snapshot.
        w (int): AP index.
        occupants (sequence of int): CUs associated with AP w.
        powers_w (ndarray): len(occupants) x |K_w| powers of the occupants.
        base (float): Logarithm base.

    Returns:
        float: (1/K) sum_k [log(n(k) + sum_i g_i(k) p_i(k)) - log(n(k))].
    """
    channels = inst.channels_of(w)
    occupants = np.asarray(occupants, dtype=np.int64)
    noise = inst.noise[w, channels]
    if occupants.size == 0:
        return 0.0
    powers_w = np.asarray(powers_w, dtype=np.float64).reshape(occupants.size, channels.size)
    received = np.sum(inst.gains[occupants][:, w, channels] * powers_w, axis=0)
    return float(np.sum(log_of(noise + received, base) - log_of(noise, base)) / inst.num_channels)


def system_potential(inst, assoc, powers, base=DEFAULT_LOG_BASE):
    """
    Sum of the per-AP potentials.
    """
    assoc = check_association(inst, assoc)
    total = 0.0
    for w in range(inst.num_aps):
        occupants = np.flatnonzero(assoc == w)
        channels = inst.channels_of(w)
        total += potential_ap(inst, w, occupants, powers[np.ix_(occupants, channels)], base)
    return total
