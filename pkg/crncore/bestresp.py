'''
Single-CU best responses.

The best response of a CU to a fixed interference profile is the water-filling
power allocation over the channels of the AP it considers. Every learning
algorithm builds its AP choice on top of best_rate_at.
'''

from __future__ import absolute_import
import numpy as np

from . import physics
from .model import check_ap, check_cu


def water_levels(gains, noise, interference):
    """
    Returns (n + I) / |h|^2 per channel; +inf where the gain is zero.
    """
    levels = np.full(gains.shape, np.inf)
    usable = gains > 0.0
    levels[usable] = (noise[usable] + interference[usable]) / gains[usable]
    return levels


def fill(levels, budget):
    """
    Pours a power budget over channels with the given inverse-quality levels.

    Channels are sorted by level; the active set is the longest prefix whose
    common water mark stays above its worst level. The water mark mu then
    satisfies sum_k max(0, mu - level_k) = budget.

    Returns:
        (ndarray, float): The power vector and the water mark (nan if no channel is usable).
    """
    power = np.zeros(levels.shape)
    usable = np.flatnonzero(np.isfinite(levels))
    if usable.size == 0 or budget <= 0.0:
        return power, float("nan")

    order = usable[np.argsort(levels[usable], kind="stable")]
    sorted_levels = levels[order]
    marks = (budget + np.cumsum(sorted_levels)) / np.arange(1, order.size + 1)
    active = np.flatnonzero(marks > sorted_levels)[-1] + 1
    mark = marks[active - 1]
    power[order[:active]] = mark - sorted_levels[:active]
    return power, float(mark)


def waterfill(inst, i, w, interference):
    """
    Best-response power vector of CU i at AP w.

    Args:
        inst (NetworkInstance): The snapshot.
        i (int): CU index.
        w (int): AP index.
        interference (ndarray): I_{i,w} over the channels of AP w, entries >= 0.

    Returns:
        ndarray: The maximizer of rate(i, w, ., I) over the feasible set. The zero
        vector if CU i has no usable channel at AP w.
    """
    check_cu(inst, i)
    channels = inst.channels_of(w)
    interference = np.asarray(interference, dtype=np.float64)
    if interference.shape != channels.shape:
        raise ValueError("Interference has %d entries, AP %d owns %d channels" % (interference.size, w, channels.size))
    if np.any(interference < 0.0):
        raise ValueError("Interference must be non-negative")
    levels = water_levels(inst.gains[i, w, channels], inst.noise[w, channels], interference)
    power, _ = fill(levels, inst.budgets[i])
    return power


def best_rate_at(inst, i, w, interference, base=physics.DEFAULT_LOG_BASE):
    """
    Rate CU i could earn at AP w by water-filling against the given interference.

    Returns:
        (float, ndarray): The rate and the water-filling power vector.
    """
    power = waterfill(inst, i, w, interference)
    return physics.rate(inst, i, w, power, interference, base), power


def best_rates(inst, i, interference_map, base=physics.DEFAULT_LOG_BASE):
    """
    Best-response rates and powers of CU i at every AP under an interference map.

    At the CU's own AP the map already excludes its own power.
    """
    rates = np.zeros(inst.num_aps)
    powers = []
    for w in range(inst.num_aps):
        rates[w], power = best_rate_at(inst, i, w, interference_map.at(i, w), base)
        powers.append(power)
    return rates, powers


def select_best_ap(inst, i, current_ap, rates_per_ap, current_rate, cost, rng):
    """
    Picks the AP a CU wants to move to.

    Candidates are the APs other than the current one whose best rate strictly
    exceeds current_rate + cost. Among the candidates the maximum rate wins;
    exact ties are broken uniformly with rng.

    Returns:
        int: The chosen AP, or current_ap if no AP qualifies.
    """
    check_ap(inst, current_ap)
    rates_per_ap = np.asarray(rates_per_ap, dtype=np.float64)
    candidates = [w for w in range(inst.num_aps)
                  if w != current_ap and rates_per_ap[w] > current_rate + cost]
    if not candidates:
        return int(current_ap)
    best = max(rates_per_ap[w] for w in candidates)
    winners = [w for w in candidates if rates_per_ap[w] == best]
    if len(winners) == 1:
        return int(winners[0])
    return int(winners[rng.integers(len(winners))])
