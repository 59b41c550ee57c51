'''
Network snapshots of a multi-AP cognitive radio network.

A snapshot fixes the positions of the cognitive users (CUs) and access points
(APs), the partition of the channels among the APs, the channel gains, the
noise floor and the power budgets. Everything downstream works on immutable
snapshots.
'''

from __future__ import absolute_import
import logging
from dataclasses import dataclass, field, fields

import numpy as np

log = logging.getLogger(__name__)

FEASIBILITY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ScenarioConfig:
    """
    Parameters for generating network snapshots.

    Args:
        num_cus (int): Number of cognitive users N.
        num_aps (int): Number of access points W.
        num_channels (int): Number of channels K. Must be at least W.
        area_m (float): Edge length of the square deployment area in meters.
        power_budget (float): Total transmit power of every CU.
        noise_floor (float): Noise power on every channel of every AP.
        seed (int): Default seed for the snapshot generator.
        d_min (float): Distance floor in meters.
    """

    num_cus: int = 20
    num_aps: int = 4
    num_channels: int = 64
    area_m: float = 10.0
    power_budget: float = 1.0
    noise_floor: float = 0.01
    seed: int = 0
    d_min: float = 0.1

    def __post_init__(self):
        for name in ("num_cus", "num_aps", "num_channels"):
            if int(getattr(self, name)) < 1:
                raise ValueError("%s must be a positive integer: %s" % (name, getattr(self, name)))
        for name in ("area_m", "power_budget", "noise_floor", "d_min"):
            if not float(getattr(self, name)) > 0.0:
                raise ValueError("%s must be positive: %s" % (name, getattr(self, name)))
        if int(self.seed) < 0:
            raise ValueError("seed must be an unsigned integer: %s" % self.seed)

    @classmethod
    def from_dict(cls, values):
        """
        Creates a config from a dictionary, rejecting unknown keys.
        """
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ValueError("Unknown scenario keys: %s" % ", ".join(unknown))
        return cls(**values)

    def replace(self, **changes):
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return ScenarioConfig(**values)


@dataclass(frozen=True, eq=False)
class NetworkInstance:
    """
    Immutable snapshot of the network.

    gains[i, w, k] is |h_{i,w}(k)|^2 and is only meaningful for channels owned by
    AP w; all other entries are zero. Arrays are made read-only on construction.
    """

    num_cus: int
    num_aps: int
    num_channels: int
    channel_owner: np.ndarray
    gains: np.ndarray
    noise: np.ndarray
    budgets: np.ndarray
    positions_cu: np.ndarray
    positions_ap: np.ndarray
    rng_seed: int = 0
    effective_gains: np.ndarray = field(init=False, repr=False, compare=False)
    effective_noise: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        owner = np.array(self.channel_owner, dtype=np.int64)
        gains = np.array(self.gains, dtype=np.float64)
        noise = np.array(self.noise, dtype=np.float64)
        budgets = np.array(self.budgets, dtype=np.float64)
        N, W, K = self.num_cus, self.num_aps, self.num_channels

        # Preconditions.
        if owner.shape != (K,):
            raise ValueError("channel_owner must have length K=%d: %s" % (K, owner.shape))
        if owner.min() < 0 or owner.max() >= W:
            raise ValueError("channel_owner holds an invalid AP index")
        if gains.shape != (N, W, K):
            raise ValueError("gains must have shape %s: %s" % ((N, W, K), gains.shape))
        if noise.shape != (W, K):
            raise ValueError("noise must have shape %s: %s" % ((W, K), noise.shape))
        if budgets.shape != (N,):
            raise ValueError("budgets must have length N=%d: %s" % (N, budgets.shape))
        if np.any(gains < 0.0):
            raise ValueError("gains must be non-negative")
        if np.any(noise[owner, np.arange(K)] <= 0.0):
            raise ValueError("noise must be positive on every owned channel")
        if np.any(budgets <= 0.0):
            raise ValueError("budgets must be positive")

        # Gains and noise as seen on each channel by the AP owning it.
        effective_gains = gains[:, owner, np.arange(K)]
        effective_noise = noise[owner, np.arange(K)]

        for name, value in (("channel_owner", owner), ("gains", gains), ("noise", noise),
                            ("budgets", budgets),
                            ("positions_cu", np.array(self.positions_cu, dtype=np.float64)),
                            ("positions_ap", np.array(self.positions_ap, dtype=np.float64)),
                            ("effective_gains", effective_gains),
                            ("effective_noise", effective_noise)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    def channels_of(self, w):
        """
        Returns the sorted channel indices K_w owned by AP w.
        """
        check_ap(self, w)
        return np.flatnonzero(self.channel_owner == w)

    def distances(self, d_min=0.0):
        """
        Returns the N x W matrix of CU-AP distances, floored at d_min.
        """
        deltas = self.positions_cu[:, None, :] - self.positions_ap[None, :, :]
        return np.maximum(np.sqrt(np.sum(deltas ** 2, axis=2)), d_min)


def check_ap(inst, w):
    if not 0 <= int(w) < inst.num_aps:
        raise ValueError("Invalid AP index %s for W=%d" % (w, inst.num_aps))


def check_cu(inst, i):
    if not 0 <= int(i) < inst.num_cus:
        raise ValueError("Invalid CU index %s for N=%d" % (i, inst.num_cus))


def make_rng(seed):
    """
    The single generator used for every stochastic operation: numpy PCG64.
    """
    return np.random.Generator(np.random.PCG64(seed))


def assign_channels(num_channels, num_aps):
    """
    Assigns channels to APs in contiguous blocks of K // W channels.

    The remainder goes to the last AP.
    """
    if num_channels < num_aps:
        raise ValueError("K=%d channels cannot be split among W=%d APs" % (num_channels, num_aps))
    block = num_channels // num_aps
    return np.minimum(np.arange(num_channels) // block, num_aps - 1)


def generate_snapshot(config, seed=None):
    """
    Draws a random network snapshot.

    CUs and APs are placed uniformly in the square [0, area_m]^2. Channel gains are
    exponential with mean 1/d^2, where d is the CU-AP distance floored at d_min.

    Args:
        config (ScenarioConfig): Scenario parameters.
        seed (int): Seed for the PCG64 generator. Defaults to config.seed.

    Returns:
        NetworkInstance: The snapshot. Identical (config, seed) give identical snapshots.
    """
    if seed is None:
        seed = config.seed
    N, W, K = config.num_cus, config.num_aps, config.num_channels
    owner = assign_channels(K, W)

    rng = make_rng(seed)
    positions_cu = rng.uniform(0.0, config.area_m, size=(N, 2))
    positions_ap = rng.uniform(0.0, config.area_m, size=(W, 2))

    deltas = positions_cu[:, None, :] - positions_ap[None, :, :]
    distances = np.maximum(np.sqrt(np.sum(deltas ** 2, axis=2)), config.d_min)
    mean_gains = 1.0 / distances ** 2
    draws = rng.exponential(1.0, size=(N, W, K))
    owned = owner[None, :] == np.arange(W)[:, None]
    gains = draws * mean_gains[:, :, None] * owned[None, :, :]

    log.debug("Generated snapshot N=%d W=%d K=%d seed=%d" % (N, W, K, seed))
    return NetworkInstance(
        num_cus=N,
        num_aps=W,
        num_channels=K,
        channel_owner=owner,
        gains=gains,
        noise=np.full((W, K), float(config.noise_floor)),
        budgets=np.full(N, float(config.power_budget)),
        positions_cu=positions_cu,
        positions_ap=positions_ap,
        rng_seed=int(seed))


def is_feasible(inst, i, w, p):
    """
    Returns True if p is a feasible power vector for CU i at AP w.

    Raises:
        ValueError: if p does not have one entry per channel of AP w.
    """
    check_cu(inst, i)
    p = np.asarray(p, dtype=np.float64)
    channels = inst.channels_of(w)
    if p.shape != channels.shape:
        raise ValueError("Power vector has %d entries, AP %d owns %d channels" % (p.size, w, channels.size))
    return bool(np.all(p >= 0.0) and np.sum(p) <= inst.budgets[i] + FEASIBILITY_TOLERANCE)


def check_association(inst, assoc):
    """
    Validates an association profile and returns it as an integer array.
    """
    assoc = np.asarray(assoc, dtype=np.int64)
    if assoc.shape != (inst.num_cus,):
        raise ValueError("Association must have length N=%d: %s" % (inst.num_cus, assoc.shape))
    if np.any(assoc < 0) or np.any(assoc >= inst.num_aps):
        raise ValueError("Association holds an invalid AP index: %s" % assoc)
    return assoc


def occupants_of(assoc, w):
    return np.flatnonzero(np.asarray(assoc) == w)


def embed_powers(inst, assoc, local_powers):
    """
    Builds the N x K power matrix from per-CU vectors over their own AP's channels.

    Row i of the result is supported on K_{a(i)} only. This matrix is the
    PowerProfile representation used throughout the package.
    """
    assoc = check_association(inst, assoc)
    powers = np.zeros((inst.num_cus, inst.num_channels))
    for i, p in enumerate(local_powers):
        powers[i, inst.channels_of(assoc[i])] = p
    return powers


def uniform_powers(inst, assoc):
    """
    Splits every CU's budget evenly over its AP's channels.
    """
    assoc = check_association(inst, assoc)
    counts = np.bincount(inst.channel_owner, minlength=inst.num_aps)
    powers = np.zeros((inst.num_cus, inst.num_channels))
    for i in range(inst.num_cus):
        powers[i, inst.channel_owner == assoc[i]] = inst.budgets[i] / counts[assoc[i]]
    return powers


def random_power(inst, i, w, rng):
    """
    Draws a random feasible vector for CU i at AP w: Dirichlet(1, ..., 1) times the budget.
    """
    size = inst.channels_of(w).size
    return rng.dirichlet(np.ones(size)) * inst.budgets[i]


def random_powers(inst, assoc, rng):
    return embed_powers(inst, assoc, [random_power(inst, i, w, rng) for i, w in enumerate(assoc)])


def check_power_profile(inst, assoc, powers, tolerance=FEASIBILITY_TOLERANCE):
    """
    Returns True if the N x K power matrix is feasible under the association.
    """
    assoc = check_association(inst, assoc)
    powers = np.asarray(powers)
    if powers.shape != (inst.num_cus, inst.num_channels):
        return False
    off_ap = inst.channel_owner[None, :] != assoc[:, None]
    if np.any(powers < 0.0) or np.any(powers[off_ap] != 0.0):
        return False
    return bool(np.all(powers.sum(axis=1) <= inst.budgets + tolerance))
