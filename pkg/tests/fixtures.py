import numpy as np

from crncore.model import NetworkInstance


def make_instance(gains, noise=1.0, budgets=1.0, channel_owner=None):
    """
    Builds a hand-made snapshot from an N x W x K gain array.

    Gains on channels not owned by an AP are zeroed. Without channel_owner the
    channels are split in contiguous blocks.
    """
    gains = np.array(gains, dtype=np.float64)
    num_cus, num_aps, num_channels = gains.shape
    if channel_owner is None:
        block = num_channels // num_aps
        channel_owner = np.minimum(np.arange(num_channels) // block, num_aps - 1)
    channel_owner = np.asarray(channel_owner)
    owned = channel_owner[None, :] == np.arange(num_aps)[:, None]
    return NetworkInstance(
        num_cus=num_cus,
        num_aps=num_aps,
        num_channels=num_channels,
        channel_owner=channel_owner,
        gains=gains * owned[None, :, :],
        noise=np.broadcast_to(np.asarray(noise, dtype=np.float64), (num_aps, num_channels)),
        budgets=np.broadcast_to(np.asarray(budgets, dtype=np.float64), (num_cus,)),
        positions_cu=np.zeros((num_cus, 2)),
        positions_ap=np.zeros((num_aps, 2)))


def single_ap(gains, noise=1.0, budgets=1.0):
    """
    Snapshot with one AP owning every channel; gains is N x K.
    """
    gains = np.array(gains, dtype=np.float64)
    return make_instance(gains[:, None, :], noise, budgets)


def random_single_ap(rng, num_cus, num_channels):
    return single_ap(rng.exponential(1.0, size=(num_cus, num_channels)),
                     noise=rng.uniform(0.5, 1.0, size=num_channels),
                     budgets=rng.uniform(0.5, 2.0, size=num_cus))
