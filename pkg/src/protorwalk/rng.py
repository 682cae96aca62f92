"""Counter-based random numbers for reproducible, schedule-independent runs.

Every random quantity is a pure function of a 64-bit stream key and an
integer counter: ``uniform(key, i)`` is the i-th output of a SplitMix64
stream started at ``key``. Coins use the step index as counter, the initial
rotor field uses a zigzag encoding of the site. Keys themselves come from
:class:`numpy.random.SeedSequence`, which hashes (master seed, trajectory
index) into well-mixed 64-bit words.
"""
from __future__ import annotations

import numpy as np
from numba import njit

_GAMMA = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1

GAMMA = np.uint64(_GAMMA)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0

ENV_STREAM = 0
COIN_STREAM = 1


@njit(cache=True, nogil=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def uniform(key, counter):
    """Uniform double in [0, 1) for ``counter >= 0``."""
    z = key + (np.uint64(counter) + _ONE) * GAMMA
    return float(mix64(z) >> _S11) * _INV53


@njit(cache=True, nogil=True)
def site_counter(x):
    return 2 * x if x >= 0 else -2 * x - 1


def uniform_py(key: int, counter: int) -> float:
    """Pure-Python twin of :func:`uniform` used as a cross-check."""
    z = (key + (counter + 1) * _GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    z ^= z >> 31
    return (z >> 11) * _INV53


def trajectory_seed(master_seed: int, index: int) -> int:
    """64-bit seed of trajectory ``index`` under ``master_seed``."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def stream_keys(seed: int) -> tuple[int, int]:
    """Disjoint (environment, coin) keys for one trajectory seed."""
    env, coin = np.random.SeedSequence(seed).generate_state(2, np.uint64)
    return int(env), int(coin)


def block_rng(master_seed: int, tag: int, block: int) -> np.random.Generator:
    """Generator for a fixed-size block of limit-process samples.

    ``tag`` separates unrelated experiments sharing one master seed.
    """
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(tag, block)))
