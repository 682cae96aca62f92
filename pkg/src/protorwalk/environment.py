"""Lazily sampled rotor fields on Z and the coin sequence driving a walk."""
from __future__ import annotations

from collections.abc import Mapping
from types import MappingProxyType

import numpy as np

from .params import WalkParams
from .rng import stream_keys, uniform_py


def initial_rotor(u: float, x: int, alpha: float, beta: float) -> int:
    """Map a uniform draw to the initial rotor law at site ``x``."""
    if x > 0:
        return 1 if u < alpha else -1
    if x < 0:
        return -1 if u < beta else 1
    return 1 if u < 0.5 else -1


def _check_rotor(site: int, value: int) -> None:
    if value not in (-1, 1):
        raise ValueError(f"rotor at site {site} must be +1 or -1, got {value!r}")


class RotorEnvironment:
    """Two-sided rotor field, sampled site by site on first query.

    The initial rotor of a site is a pure function of the environment key
    and the site, so querying sites in any order (or not at all) never
    changes what another site receives. Pinned ``overrides`` replace the
    random law on finitely many sites.
    """

    def __init__(self, params: WalkParams, key: int,
                 overrides: Mapping[int, int] | None = None) -> None:
        self.params = params
        self.key = int(key)
        pins = dict(overrides or {})
        for site, value in pins.items():
            _check_rotor(site, value)
        self.overrides = MappingProxyType(pins)
        self._initial: dict[int, int] = {}
        self._current: dict[int, int] = {}

    def initial(self, x: int) -> int:
        x = int(x)
        if x in self.overrides:
            return self.overrides[x]
        if x not in self._initial:
            u = uniform_py(self.key, 2 * x if x >= 0 else -2 * x - 1)
            self._initial[x] = initial_rotor(u, x, self.params.alpha, self.params.beta)
        return self._initial[x]

    def rotor(self, x: int) -> int:
        """Current rotor at ``x``."""
        cur = self._current.get(int(x))
        return self.initial(x) if cur is None else cur

    def is_fresh(self, x: int) -> bool:
        """True while the walker has never left ``x``."""
        return int(x) not in self._current

    def set(self, x: int, value: int) -> None:
        _check_rotor(x, value)
        self._current[int(x)] = value

    def snapshot(self, lo: int, hi: int) -> np.ndarray:
        return np.array([self.rotor(x) for x in range(lo, hi + 1)], dtype=np.int8)


def sample_environment(params: WalkParams, overrides: Mapping[int, int] | None = None,
                       seed: int = 0) -> RotorEnvironment:
    env_key, _ = stream_keys(seed)
    return RotorEnvironment(params, env_key, overrides)


class CoinStream:
    """Coins B_0, B_1, ...: +1 (broken rotor) with probability p."""

    def __init__(self, p: float, key: int) -> None:
        self.p = p
        self.key = int(key)

    def __call__(self, n: int) -> int:
        return 1 if uniform_py(self.key, n) < self.p else -1

    @classmethod
    def for_seed(cls, p: float, seed: int) -> "CoinStream":
        _, coin_key = stream_keys(seed)
        return cls(p, coin_key)
