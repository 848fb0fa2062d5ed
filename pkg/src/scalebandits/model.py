"""Environment side of the adversarial-scaling model.

An instance fixes the intrinsic means ``theta`` (normalised so the best arm has
``theta == 1``); the adversary supplies a quality ``q`` per round, and the reward
of arm ``a`` is Bernoulli with mean ``q * theta(a)``.  Pseudo-regret is computed
from the true parameters, which only the environment knows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

#: checkpoint every this many rounds (plus the final round) unless told otherwise
DEFAULT_CHECKPOINT_STRIDE = 100


@dataclass(frozen=True)
class Instance:
    """Normalised arm means.

    ``scale`` is the largest raw mean; every quality the adversary emits is
    multiplied by it, so that ``scale * theta`` reproduces the raw means.
    """

    theta: tuple[float, ...]
    scale: float = 1.0

    def __post_init__(self):
        if len(self.theta) < 1:
            raise ValueError("an instance needs at least one arm")
        if not 0.0 < self.scale <= 1.0:
            raise ValueError(f"scale must lie in (0, 1], got {self.scale}")
        if any(not 0.0 <= th <= 1.0 for th in self.theta):
            raise ValueError(f"theta values must lie in [0, 1], got {self.theta}")
        if max(self.theta) != 1.0:
            raise ValueError("theta must be normalised so that max(theta) == 1")

    @property
    def k(self) -> int:
        return len(self.theta)

    @property
    def optimal_arm(self) -> int:
        # lowest index among the maximisers
        return self.theta.index(1.0)

    @property
    def gaps(self) -> tuple[float, ...]:
        return tuple(1.0 - th for th in self.theta)

    @property
    def raw_means(self) -> tuple[float, ...]:
        return tuple(self.scale * th for th in self.theta)


def normalize_instance(theta_raw: Sequence[float]) -> Instance:
    """Divide raw means by their maximum.

    >>> normalize_instance([0.5, 0.8])
    Instance(theta=(0.625, 1.0), scale=0.8)
    """
    theta_raw = [float(x) for x in theta_raw]
    if not theta_raw:
        raise ValueError("theta_raw must be non-empty")
    if any(not 0.0 <= x <= 1.0 for x in theta_raw):
        raise ValueError(f"raw means must lie in [0, 1], got {theta_raw}")
    top = max(theta_raw)
    if top <= 0.0:
        raise ValueError(
            "all raw means are zero: every arm is optimal and there is nothing to normalise"
        )
    # the maximiser divides to exactly 1.0 in IEEE arithmetic
    return Instance(theta=tuple(x / top for x in theta_raw), scale=top)


def draw_reward(rng, quality: float, theta_a: float) -> int:
    """Bernoulli(quality * theta_a) draw using exactly one uniform from ``rng``."""
    return 1 if rng.random() < quality * theta_a else 0


def regret_increment(instance: Instance, quality: float, chosen: int) -> float:
    if not 0 <= chosen < instance.k:
        raise IndexError(f"arm {chosen} out of range for k={instance.k}")
    return quality * (1.0 - instance.theta[chosen])


@dataclass(frozen=True)
class RoundOutcome:
    round: int
    quality: float
    chosen_arm: int
    reward: int
    regret_increment: float


class _Neumaier:
    """Compensated running sum."""

    __slots__ = ("total", "comp")

    def __init__(self):
        self.total = 0.0
        self.comp = 0.0

    def add(self, x: float) -> None:
        s = self.total + x
        if abs(self.total) >= abs(x):
            self.comp += (self.total - s) + x
        else:
            self.comp += (x - s) + self.total
        self.total = s

    @property
    def value(self) -> float:
        return self.total + self.comp


@dataclass
class EpisodeTrace:
    """Checkpointed cumulative statistics of one seeded episode.

    Columns are parallel numpy arrays: ``rounds``, ``cum_reward``,
    ``cum_regret`` (pseudo-regret) and ``cum_quality`` (the sum of qualities,
    diagnostic only).
    """

    seed: int
    horizon: int
    rounds: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    cum_reward: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cum_regret: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cum_quality: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.rounds = np.asarray(self.rounds, dtype=np.int64)
        self.cum_reward = np.asarray(self.cum_reward, dtype=float)
        self.cum_regret = np.asarray(self.cum_regret, dtype=float)
        self.cum_quality = np.asarray(self.cum_quality, dtype=float)
        self.validate()

    def __len__(self) -> int:
        return len(self.rounds)

    def append(self, round: int, cum_reward: float, cum_regret: float, cum_quality: float) -> None:
        cols = (
            np.append(self.rounds, np.int64(round)),
            np.append(self.cum_reward, float(cum_reward)),
            np.append(self.cum_regret, float(cum_regret)),
            np.append(self.cum_quality, float(cum_quality)),
        )
        _check_columns(*cols)
        self.rounds, self.cum_reward, self.cum_regret, self.cum_quality = cols

    def validate(self) -> None:
        _check_columns(self.rounds, self.cum_reward, self.cum_regret, self.cum_quality)

    @property
    def final_regret(self) -> float:
        return float(self.cum_regret[-1]) if len(self) else 0.0

    @property
    def final_reward(self) -> float:
        return float(self.cum_reward[-1]) if len(self) else 0.0

    def regret_at(self, round: int) -> float:
        """Cumulative pseudo-regret at a checkpointed round."""
        idx = np.searchsorted(self.rounds, round)
        if idx == len(self.rounds) or self.rounds[idx] != round:
            raise KeyError(f"round {round} is not a checkpoint")
        return float(self.cum_regret[idx])


def _check_columns(rounds, cum_reward, cum_regret, cum_quality) -> None:
    n = len(rounds)
    if not (len(cum_reward) == len(cum_regret) == len(cum_quality) == n):
        raise ValueError("trace columns have different lengths")
    if n == 0:
        return
    if np.any(np.diff(rounds) <= 0):
        raise ValueError("checkpoint rounds must be strictly increasing")
    for name, col in (("cum_reward", cum_reward), ("cum_regret", cum_regret),
                      ("cum_quality", cum_quality)):
        if np.any(np.diff(col) < 0) or col[0] < 0:
            raise ValueError(f"{name} must be non-negative and non-decreasing")
    # Delta <= 1, so regret is dominated by total quality (up to rounding)
    if np.any(cum_regret > cum_quality * (1 + 1e-12) + 1e-12):
        raise ValueError("cumulative pseudo-regret exceeds cumulative quality")


def checkpoint_rounds(horizon: int, stride: int) -> np.ndarray:
    """Rounds ``stride, 2*stride, ...`` plus ``horizon`` itself."""
    if stride < 1:
        raise ValueError("checkpoint stride must be positive")
    if horizon <= 0:
        return np.zeros(0, dtype=np.int64)
    rounds = np.arange(stride, horizon + 1, stride, dtype=np.int64)
    if len(rounds) == 0 or rounds[-1] != horizon:
        rounds = np.append(rounds, np.int64(horizon))
    return rounds
