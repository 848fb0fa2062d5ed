"""Bandit algorithms and a simulation lab for adversarially scaled rewards.

Rewards of arm ``a`` at round ``t`` have mean ``q_t * theta(a)``: a fixed
intrinsic quality per arm times a per-round quality chosen by an adversary.
"""

from .adversaries import QualitySchedule, next_quality
from .model import (
    EpisodeTrace,
    Instance,
    RoundOutcome,
    draw_reward,
    normalize_instance,
    regret_increment,
)
from .policies import POLICY_IDS, PolicyDecision, make_policy
from .simulator import AggregateCurve, aggregate, run_episode, run_experiment

__version__ = "0.1.0"

__all__ = [
    "AggregateCurve",
    "EpisodeTrace",
    "Instance",
    "POLICY_IDS",
    "PolicyDecision",
    "QualitySchedule",
    "RoundOutcome",
    "aggregate",
    "draw_reward",
    "make_policy",
    "next_quality",
    "normalize_instance",
    "regret_increment",
    "run_episode",
    "run_experiment",
]
