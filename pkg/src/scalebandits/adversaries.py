"""Quality schedules: the adversarial half of the environment.

The adversary moves after the learner has announced its distribution ``p_t``
and before the arm is drawn from it, so the only thing a schedule can react
to is ``p_t``.  Constant and cold-start schedules ignore it entirely.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

KINDS = ("constant", "cold_start", "targeted_zero", "custom_sequence")

#: tolerance used when deciding that an announced distribution is a point mass
POINT_MASS_TOL = 1e-12
#: tolerance on the total mass of an announced distribution
SIMPLEX_TOL = 1e-9


@dataclass(frozen=True)
class QualitySchedule:
    """Rule producing the quality ``q_t`` in [0, 1] for each round.

    Use the classmethod constructors rather than filling the fields by hand.
    Unused parameters keep their defaults.
    """

    kind: str
    q0: float = 1.0
    t0: int = 0
    q_after: float = 1.0
    threshold: float = 1.0
    q_otherwise: float = 1.0
    sequence: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}; expected one of {KINDS}")
        for name in ("q0", "q_after", "q_otherwise"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {val}")
        if self.t0 < 0:
            raise ValueError(f"t0 must be non-negative, got {self.t0}")
        if not 0.5 < self.threshold <= 1.0:
            raise ValueError(f"threshold must lie in (0.5, 1], got {self.threshold}")
        if self.kind == "custom_sequence":
            if not self.sequence:
                raise ValueError("custom_sequence needs at least one quality")
            if any(not 0.0 <= q <= 1.0 for q in self.sequence):
                raise ValueError("custom_sequence qualities must lie in [0, 1]")

    @classmethod
    def constant(cls, q0: float = 1.0) -> "QualitySchedule":
        return cls("constant", q0=float(q0))

    @classmethod
    def cold_start(cls, t0: int, q_after: float = 1.0) -> "QualitySchedule":
        """Zero quality for rounds ``t <= t0``, ``q_after`` from ``t0 + 1`` on."""
        return cls("cold_start", t0=int(t0), q_after=float(q_after))

    @classmethod
    def targeted_zero(cls, threshold: float = 1.0, q_otherwise: float = 1.0) -> "QualitySchedule":
        """Zero the quality whenever the learner is (nearly) sure to play the best arm.

        ``threshold`` below 1 goes beyond exact point masses and lets the
        attack also hit near-deterministic learners.
        """
        return cls("targeted_zero", threshold=float(threshold), q_otherwise=float(q_otherwise))

    @classmethod
    def custom(cls, sequence: Sequence[float]) -> "QualitySchedule":
        return cls("custom_sequence", sequence=tuple(float(q) for q in sequence))

    @property
    def oblivious(self) -> bool:
        return self.kind != "targeted_zero"

    def next_quality(self, round: int, announced, optimal_arm: int) -> float:
        return next_quality(self, round, announced, optimal_arm)

    def describe(self) -> str:
        if self.kind == "constant":
            return f"constant({self.q0!r})"
        if self.kind == "cold_start":
            return f"cold_start({self.t0}, {self.q_after!r})"
        if self.kind == "targeted_zero":
            return f"targeted_zero({self.threshold!r}, {self.q_otherwise!r})"
        return "custom([" + ", ".join(repr(q) for q in self.sequence) + "])"


def check_distribution(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or len(p) == 0:
        raise ValueError("announced distribution must be a non-empty vector")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError(f"announced distribution has negative or non-finite entries: {p}")
    if abs(p.sum() - 1.0) > SIMPLEX_TOL:
        raise ValueError(f"announced distribution sums to {p.sum()!r}, not 1")
    return p


def next_quality(schedule: QualitySchedule, round: int, announced, optimal_arm: int) -> float:
    """Quality for ``round`` (1-based) given the learner's announced distribution."""
    p = check_distribution(announced)
    if round < 1:
        raise ValueError(f"rounds are 1-based, got {round}")
    kind = schedule.kind
    if kind == "constant":
        return schedule.q0
    if kind == "cold_start":
        return 0.0 if round <= schedule.t0 else schedule.q_after
    if kind == "targeted_zero":
        if p[optimal_arm] >= schedule.threshold - POINT_MASS_TOL:
            return 0.0
        return schedule.q_otherwise
    seq = schedule.sequence
    return seq[round - 1] if round <= len(seq) else seq[-1]
