"""Seeded episodes, multi-run experiments and regret aggregation.

Seeding scheme (stable across machines and worker counts)::

    h    = splitmix64(master_seed)
    h    = splitmix64(h ^ fnv1a64(policy_id))
    seed = splitmix64(h ^ run_index)

Each episode then spawns two PCG64 streams from ``SeedSequence(seed)``: the
first drives arm selection (including Thompson's posterior samples), the
second the reward draws, one uniform per round.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import _fast
from .adversaries import QualitySchedule, check_distribution
from .model import (
    DEFAULT_CHECKPOINT_STRIDE,
    EpisodeTrace,
    Instance,
    _Neumaier,
    checkpoint_rounds,
    draw_reward,
    normalize_instance,
    regret_increment,
)
from .policies import POLICY_IDS, Policy, make_policy, policy_parameters, sample_arm

log = logging.getLogger(__name__)

RNG_IDENTITY = "numpy.random.PCG64/SeedSequence(seed).spawn(2)"
_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK
    return h


def derive_seed(master_seed: int, policy_id: str, run: int) -> int:
    h = splitmix64(master_seed & _MASK)
    h = splitmix64(h ^ fnv1a64(policy_id))
    return splitmix64(h ^ (run & _MASK))


def episode_streams(seed: int):
    """(selection, reward) generators for one episode."""
    sel, rew = np.random.SeedSequence(seed).spawn(2)
    return np.random.Generator(np.random.PCG64(sel)), np.random.Generator(np.random.PCG64(rew))


def _as_instance(instance) -> Instance:
    return instance if isinstance(instance, Instance) else normalize_instance(instance)


def run_episode(
    instance,
    schedule,
    policy,
    seed: int,
    horizon: int,
    checkpoint_stride: int = DEFAULT_CHECKPOINT_STRIDE,
    *,
    params: Mapping | None = None,
    engine: str = "auto",
    rng_sel=None,
    rng_rew=None,
) -> EpisodeTrace:
    """Play ``horizon`` rounds of the protocol and return the checkpointed trace.

    ``instance`` may be an :class:`Instance` or a list of raw means.
    ``policy`` is either a policy id (built fresh with ``params``) or a
    :class:`Policy` object, which is mutated.  ``schedule`` is a
    :class:`QualitySchedule` or anything with a ``next_quality(t, p, opt)``
    method.  The compiled engine is used for policy ids with built-in
    schedules unless ``engine="python"``; explicit ``rng_sel``/``rng_rew``
    streams override the ones derived from ``seed``.
    """
    instance = _as_instance(instance)
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    if isinstance(policy, str):
        policy = make_policy(policy, instance.k, horizon, **(params or {}))
        compilable = isinstance(schedule, QualitySchedule)
    else:
        if params:
            raise ValueError("params only apply when the policy is given by id")
        compilable = False
    if engine not in ("auto", "python", "compiled"):
        raise ValueError(f"unknown engine {engine!r}")
    if engine == "compiled" and not compilable:
        raise ValueError("the compiled engine needs a policy id and a built-in schedule")
    if policy.k != instance.k:
        raise ValueError(f"policy has {policy.k} arms, instance has {instance.k}")

    default_sel, default_rew = episode_streams(seed)
    rng_sel = default_sel if rng_sel is None else rng_sel
    rng_rew = default_rew if rng_rew is None else rng_rew

    if compilable and engine != "python":
        rounds, reward, regret, quality = _fast.run_compiled(
            instance, schedule, policy, horizon, checkpoint_stride, rng_sel, rng_rew
        )
        return EpisodeTrace(seed, horizon, rounds, reward, regret, quality)

    marks = checkpoint_rounds(horizon, checkpoint_stride)
    trace = EpisodeTrace(seed=seed, horizon=horizon)
    theta = instance.theta
    opt = instance.optimal_arm
    cum_reward, cum_regret, cum_quality = _Neumaier(), _Neumaier(), _Neumaier()
    mark = 0
    for t in range(1, horizon + 1):
        p = policy.announce(rng_sel).distribution
        q = instance.scale * schedule.next_quality(t, p, opt)
        if not 0.0 <= q <= 1.0:
            raise ValueError(f"schedule produced quality {q!r} outside [0, 1] at round {t}")
        arm = int(sample_arm(rng_sel, check_distribution(p)))
        reward = draw_reward(rng_rew, q, theta[arm])
        policy.update(arm, reward)
        cum_reward.add(reward)
        cum_regret.add(regret_increment(instance, q, arm))
        cum_quality.add(q)
        if mark < len(marks) and marks[mark] == t:
            trace.append(t, cum_reward.value, cum_regret.value, cum_quality.value)
            mark += 1
    return trace


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one experiment.

    ``overrides`` maps a policy id to keyword arguments of its constructor.
    """

    raw_means: tuple[float, ...]
    schedule: QualitySchedule = field(default_factory=QualitySchedule.constant)
    policies: tuple[str, ...] = POLICY_IDS
    horizon: int = 100_000
    runs: int = 100
    master_seed: int = 0
    checkpoint_stride: int = DEFAULT_CHECKPOINT_STRIDE
    overrides: dict = field(default_factory=dict)
    out_dir: str = "results"
    name: str = "custom"

    def __post_init__(self):
        self.raw_means = tuple(float(x) for x in self.raw_means)
        self.policies = tuple(self.policies)
        normalize_instance(self.raw_means)  # validates
        if self.horizon < 1:
            raise ValueError(f"horizon must be at least 1, got {self.horizon}")
        if self.runs < 1:
            raise ValueError(f"runs must be at least 1, got {self.runs}")
        if self.checkpoint_stride < 1:
            raise ValueError("checkpoint_stride must be positive")
        if not self.policies:
            raise ValueError("at least one policy is required")
        for pid in self.policies:
            if pid not in POLICY_IDS:
                raise ValueError(f"unknown policy {pid!r}; expected one of {POLICY_IDS}")
        for pid, params in self.overrides.items():
            if pid not in POLICY_IDS:
                raise ValueError(f"override for unknown policy {pid!r}")
            accepted = policy_parameters(pid)
            for param in params:
                if param not in accepted:
                    raise ValueError(f"{pid} has no parameter {param!r}; accepted: {accepted}")

    @property
    def instance(self) -> Instance:
        return normalize_instance(self.raw_means)


@dataclass
class AggregateCurve:
    """Mean and standard error of cumulative pseudo-regret across runs."""

    policy: str
    rounds: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    runs: int

    @property
    def final_mean(self) -> float:
        return float(self.mean[-1])

    @property
    def final_stderr(self) -> float:
        return float(self.stderr[-1])

    def at(self, round: int) -> tuple[float, float]:
        idx = int(np.searchsorted(self.rounds, round))
        if idx == len(self.rounds) or self.rounds[idx] != round:
            raise KeyError(f"round {round} is not a checkpoint")
        return float(self.mean[idx]), float(self.stderr[idx])


def aggregate(policy: str, traces: Sequence[EpisodeTrace]) -> AggregateCurve:
    if not traces:
        raise ValueError("nothing to aggregate")
    rounds = traces[0].rounds
    for tr in traces[1:]:
        if not np.array_equal(tr.rounds, rounds):
            raise ValueError("traces have different checkpoint rounds")
    regret = np.vstack([tr.cum_regret for tr in traces])
    n = len(traces)
    mean = regret.mean(axis=0)
    if n > 1:
        stderr = regret.std(axis=0, ddof=1) / math.sqrt(n)
    else:
        stderr = np.zeros_like(mean)
    return AggregateCurve(policy, rounds.copy(), mean, stderr, n)


def merge(a: AggregateCurve, b: AggregateCurve) -> AggregateCurve:
    """Pool two aggregates of the same policy (Chan et al. pairwise update)."""
    if a.policy != b.policy or not np.array_equal(a.rounds, b.rounds):
        raise ValueError("can only merge curves of the same policy and checkpoints")
    na, nb = a.runs, b.runs
    n = na + nb
    m2a = a.stderr**2 * na * (na - 1)
    m2b = b.stderr**2 * nb * (nb - 1)
    delta = b.mean - a.mean
    mean = a.mean + delta * nb / n
    m2 = m2a + m2b + delta**2 * na * nb / n
    stderr = np.sqrt(m2 / (n - 1) / n)
    return AggregateCurve(a.policy, a.rounds.copy(), mean, stderr, n)


def _episode_task(args):
    instance, schedule, pid, params, horizon, stride, seed = args
    return run_episode(instance, schedule, pid, seed, horizon, stride, params=params)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    traces: dict  # policy id -> list[EpisodeTrace], indexed by run
    curves: dict  # policy id -> AggregateCurve


def run_traces(config: ExperimentConfig, workers: int = 1) -> dict:
    """All episode traces of ``config``; independent of ``workers``."""
    instance = config.instance
    tasks, keys = [], []
    for pid in config.policies:
        params = dict(config.overrides.get(pid, {}))
        for run in range(config.runs):
            seed = derive_seed(config.master_seed, pid, run)
            tasks.append((instance, config.schedule, pid, params, config.horizon,
                          config.checkpoint_stride, seed))
            keys.append((pid, run))

    results = [None] * len(tasks)
    if workers <= 1:
        for i, task in enumerate(tasks):
            try:
                results[i] = _episode_task(task)
            except Exception as exc:
                pid, run = keys[i]
                raise RuntimeError(f"episode failed: policy={pid} run={run}: {exc}") from exc
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_episode_task, task) for task in tasks]
            for i, fut in enumerate(futures):
                try:
                    results[i] = fut.result()
                except Exception as exc:
                    pid, run = keys[i]
                    raise RuntimeError(f"episode failed: policy={pid} run={run}: {exc}") from exc

    traces = {pid: [] for pid in config.policies}
    for (pid, _run), tr in zip(keys, results):
        traces[pid].append(tr)
    return traces


def run_experiment_full(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    traces = run_traces(config, workers)
    curves = {pid: aggregate(pid, trs) for pid, trs in traces.items()}
    for pid, curve in curves.items():
        log.info("%s: mean regret at T=%d is %.2f (stderr %.2f)", pid, config.horizon,
                 curve.final_mean, curve.final_stderr)
    return ExperimentResult(config, traces, curves)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> dict:
    """Map from policy id to its :class:`AggregateCurve`."""
    return run_experiment_full(config, workers).curves
