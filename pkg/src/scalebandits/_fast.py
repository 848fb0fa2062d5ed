"""Compiled episode loop for the built-in schedules and policies.

Mirrors :func:`scalebandits.simulator.run_episode` operation for operation
(same random draws in the same order, same compensated sums), so both paths
produce bit-identical traces; the test-suite checks this.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from . import policies as P
from .adversaries import KINDS, POINT_MASS_TOL, QualitySchedule
from .model import Instance, checkpoint_rounds

CODES = {name: i for i, name in enumerate(P.POLICY_IDS)}
_AAEAS, _BROAD, _UCB, _AAE, _THOMPSON, _EXP3PP, _TSALLIS = (CODES[n] for n in P.POLICY_IDS)
_CONSTANT, _COLD, _TARGETED, _CUSTOM = range(len(KINDS))


@njit(cache=True)
def _quality(kind, q0, t0, q_after, threshold, q_otherwise, seq, t, p, opt):
    if kind == _CONSTANT:
        return q0
    if kind == _COLD:
        return 0.0 if t <= t0 else q_after
    if kind == _TARGETED:
        return 0.0 if p[opt] >= threshold - POINT_MASS_TOL else q_otherwise
    n = seq.shape[0]
    return seq[t - 1] if t <= n else seq[n - 1]


@njit(cache=True)
def _neumaier(total, comp, x):
    s = total + x
    if abs(total) >= abs(x):
        comp += (total - s) + x
    else:
        comp += (x - s) + total
    return s, comp


@njit(cache=True)
def _episode(code, theta, scale, opt, kind, q0, t0, q_after, threshold, q_otherwise, seq,
             horizon, marks, params, rng_sel, rng_rew):
    k = theta.shape[0]
    n_marks = marks.shape[0]
    out_reward = np.zeros(n_marks)
    out_regret = np.zeros(n_marks)
    out_quality = np.zeros(n_marks)

    p = np.full(k, 1.0 / k)
    scratch = np.empty(k)
    active = np.ones(k, dtype=np.bool_)
    f1 = np.zeros(k)  # R / n / counts / alpha / L_hat / r_tilde
    f2 = np.zeros(k)  # sums / beta
    S = 0.0
    eta = 0.0
    acc = 0.0
    if code == _BROAD:
        eta = params[0]
    elif code == _THOMPSON:
        f1[:] = params[0]
        f2[:] = params[1]

    rew_t, rew_c = 0.0, 0.0
    reg_t, reg_c = 0.0, 0.0
    q_t, q_c = 0.0, 0.0
    mark = 0
    for t in range(1, horizon + 1):
        # learner announces p_t
        if code == _AAEAS or code == _AAE:
            P._uniform_over(active, p)
        elif code == _UCB:
            P._point_mass(P.ucb_select(f1, f2, t), p)
        elif code == _THOMPSON:
            P._point_mass(P._thompson_pick(rng_sel, f1, f2), p)
        elif code == _EXP3PP:
            P._exp3pp_fill(f1, float(t), params[0], params[1], params[2], p)
        elif code == _TSALLIS:
            P._tsallis_fill(f1, params[0] * float(t) ** params[1], p)

        # adversary sees p_t only, then the arm is realised
        q = scale * _quality(kind, q0, t0, q_after, threshold, q_otherwise, seq, t, p, opt)
        arm = P.sample_arm(rng_sel, p)
        reward = 1.0 if rng_rew.random() < q * theta[arm] else 0.0

        if code == _AAEAS:
            S = P._aaeas_update(active, f1, S, arm, reward, params[0])
        elif code == _AAE:
            P._aae_update(active, f1, f2, arm, reward, params[0])
        elif code == _UCB:
            f1[arm] += 1.0
            f2[arm] += reward
        elif code == _THOMPSON:
            if reward == 1.0:
                f1[arm] += 1.0
            else:
                f2[arm] += 1.0
        elif code == _BROAD:
            eta, acc, _ = P._broad_step(p, arm, reward, eta, acc, horizon, scratch)
        elif code == _EXP3PP:
            f1[arm] += (1.0 - reward) / p[arm]
        else:
            f1[arm] += reward / p[arm]

        rew_t, rew_c = _neumaier(rew_t, rew_c, reward)
        reg_t, reg_c = _neumaier(reg_t, reg_c, q * (1.0 - theta[arm]))
        q_t, q_c = _neumaier(q_t, q_c, q)
        if mark < n_marks and marks[mark] == t:
            out_reward[mark] = rew_t + rew_c
            out_regret[mark] = reg_t + reg_c
            out_quality[mark] = q_t + q_c
            mark += 1
    return out_reward, out_regret, out_quality


def policy_params(policy) -> np.ndarray:
    """Flatten the tunables of a :class:`~scalebandits.policies.Policy` for the kernel."""
    name = policy.name
    if name in ("aaeas", "aae"):
        return np.array([policy.log_term])
    if name == "broad":
        return np.array([policy.eta0])
    if name == "thompson":
        return np.array([policy.alpha[0], policy.beta[0]])
    if name == "exp3pp":
        return np.array([policy.c, policy.eta_coef, policy.eps_coef])
    if name == "tsallis":
        return np.array([policy.rate_coef, policy.rate_power])
    return np.zeros(0)


def run_compiled(instance: Instance, schedule: QualitySchedule, policy, horizon: int,
                 stride: int, rng_sel, rng_rew):
    """Run a freshly constructed built-in ``policy``; returns checkpoint columns."""
    marks = checkpoint_rounds(horizon, stride)
    seq = np.asarray(schedule.sequence if schedule.sequence else (1.0,), dtype=float)
    reward, regret, quality = _episode(
        CODES[policy.name],
        np.asarray(instance.theta, dtype=float),
        float(instance.scale),
        instance.optimal_arm,
        KINDS.index(schedule.kind),
        schedule.q0,
        schedule.t0,
        schedule.q_after,
        schedule.threshold,
        schedule.q_otherwise,
        seq,
        int(horizon),
        marks,
        policy_params(policy),
        rng_sel,
        rng_rew,
    )
    return marks, reward, regret, quality
