"""Bandit policies behind a single announce/update contract.

Every policy announces a distribution over arms, the simulator draws the arm
from it, and the policy is told the arm and its reward.  Deterministic
policies (UCB, Thompson sampling after its internal draw) announce a point
mass, which is exactly what a targeted adversary can exploit.

The numerical pieces are ``numba.njit`` functions so that the compiled episode
loop in :mod:`scalebandits._fast` runs the very same code as these classes.
"""

from __future__ import annotations

import inspect
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

POLICY_IDS = ("aaeas", "broad", "ucb", "aae", "thompson", "exp3pp", "tsallis")

POINT_MASS_TOL = 1e-12

# solver settings; residual targets sit well below the 1e-10 contract
_SOLVER_MAX_ITER = 200
_SOLVER_TOL = 1e-14


@dataclass(frozen=True)
class PolicyDecision:
    distribution: np.ndarray

    @property
    def is_point_mass(self) -> bool:
        return bool(np.any(np.abs(self.distribution - 1.0) <= POINT_MASS_TOL))


# ----------------------------------------------------------------------------
# shared helpers


@njit(cache=True)
def _uniform_over(active, out):
    m = 0
    for a in range(active.shape[0]):
        if active[a]:
            m += 1
    for a in range(active.shape[0]):
        out[a] = 1.0 / m if active[a] else 0.0


@njit(cache=True)
def _point_mass(arm, out):
    out[:] = 0.0
    out[arm] = 1.0


@njit(cache=True)
def sample_arm(rng, p):
    """Inverse-CDF draw from ``p`` using one uniform."""
    u = rng.random()
    acc = 0.0
    last = 0
    for a in range(p.shape[0]):
        if p[a] > 0.0:
            acc += p[a]
            last = a
            if u < acc:
                return a
    # only reachable when rounding leaves the cdf short of 1
    return last


# ----------------------------------------------------------------------------
# AAEAS: elimination driven by the learner's own total reward


@njit(cache=True)
def _cb_from_log(S, k, log_term):
    return 2.0 * math.sqrt(max(4.0 * S * log_term, 16.0 * k * log_term * log_term))


@njit(cache=True)
def aaeas_confidence_bound(S, k, delta_prime):
    """Width ``2 sqrt(max(4 S ln(2/d'), 16 k ln(2/d')^2))`` shared by all arms."""
    return _cb_from_log(S, k, math.log(2.0 / delta_prime))


@njit(cache=True)
def _aaeas_update(active, R, S, arm, reward, log_term):
    S += reward
    R[arm] += reward
    k = R.shape[0]
    best = -1.0
    for a in range(k):
        if active[a] and R[a] > best:
            best = R[a]
    cb = _cb_from_log(S, k, log_term)
    for a in range(k):
        if active[a] and R[a] + cb < best:
            active[a] = False
    return S


def failure_budget(delta: float, k: int, horizon: int) -> float:
    """Per-event failure probability ``delta / ((k + 1) T)``."""
    return delta / ((k + 1) * max(horizon, 1))


# ----------------------------------------------------------------------------
# classic active arm elimination


@njit(cache=True)
def _aae_update(active, n, sums, arm, reward, log_term):
    n[arm] += 1
    sums[arm] += reward
    k = n.shape[0]
    best_lower = -np.inf
    for a in range(k):
        if active[a] and n[a] > 0:
            lo = sums[a] / n[a] - math.sqrt(2.0 * log_term / n[a])
            if lo > best_lower:
                best_lower = lo
    for a in range(k):
        if active[a] and n[a] > 0:
            hi = sums[a] / n[a] + math.sqrt(2.0 * log_term / n[a])
            if hi < best_lower:
                active[a] = False


# ----------------------------------------------------------------------------
# UCB


@njit(cache=True)
def ucb_select(counts, sums, t):
    for a in range(counts.shape[0]):
        if counts[a] == 0:
            return a
    log_t = math.log(t)
    best = 0
    best_val = -np.inf
    for a in range(counts.shape[0]):
        val = sums[a] / counts[a] + math.sqrt(log_t / counts[a])
        if val > best_val:
            best_val = val
            best = a
    return best


# ----------------------------------------------------------------------------
# Thompson sampling (Bernoulli rewards)


@njit(cache=True)
def _thompson_pick(rng, alpha, beta):
    best = 0
    best_val = -1.0
    for a in range(alpha.shape[0]):
        x = rng.beta(alpha[a], beta[a])
        if x > best_val:
            best_val = x
            best = a
    return best


# ----------------------------------------------------------------------------
# BROAD: log-barrier OMD with a doubling restart


@njit(cache=True)
def _broad_mass(p, chosen, shrink, gamma):
    s = 0.0
    ds = 0.0
    for a in range(p.shape[0]):
        d = (shrink if a == chosen else 1.0) + gamma * p[a]
        term = p[a] / d
        s += term
        ds -= term * term
    return s, ds


@njit(cache=True)
def broad_gamma(p, chosen, reward, eta):
    """Normalisation ``gamma >= 0`` of the log-barrier update.

    The total mass is convex and strictly decreasing in gamma, at least 1 at
    gamma = 0 and at most 1 at ``eta * reward / min(p)``.  Newton steps from
    the left stay inside that bracket; bisection is the fallback.
    """
    shrink = 1.0 - eta * reward
    if shrink <= 0.0:
        raise ValueError("eta * reward must be below 1")
    if reward == 0.0:
        return 0.0
    lo = 0.0
    hi = eta * reward / p.min()
    g = 0.0
    for _ in range(_SOLVER_MAX_ITER):
        s, ds = _broad_mass(p, chosen, shrink, g)
        r = s - 1.0
        if abs(r) <= _SOLVER_TOL:
            break
        if r > 0.0:
            lo = g
        else:
            hi = g
        nxt = g - r / ds
        if not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
        if nxt == g:
            break
        g = nxt
    return g


@njit(cache=True)
def _broad_apply(p, chosen, reward, eta, gamma, out):
    shrink = 1.0 - eta * reward
    for a in range(p.shape[0]):
        d = (shrink if a == chosen else 1.0) + gamma * p[a]
        if d <= 0.0:
            raise ValueError("log-barrier update denominator is not positive")
        out[a] = p[a] / d


@njit(cache=True)
def broad_update(p, chosen, reward, eta):
    """Log-barrier mirror step after observing ``reward`` on ``chosen``."""
    out = np.empty_like(p)
    _broad_apply(p, chosen, reward, eta, broad_gamma(p, chosen, reward, eta), out)
    return out


@njit(cache=True)
def broad_accumulator_increment(p, chosen, reward):
    total = 0.0
    for a in range(p.shape[0]):
        if a == chosen:
            diff = reward / p[a] - reward
            total += p[a] * p[a] * diff * diff
        else:
            total += p[a] * p[a] * reward * reward
    return total


@njit(cache=True)
def broad_restart_threshold(k, horizon, eta):
    return k * math.log(horizon) / (3.0 * eta * eta)


@njit(cache=True)
def broad_restart_check(accumulator, k, horizon, eta):
    return accumulator >= broad_restart_threshold(k, horizon, eta)


@njit(cache=True)
def _broad_step(p, chosen, reward, eta, acc, horizon, scratch):
    """One full BROAD update in place; returns ``(eta, acc, restarted)``."""
    k = p.shape[0]
    acc += broad_accumulator_increment(p, chosen, reward)
    _broad_apply(p, chosen, reward, eta, broad_gamma(p, chosen, reward, eta), scratch)
    p[:] = scratch
    if broad_restart_check(acc, k, horizon, eta):
        eta *= 0.5
        p[:] = 1.0 / k
        return eta, 0.0, True
    return eta, acc, False


# ----------------------------------------------------------------------------
# EXP3++


@njit(cache=True)
def _exp3pp_fill(L_hat, t, c, eta_coef, eps_coef, out):
    k = L_hat.shape[0]
    if k == 1:
        out[0] = 1.0
        return
    log_k = math.log(k)
    root = math.sqrt(log_k / (t * k))
    eta = eta_coef * root
    cap = min(0.5 / k, eps_coef * root)
    log_t = math.log(t)
    lmin = L_hat.min()
    eps_sum = 0.0
    wsum = 0.0
    for a in range(k):
        gap = min(1.0, (L_hat[a] - lmin) / t)
        e = cap
        denom = t * gap * gap
        if denom > 0.0:  # a gap whose square underflows leaves only the cap
            e = min(e, c * log_t / denom)
        out[a] = e
        eps_sum += e
        wsum += math.exp(-eta * (L_hat[a] - lmin))
    for a in range(k):
        w = math.exp(-eta * (L_hat[a] - lmin))
        out[a] = (1.0 - eps_sum) * w / wsum + out[a]


def exp3pp_distribution(L_hat, t, k=None, c=18.0, eta_coef=0.5, eps_coef=0.5) -> np.ndarray:
    """Exponential weights on importance-weighted losses mixed with per-arm exploration."""
    L_hat = np.asarray(L_hat, dtype=float)
    if k is not None and k != len(L_hat):
        raise ValueError("k does not match the length of L_hat")
    if t < 1:
        raise ValueError("rounds are 1-based")
    out = np.empty(len(L_hat))
    _exp3pp_fill(L_hat, float(t), c, eta_coef, eps_coef, out)
    return out


# ----------------------------------------------------------------------------
# Tsallis-entropy OMD (reward form, anytime regulariser weight rate_coef * t**rate_power)


@njit(cache=True)
def _tsallis_fill(r_tilde, eta, out):
    """Maximiser of ``<r, p> + eta * sum(sqrt(p) - p / 2)`` over the simplex.

    Stationarity gives ``p(a) = (eta / (2 (x - r(a)) + eta))^2``; the offset
    ``y = x - max(r)`` solves ``sum p = 1`` on ``[0, eta (sqrt(k) - 1) / 2]``.
    Returns ``x``.
    """
    k = r_tilde.shape[0]
    top = r_tilde.max()
    if k == 1:
        out[0] = 1.0
        return top
    lo = 0.0
    hi = 0.5 * eta * (math.sqrt(k) - 1.0)
    y = 0.0
    for _ in range(_SOLVER_MAX_ITER):
        s = 0.0
        ds = 0.0
        for a in range(k):
            den = 2.0 * (y + top - r_tilde[a]) + eta
            pa = (eta / den) ** 2
            out[a] = pa
            s += pa
            ds -= 4.0 * pa / den
        r = s - 1.0
        if abs(r) <= _SOLVER_TOL:
            break
        if r > 0.0:
            lo = y
        else:
            hi = y
        nxt = y - r / ds
        if not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
        if nxt == y:
            break
        y = nxt
    return top + y


def tsallis_distribution(r_tilde, t, rate_coef=4.0, rate_power=0.5) -> np.ndarray:
    r_tilde = np.asarray(r_tilde, dtype=float)
    if t < 1:
        raise ValueError("rounds are 1-based")
    if not np.all(np.isfinite(r_tilde)):
        raise ValueError("reward estimates must be finite")
    return tsallis_solve(r_tilde, rate_coef * t**rate_power)[0]


def tsallis_solve(r_tilde, weight: float) -> tuple[np.ndarray, float]:
    """Distribution and multiplier ``x`` for an explicit regulariser weight."""
    r_tilde = np.asarray(r_tilde, dtype=float)
    if weight <= 0:
        raise ValueError("regulariser weight must be positive")
    out = np.empty(len(r_tilde))
    x = _tsallis_fill(r_tilde, float(weight), out)
    return out, x


# ----------------------------------------------------------------------------
# policy classes


class Policy:
    """Base class: announce a distribution, then learn from (arm, reward)."""

    name = "base"

    def __init__(self, k: int, horizon: int):
        if k < 1:
            raise ValueError("need at least one arm")
        self.k = int(k)
        self.horizon = int(horizon)
        self.p = np.full(self.k, 1.0 / self.k)

    def announce(self, rng) -> PolicyDecision:
        raise NotImplementedError

    def update(self, arm: int, reward: float) -> None:
        raise NotImplementedError


class AAEAS(Policy):
    """Uniform play over surviving arms; one confidence width built from the total reward."""

    name = "aaeas"

    def __init__(self, k, horizon, delta=None):
        super().__init__(k, horizon)
        self.delta = 1.0 / max(horizon, 1) if delta is None else float(delta)
        self.delta_prime = failure_budget(self.delta, self.k, horizon)
        self.log_term = math.log(2.0 / self.delta_prime)
        self.active = np.ones(self.k, dtype=np.bool_)
        self.R = np.zeros(self.k)
        self.S = 0.0

    def confidence_bound(self) -> float:
        return _cb_from_log(self.S, self.k, self.log_term)

    def announce(self, rng=None):
        _uniform_over(self.active, self.p)
        return PolicyDecision(self.p.copy())

    def update(self, arm, reward):
        self.S = _aaeas_update(self.active, self.R, self.S, arm, float(reward), self.log_term)


class AAE(Policy):
    """Classic elimination with per-arm Hoeffding radii, arms played uniformly at random."""

    name = "aae"

    def __init__(self, k, horizon, delta=None):
        super().__init__(k, horizon)
        self.delta = 1.0 / max(horizon, 1) if delta is None else float(delta)
        self.delta_prime = failure_budget(self.delta, self.k, horizon)
        self.log_term = math.log(2.0 / self.delta_prime)
        self.active = np.ones(self.k, dtype=np.bool_)
        self.n = np.zeros(self.k)
        self.sums = np.zeros(self.k)

    def announce(self, rng=None):
        _uniform_over(self.active, self.p)
        return PolicyDecision(self.p.copy())

    def update(self, arm, reward):
        _aae_update(self.active, self.n, self.sums, arm, float(reward), self.log_term)


class UCB(Policy):
    name = "ucb"

    def __init__(self, k, horizon):
        super().__init__(k, horizon)
        self.counts = np.zeros(self.k)
        self.sums = np.zeros(self.k)
        self.t = 1

    def announce(self, rng=None):
        _point_mass(ucb_select(self.counts, self.sums, self.t), self.p)
        return PolicyDecision(self.p.copy())

    def update(self, arm, reward):
        self.counts[arm] += 1
        self.sums[arm] += reward
        self.t += 1


class Thompson(Policy):
    """Beta-Bernoulli Thompson sampling; announces the sampled argmax as a point mass."""

    name = "thompson"

    def __init__(self, k, horizon, alpha0=1.0, beta0=1.0):
        super().__init__(k, horizon)
        self.alpha = np.full(self.k, float(alpha0))  # 1 + successes
        self.beta = np.full(self.k, float(beta0))  # 1 + failures

    def announce(self, rng):
        _point_mass(_thompson_pick(rng, self.alpha, self.beta), self.p)
        return PolicyDecision(self.p.copy())

    def update(self, arm, reward):
        if reward == 1:
            self.alpha[arm] += 1.0
        elif reward == 0:
            self.beta[arm] += 1.0
        else:
            raise ValueError(f"Thompson sampling here takes binary rewards, got {reward!r}")


class BROAD(Policy):
    name = "broad"

    def __init__(self, k, horizon, eta0=0.5):
        super().__init__(k, horizon)
        if not 0.0 < eta0 <= 0.5:
            # keeps every update denominator >= 1/2
            raise ValueError("eta0 must lie in (0, 1/2]")
        self.eta0 = float(eta0)
        self.eta = self.eta0
        self.epoch = 0
        self.accumulator = 0.0
        self._scratch = np.empty(self.k)

    def announce(self, rng=None):
        return PolicyDecision(self.p.copy())

    def update(self, arm, reward):
        self.eta, self.accumulator, restarted = _broad_step(
            self.p, arm, float(reward), self.eta, self.accumulator, self.horizon, self._scratch
        )
        if restarted:
            self.epoch += 1


class EXP3PP(Policy):
    name = "exp3pp"

    def __init__(self, k, horizon, c=18.0, eta_coef=0.5, eps_coef=0.5):
        super().__init__(k, horizon)
        self.c = float(c)
        self.eta_coef = float(eta_coef)
        self.eps_coef = float(eps_coef)
        self.L_hat = np.zeros(self.k)
        self.t = 1

    def announce(self, rng=None):
        _exp3pp_fill(self.L_hat, float(self.t), self.c, self.eta_coef, self.eps_coef, self.p)
        return PolicyDecision(self.p.copy())

    def update(self, arm, reward):
        self.L_hat[arm] += (1.0 - reward) / self.p[arm]
        self.t += 1


class Tsallis(Policy):
    """Tsallis-entropy mirror ascent on importance-weighted reward estimates.

    The regulariser weight is ``rate_coef * t ** rate_power``.  The default
    ``4 sqrt(t)`` corresponds to the usual learning rate ``1 / sqrt(t)``; with
    ``rate_power=-0.5`` the weight shrinks over time and the policy turns
    greedy, typically locking onto whichever arm paid first.
    """

    name = "tsallis"

    def __init__(self, k, horizon, rate_coef=4.0, rate_power=0.5):
        super().__init__(k, horizon)
        self.rate_coef = float(rate_coef)
        self.rate_power = float(rate_power)
        self.r_tilde = np.zeros(self.k)
        self.t = 1

    def announce(self, rng=None):
        _tsallis_fill(self.r_tilde, self.rate_coef * self.t**self.rate_power, self.p)
        return PolicyDecision(self.p.copy())

    def update(self, arm, reward):
        self.r_tilde[arm] += reward / self.p[arm]
        self.t += 1


_REGISTRY = {cls.name: cls for cls in (AAEAS, BROAD, UCB, AAE, Thompson, EXP3PP, Tsallis)}


def make_policy(name: str, k: int, horizon: int, **params) -> Policy:
    try:
        cls = _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown policy {name!r}; expected one of {POLICY_IDS}") from None
    return cls(k, horizon, **params)


def policy_parameters(name: str) -> tuple[str, ...]:
    """Names of the tunables ``make_policy`` accepts for ``name``."""
    sig = inspect.signature(_REGISTRY[name].__init__)
    return tuple(p for p in sig.parameters if p not in ("self", "k", "horizon"))
