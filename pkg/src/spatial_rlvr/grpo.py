"""Group-relative advantages, the k3 KL estimator and the clipped objective,
plus the analytic gradient for a softmax policy over discrete actions."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

DEGENERATE_STD = 1e-12


@dataclass(frozen=True)
class PolicyState:
    logits_current: np.ndarray
    logits_old: np.ndarray
    logits_ref: np.ndarray
    step_size: float = 0.05
    clip_epsilon: float = 0.2
    kl_beta: float = 0.04

    def __post_init__(self):
        for name in ("logits_current", "logits_old", "logits_ref"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = {len(self.logits_current), len(self.logits_old), len(self.logits_ref)}
        if len(n) != 1 or n.pop() < 2:
            raise ValueError("logit vectors must share one length >= 2")
        if not all(np.isfinite(getattr(self, k)).all()
                   for k in ("logits_current", "logits_old", "logits_ref")):
            raise ValueError("logits must be finite")
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if not 0 < self.clip_epsilon < 1:
            raise ValueError("clip_epsilon must lie in (0, 1)")
        if self.kl_beta < 0:
            raise ValueError("kl_beta must be >= 0")

    @classmethod
    def uniform(cls, n_actions: int, **kwargs) -> "PolicyState":
        z = np.zeros(n_actions)
        return cls(z, z, z, **kwargs)


@dataclass(frozen=True)
class ResponseGroup:
    question_id: str
    actions: tuple[int, ...]
    rewards: tuple[float, ...]
    advantages: tuple[float, ...]
    breakdowns: tuple = ()


def group_advantages(rewards: Sequence[float]) -> np.ndarray:
    """z-score rewards within a group (population std); zeros if constant."""
    r = np.asarray(rewards, dtype=float)
    if r.size < 2:
        raise ValueError("a group needs at least 2 rewards")
    std = r.std()
    if std < DEGENERATE_STD:
        return np.zeros_like(r)
    return (r - r.mean()) / std


def kl_estimate(logp_current, logp_ref):
    """Per-sample k3 estimate r - log r - 1 with r = pi_ref / pi_theta."""
    log_r = np.asarray(logp_ref, dtype=float) - np.asarray(logp_current, dtype=float)
    out = np.expm1(log_r) - log_r
    return float(out) if out.ndim == 0 else out


def clipped_objective(logp_new, logp_old, advantages, kl_terms, eps: float, beta: float) -> float:
    arrays = [np.asarray(a, dtype=float) for a in (logp_new, logp_old, advantages, kl_terms)]
    if len({a.shape for a in arrays}) != 1:
        raise ValueError("all per-sample sequences must have the same length")
    new, old, adv, kl = arrays
    ratio = np.exp(new - old)
    surrogate = np.minimum(ratio * adv, np.clip(ratio, 1 - eps, 1 + eps) * adv)
    return float(np.mean(surrogate - beta * kl))


def policy_probs(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=float)
    e = np.exp(z - z.max())
    return e / e.sum()


def log_probs(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=float)
    shifted = z - z.max()
    return shifted - np.log(np.exp(shifted).sum())


def objective(logits, policy: PolicyState, actions: Sequence[int], advantages) -> float:
    """Clipped objective of ``policy`` evaluated with current logits ``logits``."""
    a = np.asarray(actions, dtype=int)
    lp = log_probs(logits)[a]
    lp_old = log_probs(policy.logits_old)[a]
    lp_ref = log_probs(policy.logits_ref)[a]
    return clipped_objective(lp, lp_old, advantages, kl_estimate(lp, lp_ref),
                             policy.clip_epsilon, policy.kl_beta)


def objective_gradient(logits, policy: PolicyState, actions: Sequence[int], advantages) -> np.ndarray:
    """Analytic gradient of :func:`objective` with respect to ``logits``.

    d log pi(a) / d z = onehot(a) - p. The surrogate contributes
    A * ratio * that, except where the clipped branch is the active minimum
    (ratio above 1 + eps with A > 0, or below 1 - eps with A < 0). The k3 term
    contributes beta * (r - 1) * that, with r = pi_ref / pi.
    """
    a = np.asarray(actions, dtype=int)
    adv = np.asarray(advantages, dtype=float)
    lp_all = log_probs(logits)
    p = np.exp(lp_all)
    lp = lp_all[a]
    ratio = np.exp(lp - log_probs(policy.logits_old)[a])
    eps = policy.clip_epsilon
    clipped = ((adv > 0) & (ratio > 1 + eps)) | ((adv < 0) & (ratio < 1 - eps))
    coef = np.where(clipped, 0.0, adv * ratio)
    coef = coef + policy.kl_beta * np.expm1(log_probs(policy.logits_ref)[a] - lp)
    grad = np.zeros_like(p)
    np.add.at(grad, a, coef)
    grad -= coef.sum() * p
    return grad / len(a)


def train_step(policy: PolicyState, group: ResponseGroup, sampled_actions: Sequence[int] | None = None) -> PolicyState:
    """One ascent step on the clipped objective.

    ``logits_old`` is first refreshed to the pre-step logits (one inner epoch
    per rollout). A degenerate group (all-zero advantages) skips the update.
    """
    actions = group.actions if sampled_actions is None else tuple(sampled_actions)
    pre = policy.logits_current
    refreshed = replace(policy, logits_old=pre)
    if not np.any(group.advantages):
        return refreshed
    grad = objective_gradient(pre, refreshed, actions, group.advantages)
    return replace(refreshed, logits_current=pre + policy.step_size * grad)
