"""Reward, advantage estimation, returns and the clipped actor-critic loss."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..distributions import apply_output_nonlinearity
from ..exceptions import InvalidArgumentError, TrainingDivergence
from ..net import autodiff as ad
from ..net.network import NetworkParams, forward

_EVENT_NDIM = {"population": 0, "individual": 1, "gene": 2}


def reward(f_max_prev, f_max_next, alpha_r=1.0) -> float:
    """``alpha_r * log10(f_next / f_prev)`` for strictly positive best fitness values."""
    if not (f_max_prev > 0 and f_max_next > 0):
        raise InvalidArgumentError(f"rewards need positive fitness, got {f_max_prev} and {f_max_next}")
    return float(alpha_r * np.log10(f_max_next / f_max_prev))


def episode_rewards(best_fitness, alpha_r=1.0) -> np.ndarray:
    """Rewards for a whole best-fitness curve of length ``T + 1``."""
    f = np.asarray(best_fitness, dtype=np.float64)
    if np.any(f <= 0):
        raise InvalidArgumentError("rewards need positive fitness")
    return alpha_r * np.log10(f[1:] / f[:-1])


def compute_gae(rewards, values, gamma, lam) -> np.ndarray:
    """Generalised advantage estimates with the terminal value fixed at zero."""
    r = np.asarray(rewards, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if r.shape != v.shape or r.ndim != 1:
        raise InvalidArgumentError("rewards and values must be 1-D of equal length")
    if r.size < 1:
        raise InvalidArgumentError("need at least one timestep")
    v_next = np.append(v[1:], 0.0)
    delta = r + gamma * v_next - v
    adv = np.empty_like(delta)
    acc = 0.0
    for t in range(delta.size - 1, -1, -1):
        acc = delta[t] + gamma * lam * acc
        adv[t] = acc
    return adv


def returns_to_go(rewards, gamma) -> np.ndarray:
    r = np.asarray(rewards, dtype=np.float64)
    if r.ndim != 1 or r.size < 1:
        raise InvalidArgumentError("need a non-empty 1-D reward sequence")
    out = np.empty_like(r)
    acc = 0.0
    for t in range(r.size - 1, -1, -1):
        acc = r[t] + gamma * acc
        out[t] = acc
    return out


@dataclass
class Batch:
    """Training samples sharing one state shape.

    ``actions`` are the raw samples; ``old_log_probs`` their joint log-prob
    under the collecting policy.
    """

    states: np.ndarray
    actions: np.ndarray
    advantages: np.ndarray
    returns: np.ndarray
    old_log_probs: np.ndarray

    def __post_init__(self):
        n = len(self.states)
        if n == 0:
            raise InvalidArgumentError("empty batch")
        for name in ("actions", "advantages", "returns", "old_log_probs"):
            if len(getattr(self, name)) != n:
                raise InvalidArgumentError(f"batch field {name} has the wrong length")

    def __len__(self):
        return len(self.states)

    def take(self, idx) -> "Batch":
        return Batch(self.states[idx], self.actions[idx], self.advantages[idx], self.returns[idx], self.old_log_probs[idx])


def ppo_loss(batch: Batch, params: NetworkParams, hp, denominator=None, terms: dict | None = None):
    """Clipped PPO loss ``L_clip + value_coef * L_V + entropy_coef * S``.

    ``S`` is the negative joint entropy, so minimising the loss favours
    exploration.  All three terms are sums over the batch divided by
    ``denominator`` (default: batch size), which lets a minibatch be split
    into chunks whose gradients add up exactly.  Returns ``(loss, tape)``;
    the per-term values are written into ``terms`` when given.
    """
    denom = float(len(batch) if denominator is None else denominator)
    head = params.head
    out = forward(batch.states, params)
    dist = apply_output_nonlinearity(out.actor, head.kind)
    logp = dist.joint_log_prob(batch.actions, _EVENT_NDIM[head.reduction])
    adv = np.asarray(batch.advantages, dtype=params.dtype)
    ratio = ad.exp(ad.sub(logp, np.asarray(batch.old_log_probs, dtype=params.dtype)))
    surr = ad.minimum(ad.mul(ratio, adv), ad.mul(ad.clip(ratio, 1.0 - hp.clip_epsilon, 1.0 + hp.clip_epsilon), adv))
    l_clip = ad.mul(ad.sum(surr), -1.0 / denom)
    err = ad.sub(out.value, np.asarray(batch.returns, dtype=params.dtype))
    l_v = ad.mul(ad.sum(ad.square(err)), 1.0 / denom)
    s = ad.mul(ad.sum(dist.joint_entropy(_EVENT_NDIM[head.reduction])), -1.0 / denom)
    loss = ad.add(ad.add(l_clip, ad.mul(l_v, hp.value_coef)), ad.mul(s, hp.entropy_coef))
    parts = {"policy_loss": float(l_clip.value), "value_loss": float(l_v.value), "entropy": -float(s.value)}
    if not np.isfinite(loss.value) or not all(np.isfinite(v) for v in parts.values()):
        diag = dict(parts, max_ratio=float(np.max(ratio.value)), max_abs_logp=float(np.max(np.abs(logp.value))))
        raise TrainingDivergence("non-finite PPO loss", diagnostics=diag)
    if terms is not None:
        terms.update(parts, loss=float(loss.value))
    return loss, out.tape


def ppo_gradients(batch: Batch, params: NetworkParams, hp, chunk_size=64, denominator=None):
    """Loss gradients for ``batch``, computed in fixed-order chunks to bound memory.

    Returns ``(grads, terms)`` where ``terms`` sums the chunk contributions.
    """
    n = len(batch)
    denom = n if denominator is None else denominator
    grads, terms = None, {}
    for start in range(0, n, chunk_size):
        part = batch.take(slice(start, min(n, start + chunk_size)))
        t = {}
        loss, tape = ppo_loss(part, params, hp, denominator=denom, terms=t)
        g = tape.backward(loss)
        if grads is None:
            grads = {k: v.astype(np.float64) for k, v in g.items()}
        else:
            for k, v in g.items():
                grads[k] += v
        for k, v in t.items():
            terms[k] = terms.get(k, 0.0) + v
    return grads, terms


class Adam:
    """Adaptive-moment optimiser (first and second moments kept in float64)."""

    def __init__(self, learning_rate, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = learning_rate, beta1, beta2, eps
        self.m, self.v, self.t = {}, {}, 0

    def step(self, params: NetworkParams, grads: dict):
        self.t += 1
        deltas = {}
        for k, g in grads.items():
            m = self.m.get(k, 0.0) * self.b1 + (1 - self.b1) * g
            v = self.v.get(k, 0.0) * self.b2 + (1 - self.b2) * g * g
            self.m[k], self.v[k] = m, v
            mh = m / (1 - self.b1**self.t)
            vh = v / (1 - self.b2**self.t)
            deltas[k] = -self.lr * mh / (np.sqrt(vh) + self.eps)
        params.update(deltas)
