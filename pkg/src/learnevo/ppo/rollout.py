"""Collecting one EA run under the current policy as a PPO trajectory."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..adaptation import AdaptationController, get_method, initial_population
from ..evo.algorithms import run_ea
from ..evo.config import EvolutionConfig
from ..exceptions import InvalidArgumentError
from ..net.network import NetworkParams
from ..validation import check_random_state
from .hyperparams import REWARD_SCALE
from .objectives import Batch, compute_gae, episode_rewards, returns_to_go


@dataclass
class Trajectory:
    states: np.ndarray  # (T, P, G, C)
    actions: np.ndarray  # (T, ...) raw samples
    log_probs: np.ndarray  # (T,) joint log-prob under the collecting policy
    rewards: np.ndarray
    values: np.ndarray
    advantages: np.ndarray
    returns: np.ndarray
    best_fitness: np.ndarray  # (T + 1,)

    def __post_init__(self):
        t = len(self.rewards)
        for name in ("states", "actions", "log_probs", "values", "advantages", "returns"):
            if len(getattr(self, name)) != t:
                raise InvalidArgumentError(f"trajectory field {name} does not have length {t}")
        if len(self.best_fitness) != t + 1:
            raise InvalidArgumentError("best_fitness must have T + 1 entries")
        if not np.all(np.isfinite(self.advantages)) or not np.all(np.isfinite(self.log_probs)):
            raise InvalidArgumentError("trajectory has non-finite advantages or log-probs")

    def __len__(self):
        return len(self.rewards)

    @property
    def episode_return(self) -> float:
        return float(self.rewards.sum())

    def to_batch(self) -> Batch:
        return Batch(self.states, self.actions, self.advantages, self.returns, self.log_probs)


def collect_trajectory(method, params: NetworkParams, problem, cfg: EvolutionConfig, rng=None, hp=None) -> Trajectory:
    """Run the EA for ``cfg.episode_length`` generations under ``params``.

    ``hp`` supplies ``gamma``, ``lam`` and ``reward_scale`` (defaults: 0.99,
    0.99 and the problem class's reward scale).
    """
    rng = check_random_state(rng)
    m = get_method(method)
    kind = m.check_problem(problem)
    gamma = 0.99 if hp is None else hp.gamma
    lam = 0.99 if hp is None else hp.lam
    alpha_r = REWARD_SCALE[kind] if hp is None else hp.reward_scale
    T = cfg.episode_length
    ctl = AdaptationController(m, params, T, rng=rng)
    pop = initial_population(m, problem, cfg, rng)
    trace = run_ea(problem, cfg, rng, hooks=ctl, generations=T, pop=pop)
    if len(ctl.decisions) != T:
        raise InvalidArgumentError(f"expected {T} policy decisions, recorded {len(ctl.decisions)}")
    best = np.asarray(trace.best_fitness)
    rewards = episode_rewards(best, alpha_r)
    values = np.array([d.value for d in ctl.decisions])
    return Trajectory(
        states=np.stack([d.state for d in ctl.decisions]),
        actions=np.stack([d.action for d in ctl.decisions]),
        log_probs=np.array([d.log_prob for d in ctl.decisions]),
        rewards=rewards,
        values=values,
        advantages=compute_gae(rewards, values, gamma, lam),
        returns=returns_to_go(rewards, gamma),
        best_fitness=best,
    )


def concat_batches(trajectories) -> Batch:
    trajectories = list(trajectories)
    return Batch(
        np.concatenate([t.states for t in trajectories]),
        np.concatenate([t.actions for t in trajectories]),
        np.concatenate([t.advantages for t in trajectories]),
        np.concatenate([t.returns for t in trajectories]),
        np.concatenate([t.log_probs for t in trajectories]),
    )
