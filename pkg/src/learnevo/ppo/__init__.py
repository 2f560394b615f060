"""Proximal policy optimisation for the adaptation controllers."""
from .hyperparams import METHOD_DEFAULTS, REWARD_SCALE, PpoHyperParams
from .objectives import Adam, Batch, compute_gae, episode_rewards, ppo_gradients, ppo_loss, returns_to_go, reward
from .rollout import Trajectory, collect_trajectory, concat_batches
from .trainer import LOG_FIELDS, TrainResult, train

__all__ = [
    "Adam",
    "Batch",
    "LOG_FIELDS",
    "METHOD_DEFAULTS",
    "PpoHyperParams",
    "REWARD_SCALE",
    "TrainResult",
    "Trajectory",
    "collect_trajectory",
    "compute_gae",
    "concat_batches",
    "episode_rewards",
    "ppo_gradients",
    "ppo_loss",
    "returns_to_go",
    "reward",
    "train",
]
