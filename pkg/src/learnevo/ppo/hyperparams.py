"""PPO hyperparameters and the per-method defaults."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

from ..exceptions import InvalidArgumentError

# (method id, problem class) -> (learning rate, minibatch size, epochs, entropy weight, actors)
METHOD_DEFAULTS = {
    ("fitness-shaping", "knapsack"): (1e-4, 200, 8, 1e-4, 4),
    ("fitness-shaping", "continuous"): (5e-4, 400, 8, 1e-4, 4),
    ("survivor-selection", "knapsack"): (1e-4, 400, 4, 1e-4, 4),
    ("survivor-selection", "continuous"): (1e-4, 800, 8, 1e-4, 4),
    ("pop-mutation-rate", "knapsack"): (1e-4, 800, 4, 1e-4, 4),
    ("pop-strategy-param", "continuous"): (1e-4, 400, 4, 1e-4, 4),
    ("operator-selection", "tsp"): (1e-4, 400, 8, 1e-2, 2),
    ("ind-mutation-rate", "knapsack"): (5e-4, 400, 4, 1e-4, 4),
    ("ind-strategy-param", "continuous"): (1e-4, 400, 4, 1e-4, 4),
    ("ind-step-size", "continuous"): (1e-3, 400, 8, 1e-4, 4),
    ("parent-selection", "knapsack"): (1e-4, 400, 8, 1e-3, 4),
    ("parent-selection", "continuous"): (1e-4, 800, 8, 1e-3, 4),
    # listed with "4, 8" epochs; the first value is used
    ("component-binary-mutation", "knapsack"): (5e-4, 200, 4, 1e-4, 8),
    ("component-step-size", "continuous"): (5e-4, 800, 8, 1e-4, 8),
}

REWARD_SCALE = {"knapsack": 100.0, "tsp": 100.0, "continuous": 1.0}


@dataclass(frozen=True)
class PpoHyperParams:
    """All knobs of the trainer.

    ``filters``/``depth`` size the network; ``normalize_advantages`` is off
    by default so the loss is the plain clipped objective.
    """

    gamma: float = 0.99
    lam: float = 0.99
    clip_epsilon: float = 0.2
    value_coef: float = 0.5
    entropy_coef: float = 1e-4
    reward_scale: float = 100.0
    learning_rate: float = 1e-4
    minibatch_size: int = 400
    epochs: int = 4
    iterations: int = 500
    actors: int = 4
    instances: int = 5
    episode_length: int = 100
    filters: int = 64
    depth: int = 3
    normalize_advantages: bool = False

    def __post_init__(self):
        for name in ("gamma", "lam"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidArgumentError(f"{name} must lie in [0, 1]")
        if self.clip_epsilon <= 0:
            raise InvalidArgumentError("clip_epsilon must be positive")
        if self.learning_rate <= 0:
            raise InvalidArgumentError("learning_rate must be positive")
        for name in ("minibatch_size", "epochs", "actors", "instances", "episode_length", "filters"):
            if int(getattr(self, name)) < 1:
                raise InvalidArgumentError(f"{name} must be >= 1")
        if self.iterations < 0 or self.depth < 0:
            raise InvalidArgumentError("iterations and depth must be >= 0")
        if self.minibatch_size > self.samples_per_iteration:
            raise InvalidArgumentError(
                f"minibatch_size {self.minibatch_size} exceeds the {self.samples_per_iteration} samples per iteration"
            )

    @property
    def samples_per_iteration(self) -> int:
        return self.instances * self.actors * self.episode_length

    @classmethod
    def for_method(cls, method_id: str, problem_class: str, **overrides) -> "PpoHyperParams":
        """Defaults for one method/problem pairing; ``overrides`` win.

        The minibatch size is capped at the sample count so that small smoke
        configurations stay valid.
        """
        if (method_id, problem_class) not in METHOD_DEFAULTS:
            raise InvalidArgumentError(f"no default hyperparameters for {method_id} on {problem_class}")
        lr, m, epochs, ent, actors = METHOD_DEFAULTS[(method_id, problem_class)]
        base = dict(
            learning_rate=lr,
            minibatch_size=m,
            epochs=epochs,
            entropy_coef=ent,
            actors=actors,
            reward_scale=REWARD_SCALE[problem_class],
        )
        base.update(overrides)
        if "minibatch_size" not in overrides:
            k = base.get("instances", cls.instances)
            n = base["actors"]
            t = base.get("episode_length", cls.episode_length)
            base["minibatch_size"] = min(base["minibatch_size"], k * n * t)
        return cls(**base)

    def replace(self, **changes) -> "PpoHyperParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]
