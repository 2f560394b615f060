from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

from ..exceptions import InvalidArgumentError

CROSSOVER_OPERATORS = (
    "one-point",
    "two-point",
    "linear-order",
    "cycle",
    "position-based",
    "order-based",
    "partially-mapped",
)


@dataclass(frozen=True)
class EvolutionConfig:
    """Static evolution parameters for one baseline EA run.

    Defaults are the continuous / knapsack / TSP columns of the default
    parameter table; use :meth:`defaults` to get the right column.
    ``episode_length`` is the number of generations ``T`` in a run.
    """

    population_size: int = 10
    elite_size: int = 0
    crossover_rate: float = 0.9
    mutation_rate: float = 0.01
    parent_percentage: float = 0.2
    strategy_parameter: float = 0.5
    initial_step_size: float = 0.1
    min_step_size: float = 1e-8
    episode_length: int = 100
    crossover_operator: str = "two-point"

    def __post_init__(self):
        if self.population_size < 2:
            raise InvalidArgumentError("population_size must be >= 2")
        if not 0 <= self.elite_size <= self.population_size:
            raise InvalidArgumentError("elite_size must lie in [0, population_size]")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidArgumentError(f"{name} must lie in [0, 1]")
        if not 0.0 < self.parent_percentage <= 1.0:
            raise InvalidArgumentError("parent_percentage must lie in (0, 1]")
        if not self.strategy_parameter >= 0.0:
            raise InvalidArgumentError("strategy_parameter must be non-negative")
        if not (self.initial_step_size > 0 and self.min_step_size > 0):
            raise InvalidArgumentError("step sizes must be positive")
        if self.episode_length < 1:
            raise InvalidArgumentError("episode_length must be >= 1")
        if self.crossover_operator not in CROSSOVER_OPERATORS:
            raise InvalidArgumentError(f"unknown crossover operator {self.crossover_operator!r}")

    @classmethod
    def defaults(cls, problem_class: str, **overrides) -> "EvolutionConfig":
        base = {
            "continuous": dict(elite_size=0, parent_percentage=0.2, strategy_parameter=0.5),
            "knapsack": dict(elite_size=0, crossover_rate=0.9, mutation_rate=0.01),
            "tsp": dict(elite_size=1, crossover_rate=1.0, mutation_rate=0.01),
        }
        if problem_class not in base:
            raise InvalidArgumentError(f"unknown problem class {problem_class!r}")
        return cls(**{**base[problem_class], **overrides})

    @property
    def n_parents(self) -> int:
        # round() guards against 0.3 * 10 == 3.0000000000000004
        return max(1, math.ceil(round(self.parent_percentage * self.population_size, 9)))

    def replace(self, **changes) -> "EvolutionConfig":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]
