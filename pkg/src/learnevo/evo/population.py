from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..exceptions import InvalidArgumentError


@dataclass
class RealGenome:
    """A point in [-1, 1]^2 plus its self-adaptive step-size(s)."""

    x: np.ndarray
    step_size: float | np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)


@dataclass
class Population:
    """Genomes stacked row-wise with a parallel fitness vector.

    ``step_sizes`` (continuous class only) is ``(P,)`` for one step-size per
    individual or ``(P, G)`` for per-gene step-sizes.  ``objective`` holds the
    normalised objective values the fitness was computed from, which the
    mean-best-function-value metric needs.
    """

    genomes: np.ndarray
    fitness: np.ndarray
    generation: int = 0
    step_sizes: np.ndarray | None = None
    objective: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.fitness = np.asarray(self.fitness, dtype=np.float64)
        if self.genomes.shape[0] != self.fitness.shape[0]:
            raise InvalidArgumentError("genomes and fitness must have the same length")

    @property
    def size(self) -> int:
        return self.fitness.shape[0]

    def __len__(self):
        return self.size

    @property
    def genome_size(self) -> int:
        return self.genomes.shape[1]

    @property
    def best_fitness(self) -> float:
        return float(self.fitness.max())

    @property
    def best_objective(self) -> float | None:
        return None if self.objective is None else float(self.objective.min())

    def take(self, idx) -> "Population":
        idx = np.asarray(idx, dtype=np.int64)
        return Population(
            self.genomes[idx].copy(),
            self.fitness[idx].copy(),
            self.generation,
            None if self.step_sizes is None else self.step_sizes[idx].copy(),
            None if self.objective is None else self.objective[idx].copy(),
        )

    def individual(self, i) -> RealGenome:
        return RealGenome(self.genomes[i].copy(), None if self.step_sizes is None else self.step_sizes[i])

    @staticmethod
    def concat(a: "Population", b: "Population") -> "Population":
        def cat(x, y):
            return None if x is None or y is None else np.concatenate([x, y])

        return Population(
            np.concatenate([a.genomes, b.genomes]),
            np.concatenate([a.fitness, b.fitness]),
            a.generation,
            cat(a.step_sizes, b.step_sizes),
            cat(a.objective, b.objective),
        )

    def copy(self) -> "Population":
        return self.take(np.arange(self.size))

    def equals(self, other: "Population") -> bool:
        same = np.array_equal(self.genomes, other.genomes) and np.array_equal(self.fitness, other.fitness)
        for a, b in ((self.step_sizes, other.step_sizes), (self.objective, other.objective)):
            same = same and ((a is None and b is None) or (a is not None and b is not None and np.array_equal(a, b)))
        return bool(same)
