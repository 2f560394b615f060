"""0-1 knapsack instances: generation, fitness and random repair."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..exceptions import ContractViolation, InvalidArgumentError
from ..validation import check_binary, check_random_state

PROBLEM_CLASS = "knapsack"


@dataclass(eq=False)
class KnapsackInstance:
    """Items as parallel ``weights``/``values`` arrays and a strict weight limit.

    A selection is feasible when its total weight is *strictly* below
    ``weight_limit``.
    """

    weights: np.ndarray
    values: np.ndarray
    weight_limit: float
    seed: int | None = field(default=None)

    problem_class = PROBLEM_CLASS

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        self.weight_limit = float(self.weight_limit)
        if self.weights.ndim != 1 or self.weights.shape != self.values.shape:
            raise InvalidArgumentError("weights and values must be 1-D arrays of equal length")
        if self.weights.size < 1:
            raise InvalidArgumentError("a knapsack instance needs at least one item")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.values))):
            raise InvalidArgumentError("item weights and values must be finite")
        if np.any(self.weights < 0) or np.any(self.values < 0):
            raise InvalidArgumentError("item weights and values must be non-negative")
        if not self.weight_limit > 0:
            raise InvalidArgumentError("weight_limit must be positive")

    @property
    def n_items(self) -> int:
        return self.weights.shape[0]

    genome_size = n_items

    @property
    def items(self):
        return list(zip(self.weights.tolist(), self.values.tolist()))

    def __eq__(self, other):
        if not isinstance(other, KnapsackInstance):
            return NotImplemented
        return (
            self.weight_limit == other.weight_limit
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.values, other.values)
        )

    def total_weight(self, genomes) -> np.ndarray:
        return np.asarray(genomes, dtype=np.float64) @ self.weights

    def is_feasible(self, genomes) -> np.ndarray:
        return self.total_weight(genomes) < self.weight_limit

    def value(self, genomes) -> np.ndarray:
        """Sum of selected values, ignoring the weight limit."""
        return np.asarray(genomes, dtype=np.float64) @ self.values

    def evaluate(self, genomes) -> np.ndarray:
        """Vectorised fitness of a ``(P, n)`` block of feasible genomes."""
        genomes = np.atleast_2d(genomes)
        if genomes.shape[1] != self.n_items:
            raise InvalidArgumentError(f"genome length {genomes.shape[1]} != {self.n_items}")
        if not np.all(self.is_feasible(genomes)):
            raise ContractViolation("infeasible knapsack genome; repair before evaluating")
        return self.value(genomes)


def generate_knapsack_instance(n=100, w_max=10.0, rng=None) -> KnapsackInstance:
    """Draw ``n`` items with weights and values i.i.d. uniform on [0, 1]."""
    if int(n) < 1:
        raise InvalidArgumentError(f"item count must be >= 1, got {n}")
    if not w_max > 0:
        raise InvalidArgumentError(f"w_max must be positive, got {w_max}")
    seed = rng if isinstance(rng, int) else None
    rng = check_random_state(rng)
    table = rng.random((int(n), 2))
    return KnapsackInstance(table[:, 0].copy(), table[:, 1].copy(), float(w_max), seed=seed)


def knapsack_fitness(genome, inst: KnapsackInstance) -> float:
    g = check_binary(genome, inst.n_items)
    if not inst.total_weight(g) < inst.weight_limit:
        raise ContractViolation("genome exceeds the weight limit; call repair_knapsack first")
    return float(inst.value(g))


def repair_knapsack(genome, inst: KnapsackInstance, rng=None) -> np.ndarray:
    """Drop randomly chosen selected items, one at a time, until the selection fits."""
    g = check_binary(genome, inst.n_items).copy()
    return repair_population(g[None, :], inst, rng)[0]


def repair_population(genomes: np.ndarray, inst: KnapsackInstance, rng=None) -> np.ndarray:
    """Row-wise :func:`repair_knapsack` on a ``(P, n)`` array (modified copy returned).

    Removing items one by one in uniformly random order is the same as fixing a
    random order of the selected items up front and removing its shortest
    prefix that restores feasibility.
    """
    rng = check_random_state(rng)
    out = np.array(genomes, dtype=np.int8, copy=True)
    totals = inst.total_weight(out)
    for i in np.flatnonzero(totals >= inst.weight_limit):
        selected = np.flatnonzero(out[i])
        order = rng.permutation(selected)
        remaining = totals[i] - np.cumsum(inst.weights[order])
        k = int(np.argmax(remaining < inst.weight_limit)) + 1
        if remaining[k - 1] >= inst.weight_limit:
            # float drift: the empty selection is always feasible
            k = order.size
        out[i, order[:k]] = 0
    return out
