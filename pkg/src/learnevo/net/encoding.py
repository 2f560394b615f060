"""State tensors fed to the network, one channel legend per problem class.

============ ===================================================================
class        channels (last axis)
============ ===================================================================
knapsack     bits, fitness, (T-t)/T, weight limit, item weight, item value
continuous   genome, log fitness, (T-t)/T, step-size
tsp          p1 genome, p2 genome, f1, f2, (T-t)/T, N distances from p1's
             node at (i, j) to every node k, then the same N for p2
============ ===================================================================

Per-individual quantities are replicated along the gene axis and per-item
quantities along the population axis.  TSP states are laid out one row per
parent pair, so they need the ``pairs`` emitted by tournament selection.
"""
from __future__ import annotations

import numpy as np

from ..exceptions import InvalidArgumentError
from ..problems.functions import ObjectiveFunction
from ..problems.knapsack import KnapsackInstance
from ..problems.tsp import TspInstance

CHANNEL_LEGENDS = {
    "knapsack": ("genome", "fitness", "time", "weight_limit", "item_weight", "item_value"),
    "continuous": ("genome", "log_fitness", "time", "step_size"),
    "tsp": ("genome_1", "genome_2", "fitness_1", "fitness_2", "time", "distances_1", "distances_2"),
}


def n_channels(problem) -> int:
    if isinstance(problem, KnapsackInstance):
        return 6
    if isinstance(problem, ObjectiveFunction):
        return 4
    if isinstance(problem, TspInstance):
        return 5 + 2 * problem.n
    raise InvalidArgumentError(f"no state encoding for {type(problem).__name__}")


def time_encoding(t: int, T: int) -> float:
    if not 0 <= t < T:
        raise InvalidArgumentError(f"generation t={t} outside [0, T={T})")
    return (T - t) / T


def encode_state(pop, problem, t: int, T: int, pairs=None, fitness=None) -> np.ndarray:
    """Encode ``pop`` at generation ``t`` of a ``T``-generation run as ``(P, G, C)``.

    ``fitness`` overrides ``pop.fitness`` (used for unrepaired knapsack
    offspring, whose fitness is their plain value sum).
    """
    tau = time_encoding(t, T)
    genomes = np.asarray(pop.genomes)
    f = np.asarray(pop.fitness if fitness is None else fitness, dtype=np.float64)
    p, g = genomes.shape

    if isinstance(problem, KnapsackInstance):
        if g != problem.n_items:
            raise InvalidArgumentError("genome length does not match the instance")
        out = np.empty((p, g, 6))
        out[..., 0] = genomes
        out[..., 1] = f[:, None]
        out[..., 2] = tau
        out[..., 3] = problem.weight_limit
        out[..., 4] = problem.weights[None, :]
        out[..., 5] = problem.values[None, :]
        return out

    if isinstance(problem, ObjectiveFunction):
        if pop.step_sizes is None:
            raise InvalidArgumentError("continuous populations need step-sizes")
        steps = np.asarray(pop.step_sizes, dtype=np.float64)
        out = np.empty((p, g, 4))
        out[..., 0] = genomes
        out[..., 1] = np.log(f)[:, None]
        out[..., 2] = tau
        out[..., 3] = steps if steps.ndim == 2 else steps[:, None]
        return out

    if isinstance(problem, TspInstance):
        if pairs is None:
            raise InvalidArgumentError("TSP states are encoded from parent pairs")
        pairs = np.asarray(pairs, dtype=np.int64)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise InvalidArgumentError("pairs must have shape (K, 2)")
        n = problem.n
        g1, g2 = genomes[pairs[:, 0]], genomes[pairs[:, 1]]
        k = pairs.shape[0]
        out = np.empty((k, n, 5 + 2 * n))
        out[..., 0] = g1
        out[..., 1] = g2
        out[..., 2] = f[pairs[:, 0]][:, None]
        out[..., 3] = f[pairs[:, 1]][:, None]
        out[..., 4] = tau
        out[..., 5 : 5 + n] = problem.weights[g1]
        out[..., 5 + n :] = problem.weights[g2]
        return out

    raise InvalidArgumentError(f"no state encoding for {type(problem).__name__}")
