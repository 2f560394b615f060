"""Maximum-weight Hamiltonian cycle instances on complete graphs."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..exceptions import InvalidArgumentError
from ..validation import check_permutation, check_random_state, is_permutation

PROBLEM_CLASS = "tsp"


@dataclass(eq=False)
class TspInstance:
    weights: np.ndarray
    seed: int | None = field(default=None)

    problem_class = PROBLEM_CLASS

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 3:
            raise InvalidArgumentError("TSP weights must be an n x n matrix with n >= 3")
        if not np.array_equal(w, w.T) or np.any(np.diag(w) != 0):
            raise InvalidArgumentError("TSP weights must be symmetric with a zero diagonal")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InvalidArgumentError("TSP weights must be finite and non-negative")
        self.weights = w

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    genome_size = n

    def __eq__(self, other):
        if not isinstance(other, TspInstance):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)

    def evaluate(self, perms) -> np.ndarray:
        """Cycle weights of a ``(P, n)`` block of permutations (closing edge included)."""
        perms = np.atleast_2d(np.asarray(perms, dtype=np.int64))
        return self.weights[perms, np.roll(perms, -1, axis=1)].sum(axis=1)


def generate_tsp_instance(n=30, rng=None) -> TspInstance:
    if int(n) < 3:
        raise InvalidArgumentError(f"TSP instances need n >= 3 nodes, got {n}")
    n = int(n)
    seed = rng if isinstance(rng, int) else None
    rng = check_random_state(rng)
    iu = np.triu_indices(n, k=1)
    w = np.zeros((n, n))
    w[iu] = rng.random(iu[0].size)
    return TspInstance(w + w.T, seed=seed)


def tsp_fitness(perm, inst: TspInstance) -> float:
    if not is_permutation(perm, inst.n):
        raise InvalidArgumentError("tsp_fitness expects a permutation of 0..n-1")
    p = check_permutation(perm, inst.n)
    return float(inst.weights[p, np.roll(p, -1)].sum())
