"""Selection and variation operators for the three baseline EAs.

Batch variants operate on stacked genomes (one row per child) so a whole
generation is a handful of numpy calls.  Each operator draws the same amount of
randomness regardless of outcome, which keeps seeded runs comparable when a
rate changes.
"""
from __future__ import annotations

import numpy as np

from ..exceptions import InvalidArgumentError
from ..validation import check_binary, check_permutation, check_random_state
from .population import Population, RealGenome


def _fitness_of(pop_or_fitness) -> np.ndarray:
    if isinstance(pop_or_fitness, Population):
        return pop_or_fitness.fitness
    return np.asarray(pop_or_fitness, dtype=np.float64)


def _duel(fitness, a, b, coin):
    fa, fb = fitness[a], fitness[b]
    return np.where(fa > fb, a, np.where(fb > fa, b, np.where(coin, a, b)))


def tournament_select(pop, pair_count, rng=None, candidates=None) -> np.ndarray:
    """Binary-tournament parent pairs, shape ``(pair_count, 2)``.

    Each tournament draws two distinct individuals uniformly and keeps the
    fitter one, with ties decided by a fair coin.  The winner of a pair's first
    tournament is excluded from its second tournament only.  ``candidates``
    restricts both tournaments to a subset of population indices.
    """
    fitness = _fitness_of(pop)
    rng = check_random_state(rng)
    pool = np.arange(fitness.shape[0]) if candidates is None else np.asarray(candidates, dtype=np.int64)
    m = pool.shape[0]
    if m < 2:
        raise InvalidArgumentError(f"tournament selection needs at least 2 individuals, got {m}")
    k = int(pair_count)
    f = fitness[pool]

    a = rng.integers(m, size=k)
    b = rng.integers(m - 1, size=k)
    b = b + (b >= a)
    first = _duel(f, a, b, rng.random(k) < 0.5)

    if m == 2:
        second = 1 - first
    else:
        c = rng.integers(m - 1, size=k)
        d = rng.integers(m - 2, size=k)
        d = d + (d >= c)
        # positions in the pool with the first winner removed
        c = c + (c >= first)
        d = d + (d >= first)
        second = _duel(f, c, d, rng.random(k) < 0.5)
    return np.stack([pool[first], pool[second]], axis=1)


def uniform_crossover(p1, p2, crossover_rate, rng=None):
    """Two children from two binary parents (see :func:`uniform_crossover_batch`)."""
    p1, p2 = check_binary(p1), check_binary(p2)
    if p1.shape != p2.shape:
        raise InvalidArgumentError("parents must have equal length")
    c1, c2 = uniform_crossover_batch(p1[None], p2[None], crossover_rate, rng)
    return c1[0], c2[0]


def uniform_crossover_batch(p1, p2, crossover_rate, rng=None):
    """Row-wise uniform crossover; rows skip recombination with prob. ``1 - crossover_rate``."""
    rng = check_random_state(rng)
    p1, p2 = np.asarray(p1), np.asarray(p2)
    if p1.shape != p2.shape:
        raise InvalidArgumentError("parent blocks must have equal shape")
    recombine = rng.random(p1.shape[0]) < crossover_rate
    keep = rng.random(p1.shape) < 0.5
    keep |= ~recombine[:, None]
    return np.where(keep, p1, p2), np.where(keep, p2, p1)


def bitflip_mutation(genome, mutation_rate, rng=None) -> np.ndarray:
    """Flip every bit independently with probability ``mutation_rate``.

    ``genome`` may be a vector or a ``(P, G)`` block; ``mutation_rate`` may be a
    scalar or one rate per row.
    """
    rng = check_random_state(rng)
    g = np.asarray(genome)
    rate = np.asarray(mutation_rate, dtype=np.float64)
    if np.any(rate < 0) or np.any(rate > 1):
        raise InvalidArgumentError("mutation_rate must lie in [0, 1]")
    if g.ndim == 2 and rate.ndim == 1:
        rate = rate[:, None]
    flips = rng.random(g.shape) < rate
    return np.where(flips, 1 - g, g).astype(g.dtype)


def inversion_mutation(perm, mutation_rate, rng=None) -> np.ndarray:
    """With probability ``mutation_rate``, reverse the segment between two random positions."""
    rng = check_random_state(rng)
    p = check_permutation(perm).copy()
    mutate = rng.random() < mutation_rate
    i, j = rng.integers(p.shape[0], size=2)
    if mutate:
        lo, hi = min(i, j), max(i, j)
        p[lo : hi + 1] = p[lo : hi + 1][::-1]
    return p


def inversion_mutation_batch(perms, mutation_rate, rng=None) -> np.ndarray:
    rng = check_random_state(rng)
    out = np.array(perms, copy=True)
    k, n = out.shape
    rate = np.broadcast_to(np.asarray(mutation_rate, dtype=np.float64), (k,))
    mutate = rng.random(k) < rate
    ij = rng.integers(n, size=(k, 2))
    for r in np.flatnonzero(mutate):
        lo, hi = ij[r].min(), ij[r].max()
        out[r, lo : hi + 1] = out[r, lo : hi + 1][::-1]
    return out


def truncation_select_parents(pop, parent_percentage) -> np.ndarray:
    """Indices of the ``ceil(parent_percentage * P)`` fittest individuals (ties: lower index)."""
    fitness = _fitness_of(pop)
    if not 0.0 < parent_percentage <= 1.0:
        raise InvalidArgumentError("parent_percentage must lie in (0, 1]")
    count = int(np.ceil(round(parent_percentage * fitness.shape[0], 9)))
    if count < 1:
        raise InvalidArgumentError("parent selection would be empty")
    order = np.argsort(-fitness, kind="stable")
    return np.sort(order[:count])


def lognormal_multiplier(tau, size, rng):
    """Samples of ``exp(N(0, tau))``; ``tau`` is the standard deviation of the exponent."""
    return np.exp(np.asarray(tau, dtype=np.float64) * rng.standard_normal(size))


def self_adaptive_mutation_batch(
    x,
    steps,
    tau,
    initial_step_size,
    min_step_size,
    rng,
    step_multiplier=None,
):
    """One-step self-adaptive mutation of stacked points.

    ``steps`` is ``(K,)`` (one step-size per row) or ``(K, G)`` (per gene).
    Without ``step_multiplier`` the step-sizes are scaled by a log-normal
    sample governed by ``tau``; with it (shape broadcastable to ``steps``) the
    given multipliers replace the log-normal draw.  New step-sizes are floored
    at ``min_step_size``.  Rows that leave [-1, 1]^G are re-drawn uniformly
    and get ``initial_step_size`` back.
    """
    x = np.asarray(x, dtype=np.float64)
    steps = np.asarray(steps, dtype=np.float64)
    k, g = x.shape
    tau = np.asarray(tau, dtype=np.float64)
    if steps.ndim == 2 and tau.ndim == 1:
        tau = tau[:, None]
    m = lognormal_multiplier(tau, steps.shape, rng)
    if step_multiplier is not None:
        m = np.broadcast_to(np.asarray(step_multiplier, dtype=np.float64), steps.shape)
    new_steps = np.maximum(steps * m, min_step_size)
    scale = new_steps if new_steps.ndim == 2 else new_steps[:, None]
    child = x + scale * rng.standard_normal((k, g))
    fresh = rng.uniform(-1.0, 1.0, size=(k, g))
    out = np.any(np.abs(child) > 1.0, axis=1)
    child[out] = fresh[out]
    new_steps[out] = initial_step_size
    return child, new_steps


def self_adaptive_mutation(g: RealGenome, tau, cfg, rng=None) -> RealGenome:
    rng = check_random_state(rng)
    if not tau > 0:
        raise InvalidArgumentError("strategy parameter must be positive")
    steps = np.atleast_1d(np.asarray(g.step_size, dtype=np.float64))
    per_gene = steps.shape[0] == g.x.shape[0] and np.ndim(g.step_size) == 1
    x, s = self_adaptive_mutation_batch(
        g.x[None], steps[None] if per_gene else steps, tau, cfg.initial_step_size, cfg.min_step_size, rng
    )
    return RealGenome(x[0], s[0] if per_gene else float(s[0]))


def elitism_survivor_selection(parents: Population, offspring: Population, elite_size) -> Population:
    """Keep the ``elite_size`` fittest parents and the best remaining offspring.

    Ties go to the lower index within each group; survivors keep their relative
    order (parents first).
    """
    p = parents.size
    if offspring.size != p:
        raise InvalidArgumentError("parent and offspring populations must have the same size")
    if not 0 <= elite_size <= p:
        raise InvalidArgumentError("elite_size must lie in [0, population_size]")
    elite = np.sort(np.argsort(-parents.fitness, kind="stable")[:elite_size])
    rest = np.sort(np.argsort(-offspring.fitness, kind="stable")[: p - elite_size])
    return Population.concat(parents.take(elite), offspring.take(rest))


def score_survivor_selection(parents: Population, offspring: Population, scores) -> Population:
    """Keep the ``P`` individuals of the joint population with the highest ``scores``."""
    p = parents.size
    joint = Population.concat(parents, offspring)
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape != (joint.size,):
        raise InvalidArgumentError(f"expected {joint.size} survivor scores, got shape {scores.shape}")
    keep = np.sort(np.argsort(-scores, kind="stable")[:p])
    return joint.take(keep)
