"""Input validation and random-stream helpers.

Every public operation that consumes randomness accepts ``rng`` as either a
``numpy.random.Generator``, an integer seed, or ``None``.  Derived streams are
built from ``numpy.random.SeedSequence`` spawn keys, so the stream a run sees
depends only on the master seed and the run's coordinates, never on the order
in which runs are scheduled.
"""
from __future__ import annotations

import numbers

import numpy as np

from .exceptions import InvalidArgumentError


def check_random_state(rng) -> np.random.Generator:
    """Turn ``rng`` into a ``numpy.random.Generator``."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None or isinstance(rng, (numbers.Integral, np.random.SeedSequence)):
        return np.random.default_rng(rng)
    raise InvalidArgumentError(f"cannot build a random generator from {rng!r}")


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based child stream: same ``(seed, keys)`` always gives the same stream."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.default_rng(ss)


def derive_seed(seed: int, *keys: int) -> int:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def check_binary(genome, length=None) -> np.ndarray:
    g = np.asarray(genome)
    if g.ndim != 1:
        raise InvalidArgumentError(f"binary genome must be 1-D, got shape {g.shape}")
    if length is not None and g.shape[0] != length:
        raise InvalidArgumentError(f"genome length {g.shape[0]} != {length}")
    if g.size and not np.all((g == 0) | (g == 1)):
        raise InvalidArgumentError("binary genome may only contain 0 and 1")
    return g.astype(np.int8, copy=False)


def is_permutation(perm, n=None) -> bool:
    p = np.asarray(perm)
    if p.ndim != 1 or (n is not None and p.shape[0] != n):
        return False
    if not np.issubdtype(p.dtype, np.integer):
        if not np.all(np.equal(np.mod(p, 1), 0)):
            return False
        p = p.astype(np.int64)
    return bool(np.array_equal(np.sort(p), np.arange(p.shape[0])))


def check_permutation(perm, n=None) -> np.ndarray:
    if not is_permutation(perm, n):
        raise InvalidArgumentError(f"not a permutation of 0..{'n-1' if n is None else n - 1}: {perm!r}")
    return np.asarray(perm).astype(np.int64, copy=False)


def check_probability(value, name) -> float:
    v = float(value)
    if not 0.0 <= v <= 1.0:
        raise InvalidArgumentError(f"{name} must lie in [0, 1], got {value!r}")
    return v


def check_positive_int(value, name, minimum=1) -> int:
    if not isinstance(value, numbers.Integral) or value < minimum:
        raise InvalidArgumentError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
